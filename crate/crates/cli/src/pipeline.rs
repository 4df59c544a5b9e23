//! Pipeline stages. Each stage reads the config plus the artifacts of the
//! stages before it and writes its own files into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use volsent::cnn_sentiment::{self, metrics_report, SentimentSeries};
use volsent::eval::{evaluate_forecast, report_csv, report_table, ReportRow};
use volsent::garch::{self, FitOptions, GarchFit, GarchOrder};
use volsent::lstm::{self, build_features, Dataset, FeatureSpec, LstmConfig, LstmWeights, MinMaxScaler};
use volsent::marketdata::{
    align_calendars, chronological_split, load_headlines, load_prices, log_returns, squared_log_returns, PriceFormat,
    ReturnSeries, SplitSpec, VolatilitySeries,
};
use volsent::svr::{self, SvrModel};
use volsent::textprep::{self, build_vocabulary, encode, EncodedDoc, Vocabulary};
use volsent::word2vec::train_embeddings;

use crate::artifacts::{self as art, Forecast};
use crate::config::{RunConfig, SvrSection};
use crate::error::{io_error, CliError, Result};
use crate::plot;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Garch,
    Svr,
    Lstm,
    LstmSentiment,
    LstmSentimentShifted,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] =
        [ModelKind::Garch, ModelKind::Svr, ModelKind::Lstm, ModelKind::LstmSentiment, ModelKind::LstmSentimentShifted];

    pub fn slug(self) -> &'static str {
        match self {
            ModelKind::Garch => "garch",
            ModelKind::Svr => "svr",
            ModelKind::Lstm => "lstm",
            ModelKind::LstmSentiment => "lstm_sentiment",
            ModelKind::LstmSentimentShifted => "lstm_sentiment_shifted",
        }
    }

    /// Row label in the evaluation table.
    pub fn display_name(self, cfg: &RunConfig) -> String {
        match self {
            ModelKind::Garch => format!("GARCH({},{})", cfg.garch.p, cfg.garch.q),
            ModelKind::Svr => "SVR".into(),
            ModelKind::Lstm => "LSTM".into(),
            ModelKind::LstmSentiment => "LSTM with sentiment".into(),
            ModelKind::LstmSentimentShifted => "LSTM with sentiment shifted".into(),
        }
    }

    pub fn enabled(self, cfg: &RunConfig) -> bool {
        let m = &cfg.models;
        match self {
            ModelKind::Garch => m.garch,
            ModelKind::Svr => m.svr,
            ModelKind::Lstm => m.lstm,
            ModelKind::LstmSentiment => m.lstm_sentiment,
            ModelKind::LstmSentimentShifted => m.lstm_sentiment_shifted,
        }
    }

    fn feature_spec(self) -> Option<FeatureSpec> {
        match self {
            ModelKind::Lstm => Some(FeatureSpec::VOL_ONLY),
            ModelKind::LstmSentiment => Some(FeatureSpec::WITH_SENTIMENT),
            ModelKind::LstmSentimentShifted => Some(FeatureSpec::SHIFTED),
            _ => None,
        }
    }

    pub fn forecast_path(self, out: &Path) -> PathBuf {
        out.join(format!("forecast_{}.csv", self.slug()))
    }
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output.join(name)
}

fn log(msg: impl AsRef<str>) {
    println!("{}", msg.as_ref());
}

/// Last date on the training side of `vol` under `split`.
pub fn last_train_date(vol: &VolatilitySeries, split: &SplitSpec) -> Result<NaiveDate> {
    let (train, _) = chronological_split(vol, split)?;
    Ok(*train.dates().last().expect("nonempty training side"))
}

/// Next-day direction of the close: 1 when the first close after `date`
/// exceeds the close on or before it.
fn direction_label(prices: &volsent::marketdata::PriceSeries, date: NaiveDate) -> Option<u8> {
    let base = prices.close_on_or_before(date)?;
    let next = prices.close_after(date)?;
    Some(u8::from(next > base))
}

pub fn ingest(cfg: &RunConfig) -> Result<()> {
    cfg.check_inputs()?;
    let prices = load_prices(&cfg.prices, PriceFormat::DateClose).map_err(|e| CliError::from(e).in_file(&cfg.prices))?;
    let vol = squared_log_returns(&prices)?;
    let rets = log_returns(&prices)?;
    chronological_split(&vol, &cfg.split)?;
    art::write(&out(cfg, art::VOLATILITY), &art::volatility_csv(&vol))?;
    art::write(&out(cfg, art::RETURNS), &art::returns_csv(&rets))?;
    log(format!("ingest: {} volatility observations", vol.len()));

    let Some(hpath) = &cfg.headlines else { return Ok(()) };
    let headlines = load_headlines(hpath).map_err(|e| CliError::from(e).in_file(hpath))?;
    let stoplist = match &cfg.stopwords {
        Some(p) => textprep::parse_stopwords(&fs::read_to_string(p).map_err(|e| io_error(p, e))?),
        None => textprep::default_stopwords(),
    };
    let tokens: Vec<Vec<String>> = headlines.iter().map(|h| textprep::preprocess(&h.text, &stoplist)).collect();
    let vocab = build_vocabulary(&tokens, cfg.text.min_count)?;
    let docs: Vec<EncodedDoc> = headlines
        .iter()
        .zip(&tokens)
        .map(|(h, t)| EncodedDoc {
            date: h.date,
            token_ids: encode(t, &vocab, cfg.text.max_len),
            label: direction_label(&prices, h.date),
        })
        .collect();
    art::write(&out(cfg, art::VOCAB), &vocab.to_tsv())?;
    art::write(&out(cfg, art::HEADLINES), &art::encoded_csv(&docs))?;
    log(format!("ingest: {} headlines, vocabulary of {}", docs.len(), vocab.len()));
    Ok(())
}

pub fn train_sentiment(cfg: &RunConfig) -> Result<()> {
    if cfg.headlines.is_none() {
        return Err(CliError::config("train-sentiment needs paths.headlines"));
    }
    let docs = art::read_encoded(&out(cfg, art::HEADLINES))?;
    let vocab_path = out(cfg, art::VOCAB);
    let vocab = Vocabulary::from_tsv(&art::read(&vocab_path, "ingest")?).map_err(|e| CliError::from(e).in_file(&vocab_path))?;
    let vol = art::read_volatility(&out(cfg, art::VOLATILITY))?;
    let last = last_train_date(&vol, &cfg.split)?;

    let content: Vec<Vec<usize>> = docs.iter().map(|d| d.content().to_vec()).collect();
    let emb = train_embeddings(&content, vocab.len(), &cfg.w2v_config())?.embeddings;
    let (train_docs, test_docs): (Vec<EncodedDoc>, Vec<EncodedDoc>) =
        docs.iter().filter(|d| d.label.is_some()).cloned().partition(|d| d.date <= last);

    let cnn = cnn_sentiment::train(&train_docs, &emb, &cfg.cnn_config())?;
    let cnn_metrics = cnn_sentiment::evaluate(&cnn.weights, &test_docs, &emb, cfg.cnn.threshold)?;
    let logit = cnn_sentiment::logistic_baseline(&train_docs, &emb, cfg.cnn.logistic_lr, cfg.cnn.logistic_epochs, cfg.seed)?;
    let logit_metrics = cnn_sentiment::evaluate(&logit, &test_docs, &emb, cfg.cnn.threshold)?;
    let sentiment = cnn_sentiment::daily_sentiment(&cnn.weights, &cnn_sentiment::group_by_date(&docs), &emb)?;

    art::write(&out(cfg, art::EMBEDDINGS), &emb.to_text(&vocab))?;
    art::write(&out(cfg, art::CNN_WEIGHTS), &cnn.weights.to_text())?;
    art::write(&out(cfg, art::SENTIMENT), &sentiment.to_csv())?;
    art::write(
        &out(cfg, art::CLASSIFIER_METRICS),
        &metrics_report(&[("CNN", &cnn_metrics), ("Logistic Regression", &logit_metrics)]),
    )?;
    log(format!(
        "train-sentiment: CNN F-score {:.3} on {} held-out headlines, {} sentiment days",
        cnn_metrics.f_score,
        test_docs.len(),
        sentiment.len()
    ));
    Ok(())
}

fn split_dated(dates: &[NaiveDate], values: &[f64], last: NaiveDate) -> (Vec<f64>, Vec<f64>) {
    let k = dates.partition_point(|d| *d <= last);
    (values[..k].to_vec(), values[k..].to_vec())
}

/// GARCH fitted by maximum likelihood on demeaned training returns; the test
/// forecasts are rolling one-step conditional variances.
pub fn garch_forecast(
    returns: &ReturnSeries,
    vol: &VolatilitySeries,
    last_train: NaiveDate,
    order: GarchOrder,
) -> Result<(Forecast, GarchFit)> {
    if returns.dates != vol.dates() {
        return Err(CliError::data("return and volatility calendars differ"));
    }
    let (train, test) = split_dated(&returns.dates, &returns.values, last_train);
    let mean = train.iter().sum::<f64>() / train.len().max(1) as f64;
    let train: Vec<f64> = train.iter().map(|r| r - mean).collect();
    let test: Vec<f64> = test.iter().map(|r| r - mean).collect();
    let fit = garch::fit_mle(&train, order, &FitOptions::default())?;
    let predicted = garch::rolling_forecasts(&train, &test, &fit.params)?;
    let k = train.len();
    let f = Forecast { dates: vol.dates()[k..].to_vec(), predicted, actual: vol.values()[k..].to_vec() };
    Ok((f, fit))
}

/// SVR on lagged volatility, min-max scaled with training-side statistics.
pub fn svr_forecast(vol: &VolatilitySeries, last_train: NaiveDate, opts: &SvrSection) -> Result<(Forecast, SvrModel)> {
    let k = vol.dates().partition_point(|d| *d <= last_train);
    let scaler = MinMaxScaler::fit(&vol.values()[..k]);
    let scaled: Vec<f64> = vol.values().iter().map(|v| scaler.transform(*v)).collect();
    let (xs, ys) = svr::lagged_features(&scaled, opts.lags);
    if k <= opts.lags || xs.len() + opts.lags <= k {
        return Err(CliError::data(format!("SVR needs more than {} training observations and a test side", opts.lags)));
    }
    // sample i targets index i + lags
    let n_train = k - opts.lags;
    let hyper = if opts.grid_search {
        svr::grid_search_cv(&xs[..n_train], &ys[..n_train], &opts.grid())?.0
    } else {
        opts.hyper()
    };
    let model = svr::fit(&xs[..n_train], &ys[..n_train], &hyper)?;
    let predicted = model.predict_many(&xs[n_train..])?.into_iter().map(|y| scaler.inverse(y)).collect();
    let f = Forecast { dates: vol.dates()[k..].to_vec(), predicted, actual: vol.values()[k..].to_vec() };
    Ok((f, model))
}

fn scale_dataset(d: &Dataset, s: &MinMaxScaler) -> Dataset {
    let mut d = d.clone();
    for sample in &mut d.samples {
        for row in &mut sample.window {
            row[0] = s.transform(row[0]);
        }
        sample.target = s.transform(sample.target);
    }
    d
}

/// LSTM variant trained on samples whose target date is on or before
/// `last_train`. Volatility inputs and targets are min-max scaled with the
/// training targets' range; forecasts are mapped back to raw units.
pub fn lstm_forecast(
    vol: &VolatilitySeries,
    sentiment: Option<&SentimentSeries>,
    spec: FeatureSpec,
    last_train: NaiveDate,
    cfg: &LstmConfig,
) -> Result<(Forecast, LstmWeights)> {
    let (vol, sent) = match (spec.use_sentiment, sentiment) {
        (true, Some(s)) => {
            let (v, s) = align_calendars(vol, s)?;
            (v, Some(s))
        }
        (true, None) => return Err(CliError::config("sentiment features need a sentiment series")),
        (false, _) => (vol.clone(), None),
    };
    let data = build_features(&vol, sent.as_ref(), spec, cfg.lookback)?;
    let (train, test) = data.split_at_date(last_train);
    if train.is_empty() || test.is_empty() {
        return Err(CliError::data(format!(
            "LSTM split leaves {} training and {} test samples",
            train.len(),
            test.len()
        )));
    }
    let scaler = MinMaxScaler::fit(&train.targets());
    let trained = lstm::train(&scale_dataset(&train, &scaler), cfg)?;
    let predicted =
        lstm::forecast(&trained.weights, &scale_dataset(&test, &scaler))?.into_iter().map(|y| scaler.inverse(y).max(0.0)).collect();
    let f = Forecast { dates: test.dates(), predicted, actual: test.targets() };
    Ok((f, trained.weights))
}

struct ModelRun {
    forecast: Forecast,
    params_file: String,
    params: String,
}

fn run_model(
    kind: ModelKind,
    cfg: &RunConfig,
    vol: &VolatilitySeries,
    returns: &ReturnSeries,
    sentiment: Option<&SentimentSeries>,
    last: NaiveDate,
) -> Result<ModelRun> {
    let slug = kind.slug();
    match kind {
        ModelKind::Garch => {
            let (f, fit) = garch_forecast(returns, vol, last, cfg.garch_order())?;
            Ok(ModelRun { forecast: f, params_file: "garch_params.txt".into(), params: fit.params.to_kv_string(Some(fit.log_likelihood)) })
        }
        ModelKind::Svr => {
            let (f, m) = svr_forecast(vol, last, &cfg.svr)?;
            Ok(ModelRun { forecast: f, params_file: "svr_model.txt".into(), params: m.to_text() })
        }
        _ => {
            let spec = kind.feature_spec().expect("LSTM variant");
            let (f, w) = lstm_forecast(vol, sentiment, spec, last, &cfg.lstm_config(spec.input_dim()))?;
            Ok(ModelRun { forecast: f, params_file: format!("{slug}_weights.txt"), params: w.to_text() })
        }
    }
}

/// Fits every enabled model concurrently. A model that fails is reported and
/// skipped; the stage fails only when every enabled model failed.
pub fn forecast(cfg: &RunConfig) -> Result<()> {
    let vol = art::read_volatility(&out(cfg, art::VOLATILITY))?;
    let returns = art::read_returns(&out(cfg, art::RETURNS))?;
    let last = last_train_date(&vol, &cfg.split)?;
    let sentiment = if cfg.models.any_sentiment() {
        let p = out(cfg, art::SENTIMENT);
        Some(SentimentSeries::from_csv(&art::read(&p, "train-sentiment")?).map_err(|e| CliError::from(e).in_file(&p))?)
    } else {
        None
    };
    let kinds: Vec<ModelKind> = ModelKind::ALL.into_iter().filter(|k| k.enabled(cfg)).collect();
    let results: Vec<Result<ModelRun>> = std::thread::scope(|s| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&k| {
                let (vol, returns, sentiment) = (&vol, &returns, sentiment.as_ref());
                s.spawn(move || run_model(k, cfg, vol, returns, sentiment, last))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(CliError::numeric("model thread panicked")))).collect()
    });

    let mut first_err = None;
    let mut ok = 0;
    for (kind, res) in kinds.iter().zip(results) {
        match res {
            Ok(run) => {
                art::write(&kind.forecast_path(&cfg.output), &run.forecast.to_csv())?;
                art::write(&out(cfg, &run.params_file), &run.params)?;
                log(format!("forecast: {} -> {} test rows", kind.display_name(cfg), run.forecast.len()));
                ok += 1;
            }
            Err(e) => {
                eprintln!("warning: {} skipped: {}", kind.display_name(cfg), e.diagnostic());
                let _ = fs::remove_file(kind.forecast_path(&cfg.output));
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) if ok == 0 => Err(e),
        _ => Ok(()),
    }
}

/// Scores every enabled model's forecast file; missing files become
/// `SKIPPED` rows.
pub fn evaluate_rows(cfg: &RunConfig) -> Vec<ReportRow> {
    ModelKind::ALL
        .into_iter()
        .filter(|k| k.enabled(cfg))
        .map(|k| {
            let name = k.display_name(cfg);
            let path = k.forecast_path(&cfg.output);
            if !path.is_file() {
                return ReportRow::Skipped { model_name: name, reason: format!("{} not found", path.display()) };
            }
            let scored = Forecast::read(&path).and_then(|f| Ok(evaluate_forecast(&name, &f.actual, &f.predicted)?));
            match scored {
                Ok(r) => ReportRow::Scored(r),
                Err(e) => ReportRow::Skipped { model_name: name, reason: e.message },
            }
        })
        .collect()
}

pub fn evaluate(cfg: &RunConfig) -> Result<()> {
    let rows = evaluate_rows(cfg);
    for row in &rows {
        if let ReportRow::Skipped { model_name, reason } = row {
            eprintln!("warning: {model_name} skipped: {reason}");
        }
    }
    let table = report_table(&rows);
    art::write(&out(cfg, art::REPORT_CSV), &report_csv(&rows))?;
    art::write(&out(cfg, art::REPORT_TABLE), &table)?;
    print!("{table}");
    Ok(())
}

pub fn plot(cfg: &RunConfig) -> Result<()> {
    let mut any = false;
    for kind in ModelKind::ALL.into_iter().filter(|k| k.enabled(cfg)) {
        let path = kind.forecast_path(&cfg.output);
        if !path.is_file() {
            continue;
        }
        let f = Forecast::read(&path)?;
        if f.is_empty() {
            return Err(CliError::data("EmptyInput: forecast file has no rows").in_file(&path));
        }
        let title = kind.display_name(cfg);
        art::write(&out(cfg, &format!("plot_{}.csv", kind.slug())), &plot::overlay_csv(&f))?;
        art::write(&out(cfg, &format!("plot_{}.svg", kind.slug())), &plot::overlay_svg(&f, &title))?;
        any = true;
    }
    if !any {
        return Err(CliError::data(format!("MissingInput: no forecast files in {} (run `forecast` first)", cfg.output.display())));
    }
    log("plot: done");
    Ok(())
}

pub fn all(cfg: &RunConfig) -> Result<()> {
    ingest(cfg)?;
    if cfg.models.any_sentiment() {
        train_sentiment(cfg)?;
    }
    forecast(cfg)?;
    evaluate(cfg)?;
    plot(cfg)
}
