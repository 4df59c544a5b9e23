use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use volsent::garch::{simulate, GarchParams};
use volsent_cli::fixture::{business_days, generate, FixtureSpec};

fn volsent(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volsent"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Project {
    dir: tempfile::TempDir,
}

impl Project {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("volsent.toml"), config).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }

    fn run(&self, args: &[&str]) -> Output {
        volsent(args, &self.path("volsent.toml"))
    }
}

const VOL_ONLY: &str = "seed = 3
[paths]
prices = \"prices.csv\"
output = \"out\"
[split]
train_fraction = 0.7
[models]
lstm_sentiment = false
lstm_sentiment_shifted = false
[lstm]
hidden = 4
epochs = 3
";

fn small_prices(days: usize) -> String {
    generate(&FixtureSpec { days, ..Default::default() }).prices_csv
}

#[test]
fn bundled_fixture_matches_generator() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let f = generate(&FixtureSpec::default());
    assert_eq!(fs::read_to_string(dir.join("prices.csv")).unwrap(), f.prices_csv);
    assert_eq!(fs::read_to_string(dir.join("headlines.csv")).unwrap(), f.headlines_csv);
}

#[test]
fn missing_price_file_is_a_data_error() {
    let p = Project::new(VOL_ONLY);
    let o = p.run(&["ingest"]);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr(&o);
    assert!(e.starts_with("error[data]:") && e.contains("MissingInput"), "{e}");
}

#[test]
fn config_errors_exit_two() {
    for cfg in [
        format!("{VOL_ONLY}[svr]\nkernel = \"rbf\"\n"),
        VOL_ONLY.replace("lstm_sentiment = false\n", ""),
        VOL_ONLY.replace("train_fraction = 0.7", "train_fraction = 1.5"),
    ] {
        let p = Project::new(&cfg);
        p.write("prices.csv", &small_prices(60));
        let o = p.run(&["ingest"]);
        assert_eq!(o.status.code(), Some(2), "{cfg}");
        assert!(stderr(&o).starts_with("error[config]:"), "{}", stderr(&o));
    }
    let p = Project::new(VOL_ONLY);
    assert_eq!(volsent(&["ingest"], &p.path("absent.toml")).status.code(), Some(2));
    assert_eq!(p.run(&["bogus"]).status.code(), Some(2));
}

#[test]
fn forecast_writes_test_length_files_and_evaluate_skips_missing() {
    let p = Project::new(VOL_ONLY);
    p.write("prices.csv", &small_prices(120));
    for stage in ["ingest", "forecast", "evaluate", "plot"] {
        let o = p.run(&[stage]);
        assert!(o.status.success(), "{stage}: {}", stderr(&o));
    }
    let n_vol = fs::read_to_string(p.path("out/volatility.csv")).unwrap().lines().count() - 1;
    let n_test = n_vol - (0.7 * n_vol as f64).floor() as usize;
    for slug in ["garch", "svr", "lstm"] {
        let text = fs::read_to_string(p.path(&format!("out/forecast_{slug}.csv"))).unwrap();
        assert_eq!(text.lines().next(), Some("date,predicted,actual"));
        assert_eq!(text.lines().count() - 1, n_test, "{slug}");
        let plot = fs::read_to_string(p.path(&format!("out/plot_{slug}.csv"))).unwrap();
        assert_eq!(plot.lines().next(), Some("date,actual,predicted"));
        assert!(p.path(&format!("out/plot_{slug}.svg")).is_file());
    }
    let report = fs::read_to_string(p.path("out/report.txt")).unwrap();
    assert_eq!(report.lines().count(), 4);

    fs::remove_file(p.path("out/forecast_svr.csv")).unwrap();
    let o = p.run(&["evaluate"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(p.path("out/report.csv")).unwrap();
    assert!(csv.contains("SVR,SKIPPED,SKIPPED,SKIPPED,SKIPPED"), "{csv}");
}

#[test]
fn perfect_forecasts_score_zero() {
    let p = Project::new(&VOL_ONLY.replace("[models]\n", "[models]\nsvr = false\nlstm = false\n"));
    fs::create_dir_all(p.path("out")).unwrap();
    let rows: String = (1..=8).map(|i| format!("2015-01-{i:02},{v:e},{v:e}\n", v = i as f64 * 1e-4)).collect();
    p.write("out/forecast_garch.csv", &format!("date,predicted,actual\n{rows}"));
    let o = p.run(&["evaluate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(p.path("out/report.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("\"GARCH(1,1)\",0e0,inf,0e0,8"));
}

#[test]
fn plotting_an_empty_forecast_fails() {
    let p = Project::new(VOL_ONLY);
    fs::create_dir_all(p.path("out")).unwrap();
    p.write("out/forecast_lstm.csv", "date,predicted,actual\n");
    let o = p.run(&["plot"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("EmptyInput"));
}

#[test]
fn ingest_is_idempotent_and_keeps_unmatched_headlines() {
    let cfg = VOL_ONLY.replace("output = \"out\"", "headlines = \"headlines.csv\"\noutput = \"out\"");
    let p = Project::new(&cfg);
    let f = generate(&FixtureSpec { days: 40, ..Default::default() });
    p.write("prices.csv", &f.prices_csv);
    p.write("headlines.csv", &format!("{}2030-01-02,Stocks rally on jobs report\n", f.headlines_csv));
    assert!(p.run(&["ingest"]).status.success());
    let first = fs::read(p.path("out/headlines_encoded.csv")).unwrap();
    let vocab = fs::read(p.path("out/vocab.tsv")).unwrap();
    assert!(p.run(&["ingest"]).status.success());
    assert_eq!(fs::read(p.path("out/headlines_encoded.csv")).unwrap(), first);
    assert_eq!(fs::read(p.path("out/vocab.tsv")).unwrap(), vocab);
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().count(), 1 + 80 + 1);
    // no later close, so unlabeled
    assert!(text.lines().last().unwrap().starts_with("2030-01-02,,"));
}

#[test]
fn single_class_corpus_is_rejected() {
    let cfg = VOL_ONLY
        .replace("output = \"out\"", "headlines = \"headlines.csv\"\noutput = \"out\"")
        .replace("lstm_sentiment = false\n", "");
    let p = Project::new(&cfg);
    let dates = business_days(chrono::NaiveDate::from_ymd_opt(2010, 1, 4).unwrap(), 30);
    let prices: String = dates.iter().enumerate().map(|(i, d)| format!("{d},{}\n", 100.0 + i as f64)).collect();
    let heads: String = dates.iter().map(|d| format!("{d},Stocks rally again\n")).collect();
    p.write("prices.csv", &format!("date,close\n{prices}"));
    p.write("headlines.csv", &format!("date,headline\n{heads}"));
    assert!(p.run(&["ingest"]).status.success());
    let o = p.run(&["train-sentiment"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("SingleClassCorpus"), "{}", stderr(&o));
}

#[test]
fn garch_only_run_recovers_simulated_parameters() {
    let truth = GarchParams::garch11(0.05, 0.10, 0.85).unwrap();
    let eps = simulate(&truth, 5100, 2024).unwrap();
    let dates = business_days(chrono::NaiveDate::from_ymd_opt(1990, 1, 1).unwrap(), eps.len() + 1);
    let mut log_p = 0.0;
    let mut prices = format!("date,close\n{},{:e}\n", dates[0], 1.0);
    for (d, e) in dates[1..].iter().zip(&eps) {
        log_p += e;
        prices.push_str(&format!("{d},{:e}\n", log_p.exp()));
    }
    let cfg = format!(
        "[paths]\nprices = \"prices.csv\"\noutput = \"out\"\n[split]\nboundary_date = \"{}\"\n[models]\nsvr = false\nlstm = false\nlstm_sentiment = false\nlstm_sentiment_shifted = false\n",
        dates[5000]
    );
    let p = Project::new(&cfg);
    p.write("prices.csv", &prices);
    for stage in ["ingest", "forecast"] {
        let o = p.run(&[stage]);
        assert!(o.status.success(), "{stage}: {}", stderr(&o));
    }
    let (fit, _) = GarchParams::from_kv_str(&fs::read_to_string(p.path("out/garch_params.txt")).unwrap()).unwrap();
    assert!((fit.alpha0 - 0.05).abs() <= 0.05, "{fit:?}");
    assert!((fit.alphas[0] - 0.10).abs() <= 0.05, "{fit:?}");
    assert!((fit.betas[0] - 0.85).abs() <= 0.05, "{fit:?}");
    let rows = fs::read_to_string(p.path("out/forecast_garch.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows, 100);
}

#[test]
fn seed_and_out_flags_override_config() {
    let p = Project::new(VOL_ONLY);
    let cli = <volsent_cli::Cli as clap::Parser>::try_parse_from([
        "volsent",
        "ingest",
        "--config",
        p.path("volsent.toml").to_str().unwrap(),
        "--seed",
        "99",
        "--out",
        "/tmp/elsewhere",
    ])
    .unwrap();
    let cfg = volsent_cli::load_config(&cli).unwrap();
    assert_eq!(cfg.seed, 99);
    assert_eq!(cfg.output, PathBuf::from("/tmp/elsewhere"));
}

#[test]
fn train_sentiment_on_marked_corpus() {
    let cfg = VOL_ONLY
        .replace("output = \"out\"", "headlines = \"headlines.csv\"\noutput = \"out\"")
        .replace("lstm_sentiment = false\n", "")
        + "[word2vec]\nepochs = 10\n[cnn]\nepochs = 10\n";
    let p = Project::new(&cfg);
    let f = generate(&FixtureSpec { days: 200, marker_rate: 1.0, ..Default::default() });
    p.write("prices.csv", &f.prices_csv);
    p.write("headlines.csv", &f.headlines_csv);
    assert!(p.run(&["ingest"]).status.success());
    let o = p.run(&["train-sentiment"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let metrics = fs::read_to_string(p.path("out/classifier_metrics.txt")).unwrap();
    let f_row: Vec<&str> = metrics.lines().find(|l| l.starts_with("F-score")).unwrap().split_whitespace().collect();
    let cnn_f: f64 = f_row[1].parse().unwrap();
    assert!(cnn_f >= 0.95, "{metrics}");
    let sentiment = fs::read(p.path("out/sentiment.csv")).unwrap();
    assert!(p.run(&["train-sentiment"]).status.success());
    assert_eq!(fs::read(p.path("out/sentiment.csv")).unwrap(), sentiment);
}
