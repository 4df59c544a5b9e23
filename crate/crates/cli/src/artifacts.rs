//! Intermediate files written to the output directory.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use volsent::marketdata::{ReturnSeries, VolatilitySeries};
use volsent::textprep::EncodedDoc;

use crate::error::{io_error, CliError, Result};

pub const VOLATILITY: &str = "volatility.csv";
pub const RETURNS: &str = "returns.csv";
pub const VOCAB: &str = "vocab.tsv";
pub const HEADLINES: &str = "headlines_encoded.csv";
pub const EMBEDDINGS: &str = "embeddings.txt";
pub const CNN_WEIGHTS: &str = "cnn_weights.txt";
pub const SENTIMENT: &str = "sentiment.csv";
pub const CLASSIFIER_METRICS: &str = "classifier_metrics.txt";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TABLE: &str = "report.txt";

pub fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

/// Reads an artifact produced by an earlier stage.
pub fn read(path: &Path, stage: &str) -> Result<String> {
    if !path.is_file() {
        return Err(CliError::missing_input(&format!("artifact (run `{stage}` first)"), path));
    }
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn records(text: &str, header: &[&str], path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let got = rdr.headers().map_err(|e| CliError::data(e.to_string()).in_file(path))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(CliError::data(format!("expected header {}", header.join(","))).in_file(path));
    }
    rdr.records()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| CliError::data(format!("line {}: {e}", i + 2)).in_file(path)))
        .collect()
}

fn parse_date(s: &str, line: usize, path: &Path) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| CliError::data(format!("line {line}: bad date {s:?}: {e}")).in_file(path))
}

fn parse_f64(s: &str, line: usize, path: &Path) -> Result<f64> {
    s.parse().map_err(|e| CliError::data(format!("line {line}: bad number {s:?}: {e}")).in_file(path))
}

fn dated_csv(header: &str, dates: &[NaiveDate], values: &[f64]) -> String {
    let mut s = format!("date,{header}\n");
    for (d, v) in dates.iter().zip(values) {
        s.push_str(&format!("{d},{v:e}\n"));
    }
    s
}

fn read_dated(path: &Path, column: &str, stage: &str) -> Result<(Vec<NaiveDate>, Vec<f64>)> {
    let text = read(path, stage)?;
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for (i, r) in records(&text, &["date", column], path)?.iter().enumerate() {
        dates.push(parse_date(&r[0], i + 2, path)?);
        values.push(parse_f64(&r[1], i + 2, path)?);
    }
    Ok((dates, values))
}

pub fn volatility_csv(v: &VolatilitySeries) -> String {
    dated_csv("volatility", v.dates(), v.values())
}

pub fn read_volatility(path: &Path) -> Result<VolatilitySeries> {
    let (d, v) = read_dated(path, "volatility", "ingest")?;
    VolatilitySeries::new(d, v).map_err(|e| CliError::from(e).in_file(path))
}

pub fn returns_csv(r: &ReturnSeries) -> String {
    dated_csv("log_return", &r.dates, &r.values)
}

pub fn read_returns(path: &Path) -> Result<ReturnSeries> {
    let (dates, values) = read_dated(path, "log_return", "ingest")?;
    Ok(ReturnSeries { dates, values })
}

/// `date,label,token_ids`; an empty label marks an unlabeled headline and
/// ids are space separated.
pub fn encoded_csv(docs: &[EncodedDoc]) -> String {
    let mut s = String::from("date,label,token_ids\n");
    for d in docs {
        let label = d.label.map(|l| l.to_string()).unwrap_or_default();
        let ids: Vec<String> = d.token_ids.iter().map(usize::to_string).collect();
        s.push_str(&format!("{},{label},{}\n", d.date, ids.join(" ")));
    }
    s
}

pub fn read_encoded(path: &Path) -> Result<Vec<EncodedDoc>> {
    let text = read(path, "ingest")?;
    let mut out = Vec::new();
    for (i, r) in records(&text, &["date", "label", "token_ids"], path)?.iter().enumerate() {
        let line = i + 2;
        let bad = |what: &str| CliError::data(format!("line {line}: bad {what}")).in_file(path);
        let label = match &r[1] {
            "" => None,
            "0" => Some(0),
            "1" => Some(1),
            _ => return Err(bad("label")),
        };
        let token_ids = r[2].split_whitespace().map(|t| t.parse().map_err(|_| bad("token id"))).collect::<Result<_>>()?;
        out.push(EncodedDoc { date: parse_date(&r[0], line, path)?, token_ids, label });
    }
    Ok(out)
}

/// Test-period forecasts of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub dates: Vec<NaiveDate>,
    pub predicted: Vec<f64>,
    pub actual: Vec<f64>,
}

impl Forecast {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("date,predicted,actual\n");
        for ((d, p), a) in self.dates.iter().zip(&self.predicted).zip(&self.actual) {
            s.push_str(&format!("{d},{p:e},{a:e}\n"));
        }
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = read(path, "forecast")?;
        let mut f = Forecast { dates: Vec::new(), predicted: Vec::new(), actual: Vec::new() };
        for (i, r) in records(&text, &["date", "predicted", "actual"], path)?.iter().enumerate() {
            f.dates.push(parse_date(&r[0], i + 2, path)?);
            f.predicted.push(parse_f64(&r[1], i + 2, path)?);
            f.actual.push(parse_f64(&r[2], i + 2, path)?);
        }
        Ok(f)
    }
}
