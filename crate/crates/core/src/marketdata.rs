//! Price and headline ingestion, the squared-log-return volatility proxy,
//! calendar alignment and chronological train/test splitting.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use thiserror::Error;

use crate::cnn_sentiment::SentimentSeries;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("non-positive close price on {date}")]
    NonPositivePrice { date: NaiveDate },
    #[error("duplicate date {date}")]
    DuplicateDate { date: NaiveDate },
    #[error("input file contains no data rows")]
    EmptyFile,
    #[error("series too short: need at least {need} observations, got {got}")]
    SeriesTooShort { need: usize, got: usize },
    #[error("split leaves an empty train or test segment (train {train}, test {test})")]
    DegenerateSplit { train: usize, test: usize },
    #[error("the two calendars share no dates")]
    EmptyIntersection,
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DataError>;

/// Input schema identifiers accepted by [`load_prices`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriceFormat {
    /// Header `date,close`, ISO-8601 dates, '.' decimal point.
    #[default]
    DateClose,
}

/// Daily closing prices for one index.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, closes: Vec<f64>) -> Result<Self> {
        if dates.len() != closes.len() {
            return Err(DataError::InvalidSeries(format!(
                "{} dates but {} closes",
                dates.len(),
                closes.len()
            )));
        }
        if dates.len() < 2 {
            return Err(DataError::SeriesTooShort { need: 2, got: dates.len() });
        }
        for (d, c) in dates.iter().zip(&closes) {
            if !(c.is_finite() && *c > 0.0) {
                return Err(DataError::NonPositivePrice { date: *d });
            }
        }
        ensure_increasing(&dates)?;
        Ok(Self { dates, closes })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Close on `date`, or the most recent close before it.
    pub fn close_on_or_before(&self, date: NaiveDate) -> Option<f64> {
        let idx = self.dates.partition_point(|d| *d <= date);
        (idx > 0).then(|| self.closes[idx - 1])
    }

    /// First close strictly after `date`.
    pub fn close_after(&self, date: NaiveDate) -> Option<f64> {
        let idx = self.dates.partition_point(|d| *d <= date);
        self.closes.get(idx).copied()
    }
}

/// Dated squared log returns, the forecast target of every model.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilitySeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl VolatilitySeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(DataError::InvalidSeries(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(DataError::InvalidSeries(format!(
                "volatility values must be finite and nonnegative, found {v}"
            )));
        }
        ensure_increasing(&dates)?;
        Ok(Self { dates, values })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    fn split_at(&self, idx: usize) -> (Self, Self) {
        (
            Self { dates: self.dates[..idx].to_vec(), values: self.values[..idx].to_vec() },
            Self { dates: self.dates[idx..].to_vec(), values: self.values[idx..].to_vec() },
        )
    }

    fn retain_dates(&self, keep: &HashSet<NaiveDate>) -> Self {
        let (dates, values) = self
            .dates
            .iter()
            .zip(&self.values)
            .filter(|(d, _)| keep.contains(d))
            .map(|(d, v)| (*d, *v))
            .unzip();
        Self { dates, values }
    }
}

/// Dated log returns (signed).
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

/// Where the training sample ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    /// Last training date (inclusive).
    BoundaryDate(NaiveDate),
    /// Fraction of observations, counted from the start, used for training.
    TrainFraction(f64),
}

impl SplitSpec {
    /// Number of leading observations of `dates` that belong to the training side.
    pub fn train_len(&self, dates: &[NaiveDate]) -> usize {
        match *self {
            SplitSpec::BoundaryDate(b) => dates.partition_point(|d| *d <= b),
            SplitSpec::TrainFraction(f) => {
                if !(f > 0.0 && f.is_finite()) {
                    return 0;
                }
                let k = (f * dates.len() as f64 + 1e-9).floor();
                (k as usize).min(dates.len())
            }
        }
    }
}

fn ensure_increasing(dates: &[NaiveDate]) -> Result<()> {
    for w in dates.windows(2) {
        if w[1] == w[0] {
            return Err(DataError::DuplicateDate { date: w[1] });
        }
        if w[1] < w[0] {
            return Err(DataError::InvalidSeries(format!(
                "dates not increasing: {} follows {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| DataError::MalformedRow {
        line,
        reason: format!("bad date {s:?}: {e}"),
    })
}

fn csv_reader<R: Read>(rdr: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(rdr)
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(|e| DataError::MalformedRow {
        line: 1,
        reason: e.to_string(),
    })?;
    let got: Vec<String> = header.iter().map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase()).collect();
    if got.is_empty() || (got.len() == 1 && got[0].is_empty()) {
        return Err(DataError::EmptyFile);
    }
    if got != expected {
        return Err(DataError::MalformedRow {
            line: 1,
            reason: format!("expected header {:?}, found {:?}", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

/// Reads a `date,close` CSV. Rows may come in any order; the result is sorted.
pub fn load_prices(path: impl AsRef<Path>, format: PriceFormat) -> Result<PriceSeries> {
    let file = File::open(path.as_ref())?;
    read_prices(file, format)
}

pub fn read_prices<R: Read>(input: R, format: PriceFormat) -> Result<PriceSeries> {
    let PriceFormat::DateClose = format;
    let mut rdr = csv_reader(input);
    check_header(&mut rdr, &["date", "close"])?;

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| DataError::MalformedRow { line, reason: e.to_string() })?;
        if rec.len() != 2 {
            return Err(DataError::MalformedRow {
                line,
                reason: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let date = parse_date(&rec[0], line)?;
        let close: f64 = rec[1].parse().map_err(|_| DataError::MalformedRow {
            line,
            reason: format!("bad close {:?}", &rec[1]),
        })?;
        if !(close.is_finite() && close > 0.0) {
            return Err(DataError::NonPositivePrice { date });
        }
        rows.push((date, close));
    }
    if rows.is_empty() {
        return Err(DataError::EmptyFile);
    }
    rows.sort_by_key(|(d, _)| *d);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(DataError::DuplicateDate { date: w[0].0 });
    }
    let (dates, closes) = rows.into_iter().unzip();
    PriceSeries::new(dates, closes)
}

/// One raw headline row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Headline {
    pub date: NaiveDate,
    pub text: String,
}

/// Reads a `date,headline` CSV, preserving file order within each date and
/// sorting stably by date.
pub fn load_headlines(path: impl AsRef<Path>) -> Result<Vec<Headline>> {
    let file = File::open(path.as_ref())?;
    read_headlines(file)
}

pub fn read_headlines<R: Read>(input: R) -> Result<Vec<Headline>> {
    let mut rdr = csv_reader(input);
    check_header(&mut rdr, &["date", "headline"])?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| DataError::MalformedRow { line, reason: e.to_string() })?;
        if rec.len() != 2 {
            return Err(DataError::MalformedRow {
                line,
                reason: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        out.push(Headline { date: parse_date(&rec[0], line)?, text: rec[1].to_string() });
    }
    if out.is_empty() {
        return Err(DataError::EmptyFile);
    }
    out.sort_by_key(|h| h.date);
    Ok(out)
}

/// `values[t] = ln(close[t+1] / close[t])^2`, dated at the later close.
pub fn squared_log_returns(p: &PriceSeries) -> Result<VolatilitySeries> {
    let r = log_returns(p)?;
    let values = r.values.iter().map(|x| x * x).collect();
    VolatilitySeries::new(r.dates, values)
}

pub fn log_returns(p: &PriceSeries) -> Result<ReturnSeries> {
    if p.len() < 2 {
        return Err(DataError::SeriesTooShort { need: 2, got: p.len() });
    }
    let values = p.closes.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    Ok(ReturnSeries { dates: p.dates[1..].to_vec(), values })
}

pub fn chronological_split(
    v: &VolatilitySeries,
    spec: &SplitSpec,
) -> Result<(VolatilitySeries, VolatilitySeries)> {
    let k = spec.train_len(&v.dates);
    if k == 0 || k >= v.len() {
        return Err(DataError::DegenerateSplit { train: k, test: v.len() - k.min(v.len()) });
    }
    Ok(v.split_at(k))
}

/// Restricts both series to their common dates.
pub fn align_calendars(
    v: &VolatilitySeries,
    s: &SentimentSeries,
) -> Result<(VolatilitySeries, SentimentSeries)> {
    let vd: BTreeSet<NaiveDate> = v.dates.iter().copied().collect();
    let common: HashSet<NaiveDate> = s.dates().iter().copied().filter(|d| vd.contains(d)).collect();
    if common.is_empty() {
        return Err(DataError::EmptyIntersection);
    }
    Ok((v.retain_dates(&common), s.retain_dates(&common)))
}
