//! TOML run configuration. Relative paths resolve against the directory
//! holding the config file; everything is checked before any stage runs.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;
use volsent::cnn_sentiment::CnnConfig;
use volsent::garch::GarchOrder;
use volsent::lstm::LstmConfig;
use volsent::marketdata::SplitSpec;
use volsent::svr::{GridSpec, SvrHyperParams};
use volsent::textprep::{DEFAULT_MAX_LEN, DEFAULT_MIN_COUNT};
use volsent::word2vec::W2vConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_seed")]
    seed: u64,
    paths: RawPaths,
    split: RawSplit,
    #[serde(default)]
    models: ModelToggles,
    #[serde(default)]
    garch: GarchSection,
    #[serde(default)]
    svr: SvrSection,
    #[serde(default)]
    lstm: LstmSection,
    #[serde(default)]
    text: TextSection,
    #[serde(default)]
    word2vec: W2vSection,
    #[serde(default)]
    cnn: CnnSection,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPaths {
    prices: PathBuf,
    headlines: Option<PathBuf>,
    stopwords: Option<PathBuf>,
    output: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSplit {
    /// `YYYY-MM-DD`, quoted.
    boundary_date: Option<String>,
    train_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelToggles {
    pub garch: bool,
    pub svr: bool,
    pub lstm: bool,
    pub lstm_sentiment: bool,
    pub lstm_sentiment_shifted: bool,
}

impl Default for ModelToggles {
    fn default() -> Self {
        Self { garch: true, svr: true, lstm: true, lstm_sentiment: true, lstm_sentiment_shifted: true }
    }
}

impl ModelToggles {
    pub fn any_sentiment(&self) -> bool {
        self.lstm_sentiment || self.lstm_sentiment_shifted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GarchSection {
    pub p: usize,
    pub q: usize,
}

impl Default for GarchSection {
    fn default() -> Self {
        Self { p: 1, q: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvrSection {
    pub c: f64,
    pub epsilon: f64,
    pub gamma: f64,
    /// Number of lagged volatility values per feature vector.
    pub lags: usize,
    pub grid_search: bool,
    pub c_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    pub folds: usize,
}

impl Default for SvrSection {
    fn default() -> Self {
        let h = SvrHyperParams::default();
        Self {
            c: h.c,
            epsilon: h.epsilon,
            gamma: h.gamma,
            lags: 5,
            grid_search: false,
            c_grid: vec![0.5, 2.0, 8.0],
            gamma_grid: vec![0.001, 0.1, 1.0],
            epsilon_grid: vec![0.001, 0.01],
            folds: 20,
        }
    }
}

impl SvrSection {
    pub fn hyper(&self) -> SvrHyperParams {
        SvrHyperParams { c: self.c, epsilon: self.epsilon, gamma: self.gamma }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            c_grid: self.c_grid.clone(),
            gamma_grid: self.gamma_grid.clone(),
            epsilon_grid: self.epsilon_grid.clone(),
            folds: self.folds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LstmSection {
    pub hidden: usize,
    pub dropout: f64,
    pub lookback: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub clip_norm: f64,
}

impl Default for LstmSection {
    fn default() -> Self {
        let d = LstmConfig::default();
        Self {
            hidden: d.hidden,
            dropout: d.dropout,
            lookback: d.lookback,
            lr: d.lr,
            epochs: d.epochs,
            batch_size: d.batch_size,
            clip_norm: d.clip_norm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TextSection {
    pub max_len: usize,
    pub min_count: usize,
}

impl Default for TextSection {
    fn default() -> Self {
        Self { max_len: DEFAULT_MAX_LEN, min_count: DEFAULT_MIN_COUNT }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct W2vSection {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f64,
}

impl Default for W2vSection {
    fn default() -> Self {
        let d = W2vConfig::default();
        Self { dim: d.dim, window: d.window, negatives: d.negatives, epochs: d.epochs, lr: d.lr }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CnnSection {
    pub filters: usize,
    pub kernel_width: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub epochs: usize,
    pub threshold: f64,
    pub logistic_lr: f64,
    pub logistic_epochs: usize,
}

impl Default for CnnSection {
    fn default() -> Self {
        let d = CnnConfig::default();
        Self {
            filters: d.filters,
            kernel_width: d.kernel_width,
            batch_size: d.batch_size,
            lr: d.lr,
            epochs: d.epochs,
            threshold: 0.5,
            logistic_lr: 0.5,
            logistic_epochs: 100,
        }
    }
}

/// Validated configuration with absolute paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub prices: PathBuf,
    pub headlines: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub output: PathBuf,
    pub split: SplitSpec,
    pub models: ModelToggles,
    pub garch: GarchSection,
    pub svr: SvrSection,
    pub lstm: LstmSection,
    pub text: TextSection,
    pub word2vec: W2vSection,
    pub cnn: CnnSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| e.in_file(path))
    }

    /// Parses `text`, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::config(e.message().to_string()))?;
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let split = match (raw.split.boundary_date, raw.split.train_fraction) {
            (Some(d), None) => SplitSpec::BoundaryDate(
                NaiveDate::parse_from_str(&d, "%Y-%m-%d")
                    .map_err(|e| CliError::config(format!("split.boundary_date {d:?}: {e}")))?,
            ),
            (None, Some(f)) if f > 0.0 && f < 1.0 => SplitSpec::TrainFraction(f),
            (None, Some(f)) => return Err(CliError::config(format!("split.train_fraction must lie in (0,1), got {f}"))),
            _ => return Err(CliError::config("set exactly one of split.boundary_date and split.train_fraction")),
        };
        let cfg = Self {
            seed: raw.seed,
            prices: resolve(&raw.paths.prices),
            headlines: raw.paths.headlines.as_deref().map(resolve),
            stopwords: raw.paths.stopwords.as_deref().map(resolve),
            output: resolve(&raw.paths.output),
            split,
            models: raw.models,
            garch: raw.garch,
            svr: raw.svr,
            lstm: raw.lstm,
            text: raw.text,
            word2vec: raw.word2vec,
            cnn: raw.cnn,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.models.any_sentiment() && self.headlines.is_none() {
            return Err(CliError::config("sentiment models are enabled but paths.headlines is not set"));
        }
        GarchOrder::new(self.garch.p, self.garch.q)?;
        self.svr.hyper().validate()?;
        if self.svr.lags == 0 {
            return Err(CliError::config("svr.lags must be at least 1"));
        }
        if self.svr.grid_search && (self.svr.folds < 2 || self.svr.c_grid.is_empty() || self.svr.gamma_grid.is_empty() || self.svr.epsilon_grid.is_empty()) {
            return Err(CliError::config("svr grid search needs nonempty grids and at least 2 folds"));
        }
        self.lstm_config(1).validate()?;
        if self.text.max_len == 0 || self.text.min_count == 0 {
            return Err(CliError::config("text.max_len and text.min_count must be at least 1"));
        }
        self.w2v_config().validate()?;
        self.cnn_config().validate()?;
        if !(self.cnn.threshold > 0.0 && self.cnn.threshold < 1.0) {
            return Err(CliError::config("cnn.threshold must lie in (0,1)"));
        }
        if !(self.cnn.logistic_lr > 0.0) {
            return Err(CliError::config("cnn.logistic_lr must be positive"));
        }
        Ok(())
    }

    /// Checks that every input file named by the config exists.
    pub fn check_inputs(&self) -> Result<()> {
        if !self.prices.is_file() {
            return Err(CliError::missing_input("price file", &self.prices));
        }
        for (what, p) in [("headline file", &self.headlines), ("stopword file", &self.stopwords)] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(CliError::missing_input(what, p));
                }
            }
        }
        Ok(())
    }

    pub fn garch_order(&self) -> GarchOrder {
        GarchOrder::new(self.garch.p, self.garch.q).expect("validated at load")
    }

    pub fn lstm_config(&self, input_dim: usize) -> LstmConfig {
        let l = &self.lstm;
        LstmConfig {
            hidden: l.hidden,
            input_dim,
            dropout: l.dropout,
            lookback: l.lookback,
            lr: l.lr,
            epochs: l.epochs,
            batch_size: l.batch_size,
            clip_norm: l.clip_norm,
            seed: self.seed,
        }
    }

    pub fn w2v_config(&self) -> W2vConfig {
        let w = &self.word2vec;
        W2vConfig { dim: w.dim, window: w.window, negatives: w.negatives, epochs: w.epochs, lr: w.lr, seed: self.seed }
    }

    pub fn cnn_config(&self) -> CnnConfig {
        let c = &self.cnn;
        CnnConfig {
            filters: c.filters,
            kernel_width: c.kernel_width,
            embed_dim: self.word2vec.dim,
            max_len: self.text.max_len,
            batch_size: c.batch_size,
            lr: c.lr,
            epochs: c.epochs,
            seed: self.seed,
        }
    }
}
