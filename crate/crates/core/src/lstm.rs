//! Single-layer LSTM with a dense head for next-day volatility.
//!
//! Cell, with `z = [x; h_prev]`:
//!
//! ```text
//! i = s(W_i z + b_i)   f = s(W_f z + b_f)   o = s(W_o z + b_o)
//! g = tanh(W_g z + b_g)
//! c = f * c_prev + i * g
//! h = o * tanh(c)
//! ```
//!
//! The prediction is `w_d . (m * h_T) + b_d` where `m` is an inverted-dropout
//! mask during training and all ones otherwise. Loss is mean squared error.

use std::fmt::Write as _;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnn_sentiment::SentimentSeries;
use crate::marketdata::VolatilitySeries;

#[derive(Debug, Error, PartialEq)]
pub enum LstmError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("series too short: need more than {need} points, got {got}")]
    SeriesTooShort { need: usize, got: usize },
    #[error("volatility and sentiment calendars differ")]
    UnalignedCalendars,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("training diverged (non-finite loss)")]
    Diverged,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LstmError>;

const GATE_I: usize = 0;
const GATE_F: usize = 1;
const GATE_O: usize = 2;
const GATE_G: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LstmConfig {
    pub hidden: usize,
    pub input_dim: usize,
    pub dropout: f64,
    pub lookback: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        Self {
            hidden: 30,
            input_dim: 1,
            dropout: 0.2,
            lookback: 5,
            lr: 0.1,
            epochs: 60,
            batch_size: 32,
            clip_norm: 1.0,
            seed: 1,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.lookback == 0 || self.batch_size == 0 {
            return Err(LstmError::InvalidConfig("hidden, lookback and batch_size must be >= 1".into()));
        }
        if !(1..=2).contains(&self.input_dim) {
            return Err(LstmError::InvalidConfig(format!("input_dim must be 1 or 2, got {}", self.input_dim)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(LstmError::InvalidConfig(format!("dropout must be in [0,1), got {}", self.dropout)));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) || !(self.clip_norm > 0.0) {
            return Err(LstmError::InvalidConfig("lr and clip_norm must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    /// `hidden x (input_dim + hidden)`, row-major.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmWeights {
    pub hidden: usize,
    pub input_dim: usize,
    /// Input, forget, output and candidate gates, in that order.
    pub gates: [Gate; 4],
    pub dense_w: Vec<f64>,
    pub dense_b: f64,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

struct StepCache {
    z: Vec<f64>,
    c_prev: Vec<f64>,
    act: [Vec<f64>; 4],
    c: Vec<f64>,
}

impl LstmWeights {
    pub fn zeros(hidden: usize, input_dim: usize) -> Self {
        let gate = || Gate { w: vec![0.0; hidden * (input_dim + hidden)], b: vec![0.0; hidden] };
        Self { hidden, input_dim, gates: [gate(), gate(), gate(), gate()], dense_w: vec![0.0; hidden], dense_b: 0.0 }
    }

    /// Uniform(+-1/sqrt(hidden)) weights, forget bias 1, other biases 0.
    pub fn init(cfg: &LstmConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut w = Self::zeros(cfg.hidden, cfg.input_dim);
        let a = 1.0 / (cfg.hidden as f64).sqrt();
        for g in &mut w.gates {
            g.w.iter_mut().for_each(|v| *v = rng.random_range(-a..a));
        }
        w.gates[GATE_F].b.fill(1.0);
        w.dense_w.iter_mut().for_each(|v| *v = rng.random_range(-a..a));
        w
    }

    pub fn param_count(&self) -> usize {
        4 * self.hidden * (self.input_dim + self.hidden + 1) + self.hidden + 1
    }

    /// Flat view: per gate weights then bias, dense weights, dense bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        for g in &self.gates {
            p.extend_from_slice(&g.w);
            p.extend_from_slice(&g.b);
        }
        p.extend_from_slice(&self.dense_w);
        p.push(self.dense_b);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let mut off = 0;
        for g in &mut self.gates {
            let n = g.w.len();
            g.w.copy_from_slice(&p[off..off + n]);
            off += n;
            let n = g.b.len();
            g.b.copy_from_slice(&p[off..off + n]);
            off += n;
        }
        let n = self.dense_w.len();
        self.dense_w.copy_from_slice(&p[off..off + n]);
        self.dense_b = p[off + n];
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }

    fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> StepCache {
        let hd = self.hidden;
        let mut z = Vec::with_capacity(self.input_dim + hd);
        z.extend_from_slice(x);
        z.extend_from_slice(h_prev);
        let width = z.len();
        let act: [Vec<f64>; 4] = std::array::from_fn(|k| {
            let g = &self.gates[k];
            (0..hd)
                .map(|r| {
                    let a = g.b[r] + g.w[r * width..(r + 1) * width].iter().zip(&z).map(|(w, v)| w * v).sum::<f64>();
                    if k == GATE_G { a.tanh() } else { sigmoid(a) }
                })
                .collect()
        });
        let c = (0..hd).map(|r| act[GATE_F][r] * c_prev[r] + act[GATE_I][r] * act[GATE_G][r]).collect();
        StepCache { z, c_prev: c_prev.to_vec(), act, c }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(LstmError::ShapeMismatch(format!("input has {} features, model expects {}", x.len(), self.input_dim)));
        }
        Ok(())
    }
}

/// One cell update; returns `(h, c)`.
pub fn cell_step(w: &LstmWeights, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    w.check_input(x)?;
    if h_prev.len() != w.hidden || c_prev.len() != w.hidden {
        return Err(LstmError::ShapeMismatch(format!("state length must be {}", w.hidden)));
    }
    let s = w.step(x, h_prev, c_prev);
    let h = s.c.iter().zip(&s.act[GATE_O]).map(|(c, o)| o * c.tanh()).collect();
    Ok((h, s.c))
}

/// Gate activations `(i, f, o, g)` of one step, for range checks.
pub fn gate_activations(w: &LstmWeights, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<[Vec<f64>; 4]> {
    w.check_input(x)?;
    if h_prev.len() != w.hidden || c_prev.len() != w.hidden {
        return Err(LstmError::ShapeMismatch(format!("state length must be {}", w.hidden)));
    }
    Ok(w.step(x, h_prev, c_prev).act)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeatureSpec {
    pub use_sentiment: bool,
    /// Pair day-t sentiment with day t-1 volatility.
    pub shift_sentiment: bool,
}

impl FeatureSpec {
    pub const VOL_ONLY: Self = Self { use_sentiment: false, shift_sentiment: false };
    pub const WITH_SENTIMENT: Self = Self { use_sentiment: true, shift_sentiment: false };
    pub const SHIFTED: Self = Self { use_sentiment: true, shift_sentiment: true };

    pub fn input_dim(&self) -> usize {
        if self.use_sentiment { 2 } else { 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub date: NaiveDate,
    /// `lookback` rows of `input_dim` features, oldest first.
    pub window: Vec<Vec<f64>>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub input_dim: usize,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.target).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.samples.iter().map(|s| s.date).collect()
    }

    /// Splits into samples whose target date is `<= last_train` and the rest.
    pub fn split_at_date(&self, last_train: NaiveDate) -> (Dataset, Dataset) {
        let (a, b): (Vec<Sample>, Vec<Sample>) = self.samples.iter().cloned().partition(|s| s.date <= last_train);
        (Dataset { input_dim: self.input_dim, samples: a }, Dataset { input_dim: self.input_dim, samples: b })
    }
}

/// Supervised pairs for every target index `t >= lookback`. Step `s` of a
/// window holds `vol(s-1)` and `sent(s-1)` (or `sent(s)` when shifted), for
/// `s` in `t-lookback+1..=t`.
pub fn build_features(
    vol: &VolatilitySeries,
    sent: Option<&SentimentSeries>,
    spec: FeatureSpec,
    lookback: usize,
) -> Result<Dataset> {
    if spec.shift_sentiment && !spec.use_sentiment {
        return Err(LstmError::InvalidConfig("shift_sentiment requires use_sentiment".into()));
    }
    if lookback == 0 {
        return Err(LstmError::InvalidConfig("lookback must be >= 1".into()));
    }
    let n = vol.len();
    if n <= lookback {
        return Err(LstmError::SeriesTooShort { need: lookback, got: n });
    }
    let v = vol.values();
    let s = if spec.use_sentiment {
        let s = sent.ok_or_else(|| LstmError::InvalidConfig("sentiment features requested without a series".into()))?;
        if s.dates() != vol.dates() {
            return Err(LstmError::UnalignedCalendars);
        }
        Some(s.scores())
    } else {
        None
    };
    let samples = (lookback..n)
        .map(|t| {
            let window = (t + 1 - lookback..=t)
                .map(|step| match s {
                    None => vec![v[step - 1]],
                    Some(s) if spec.shift_sentiment => vec![v[step - 1], s[step]],
                    Some(s) => vec![v[step - 1], s[step - 1]],
                })
                .collect();
            Sample { date: vol.dates()[t], window, target: v[t] }
        })
        .collect();
    Ok(Dataset { input_dim: spec.input_dim(), samples })
}

/// Affine map of the fitted range onto [0,1]; a zero range maps with unit
/// scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMaxScaler {
    pub min: f64,
    pub max: f64,
}

impl MinMaxScaler {
    pub fn fit(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if values.is_empty() { Self { min: 0.0, max: 1.0 } } else { Self { min, max } }
    }

    fn range(&self) -> f64 {
        let r = self.max - self.min;
        if r > 0.0 { r } else { 1.0 }
    }

    pub fn transform(&self, x: f64) -> f64 {
        (x - self.min) / self.range()
    }

    pub fn inverse(&self, y: f64) -> f64 {
        y * self.range() + self.min
    }
}

fn forward_sequence(w: &LstmWeights, window: &[Vec<f64>]) -> (Vec<StepCache>, Vec<f64>) {
    let mut h = vec![0.0; w.hidden];
    let mut c = vec![0.0; w.hidden];
    let mut caches = Vec::with_capacity(window.len());
    for x in window {
        let s = w.step(x, &h, &c);
        h = s.c.iter().zip(&s.act[GATE_O]).map(|(c, o)| o * c.tanh()).collect();
        c = s.c.clone();
        caches.push(s);
    }
    (caches, h)
}

fn check_dataset(w: &LstmWeights, data: &Dataset) -> Result<()> {
    if data.input_dim != w.input_dim {
        return Err(LstmError::ShapeMismatch(format!("dataset input_dim {} but model has {}", data.input_dim, w.input_dim)));
    }
    if let Some(row) = data.samples.iter().flat_map(|s| &s.window).find(|r| r.len() != w.input_dim) {
        return Err(LstmError::ShapeMismatch(format!("window row of length {}", row.len())));
    }
    Ok(())
}

/// Mean squared error and full BPTT gradient (flat, in [`LstmWeights::params`]
/// order). `masks` holds one dropout mask per sample, or `None` for none.
fn batch_loss_and_gradient(w: &LstmWeights, samples: &[&Sample], masks: Option<&[Vec<f64>]>) -> (f64, LstmWeights) {
    let hd = w.hidden;
    let width = w.input_dim + hd;
    let mut g = LstmWeights::zeros(hd, w.input_dim);
    let scale = 1.0 / samples.len() as f64;
    let mut loss = 0.0;
    for (n, s) in samples.iter().enumerate() {
        let (caches, h_last) = forward_sequence(w, &s.window);
        let mask = masks.map(|m| m[n].as_slice());
        let dropped: Vec<f64> = match mask {
            Some(m) => h_last.iter().zip(m).map(|(h, m)| h * m).collect(),
            None => h_last.clone(),
        };
        let pred = w.dense_b + w.dense_w.iter().zip(&dropped).map(|(a, b)| a * b).sum::<f64>();
        let err = pred - s.target;
        loss += err * err;
        let dy = 2.0 * err * scale;
        g.dense_b += dy;
        for r in 0..hd {
            g.dense_w[r] += dy * dropped[r];
        }
        let mut dh: Vec<f64> = (0..hd).map(|r| dy * w.dense_w[r] * mask.map_or(1.0, |m| m[r])).collect();
        let mut dc = vec![0.0; hd];
        for cache in caches.iter().rev() {
            let [i, f, o, gg] = &cache.act;
            let mut da: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; hd]);
            for r in 0..hd {
                let tc = cache.c[r].tanh();
                let d_o = dh[r] * tc;
                dc[r] += dh[r] * o[r] * (1.0 - tc * tc);
                da[GATE_I][r] = dc[r] * gg[r] * i[r] * (1.0 - i[r]);
                da[GATE_F][r] = dc[r] * cache.c_prev[r] * f[r] * (1.0 - f[r]);
                da[GATE_O][r] = d_o * o[r] * (1.0 - o[r]);
                da[GATE_G][r] = dc[r] * i[r] * (1.0 - gg[r] * gg[r]);
                dc[r] *= f[r];
            }
            let mut dz = vec![0.0; width];
            for k in 0..4 {
                let (gw, wk) = (&mut g.gates[k], &w.gates[k]);
                for r in 0..hd {
                    let a = da[k][r];
                    if a == 0.0 {
                        continue;
                    }
                    gw.b[r] += a;
                    let row = r * width;
                    for col in 0..width {
                        gw.w[row + col] += a * cache.z[col];
                        dz[col] += a * wk.w[row + col];
                    }
                }
            }
            dh.copy_from_slice(&dz[w.input_dim..]);
        }
    }
    (loss * scale, g)
}

/// Mean squared error over `data` and its BPTT gradient with dropout off.
pub fn loss_and_gradients(w: &LstmWeights, data: &Dataset) -> Result<(f64, LstmWeights)> {
    check_dataset(w, data)?;
    if data.is_empty() {
        return Err(LstmError::EmptyDataset);
    }
    let refs: Vec<&Sample> = data.samples.iter().collect();
    Ok(batch_loss_and_gradient(w, &refs, None))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedLstm {
    pub weights: LstmWeights,
    /// Mean training loss per epoch, accumulated over the epoch's batches.
    pub epoch_loss: Vec<f64>,
}

pub fn train(data: &Dataset, cfg: &LstmConfig) -> Result<TrainedLstm> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(LstmError::EmptyDataset);
    }
    let mut w = LstmWeights::init(cfg);
    check_dataset(&w, data)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5bd1_e995));
    let keep = 1.0 - cfg.dropout;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    let mut params = w.params();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &data.samples[i]).collect();
            let masks: Option<Vec<Vec<f64>>> = (cfg.dropout > 0.0).then(|| {
                (0..batch.len())
                    .map(|_| (0..cfg.hidden).map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect())
                    .collect()
            });
            let (loss, g) = batch_loss_and_gradient(&w, &batch, masks.as_deref());
            if !loss.is_finite() {
                return Err(LstmError::Diverged);
            }
            total += loss * batch.len() as f64;
            let mut grad = g.params();
            let norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > cfg.clip_norm {
                grad.iter_mut().for_each(|v| *v *= cfg.clip_norm / norm);
            }
            for (p, d) in params.iter_mut().zip(&grad) {
                *p -= cfg.lr * d;
            }
            w.set_params(&params);
        }
        epoch_loss.push(total / data.len() as f64);
    }
    if !w.is_finite() {
        return Err(LstmError::Diverged);
    }
    Ok(TrainedLstm { weights: w, epoch_loss })
}

/// One nonnegative prediction per sample, dropout off.
pub fn forecast(w: &LstmWeights, data: &Dataset) -> Result<Vec<f64>> {
    check_dataset(w, data)?;
    Ok(data
        .samples
        .iter()
        .map(|s| {
            let (_, h) = forward_sequence(w, &s.window);
            let y = w.dense_b + w.dense_w.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>();
            y.max(0.0)
        })
        .collect())
}

impl LstmWeights {
    /// Header `hidden input_dim`, then per gate (i, f, o, g) one weight line
    /// and one bias line, then dense weights and dense bias.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {}", self.hidden, self.input_dim).unwrap();
        let mut row = |v: &[f64]| {
            let line: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
            writeln!(s, "{}", line.join(" ")).unwrap();
        };
        for g in &self.gates {
            row(&g.w);
            row(&g.b);
        }
        row(&self.dense_w);
        row(&[self.dense_b]);
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| LstmError::Parse("empty document".into()))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| LstmError::Parse("bad header".into())))
            .collect::<Result<_>>()?;
        let [hidden, input_dim] = header[..] else {
            return Err(LstmError::Parse("header needs hidden and input_dim".into()));
        };
        let mut w = Self::zeros(hidden, input_dim);
        let mut flat = Vec::with_capacity(w.param_count());
        for line in lines {
            for t in line.split_whitespace() {
                flat.push(t.parse::<f64>().map_err(|e| LstmError::Parse(e.to_string()))?);
            }
        }
        if flat.len() != w.param_count() {
            return Err(LstmError::Parse(format!("expected {} values, found {}", w.param_count(), flat.len())));
        }
        w.set_params(&flat);
        Ok(w)
    }
}
