//! Headline sentiment: a one-layer text CNN (valid convolution, ReLU, global
//! max pooling, sigmoid head), a logistic-regression baseline on mean-pooled
//! embeddings, classifier metrics and per-day aggregation.
//!
//! Both classifiers minimise binary cross-entropy with seeded mini-batch
//! gradient descent. Embeddings stay frozen.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::textprep::EncodedDoc;
use crate::word2vec::EmbeddingMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum SentimentError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no labeled documents")]
    EmptyCorpus,
    #[error("training corpus contains only one class")]
    SingleClassCorpus,
    #[error("evaluation set is empty")]
    EmptyEvalSet,
    #[error("no headlines on {0}")]
    EmptyDay(NaiveDate),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid sentiment series: {0}")]
    InvalidSeries(String),
    #[error("training diverged (non-finite loss)")]
    Diverged,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SentimentError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnnConfig {
    pub filters: usize,
    pub kernel_width: usize,
    pub embed_dim: usize,
    pub max_len: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for CnnConfig {
    fn default() -> Self {
        Self { filters: 128, kernel_width: 3, embed_dim: 100, max_len: 16, batch_size: 32, lr: 0.1, epochs: 30, seed: 1 }
    }
}

impl CnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.filters == 0 || self.kernel_width == 0 || self.embed_dim == 0 || self.batch_size == 0 {
            return Err(SentimentError::InvalidConfig("filters, kernel_width, embed_dim and batch_size must be >= 1".into()));
        }
        if self.kernel_width > self.max_len {
            return Err(SentimentError::InvalidConfig(format!(
                "kernel_width {} exceeds max_len {}",
                self.kernel_width, self.max_len
            )));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(SentimentError::InvalidConfig(format!("lr must be positive, got {}", self.lr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

impl ClassifierMetrics {
    pub fn from_precision_recall(precision: f64, recall: f64) -> Self {
        let denom = precision + recall;
        let f_score = if denom > 0.0 { 2.0 * precision * recall / denom } else { 0.0 };
        Self { precision, recall, f_score }
    }

    /// Precision and recall are 0 when their denominators are 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if a + b > 0 { a as f64 / (a + b) as f64 } else { 0.0 };
        Self::from_precision_recall(ratio(tp, fp), ratio(tp, fn_))
    }
}

/// Three-row report: precision, recall and F-score per classifier column.
pub fn metrics_report(columns: &[(&str, &ClassifierMetrics)]) -> String {
    let mut s = String::new();
    write!(s, "{:<10}", "Metric").unwrap();
    for (name, _) in columns {
        write!(s, " {name:>20}").unwrap();
    }
    s.push('\n');
    let rows: [(&str, fn(&ClassifierMetrics) -> f64); 3] =
        [("precision", |m| m.precision), ("recall", |m| m.recall), ("F-score", |m| m.f_score)];
    for (label, get) in rows {
        write!(s, "{label:<10}").unwrap();
        for (_, m) in columns {
            write!(s, " {:>20.4}", get(m)).unwrap();
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentSeries {
    dates: Vec<NaiveDate>,
    scores: Vec<f64>,
}

impl SentimentSeries {
    pub fn new(dates: Vec<NaiveDate>, scores: Vec<f64>) -> Result<Self> {
        if dates.len() != scores.len() {
            return Err(SentimentError::InvalidSeries(format!("{} dates but {} scores", dates.len(), scores.len())));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SentimentError::InvalidSeries("dates must be strictly increasing".into()));
        }
        if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(SentimentError::InvalidSeries(format!("score {s} outside [0,1]")));
        }
        Ok(Self { dates, scores })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub(crate) fn retain_dates(&self, keep: &HashSet<NaiveDate>) -> Self {
        let (dates, scores) = self.dates.iter().zip(&self.scores).filter(|(d, _)| keep.contains(*d)).unzip();
        Self { dates, scores }
    }

    /// `date,sentiment` CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("date,sentiment\n");
        for (d, v) in self.dates.iter().zip(&self.scores) {
            writeln!(s, "{d},{v:e}").unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("date,sentiment") {
            return Err(SentimentError::Parse("expected header date,sentiment".into()));
        }
        let (mut dates, mut scores) = (Vec::new(), Vec::new());
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let err = |r: String| SentimentError::Parse(format!("line {}: {r}", i + 2));
            let (d, v) = line.split_once(',').ok_or_else(|| err("expected two fields".into()))?;
            dates.push(d.trim().parse::<NaiveDate>().map_err(|e| err(e.to_string()))?);
            scores.push(v.trim().parse::<f64>().map_err(|e| err(e.to_string()))?);
        }
        Self::new(dates, scores)
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy from the logit, stable for large |z|.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Row-major `ids.len() x dim` matrix of input embedding rows.
pub fn embed_doc(ids: &[usize], emb: &EmbeddingMatrix) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ids.len() * emb.dim());
    for &id in ids {
        if id >= emb.rows() {
            return Err(SentimentError::ShapeMismatch(format!("token id {id} outside embedding rows {}", emb.rows())));
        }
        out.extend_from_slice(emb.vector(id));
    }
    Ok(out)
}

/// Mean of embedding rows over non-PAD tokens (zero vector if none).
pub fn mean_pooled(ids: &[usize], emb: &EmbeddingMatrix) -> Result<Vec<f64>> {
    let mut out = vec![0.0; emb.dim()];
    let mut n = 0usize;
    for &id in ids.iter().filter(|&&id| id != crate::textprep::PAD) {
        if id >= emb.rows() {
            return Err(SentimentError::ShapeMismatch(format!("token id {id} outside embedding rows {}", emb.rows())));
        }
        for (o, v) in out.iter_mut().zip(emb.vector(id)) {
            *o += v;
        }
        n += 1;
    }
    if n > 0 {
        out.iter_mut().for_each(|o| *o /= n as f64);
    }
    Ok(out)
}

/// Anything that maps an encoded headline to P(label = 1).
pub trait DocClassifier {
    fn predict_proba(&self, ids: &[usize], emb: &EmbeddingMatrix) -> Result<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnWeights {
    pub filters: usize,
    pub kernel_width: usize,
    pub embed_dim: usize,
    /// `filters x kernel_width x embed_dim`, row-major.
    pub conv_kernels: Vec<f64>,
    pub conv_bias: Vec<f64>,
    pub dense_w: Vec<f64>,
    pub dense_b: f64,
}

struct ForwardCache {
    pooled: Vec<f64>,
    argmax: Vec<usize>,
    active: Vec<bool>,
    logit: f64,
}

impl CnnWeights {
    pub fn zeros(filters: usize, kernel_width: usize, embed_dim: usize) -> Self {
        Self {
            filters,
            kernel_width,
            embed_dim,
            conv_kernels: vec![0.0; filters * kernel_width * embed_dim],
            conv_bias: vec![0.0; filters],
            dense_w: vec![0.0; filters],
            dense_b: 0.0,
        }
    }

    /// Uniform fan-in scaled kernels and dense weights, zero biases.
    pub fn init(cfg: &CnnConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut w = Self::zeros(cfg.filters, cfg.kernel_width, cfg.embed_dim);
        let a = (1.0 / (cfg.kernel_width * cfg.embed_dim) as f64).sqrt();
        w.conv_kernels.iter_mut().for_each(|v| *v = rng.random_range(-a..a));
        let b = (1.0 / cfg.filters as f64).sqrt();
        w.dense_w.iter_mut().for_each(|v| *v = rng.random_range(-b..b));
        w
    }

    pub fn is_finite(&self) -> bool {
        self.dense_b.is_finite()
            && self.conv_kernels.iter().chain(&self.conv_bias).chain(&self.dense_w).all(|v| v.is_finite())
    }

    /// Flat parameter view: kernels, conv bias, dense weights, dense bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.conv_kernels.clone();
        p.extend_from_slice(&self.conv_bias);
        p.extend_from_slice(&self.dense_w);
        p.push(self.dense_b);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let (nk, nf) = (self.conv_kernels.len(), self.filters);
        self.conv_kernels.copy_from_slice(&p[..nk]);
        self.conv_bias.copy_from_slice(&p[nk..nk + nf]);
        self.dense_w.copy_from_slice(&p[nk + nf..nk + 2 * nf]);
        self.dense_b = p[nk + 2 * nf];
    }

    fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache> {
        let (kw, d) = (self.kernel_width, self.embed_dim);
        if x.len() % d != 0 {
            return Err(SentimentError::ShapeMismatch(format!("input length {} not a multiple of embed_dim {d}", x.len())));
        }
        let len = x.len() / d;
        if len < kw {
            return Err(SentimentError::ShapeMismatch(format!("sequence length {len} shorter than kernel width {kw}")));
        }
        let positions = len - kw + 1;
        let span = kw * d;
        let mut pooled = vec![0.0; self.filters];
        let mut argmax = vec![0; self.filters];
        let mut active = vec![false; self.filters];
        for f in 0..self.filters {
            let kernel = &self.conv_kernels[f * span..(f + 1) * span];
            let mut best = f64::NEG_INFINITY;
            let mut best_p = 0;
            for p in 0..positions {
                let window = &x[p * d..p * d + span];
                let a: f64 = self.conv_bias[f] + kernel.iter().zip(window).map(|(k, v)| k * v).sum::<f64>();
                if a > best {
                    best = a;
                    best_p = p;
                }
            }
            active[f] = best > 0.0;
            pooled[f] = best.max(0.0);
            argmax[f] = best_p;
        }
        let logit = self.dense_b + self.dense_w.iter().zip(&pooled).map(|(w, h)| w * h).sum::<f64>();
        Ok(ForwardCache { pooled, argmax, active, logit })
    }
}

/// P(label = 1) for one `len x embed_dim` document matrix.
pub fn forward(w: &CnnWeights, doc_embeddings: &[f64]) -> Result<f64> {
    Ok(sigmoid(w.forward_cached(doc_embeddings)?.logit))
}

/// Mean binary cross-entropy over `batch` and its gradient, shaped like the
/// weights.
pub fn loss_and_gradients(w: &CnnWeights, batch: &[(Vec<f64>, f64)]) -> Result<(f64, CnnWeights)> {
    let mut g = CnnWeights::zeros(w.filters, w.kernel_width, w.embed_dim);
    if batch.is_empty() {
        return Ok((0.0, g));
    }
    let span = w.kernel_width * w.embed_dim;
    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for (x, y) in batch {
        let c = w.forward_cached(x)?;
        loss += bce_from_logit(c.logit, *y);
        let dz = (sigmoid(c.logit) - y) * scale;
        g.dense_b += dz;
        for f in 0..w.filters {
            g.dense_w[f] += dz * c.pooled[f];
            if !c.active[f] {
                continue;
            }
            let dp = dz * w.dense_w[f];
            g.conv_bias[f] += dp;
            let window = &x[c.argmax[f] * w.embed_dim..c.argmax[f] * w.embed_dim + span];
            for (gk, v) in g.conv_kernels[f * span..(f + 1) * span].iter_mut().zip(window) {
                *gk += dp * v;
            }
        }
    }
    Ok((loss * scale, g))
}

impl DocClassifier for CnnWeights {
    fn predict_proba(&self, ids: &[usize], emb: &EmbeddingMatrix) -> Result<f64> {
        if emb.dim() != self.embed_dim {
            return Err(SentimentError::ShapeMismatch(format!(
                "embedding dim {} but model expects {}",
                emb.dim(),
                self.embed_dim
            )));
        }
        forward(self, &embed_doc(ids, emb)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedCnn {
    pub weights: CnnWeights,
    /// Mean training loss per epoch, accumulated over the epoch's batches.
    pub epoch_loss: Vec<f64>,
}

fn labeled(docs: &[EncodedDoc]) -> Result<Vec<(&EncodedDoc, f64)>> {
    let out: Vec<_> = docs.iter().filter_map(|d| d.label.map(|l| (d, f64::from(l.min(1))))).collect();
    if out.is_empty() {
        return Err(SentimentError::EmptyCorpus);
    }
    let pos = out.iter().filter(|(_, y)| *y == 1.0).count();
    if pos == 0 || pos == out.len() {
        return Err(SentimentError::SingleClassCorpus);
    }
    Ok(out)
}

/// Runs seeded mini-batch descent; `step` returns the batch loss after
/// applying its update.
fn run_epochs<F>(n: usize, batch_size: usize, epochs: usize, rng: &mut ChaCha8Rng, mut step: F) -> Result<Vec<f64>>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    let mut order: Vec<usize> = (0..n).collect();
    let mut losses = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        for chunk in order.chunks(batch_size) {
            let l = step(chunk)?;
            if !l.is_finite() {
                return Err(SentimentError::Diverged);
            }
            total += l * chunk.len() as f64;
        }
        losses.push(total / n as f64);
    }
    Ok(losses)
}

/// Trains on the labeled subset of `docs`; unlabeled docs are ignored.
pub fn train(docs: &[EncodedDoc], emb: &EmbeddingMatrix, cfg: &CnnConfig) -> Result<TrainedCnn> {
    cfg.validate()?;
    if emb.dim() != cfg.embed_dim {
        return Err(SentimentError::ShapeMismatch(format!("embedding dim {} but config says {}", emb.dim(), cfg.embed_dim)));
    }
    let data = labeled(docs)?;
    let xs: Vec<(Vec<f64>, f64)> =
        data.iter().map(|(d, y)| embed_doc(&d.token_ids, emb).map(|x| (x, *y))).collect::<Result<_>>()?;

    let mut w = CnnWeights::init(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9e37_79b9));
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let epoch_loss = run_epochs(xs.len(), cfg.batch_size, cfg.epochs, &mut rng, |idx| {
        batch.clear();
        batch.extend(idx.iter().map(|&i| xs[i].clone()));
        let (loss, g) = loss_and_gradients(&w, &batch)?;
        let mut p = w.params();
        for (pi, gi) in p.iter_mut().zip(g.params()) {
            *pi -= cfg.lr * gi;
        }
        w.set_params(&p);
        Ok(loss)
    })?;
    if !w.is_finite() {
        return Err(SentimentError::Diverged);
    }
    Ok(TrainedCnn { weights: w, epoch_loss })
}

/// Precision, recall and F-score of `model` on the labeled subset of `docs`.
pub fn evaluate<C: DocClassifier>(
    model: &C,
    docs: &[EncodedDoc],
    emb: &EmbeddingMatrix,
    threshold: f64,
) -> Result<ClassifierMetrics> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(SentimentError::InvalidConfig(format!("threshold must be in (0,1), got {threshold}")));
    }
    let (mut tp, mut fp, mut fn_, mut n) = (0, 0, 0, 0);
    for d in docs {
        let Some(label) = d.label else { continue };
        n += 1;
        let pred = model.predict_proba(&d.token_ids, emb)? >= threshold;
        match (pred, label >= 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if n == 0 {
        return Err(SentimentError::EmptyEvalSet);
    }
    Ok(ClassifierMetrics::from_counts(tp, fp, fn_))
}

/// Fraction of labeled docs classified correctly at threshold 0.5.
pub fn accuracy<C: DocClassifier>(model: &C, docs: &[EncodedDoc], emb: &EmbeddingMatrix) -> Result<f64> {
    let mut hit = 0usize;
    let mut n = 0usize;
    for d in docs {
        let Some(label) = d.label else { continue };
        n += 1;
        if (model.predict_proba(&d.token_ids, emb)? >= 0.5) == (label >= 1) {
            hit += 1;
        }
    }
    if n == 0 {
        return Err(SentimentError::EmptyEvalSet);
    }
    Ok(hit as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    pub fn zeros(dim: usize) -> Self {
        Self { weights: vec![0.0; dim], bias: 0.0 }
    }

    pub fn proba(&self, features: &[f64]) -> f64 {
        sigmoid(self.logit(features))
    }

    fn logit(&self, features: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(features).map(|(w, x)| w * x).sum::<f64>()
    }
}

impl DocClassifier for LogisticModel {
    fn predict_proba(&self, ids: &[usize], emb: &EmbeddingMatrix) -> Result<f64> {
        if emb.dim() != self.weights.len() {
            return Err(SentimentError::ShapeMismatch(format!(
                "embedding dim {} but model expects {}",
                emb.dim(),
                self.weights.len()
            )));
        }
        Ok(self.proba(&mean_pooled(ids, emb)?))
    }
}

/// Mean cross-entropy and its gradient `(d_weights, d_bias)`.
pub fn logistic_loss_and_gradient(m: &LogisticModel, xs: &[(Vec<f64>, f64)]) -> (f64, Vec<f64>, f64) {
    let mut gw = vec![0.0; m.weights.len()];
    let mut gb = 0.0;
    let mut loss = 0.0;
    if xs.is_empty() {
        return (0.0, gw, gb);
    }
    let scale = 1.0 / xs.len() as f64;
    for (x, y) in xs {
        let z = m.logit(x);
        loss += bce_from_logit(z, *y);
        let dz = (sigmoid(z) - y) * scale;
        gb += dz;
        for (g, v) in gw.iter_mut().zip(x) {
            *g += dz * v;
        }
    }
    (loss * scale, gw, gb)
}

/// Logistic regression on mean-pooled embeddings, zero-initialised and
/// trained with seeded mini-batches of 32.
pub fn logistic_baseline(
    docs: &[EncodedDoc],
    emb: &EmbeddingMatrix,
    lr: f64,
    epochs: usize,
    seed: u64,
) -> Result<LogisticModel> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(SentimentError::InvalidConfig(format!("lr must be positive, got {lr}")));
    }
    let data = labeled(docs)?;
    let xs: Vec<(Vec<f64>, f64)> =
        data.iter().map(|(d, y)| mean_pooled(&d.token_ids, emb).map(|x| (x, *y))).collect::<Result<_>>()?;
    let mut m = LogisticModel::zeros(emb.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut batch = Vec::with_capacity(32);
    run_epochs(xs.len(), 32, epochs, &mut rng, |idx| {
        batch.clear();
        batch.extend(idx.iter().map(|&i| xs[i].clone()));
        let (loss, gw, gb) = logistic_loss_and_gradient(&m, &batch);
        for (w, g) in m.weights.iter_mut().zip(gw) {
            *w -= lr * g;
        }
        m.bias -= lr * gb;
        Ok(loss)
    })?;
    Ok(m)
}

pub fn group_by_date(docs: &[EncodedDoc]) -> BTreeMap<NaiveDate, Vec<EncodedDoc>> {
    let mut map: BTreeMap<NaiveDate, Vec<EncodedDoc>> = BTreeMap::new();
    for d in docs {
        map.entry(d.date).or_default().push(d.clone());
    }
    map
}

/// Mean headline probability per date.
pub fn daily_sentiment<C: DocClassifier>(
    model: &C,
    headlines_by_date: &BTreeMap<NaiveDate, Vec<EncodedDoc>>,
    emb: &EmbeddingMatrix,
) -> Result<SentimentSeries> {
    let mut dates = Vec::with_capacity(headlines_by_date.len());
    let mut scores = Vec::with_capacity(headlines_by_date.len());
    for (date, docs) in headlines_by_date {
        if docs.is_empty() {
            return Err(SentimentError::EmptyDay(*date));
        }
        let mut sum = 0.0;
        for d in docs {
            sum += model.predict_proba(&d.token_ids, emb)?;
        }
        dates.push(*date);
        scores.push((sum / docs.len() as f64).clamp(0.0, 1.0));
    }
    SentimentSeries::new(dates, scores)
}

impl CnnWeights {
    /// Shape header `filters kernel_width embed_dim`, then one line each for
    /// kernels, conv bias, dense weights and dense bias.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {} {}", self.filters, self.kernel_width, self.embed_dim).unwrap();
        for row in [&self.conv_kernels, &self.conv_bias, &self.dense_w] {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(s, "{}", line.join(" ")).unwrap();
        }
        writeln!(s, "{:e}", self.dense_b).unwrap();
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut next = |what: &str| lines.next().ok_or_else(|| SentimentError::Parse(format!("missing {what}")));
        let nums = |line: &str| -> Result<Vec<f64>> {
            line.split_whitespace().map(|t| t.parse::<f64>().map_err(|e| SentimentError::Parse(e.to_string()))).collect()
        };
        let shape: Vec<usize> = next("header")?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| SentimentError::Parse("bad header".into())))
            .collect::<Result<_>>()?;
        let [filters, kernel_width, embed_dim] = shape[..] else {
            return Err(SentimentError::Parse("header needs three sizes".into()));
        };
        let mut w = Self::zeros(filters, kernel_width, embed_dim);
        w.conv_kernels = nums(next("kernels")?)?;
        w.conv_bias = nums(next("conv bias")?)?;
        w.dense_w = nums(next("dense weights")?)?;
        let b = nums(next("dense bias")?)?;
        if w.conv_kernels.len() != filters * kernel_width * embed_dim
            || w.conv_bias.len() != filters
            || w.dense_w.len() != filters
            || b.len() != 1
        {
            return Err(SentimentError::Parse("row lengths do not match header".into()));
        }
        w.dense_b = b[0];
        Ok(w)
    }
}
