//! Skip-gram word embeddings trained with negative sampling.
//!
//! For a (center, context) pair with sampled noise words `n_1..n_k` the loss is
//!
//! ```text
//! -ln s(u_ctx . v_c) - sum_k ln s(-u_nk . v_c)
//! ```
//!
//! where `v` rows are input vectors, `u` rows output vectors and `s` the
//! logistic function. Noise words are drawn from unigram counts raised to
//! 0.75. The learning rate decays linearly to `1e-4 * lr` over all pairs.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::textprep::{Vocabulary, PAD};

#[derive(Debug, Error, PartialEq)]
pub enum W2vError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("token id {id} out of range for vocabulary of {size}")]
    InvalidId { id: usize, size: usize },
    #[error("embedding row {0} is all zeros")]
    ZeroVector(usize),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, W2vError>;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    rows: usize,
    input: Vec<f64>,
    output: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Self { dim, rows, input: vec![0.0; rows * dim], output: vec![0.0; rows * dim] }
    }

    /// Builds a matrix from explicit input rows (output rows zero).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(W2vError::InvalidConfig("rows must be nonempty and of equal length".into()));
        }
        let mut m = Self::zeros(rows.len(), dim);
        for (i, r) in rows.iter().enumerate() {
            m.input[i * dim..(i + 1) * dim].copy_from_slice(r);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn vector(&self, id: usize) -> &[f64] {
        &self.input[id * self.dim..(id + 1) * self.dim]
    }

    pub fn output_vector(&self, id: usize) -> &[f64] {
        &self.output[id * self.dim..(id + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|v| v.is_finite())
    }

    /// First line `vocab_size dim`, then `token v_1 .. v_dim` per row.
    pub fn to_text(&self, vocab: &Vocabulary) -> String {
        let mut s = String::new();
        writeln!(s, "{} {}", self.rows, self.dim).unwrap();
        for id in 0..self.rows {
            s.push_str(vocab.token(id).unwrap_or("?"));
            for v in self.vector(id) {
                write!(s, " {v:e}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Parses [`EmbeddingMatrix::to_text`] output; returns the matrix (input
    /// rows only) and the row tokens.
    pub fn from_text(text: &str) -> Result<(Self, Vec<String>)> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| W2vError::Parse("empty document".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| W2vError::Parse(format!("header: {e}"))))
            .collect::<Result<_>>()?;
        let [rows, dim] = dims[..] else {
            return Err(W2vError::Parse(format!("bad header {header:?}")));
        };
        let mut m = Self::zeros(rows, dim);
        let mut tokens = Vec::with_capacity(rows);
        for id in 0..rows {
            let line = lines.next().ok_or_else(|| W2vError::Parse(format!("missing row {id}")))?;
            let mut parts = line.split(' ');
            tokens.push(parts.next().unwrap_or_default().to_string());
            let vals: Vec<f64> = parts
                .map(|t| t.parse::<f64>().map_err(|e| W2vError::Parse(format!("row {id}: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != dim {
                return Err(W2vError::Parse(format!("row {id} has {} values", vals.len())));
            }
            m.input[id * dim..(id + 1) * dim].copy_from_slice(&vals);
        }
        Ok((m, tokens))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct W2vConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for W2vConfig {
    fn default() -> Self {
        Self { dim: 100, window: 4, negatives: 5, epochs: 5, lr: 0.025, seed: 1 }
    }
}

impl W2vConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 {
            return Err(W2vError::InvalidConfig("dim, window and negatives must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(W2vError::InvalidConfig(format!("lr must be positive, got {}", self.lr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Word2VecRun {
    pub embeddings: EmbeddingMatrix,
    /// Mean pair loss per epoch.
    pub epoch_loss: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-ln s(x)`, stable for large |x|.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 { (-x).exp().ln_1p() } else { -x + x.exp().ln_1p() }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Loss and gradients for one positive pair and its noise words.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradients {
    pub loss: f64,
    pub d_center: Vec<f64>,
    pub d_context: Vec<f64>,
    pub d_negatives: Vec<Vec<f64>>,
}

pub fn pair_loss_and_gradients(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> PairGradients {
    let mut d_center = vec![0.0; center.len()];
    let s = dot(context, center);
    let mut loss = neg_log_sigmoid(s);
    let g = sigmoid(s) - 1.0;
    for (dc, u) in d_center.iter_mut().zip(context) {
        *dc += g * u;
    }
    let d_context = center.iter().map(|v| g * v).collect();
    let mut d_negatives = Vec::with_capacity(negatives.len());
    for u in negatives {
        let s = dot(u, center);
        loss += neg_log_sigmoid(-s);
        let g = sigmoid(s);
        for (dc, x) in d_center.iter_mut().zip(u) {
            *dc += g * x;
        }
        d_negatives.push(center.iter().map(|v| g * v).collect());
    }
    PairGradients { loss, d_center, d_context, d_negatives }
}

struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(counts: &[usize]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let r = rng.random::<f64>() * total;
        self.cumulative.partition_point(|c| *c <= r).min(self.cumulative.len() - 1)
    }
}

pub fn train_embeddings(docs: &[Vec<usize>], vocab_size: usize, cfg: &W2vConfig) -> Result<Word2VecRun> {
    cfg.validate()?;
    if docs.is_empty() {
        return Err(W2vError::EmptyCorpus);
    }
    if let Some(&id) = docs.iter().flatten().find(|&&id| id >= vocab_size) {
        return Err(W2vError::InvalidId { id, size: vocab_size });
    }
    let sentences: Vec<Vec<usize>> =
        docs.iter().map(|d| d.iter().copied().filter(|&t| t != PAD).collect::<Vec<_>>()).filter(|d| !d.is_empty()).collect();
    if sentences.is_empty() {
        return Err(W2vError::EmptyCorpus);
    }

    let dim = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut m = EmbeddingMatrix::zeros(vocab_size, dim);
    let bound = 0.5 / dim as f64;
    for v in m.input.iter_mut() {
        *v = rng.random_range(-bound..bound);
    }
    m.input[PAD * dim..(PAD + 1) * dim].fill(0.0);

    let mut counts = vec![0usize; vocab_size];
    for &t in sentences.iter().flatten() {
        counts[t] += 1;
    }
    let noise = NoiseTable::new(&counts);

    let pairs_per_epoch: usize = sentences
        .iter()
        .map(|s| (0..s.len()).map(|c| c.min(cfg.window) + (s.len() - 1 - c).min(cfg.window)).sum::<usize>())
        .sum();
    let total_pairs = (pairs_per_epoch * cfg.epochs).max(1) as f64;

    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    let mut processed = 0usize;
    let mut grad_center = vec![0.0; dim];
    let mut negs = Vec::with_capacity(cfg.negatives);
    for _ in 0..cfg.epochs {
        let mut loss_sum = 0.0;
        let mut n_pairs = 0usize;
        for sent in &sentences {
            for (c, &center) in sent.iter().enumerate() {
                let lo = c.saturating_sub(cfg.window);
                let hi = (c + cfg.window).min(sent.len() - 1);
                for (o, &context) in sent.iter().enumerate().take(hi + 1).skip(lo) {
                    if o == c {
                        continue;
                    }
                    let lr = cfg.lr * (1.0 - processed as f64 / total_pairs).max(1e-4);
                    processed += 1;

                    negs.clear();
                    for _ in 0..cfg.negatives {
                        let t = noise.sample(&mut rng);
                        if t != context {
                            negs.push(t);
                        }
                    }

                    grad_center.fill(0.0);
                    let v_off = center * dim;
                    let mut pair_loss = 0.0;
                    for (target, label) in std::iter::once((context, 1.0)).chain(negs.iter().map(|&t| (t, 0.0))) {
                        let u_off = target * dim;
                        let s = dot(&m.output[u_off..u_off + dim], &m.input[v_off..v_off + dim]);
                        pair_loss += if label == 1.0 { neg_log_sigmoid(s) } else { neg_log_sigmoid(-s) };
                        let g = sigmoid(s) - label;
                        for k in 0..dim {
                            grad_center[k] += g * m.output[u_off + k];
                            m.output[u_off + k] -= lr * g * m.input[v_off + k];
                        }
                    }
                    if center != PAD {
                        for k in 0..dim {
                            m.input[v_off + k] -= lr * grad_center[k];
                        }
                    }
                    loss_sum += pair_loss;
                    n_pairs += 1;
                }
            }
        }
        let mean = if n_pairs > 0 { loss_sum / n_pairs as f64 } else { 0.0 };
        if !mean.is_finite() {
            return Err(W2vError::InvalidConfig("training loss became non-finite; lower lr".into()));
        }
        epoch_loss.push(mean);
    }
    Ok(Word2VecRun { embeddings: m, epoch_loss })
}

fn check_id(e: &EmbeddingMatrix, id: usize) -> Result<()> {
    if id >= e.rows {
        return Err(W2vError::InvalidId { id, size: e.rows });
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn cosine_similarity(e: &EmbeddingMatrix, a: usize, b: usize) -> Result<f64> {
    check_id(e, a)?;
    check_id(e, b)?;
    let (va, vb) = (e.vector(a), e.vector(b));
    let (na, nb) = (norm(va), norm(vb));
    if na == 0.0 {
        return Err(W2vError::ZeroVector(a));
    }
    if nb == 0.0 {
        return Err(W2vError::ZeroVector(b));
    }
    Ok((dot(va, vb) / (na * nb)).clamp(-1.0, 1.0))
}

/// The `k` most similar rows to `a` (excluding `a` and all-zero rows), by
/// descending cosine with ties broken by ascending id.
pub fn nearest_neighbors(e: &EmbeddingMatrix, a: usize, k: usize) -> Result<Vec<(usize, f64)>> {
    check_id(e, a)?;
    if k == 0 {
        return Ok(Vec::new());
    }
    if norm(e.vector(a)) == 0.0 {
        return Err(W2vError::ZeroVector(a));
    }
    let mut sims: Vec<(usize, f64)> = (0..e.rows)
        .filter(|&b| b != a && norm(e.vector(b)) > 0.0)
        .map(|b| cosine_similarity(e, a, b).map(|s| (b, s)))
        .collect::<Result<_>>()?;
    sims.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    sims.truncate(k);
    Ok(sims)
}
