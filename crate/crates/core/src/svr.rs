//! epsilon-insensitive support vector regression with an RBF kernel.
//!
//! The dual is solved over the `2n` variables `(alpha, alpha*)` by sequential
//! minimal optimisation with second-order working-set selection. The model
//! keeps `beta_i = alpha_i - alpha*_i` for points with nonzero coefficient.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SvrError {
    #[error("no training data")]
    DegenerateInput,
    #[error("non-finite target at index {0}")]
    NonFiniteTarget(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyper(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SvrError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrHyperParams {
    pub c: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl Default for SvrHyperParams {
    fn default() -> Self {
        Self { c: 2.0, epsilon: 0.001, gamma: 0.001 }
    }
}

impl SvrHyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(SvrError::InvalidHyper(format!("C must be positive, got {}", self.c)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(SvrError::InvalidHyper(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(SvrError::InvalidHyper(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Stop when the maximal KKT violating pair is below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-3, max_iter: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub converged: bool,
    /// `0.5 beta' K beta - y' beta + eps |beta|_1` at the returned solution.
    pub dual_objective: f64,
    /// `beta_i` for every training point, in input order.
    pub coefficients: Vec<f64>,
    /// Largest KKT violation over the training set, in target units.
    pub max_kkt_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub support_inputs: Vec<Vec<f64>>,
    pub dual_coeffs: Vec<f64>,
    pub bias: f64,
    pub hyper: SvrHyperParams,
    dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub c_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    pub folds: usize,
}

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(SvrError::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(rbf(a, b, gamma))
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

fn check_inputs(xs: &[Vec<f64>], ys: &[f64]) -> Result<usize> {
    if xs.is_empty() {
        return Err(SvrError::DegenerateInput);
    }
    if xs.len() != ys.len() {
        return Err(SvrError::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    let dim = xs[0].len();
    if let Some(x) = xs.iter().find(|x| x.len() != dim) {
        return Err(SvrError::DimensionMismatch { expected: dim, got: x.len() });
    }
    if let Some(i) = xs.iter().position(|x| x.iter().any(|v| !v.is_finite())) {
        return Err(SvrError::InvalidHyper(format!("non-finite input at index {i}")));
    }
    if let Some(i) = ys.iter().position(|y| !y.is_finite()) {
        return Err(SvrError::NonFiniteTarget(i));
    }
    Ok(dim)
}

pub fn kernel_matrix(xs: &[Vec<f64>], gamma: f64) -> Vec<f64> {
    let n = xs.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = rbf(&xs[i], &xs[j], gamma);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// `0.5 beta' K beta - y' beta + eps |beta|_1`, with `K` row-major `n x n`.
pub fn dual_objective(k: &[f64], ys: &[f64], beta: &[f64], epsilon: f64) -> f64 {
    let n = ys.len();
    let mut quad = 0.0;
    for i in 0..n {
        if beta[i] == 0.0 {
            continue;
        }
        let row = &k[i * n..(i + 1) * n];
        quad += beta[i] * row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>();
    }
    0.5 * quad - ys.iter().zip(beta).map(|(y, b)| y * b).sum::<f64>() + epsilon * beta.iter().map(|b| b.abs()).sum::<f64>()
}

struct Solution {
    bias: f64,
    stats: SolveStats,
}

/// For residual `r = y - f(x)`: zero coefficients need `|r| <= eps`, free
/// positive (negative) coefficients need `r = eps` (`r = -eps`), and
/// coefficients at `+C` (`-C`) need `r >= eps` (`r <= -eps`).
fn kkt_violation(k: &[f64], ys: &[f64], beta: &[f64], bias: f64, hyper: &SvrHyperParams) -> f64 {
    let n = ys.len();
    let (c, eps) = (hyper.c, hyper.epsilon);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let f = k[i * n..(i + 1) * n].iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() + bias;
        let r = ys[i] - f;
        let b = beta[i];
        let v = if b == 0.0 {
            (r.abs() - eps).max(0.0)
        } else if b >= c {
            (eps - r).max(0.0)
        } else if b <= -c {
            (r + eps).max(0.0)
        } else if b > 0.0 {
            (r - eps).abs()
        } else {
            (r + eps).abs()
        };
        worst = worst.max(v);
    }
    worst
}

fn solve_dual(k: &[f64], ys: &[f64], hyper: &SvrHyperParams, opts: &SolverOptions) -> Solution {
    const TAU: f64 = 1e-12;
    let n = ys.len();
    let l = 2 * n;
    let c = hyper.c;
    let sign = |s: usize| if s < n { 1.0 } else { -1.0 };
    let kk = |s: usize, t: usize| k[(s % n) * n + (t % n)];

    let mut a = vec![0.0; l];
    let mut g: Vec<f64> = (0..l)
        .map(|s| if s < n { hyper.epsilon - ys[s] } else { hyper.epsilon + ys[s - n] })
        .collect();

    let in_up = |s: usize, a: &[f64]| if s < n { a[s] < c } else { a[s] > 0.0 };
    let in_low = |s: usize, a: &[f64]| if s < n { a[s] > 0.0 } else { a[s] < c };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for s in 0..l {
            if in_up(s, &a) {
                let v = -sign(s) * g[s];
                if v >= gmax {
                    gmax = v;
                    i = s;
                }
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut obj_min = f64::INFINITY;
        if i != usize::MAX {
            for t in 0..l {
                if !in_low(t, &a) {
                    continue;
                }
                let zg = sign(t) * g[t];
                if zg >= gmax2 {
                    gmax2 = zg;
                }
                let b = gmax + zg;
                if b > 0.0 {
                    let quad = kk(i, i) + kk(t, t) - 2.0 * kk(i, t);
                    let quad = if quad > 0.0 { quad } else { TAU };
                    let obj = -(b * b) / quad;
                    if obj <= obj_min {
                        obj_min = obj;
                        j = t;
                    }
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax + gmax2 < opts.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (zi, zj) = (sign(i), sign(j));
        let q_ij = zi * zj * kk(i, j);
        let (old_i, old_j) = (a[i], a[j]);
        if zi != zj {
            let quad = kk(i, i) + kk(j, j) + 2.0 * q_ij;
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-g[i] - g[j]) / quad;
            let diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if diff > 0.0 {
                if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if diff > 0.0 {
                if a[i] > c {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if a[j] > c {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            let quad = kk(i, i) + kk(j, j) - 2.0 * q_ij;
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (g[i] - g[j]) / quad;
            let sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if sum > c {
                if a[i] > c {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if a[j] < 0.0 {
                a[j] = 0.0;
                a[i] = sum;
            }
            if sum > c {
                if a[j] > c {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = sum;
            }
        }

        let (di, dj) = (a[i] - old_i, a[j] - old_j);
        let (ri, rj) = (i % n, j % n);
        for t in 0..l {
            let zt = sign(t);
            let tn = t % n;
            g[t] += zt * (zi * di * k[ri * n + tn] + zj * dj * k[rj * n + tn]);
        }
    }

    // bias: average over free variables, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for s in 0..l {
        let z = sign(s);
        let zg = z * g[s];
        if a[s] >= c {
            if z < 0.0 { ub = ub.min(zg) } else { lb = lb.max(zg) }
        } else if a[s] <= 0.0 {
            if z > 0.0 { ub = ub.min(zg) } else { lb = lb.max(zg) }
        } else {
            n_free += 1;
            sum_free += zg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { 0.5 * (ub + lb) };

    let beta: Vec<f64> = (0..n).map(|i| a[i] - a[i + n]).collect();
    let bias = -rho;
    let dual_objective = dual_objective(k, ys, &beta, hyper.epsilon);
    let max_kkt_violation = kkt_violation(k, ys, &beta, bias, hyper);
    Solution {
        bias,
        stats: SolveStats { iterations, converged, dual_objective, coefficients: beta, max_kkt_violation },
    }
}

pub fn fit(xs: &[Vec<f64>], ys: &[f64], hyper: &SvrHyperParams) -> Result<SvrModel> {
    fit_with_options(xs, ys, hyper, &SolverOptions::default()).map(|(m, _)| m)
}

pub fn fit_with_options(
    xs: &[Vec<f64>],
    ys: &[f64],
    hyper: &SvrHyperParams,
    opts: &SolverOptions,
) -> Result<(SvrModel, SolveStats)> {
    hyper.validate()?;
    let dim = check_inputs(xs, ys)?;
    let k = kernel_matrix(xs, hyper.gamma);
    let sol = solve_dual(&k, ys, hyper, opts);
    if !sol.stats.converged {
        tracing::warn!(iterations = sol.stats.iterations, "SVR solver hit the iteration cap");
    }
    let (support_inputs, dual_coeffs) = xs
        .iter()
        .zip(&sol.stats.coefficients)
        .filter(|(_, b)| **b != 0.0)
        .map(|(x, b)| (x.clone(), *b))
        .unzip();
    Ok((SvrModel { support_inputs, dual_coeffs, bias: sol.bias, hyper: *hyper, dim }, sol.stats))
}

impl SvrModel {
    /// A model with no support vectors.
    pub fn constant(bias: f64, dim: usize, hyper: SvrHyperParams) -> Self {
        Self { support_inputs: Vec::new(), dual_coeffs: Vec::new(), bias, hyper, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(SvrError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self
            .support_inputs
            .iter()
            .zip(&self.dual_coeffs)
            .map(|(s, b)| b * rbf(s, x, self.hyper.gamma))
            .sum::<f64>()
            + self.bias)
    }

    pub fn predict_many(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "c {:e}", self.hyper.c).unwrap();
        writeln!(s, "epsilon {:e}", self.hyper.epsilon).unwrap();
        writeln!(s, "gamma {:e}", self.hyper.gamma).unwrap();
        writeln!(s, "bias {:e}", self.bias).unwrap();
        writeln!(s, "dim {}", self.dim).unwrap();
        writeln!(s, "support_vectors {}", self.dual_coeffs.len()).unwrap();
        for (x, b) in self.support_inputs.iter().zip(&self.dual_coeffs) {
            for v in x {
                write!(s, "{v:e} ").unwrap();
            }
            writeln!(s, "{b:e}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| SvrError::Parse(format!("missing {name}")))?;
            let (k, v) = line.split_once(' ').ok_or_else(|| SvrError::Parse(format!("bad line {line:?}")))?;
            if k != name {
                return Err(SvrError::Parse(format!("expected {name}, found {k}")));
            }
            Ok(v.trim().to_string())
        };
        let num = |v: String| v.parse::<f64>().map_err(|e| SvrError::Parse(format!("{v:?}: {e}")));
        let c = num(field("c")?)?;
        let epsilon = num(field("epsilon")?)?;
        let gamma = num(field("gamma")?)?;
        let bias = num(field("bias")?)?;
        let dim = num(field("dim")?)? as usize;
        let m = num(field("support_vectors")?)? as usize;
        let hyper = SvrHyperParams { c, epsilon, gamma };
        hyper.validate()?;
        let mut model = SvrModel::constant(bias, dim, hyper);
        for _ in 0..m {
            let line = lines.next().ok_or_else(|| SvrError::Parse("missing support vector row".into()))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| SvrError::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != dim + 1 {
                return Err(SvrError::Parse(format!("row has {} values, expected {}", vals.len(), dim + 1)));
            }
            model.support_inputs.push(vals[..dim].to_vec());
            model.dual_coeffs.push(vals[dim]);
        }
        Ok(model)
    }
}

pub fn predict(model: &SvrModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Contiguous fold boundaries `[start, end)`.
fn fold_ranges(n: usize, folds: usize) -> Vec<(usize, usize)> {
    (0..folds).map(|f| (f * n / folds, (f + 1) * n / folds)).collect()
}

/// Mean over folds of the held-out RMSE, folds being contiguous blocks.
pub fn cv_score(xs: &[Vec<f64>], ys: &[f64], hyper: &SvrHyperParams, folds: usize) -> Result<f64> {
    check_inputs(xs, ys)?;
    if folds < 2 || folds > xs.len() {
        return Err(SvrError::InvalidGrid(format!("folds must lie in [2, {}], got {folds}", xs.len())));
    }
    let mut total = 0.0;
    for (lo, hi) in fold_ranges(xs.len(), folds) {
        let train_x: Vec<Vec<f64>> = xs[..lo].iter().chain(&xs[hi..]).cloned().collect();
        let train_y: Vec<f64> = ys[..lo].iter().chain(&ys[hi..]).copied().collect();
        let model = fit(&train_x, &train_y, hyper)?;
        let mse = (lo..hi)
            .map(|i| model.predict(&xs[i]).map(|p| (p - ys[i]).powi(2)))
            .sum::<Result<f64>>()?
            / (hi - lo) as f64;
        total += mse.sqrt();
    }
    Ok(total / folds as f64)
}

/// Exhaustive grid search; ties keep the earliest grid point in
/// `C x gamma x epsilon` order.
pub fn grid_search_cv(xs: &[Vec<f64>], ys: &[f64], grid: &GridSpec) -> Result<(SvrHyperParams, f64)> {
    check_inputs(xs, ys)?;
    if grid.c_grid.is_empty() || grid.gamma_grid.is_empty() || grid.epsilon_grid.is_empty() {
        return Err(SvrError::InvalidGrid("all grids must be nonempty".into()));
    }
    if grid.folds < 2 || grid.folds > xs.len() {
        return Err(SvrError::DegenerateInput);
    }
    let points: Vec<SvrHyperParams> = grid
        .c_grid
        .iter()
        .flat_map(|&c| grid.gamma_grid.iter().flat_map(move |&gamma| grid.epsilon_grid.iter().map(move |&epsilon| SvrHyperParams { c, epsilon, gamma })))
        .collect();
    for p in &points {
        p.validate()?;
    }
    let scores: Vec<f64> = points
        .par_iter()
        .map(|h| cv_score(xs, ys, h, grid.folds))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = i;
        }
    }
    Ok((points[best], scores[best]))
}

/// `x_t = (v_{t-1}, ..., v_{t-lags})`, `y_t = v_t` for `t >= lags`.
pub fn lagged_features(values: &[f64], lags: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if lags == 0 || values.len() <= lags {
        return (Vec::new(), Vec::new());
    }
    (lags..values.len())
        .map(|t| ((1..=lags).map(|k| values[t - k]).collect(), values[t]))
        .unzip()
}
