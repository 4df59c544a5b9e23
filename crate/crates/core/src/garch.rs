//! ARCH(q) / GARCH(p,q) conditional variance with Gaussian innovations.
//!
//! ```text
//! eps_t     = sigma_t * z_t,   z_t ~ N(0, 1)
//! sigma2_t  = alpha0 + sum_{i=1..q} alpha_i eps2_{t-i} + sum_{j=1..p} beta_j sigma2_{t-j}
//! ```
//!
//! Pre-sample `sigma2` and `eps2` are set to the (population) sample variance
//! of the input. Fitting maximises the Gaussian likelihood over an
//! unconstrained parameterisation, so every iterate is a valid parameter set:
//! `alpha0 = exp(u0)` and the `q + p` persistence weights come from an
//! additive-logistic map onto `{w >= 0, sum w < 1 - 1e-6}`.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::optim::{nelder_mead, NelderMeadOptions};

/// Upper bound on `sum(alphas) + sum(betas)`.
/// Half the 95% quantile of chi-square(1): log-likelihood gain over the
/// constant-variance model needed to report a conditional fit.
const LR_MARGIN: f64 = 1.920_729_410_347_062;

pub const STATIONARITY_LIMIT: f64 = 1.0 - 1e-6;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Error, PartialEq)]
pub enum GarchError {
    #[error("series too short: need at least {need} observations, got {got}")]
    SeriesTooShort { need: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("non-finite likelihood")]
    NonFiniteLikelihood,
    #[error("optimizer diverged")]
    OptimizerDiverged,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GarchError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GarchOrder {
    /// Lags of the conditional variance.
    pub p: usize,
    /// Lags of the squared innovation.
    pub q: usize,
}

impl GarchOrder {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(GarchError::InvalidOrder("q must be at least 1".into()));
        }
        Ok(Self { p, q })
    }

    pub fn garch11() -> Self {
        Self { p: 1, q: 1 }
    }

    fn max_lag(&self) -> usize {
        self.p.max(self.q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarchParams {
    pub alpha0: f64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl GarchParams {
    pub fn new(alpha0: f64, alphas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        let p = Self { alpha0, alphas, betas };
        p.validate()?;
        Ok(p)
    }

    pub fn garch11(alpha0: f64, alpha1: f64, beta1: f64) -> Result<Self> {
        Self::new(alpha0, vec![alpha1], vec![beta1])
    }

    pub fn order(&self) -> GarchOrder {
        GarchOrder { p: self.betas.len(), q: self.alphas.len() }
    }

    pub fn persistence(&self) -> f64 {
        self.alphas.iter().sum::<f64>() + self.betas.iter().sum::<f64>()
    }

    /// `alpha0 / (1 - persistence)`.
    pub fn unconditional_variance(&self) -> f64 {
        self.alpha0 / (1.0 - self.persistence())
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(GarchError::InvalidParams("at least one ARCH coefficient required".into()));
        }
        if !(self.alpha0.is_finite() && self.alpha0 > 0.0) {
            return Err(GarchError::InvalidParams(format!("alpha0 must be positive, got {}", self.alpha0)));
        }
        if let Some(c) = self.alphas.iter().chain(&self.betas).find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(GarchError::InvalidParams(format!("coefficients must be nonnegative, got {c}")));
        }
        let s = self.persistence();
        if s > STATIONARITY_LIMIT + 4.0 * f64::EPSILON {
            return Err(GarchError::InvalidParams(format!("persistence {s} violates stationarity")));
        }
        Ok(())
    }

    /// Plain-text `key=value` document.
    pub fn to_kv_string(&self, log_likelihood: Option<f64>) -> String {
        let mut s = String::new();
        let o = self.order();
        writeln!(s, "order.p={}", o.p).unwrap();
        writeln!(s, "order.q={}", o.q).unwrap();
        writeln!(s, "alpha0={:e}", self.alpha0).unwrap();
        for (i, a) in self.alphas.iter().enumerate() {
            writeln!(s, "alpha[{}]={:e}", i + 1, a).unwrap();
        }
        for (j, b) in self.betas.iter().enumerate() {
            writeln!(s, "beta[{}]={:e}", j + 1, b).unwrap();
        }
        if let Some(ll) = log_likelihood {
            writeln!(s, "loglik={ll:e}").unwrap();
        }
        s
    }

    /// Inverse of [`GarchParams::to_kv_string`]; returns the params and the
    /// log-likelihood if present.
    pub fn from_kv_str(text: &str) -> Result<(Self, Option<f64>)> {
        let mut p = None;
        let mut q = None;
        let mut alpha0 = None;
        let mut alphas = std::collections::BTreeMap::new();
        let mut betas = std::collections::BTreeMap::new();
        let mut loglik = None;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| GarchError::Parse(format!("{v:?}: {e}")));
        let idx = |k: &str, prefix: &str| -> Result<usize> {
            k[prefix.len()..]
                .trim_end_matches(']')
                .parse::<usize>()
                .map_err(|e| GarchError::Parse(format!("{k:?}: {e}")))
        };
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line.split_once('=').ok_or_else(|| GarchError::Parse(format!("missing '=' in {line:?}")))?;
            let k = k.trim();
            match k {
                "order.p" => p = Some(num(v)? as usize),
                "order.q" => q = Some(num(v)? as usize),
                "alpha0" => alpha0 = Some(num(v)?),
                "loglik" => loglik = Some(num(v)?),
                _ if k.starts_with("alpha[") => {
                    alphas.insert(idx(k, "alpha[")?, num(v)?);
                }
                _ if k.starts_with("beta[") => {
                    betas.insert(idx(k, "beta[")?, num(v)?);
                }
                _ => return Err(GarchError::Parse(format!("unknown key {k:?}"))),
            }
        }
        let (p, q) = (p.ok_or(GarchError::Parse("order.p missing".into()))?, q.ok_or(GarchError::Parse("order.q missing".into()))?);
        let alphas: Vec<f64> = (1..=q).map(|i| alphas.get(&i).copied().ok_or(GarchError::Parse(format!("alpha[{i}] missing")))).collect::<Result<_>>()?;
        let betas: Vec<f64> = (1..=p).map(|j| betas.get(&j).copied().ok_or(GarchError::Parse(format!("beta[{j}] missing")))).collect::<Result<_>>()?;
        let params = Self::new(alpha0.ok_or(GarchError::Parse("alpha0 missing".into()))?, alphas, betas)?;
        Ok((params, loglik))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarchFit {
    pub params: GarchParams,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative tolerance on the spread of objective values in the simplex.
    pub f_tol: f64,
    pub x_tol: f64,
    /// Extra Nelder-Mead restarts from the incumbent.
    pub restarts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 5000, f_tol: 1e-10, x_tol: 1e-7, restarts: 3 }
    }
}

fn population_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Variance recursion with explicit pre-sample value; output `[t]` depends on
/// `eps[..t]` only.
fn variance_path(eps: &[f64], params: &GarchParams, presample: f64) -> Vec<f64> {
    let n = eps.len();
    let mut sig = Vec::with_capacity(n);
    for t in 0..n {
        let mut s = params.alpha0;
        for (i, a) in params.alphas.iter().enumerate() {
            let lag = i + 1;
            let e2 = if t >= lag { eps[t - lag] * eps[t - lag] } else { presample };
            s += a * e2;
        }
        for (j, b) in params.betas.iter().enumerate() {
            let lag = j + 1;
            let s2 = if t >= lag { sig[t - lag] } else { presample };
            s += b * s2;
        }
        sig.push(s);
    }
    sig
}

fn check_len(eps: &[f64], params: &GarchParams) -> Result<()> {
    let need = params.order().max_lag() + 1;
    if eps.len() < need {
        return Err(GarchError::SeriesTooShort { need, got: eps.len() });
    }
    Ok(())
}

pub fn conditional_variances(eps: &[f64], params: &GarchParams) -> Result<Vec<f64>> {
    params.validate()?;
    check_len(eps, params)?;
    Ok(variance_path(eps, params, population_variance(eps)))
}

fn nll_from_path(eps: &[f64], sig: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (e, s) in eps.iter().zip(sig) {
        if !(*s > 0.0 && s.is_finite()) {
            return Err(GarchError::NonFiniteLikelihood);
        }
        acc += LN_2PI + s.ln() + e * e / s;
    }
    if !acc.is_finite() {
        return Err(GarchError::NonFiniteLikelihood);
    }
    Ok(0.5 * acc)
}

/// `0.5 * sum_t [ln(2 pi) + ln sigma2_t + eps_t^2 / sigma2_t]`.
pub fn negative_log_likelihood(eps: &[f64], params: &GarchParams) -> Result<f64> {
    let sig = conditional_variances(eps, params)?;
    nll_from_path(eps, &sig)
}

/// `sigma2_{T+1}` given the whole sample.
pub fn forecast_one_step(eps: &[f64], params: &GarchParams) -> Result<f64> {
    let sig = conditional_variances(eps, params)?;
    let n = eps.len();
    let mut s = params.alpha0;
    for (i, a) in params.alphas.iter().enumerate() {
        let e = eps[n - 1 - i];
        s += a * e * e;
    }
    for (j, b) in params.betas.iter().enumerate() {
        s += b * sig[n - 1 - j];
    }
    Ok(s)
}

/// One-step-ahead variance forecasts for each element of `future`, with the
/// recursion started on `history` (pre-sample = variance of `history`) and
/// run forward through the realised `future` values.
pub fn rolling_forecasts(history: &[f64], future: &[f64], params: &GarchParams) -> Result<Vec<f64>> {
    params.validate()?;
    check_len(history, params)?;
    let all: Vec<f64> = history.iter().chain(future).copied().collect();
    let sig = variance_path(&all, params, population_variance(history));
    Ok(sig[history.len()..].to_vec())
}

/// Simulated innovations; the first 500 draws are discarded as burn-in.
pub fn simulate(params: &GarchParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    const BURN_IN: usize = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uncond = params.unconditional_variance();
    let o = params.order();
    let lags = o.max_lag();
    let mut eps: Vec<f64> = vec![uncond.sqrt(); lags];
    let mut sig: Vec<f64> = vec![uncond; lags];
    for _ in 0..(n + BURN_IN) {
        let t = eps.len();
        let mut s = params.alpha0;
        for (i, a) in params.alphas.iter().enumerate() {
            s += a * eps[t - 1 - i] * eps[t - 1 - i];
        }
        for (j, b) in params.betas.iter().enumerate() {
            s += b * sig[t - 1 - j];
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        sig.push(s);
        eps.push(s.sqrt() * z);
    }
    Ok(eps.split_off(lags + BURN_IN))
}

/// Maps unconstrained coordinates to parameters.
fn decode(u: &[f64], order: GarchOrder) -> GarchParams {
    let k = order.q + order.p;
    let w = &u[1..=k];
    // logistic over (w_1..w_k, 0)
    let m = w.iter().copied().fold(0.0_f64, f64::max);
    let denom = (-m).exp() + w.iter().map(|x| (x - m).exp()).sum::<f64>();
    let coeffs: Vec<f64> = w.iter().map(|x| STATIONARITY_LIMIT * (x - m).exp() / denom).collect();
    GarchParams {
        alpha0: u[0].exp(),
        alphas: coeffs[..order.q].to_vec(),
        betas: coeffs[order.q..].to_vec(),
    }
}

fn encode(params: &GarchParams) -> Vec<f64> {
    const FLOOR: f64 = 1e-8;
    let coeffs: Vec<f64> = params
        .alphas
        .iter()
        .chain(&params.betas)
        .map(|c| (c / STATIONARITY_LIMIT).max(FLOOR))
        .collect();
    let slack = (1.0 - coeffs.iter().sum::<f64>()).max(FLOOR);
    let mut u = vec![params.alpha0.ln()];
    u.extend(coeffs.iter().map(|c| (c / slack).ln()));
    u
}

/// Documented starting point: persistence 0.95 split as 0.05 on the ARCH
/// terms and 0.90 on the GARCH terms (0.5 on ARCH terms when `p = 0`), with
/// `alpha0` matching the sample variance.
pub fn initial_params(eps: &[f64], order: GarchOrder) -> GarchParams {
    let var = population_variance(eps).max(1e-300);
    let (a_tot, b_tot) = if order.p == 0 { (0.5, 0.0) } else { (0.05, 0.90) };
    GarchParams {
        alpha0: var * (1.0 - a_tot - b_tot),
        alphas: vec![a_tot / order.q as f64; order.q],
        betas: vec![if order.p == 0 { 0.0 } else { b_tot / order.p as f64 }; order.p],
    }
}

/// Maximum-likelihood fit by Nelder-Mead on the unconstrained coordinates.
pub fn fit_mle(eps: &[f64], order: GarchOrder, opts: &FitOptions) -> Result<GarchFit> {
    let order = GarchOrder::new(order.p, order.q)?;
    let need = (order.max_lag() + 1).max(2 * (order.p + order.q) + 1).max(10);
    if eps.len() < need {
        return Err(GarchError::SeriesTooShort { need, got: eps.len() });
    }
    let presample = population_variance(eps);
    let objective = |u: &[f64]| -> f64 {
        let params = decode(u, order);
        let sig = variance_path(eps, &params, presample);
        nll_from_path(eps, &sig).unwrap_or(f64::INFINITY)
    };

    let start = initial_params(eps, order);
    let f_start = negative_log_likelihood(eps, &start)?;
    let nm = NelderMeadOptions { max_iter: opts.max_iter, f_tol: opts.f_tol, x_tol: opts.x_tol, initial_step: 0.5 };
    let search = |x0: Vec<f64>| {
        let mut best = nelder_mead(&objective, &x0, &nm);
        let mut iterations = best.iterations;
        for _ in 0..opts.restarts {
            let again = nelder_mead(&objective, &best.x, &nm);
            iterations += again.iterations;
            let improved = best.f - again.f > opts.f_tol * (1.0 + best.f.abs());
            if again.f <= best.f {
                best = again;
            }
            if !improved {
                break;
            }
        }
        (best, iterations)
    };

    let (best, iterations) = search(encode(&start));
    if !best.f.is_finite() {
        return Err(GarchError::OptimizerDiverged);
    }
    // Without ARCH effects the GARCH terms are unidentified (the likelihood is
    // flat along alpha0 = var * (1 - beta) when alpha = 0), so keep the
    // constant-variance model unless the gain is significant.
    let homoskedastic = GarchParams {
        alpha0: presample,
        alphas: vec![0.0; order.q],
        betas: vec![0.0; order.p],
    };
    let f_const = negative_log_likelihood(eps, &homoskedastic)?;
    if f_const - best.f < LR_MARGIN && f_const <= f_start {
        return Ok(GarchFit { params: homoskedastic, log_likelihood: -f_const, converged: best.converged, iterations });
    }
    let (params, f) = if best.f <= f_start { (decode(&best.x, order), best.f) } else { (start, f_start) };
    Ok(GarchFit { params, log_likelihood: -f, converged: best.converged, iterations })
}
