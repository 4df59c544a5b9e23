//! Reference solver for the epsilon-SVR dual, for small problems only.
//!
//! Works on the split variables `z = (a, a*)` with `beta = a - a*`:
//!
//! ```text
//! min 0.5 (a - a*)' K (a - a*) - y'(a - a*) + eps 1'(a + a*)
//! s.t. 0 <= a, a* <= C,  1'a = 1'a*
//! ```
//!
//! using accelerated projected gradient with adaptive restart. The
//! projection onto the box intersected with the hyperplane is found by
//! bisection on the multiplier.

#![allow(dead_code)]

fn project(v: &[f64], c: f64) -> Vec<f64> {
    let n = v.len() / 2;
    let sign = |i: usize| if i < n { 1.0 } else { -1.0 };
    let residual = |lam: f64| -> f64 { (0..2 * n).map(|i| sign(i) * (v[i] - lam * sign(i)).clamp(0.0, c)).sum() };
    // residual is nonincreasing in lam
    let (mut lo, mut hi) = (-1.0, 1.0);
    while residual(lo) < 0.0 {
        lo *= 2.0;
    }
    while residual(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lam = 0.5 * (lo + hi);
    (0..2 * n).map(|i| (v[i] - lam * sign(i)).clamp(0.0, c)).collect()
}

fn objective(k: &[f64], y: &[f64], eps: f64, z: &[f64]) -> f64 {
    let n = y.len();
    let beta: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += beta[i] * k[i * n + j] * beta[j];
        }
    }
    0.5 * q - y.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + eps * z.iter().sum::<f64>()
}

fn gradient(k: &[f64], y: &[f64], eps: f64, z: &[f64]) -> Vec<f64> {
    let n = y.len();
    let beta: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
    let mut g = vec![0.0; 2 * n];
    for i in 0..n {
        let kb: f64 = (0..n).map(|j| k[i * n + j] * beta[j]).sum();
        g[i] = kb - y[i] + eps;
        g[n + i] = -kb + y[i] + eps;
    }
    g
}

/// Returns `(objective, beta)` at the reference optimum.
pub fn solve(k: &[f64], y: &[f64], c: f64, eps: f64, iterations: usize) -> (f64, Vec<f64>) {
    let n = y.len();
    // largest eigenvalue of [[K, -K], [-K, K]] is 2 * lambda_max(K) <= 2 * trace(K)
    let trace: f64 = (0..n).map(|i| k[i * n + i]).sum();
    let step = 1.0 / (2.0 * trace);
    let mut z = vec![0.0; 2 * n];
    let mut w = z.clone();
    let mut t = 1.0_f64;
    let mut f_prev = objective(k, y, eps, &z);
    for _ in 0..iterations {
        let g = gradient(k, y, eps, &w);
        let v: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let z_next = project(&v, c);
        let f_next = objective(k, y, eps, &z_next);
        if f_next > f_prev {
            // restart momentum
            t = 1.0;
            w = z.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        w = z_next.iter().zip(&z).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
        z = z_next;
        t = t_next;
        f_prev = f_next;
    }
    let beta = (0..n).map(|i| z[i] - z[n + i]).collect();
    (objective(k, y, eps, &z), beta)
}
