//! Central finite differences.

#![allow(dead_code)]

/// `|a - n| / max(|a|, |n|, floor)`.
pub fn rel_err(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Largest relative error between `analytic` and the central difference of
/// `f` around `x` with step `h`.
pub fn max_rel_err<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], analytic: &[f64], h: f64, floor: f64) -> f64 {
    let mut p = x.to_vec();
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        p[i] = x[i] + h;
        let up = f(&p);
        p[i] = x[i] - h;
        let down = f(&p);
        p[i] = x[i];
        worst = worst.max(rel_err(analytic[i], (up - down) / (2.0 * h), floor));
    }
    worst
}
