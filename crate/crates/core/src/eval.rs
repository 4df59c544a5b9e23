//! Forecast scoring: RMSE and the regression F-test of actuals on forecasts.
//!
//! The F-test fits `actual = a + b * predicted` by OLS and tests `b = 0`
//! with `F = ESS / (RSS / (n - 2))` against F(1, n - 2).

use std::fmt::Write as _;

use statrs::function::beta::beta_reg;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {actual} actual vs {predicted} predicted")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("predictions have zero variance")]
    ZeroVariancePredictor,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
}

pub type Result<T> = std::result::Result<T, EvalError>;

/// p-values below this are reported as exactly 0.
pub const P_VALUE_FLOOR: f64 = 1e-12;

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(EvalError::LengthMismatch { actual: actual.len(), predicted: predicted.len() });
    }
    if actual.is_empty() {
        return Err(EvalError::EmptySequence);
    }
    if let Some(i) = actual.iter().zip(predicted).position(|(a, p)| !a.is_finite() || !p.is_finite()) {
        return Err(EvalError::NonFinite(i));
    }
    Ok(())
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let sse: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok((sse / actual.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FTest {
    pub f_stat: f64,
    pub p_value: f64,
    pub slope: f64,
    pub intercept: f64,
}

/// Overall-regression F-test of `actual` on `predicted`. A perfect fit gives
/// `f_stat = inf` and `p_value = 0`.
pub fn regression_f_test(actual: &[f64], predicted: &[f64]) -> Result<FTest> {
    check_pair(actual, predicted)?;
    let n = actual.len();
    if n < 3 {
        return Err(EvalError::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = predicted.iter().sum::<f64>() / nf;
    let my = actual.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (y, x) in actual.iter().zip(predicted) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > f64::MIN_POSITIVE * nf) || predicted.iter().all(|x| *x == predicted[0]) {
        return Err(EvalError::ZeroVariancePredictor);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ess = sxy * sxy / sxx;
    let rss: f64 = actual.iter().zip(predicted).map(|(y, x)| (y - intercept - slope * x).powi(2)).sum();
    let df = nf - 2.0;
    if rss <= syy * 1e-15 {
        return Ok(FTest { f_stat: f64::INFINITY, p_value: 0.0, slope, intercept });
    }
    let f_stat = ess / (rss / df);
    let mut p_value = f_cdf_upper_tail(f_stat, 1, (n - 2) as u32);
    if p_value < P_VALUE_FLOOR {
        p_value = 0.0;
    }
    Ok(FTest { f_stat, p_value, slope, intercept })
}

/// `P(F > x)` for `F ~ F(d1, d2)`.
pub fn f_cdf_upper_tail(x: f64, d1: u32, d2: u32) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    let (a, b) = (f64::from(d1), f64::from(d2));
    // 1 - I_{ax/(ax+b)}(a/2, b/2) = I_{b/(b+ax)}(b/2, a/2)
    let z = b / (b + a * x);
    beta_reg(b / 2.0, a / 2.0, z).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub model_name: String,
    pub rmse: f64,
    pub f_stat: f64,
    pub p_value: f64,
    pub n: usize,
}

pub fn evaluate_forecast(model_name: &str, actual: &[f64], predicted: &[f64]) -> Result<EvalReport> {
    let r = rmse(actual, predicted)?;
    let t = regression_f_test(actual, predicted)?;
    Ok(EvalReport { model_name: model_name.to_string(), rmse: r, f_stat: t.f_stat, p_value: t.p_value, n: actual.len() })
}

/// A report row, or a model whose forecasts were unavailable.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportRow {
    Scored(EvalReport),
    Skipped { model_name: String, reason: String },
}

impl ReportRow {
    pub fn model_name(&self) -> &str {
        match self {
            ReportRow::Scored(r) => &r.model_name,
            ReportRow::Skipped { model_name, .. } => model_name,
        }
    }
}

/// `model,rmse,f_stat,p_value,n`; skipped rows carry `SKIPPED` in every
/// numeric field. Model names such as `GARCH(1,1)` are quoted.
pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "rmse", "f_stat", "p_value", "n"]).unwrap();
    for row in rows {
        let rec = match row {
            ReportRow::Scored(r) => [
                r.model_name.clone(),
                format!("{:e}", r.rmse),
                format!("{:e}", r.f_stat),
                format!("{:e}", r.p_value),
                r.n.to_string(),
            ],
            ReportRow::Skipped { model_name, .. } => {
                [model_name.clone(), "SKIPPED".into(), "SKIPPED".into(), "SKIPPED".into(), "SKIPPED".into()]
            }
        };
        w.write_record(&rec).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn fmt_p(p: f64) -> String {
    if p == 0.0 { "0".into() } else { format!("{p:.3e}") }
}

/// Aligned text table with columns `Predictive model`, `RMSE`, `p-value`.
pub fn report_table(rows: &[ReportRow]) -> String {
    let width = rows.iter().map(|r| r.model_name().len()).chain(["Predictive model".len()]).max().unwrap_or(0);
    let mut s = String::new();
    writeln!(s, "{:<width$}  {:>12}  {:>12}", "Predictive model", "RMSE", "p-value").unwrap();
    for row in rows {
        match row {
            ReportRow::Scored(r) => {
                writeln!(s, "{:<width$}  {:>12}  {:>12}", r.model_name, format!("{:.3e}", r.rmse), fmt_p(r.p_value)).unwrap()
            }
            ReportRow::Skipped { model_name, .. } => {
                writeln!(s, "{model_name:<width$}  {:>12}  {:>12}", "SKIPPED", "SKIPPED").unwrap()
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_cases() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(rmse(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(rmse(&[], &[]), Err(EvalError::EmptySequence));
        assert_eq!(rmse(&[1.0], &[1.0, 2.0]), Err(EvalError::LengthMismatch { actual: 1, predicted: 2 }));
        assert_eq!(rmse(&[f64::NAN], &[1.0]), Err(EvalError::NonFinite(0)));
    }

    #[test]
    fn perfect_fit() {
        let a: Vec<f64> = (0..10).map(f64::from).collect();
        let t = regression_f_test(&a, &a).unwrap();
        assert_eq!((t.f_stat, t.p_value), (f64::INFINITY, 0.0));
        assert!((t.slope - 1.0).abs() < 1e-12 && t.intercept.abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(regression_f_test(&[1.0, 2.0, 3.0], &[2.0; 3]), Err(EvalError::ZeroVariancePredictor));
        assert_eq!(regression_f_test(&[1.0, 2.0], &[1.0, 3.0]), Err(EvalError::TooFewPoints(2)));
    }

    #[test]
    fn tail_edges() {
        assert_eq!(f_cdf_upper_tail(0.0, 1, 10), 1.0);
        assert_eq!(f_cdf_upper_tail(f64::INFINITY, 1, 10), 0.0);
    }

    #[test]
    fn table_layout() {
        let rows = vec![
            ReportRow::Scored(EvalReport { model_name: "GARCH(1,1)".into(), rmse: 9.86e-3, f_stat: 40.0, p_value: 0.0, n: 100 }),
            ReportRow::Skipped { model_name: "SVR".into(), reason: "missing".into() },
        ];
        let t = report_table(&rows);
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[0].starts_with("Predictive model") && lines[0].contains("RMSE") && lines[0].ends_with("p-value"));
        assert!(lines[1].starts_with("GARCH(1,1)") && lines[1].contains("9.860e-3"));
        assert!(lines[2].contains("SKIPPED"));
        let csv = report_csv(&rows);
        assert_eq!(csv.lines().next(), Some("model,rmse,f_stat,p_value,n"));
        assert_eq!(csv.lines().nth(1), Some("\"GARCH(1,1)\",9.86e-3,4e1,0e0,100"));
        assert_eq!(csv.lines().nth(2), Some("SVR,SKIPPED,SKIPPED,SKIPPED,SKIPPED"));
    }
}
