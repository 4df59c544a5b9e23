//! Actual-versus-predicted overlays as CSV and a standalone SVG.

use std::fmt::Write as _;

use crate::artifacts::Forecast;

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

pub fn overlay_csv(f: &Forecast) -> String {
    let mut s = String::from("date,actual,predicted\n");
    for ((d, a), p) in f.dates.iter().zip(&f.actual).zip(&f.predicted) {
        writeln!(s, "{d},{a:e},{p:e}").unwrap();
    }
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(values: &[f64], x: impl Fn(usize) -> f64, y: impl Fn(f64) -> f64, color: &str) -> String {
    let pts: Vec<String> = values.iter().enumerate().map(|(i, v)| format!("{:.2},{:.2}", x(i), y(*v))).collect();
    format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"/>\n", pts.join(" "))
}

/// Two series over a shared y range spanning both; `f` must be nonempty.
pub fn overlay_svg(f: &Forecast, title: &str) -> String {
    let lo = f.actual.iter().chain(&f.predicted).copied().fold(f64::INFINITY, f64::min).min(0.0);
    let mut hi = f.actual.iter().chain(&f.predicted).copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let n = f.len();
    let x = |i: usize| MARGIN + if n > 1 { pw * i as f64 / (n - 1) as f64 } else { pw / 2.0 };
    let y = |v: f64| MARGIN + ph * (1.0 - (v - lo) / (hi - lo));

    let mut s = String::new();
    writeln!(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">").unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    writeln!(s, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>", WIDTH / 2.0, escape(title)).unwrap();
    writeln!(
        s,
        "<path d=\"M{m},{m} V{b} H{r}\" fill=\"none\" stroke=\"#444\"/>",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )
    .unwrap();
    for (v, label) in [(lo, format!("{lo:.3e}")), (hi, format!("{hi:.3e}"))] {
        writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{label}</text>", MARGIN - 6.0, y(v) + 4.0).unwrap();
    }
    let base = HEIGHT - MARGIN + 18.0;
    writeln!(s, "<text x=\"{MARGIN}\" y=\"{base}\">{}</text>", f.dates[0]).unwrap();
    writeln!(s, "<text x=\"{}\" y=\"{base}\" text-anchor=\"end\">{}</text>", WIDTH - MARGIN, f.dates[n - 1]).unwrap();
    s.push_str(&polyline(&f.actual, x, y, "#1f3b73"));
    s.push_str(&polyline(&f.predicted, x, y, "#c0392b"));
    let ly = MARGIN - 14.0;
    writeln!(s, "<text x=\"{}\" y=\"{ly}\" fill=\"#1f3b73\">actual</text>", WIDTH - MARGIN - 150.0).unwrap();
    writeln!(s, "<text x=\"{}\" y=\"{ly}\" fill=\"#c0392b\">predicted</text>", WIDTH - MARGIN - 80.0).unwrap();
    s.push_str("</svg>\n");
    s
}
