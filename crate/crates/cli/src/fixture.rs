//! Seeded synthetic inputs: a GARCH(1,1)-driven price path on business days
//! and a headline corpus whose marker words track the next day's direction.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volsent::garch::{self, GarchParams};

pub const UP_MARKERS: [&str; 3] = ["rally", "surge", "rebound"];
pub const DOWN_MARKERS: [&str; 3] = ["slump", "selloff", "plunge"];
// each marker is followed by a word of the same tone, so the two directions
// also differ in their contexts
const UP_TONE: [&str; 4] = ["gains", "optimism", "record", "upbeat"];
const DOWN_TONE: [&str; 4] = ["fears", "losses", "recession", "gloomy"];

const FILLER: [&str; 30] = [
    "stocks", "market", "investors", "fed", "rates", "earnings", "oil", "banks", "traders", "index", "shares",
    "dollar", "bonds", "economy", "tech", "jobs", "inflation", "china", "europe", "treasury", "futures", "report",
    "quarter", "outlook", "week", "analysts", "profit", "housing", "retail", "energy",
];
const STOP: [&str; 6] = ["the", "of", "as", "on", "after", "for"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureSpec {
    pub seed: u64,
    /// Trading days of prices.
    pub days: usize,
    pub headlines_per_day: usize,
    /// Probability that a headline carries a direction marker.
    pub marker_rate: f64,
    /// `(alpha0, alpha1, beta1)` of the return process.
    pub garch: (f64, f64, f64),
    pub start: NaiveDate,
    pub start_price: f64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            seed: 2008,
            days: 900,
            headlines_per_day: 2,
            marker_rate: 0.9,
            garch: (1e-5, 0.12, 0.83),
            start: NaiveDate::from_ymd_opt(2008, 8, 8).unwrap(),
            start_price: 1266.69,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub prices_csv: String,
    pub headlines_csv: String,
}

/// Monday to Friday, starting at `start` (moved forward off a weekend).
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

fn headline(rng: &mut ChaCha8Rng, up: Option<bool>, marker_rate: f64) -> String {
    let n = rng.random_range(3..=6);
    let mut words: Vec<&str> = (0..n).map(|_| *FILLER.choose(rng).unwrap()).collect();
    if let Some(up) = up {
        if rng.random::<f64>() < marker_rate {
            let (markers, tone) = if up { (&UP_MARKERS, &UP_TONE) } else { (&DOWN_MARKERS, &DOWN_TONE) };
            let at = rng.random_range(0..=words.len());
            words.insert(at, tone.choose(rng).unwrap());
            words.insert(at, markers.choose(rng).unwrap());
        }
    }
    if rng.random::<bool>() {
        let at = rng.random_range(1..=words.len());
        words.insert(at, STOP.choose(rng).unwrap());
    }
    let mut s = words.join(" ");
    s[..1].make_ascii_uppercase();
    if rng.random::<f64>() < 0.3 {
        s.push('!');
    }
    s
}

pub fn generate(spec: &FixtureSpec) -> Fixture {
    let (a0, a1, b1) = spec.garch;
    let params = GarchParams::garch11(a0, a1, b1).expect("fixture GARCH parameters are stationary");
    let eps = garch::simulate(&params, spec.days - 1, spec.seed).expect("valid simulation");
    let dates = business_days(spec.start, spec.days);

    let mut closes = Vec::with_capacity(spec.days);
    let mut p = spec.start_price;
    closes.push((p * 1e4).round() / 1e4);
    for e in &eps {
        p *= e.exp();
        closes.push((p * 1e4).round() / 1e4);
    }
    let mut prices = String::from("date,close\n");
    for (d, c) in dates.iter().zip(&closes) {
        prices.push_str(&format!("{d},{c:.4}\n"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x4845_4144);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["date", "headline"]).unwrap();
    for (i, d) in dates.iter().enumerate() {
        let up = closes.get(i + 1).map(|next| *next > closes[i]);
        for _ in 0..spec.headlines_per_day {
            w.write_record([d.to_string(), headline(&mut rng, up, spec.marker_rate)]).unwrap();
        }
    }
    let headlines = String::from_utf8(w.into_inner().unwrap()).unwrap();
    Fixture { prices_csv: prices, headlines_csv: headlines }
}
