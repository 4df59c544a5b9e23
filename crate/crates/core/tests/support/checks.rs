//! Seeded instances and the checks run on them, shared by the per-module
//! tests and the acceptance suite.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volsent::cnn_sentiment::{self, CnnConfig, CnnWeights};
use volsent::lstm::{self, Dataset, LstmConfig, LstmWeights, Sample};
use volsent::svr::{self, SvrHyperParams};
use volsent::word2vec::pair_loss_and_gradients;

use super::fd::max_rel_err;
use super::qp_oracle;

// Reference tails from a 40-digit incomplete-beta evaluation.
pub const F_TAILS: [(f64, u32, u32, f64); 5] = [
    (4.965, 1, 10, 0.049_992_443_857_365_07),
    (3.936, 1, 100, 0.050_004_082_153_163_58),
    (1.0, 3, 7, 0.447_079_613_468_483_56),
    (2.5, 4, 20, 0.075_146_629_635_274_66),
    (0.1, 2, 2, 0.909_090_909_090_909_1),
];

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

pub struct SvrCase {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    pub hyper: SvrHyperParams,
}

/// 5 to 20 points in 1 to 3 dimensions, hyperparameters cycling with the seed.
pub fn svr_case(seed: u64) -> SvrCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(5..=20);
    let dim = rng.random_range(1..=3);
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    let ys = xs.iter().map(|x| (3.0 * x[0]).sin() + 0.3 * rng.random_range(-1.0..1.0)).collect();
    let c = [0.5, 2.0, 10.0][seed as usize % 3];
    let gamma = [0.5, 2.0, 8.0][(seed / 3) as usize % 3];
    let epsilon = [0.0, 0.05, 0.1][(seed / 2) as usize % 3];
    SvrCase { xs, ys, hyper: SvrHyperParams { c, epsilon, gamma } }
}

/// Relative dual-objective gap to the reference solver and the largest KKT
/// violation of the SMO solution.
pub fn svr_gap(seed: u64) -> (f64, f64) {
    let SvrCase { xs, ys, hyper } = svr_case(seed);
    let (_, stats) = svr::fit_with_options(&xs, &ys, &hyper, &Default::default()).unwrap();
    let k = svr::kernel_matrix(&xs, hyper.gamma);
    let (reference, _) = qp_oracle::solve(&k, &ys, hyper.c, hyper.epsilon, 100_000);
    let rel = (stats.dual_objective - reference).abs() / reference.abs().max(1e-12);
    (rel, stats.max_kkt_violation)
}

/// Full CNN gradient on a 2-doc batch versus central differences.
pub fn cnn_gradient_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = CnnConfig { filters: 4, kernel_width: 3, embed_dim: 5, max_len: 6, seed, ..Default::default() };
    let mut w = CnnWeights::init(&cfg);
    w.conv_bias = random_vec(&mut rng, 4, 0.1);
    w.dense_b = 0.2;
    let batch = vec![(random_vec(&mut rng, 30, 1.0), 1.0), (random_vec(&mut rng, 30, 1.0), 0.0)];
    let (_, g) = cnn_sentiment::loss_and_gradients(&w, &batch).unwrap();
    max_rel_err(
        |p| {
            let mut v = w.clone();
            v.set_params(p);
            cnn_sentiment::loss_and_gradients(&v, &batch).unwrap().0
        },
        &w.params(),
        &g.params(),
        1e-6,
        1e-7,
    )
}

/// Hidden 4, three samples of 3 steps, dropout off; odd seeds use two inputs.
pub fn lstm_instance(seed: u64) -> (LstmWeights, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    let input_dim = 1 + (seed as usize % 2);
    let cfg = LstmConfig { hidden: 4, input_dim, dropout: 0.0, seed, ..Default::default() };
    let mut w = LstmWeights::init(&cfg);
    for g in &mut w.gates {
        g.b = random_vec(&mut rng, 4, 0.5);
    }
    w.dense_b = 0.1;
    let start = chrono::NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
    let samples = (0..3)
        .map(|i| Sample {
            date: start + chrono::Days::new(i),
            window: (0..3).map(|_| random_vec(&mut rng, input_dim, 1.0)).collect(),
            target: rng.random_range(0.0..1.0),
        })
        .collect();
    (w, Dataset { input_dim, samples })
}

pub fn lstm_gradient_error(seed: u64) -> f64 {
    let (w, data) = lstm_instance(seed);
    let (_, g) = lstm::loss_and_gradients(&w, &data).unwrap();
    max_rel_err(
        |p| {
            let mut v = w.clone();
            v.set_params(p);
            lstm::loss_and_gradients(&v, &data).unwrap().0
        },
        &w.params(),
        &g.params(),
        1e-5,
        1e-7,
    )
}

/// Skip-gram negative-sampling loss gradient (8 dimensions, 3 negatives).
pub fn negative_sampling_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 8;
    let center = random_vec(&mut rng, d, 0.8);
    let context = random_vec(&mut rng, d, 0.8);
    let negs: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, d, 0.8)).collect();
    let g = pair_loss_and_gradients(&center, &context, &negs);

    let mut x = center.clone();
    x.extend(&context);
    negs.iter().for_each(|n| x.extend(n));
    let mut analytic = g.d_center.clone();
    analytic.extend(&g.d_context);
    g.d_negatives.iter().for_each(|n| analytic.extend(n));
    max_rel_err(
        |p| {
            let negs: Vec<Vec<f64>> = p[2 * d..].chunks(d).map(<[f64]>::to_vec).collect();
            pair_loss_and_gradients(&p[..d], &p[d..2 * d], &negs).loss
        },
        &x,
        &analytic,
        1e-5,
        1e-8,
    )
}
