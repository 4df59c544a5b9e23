mod support;

use support::checks::{cnn_gradient_error, lstm_gradient_error, negative_sampling_error, random_vec};
use support::fd::max_rel_err;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use volsent::cnn_sentiment::{self, LogisticModel};

#[test]
fn cnn_full_gradient() {
    for seed in 0..5 {
        let err = cnn_gradient_error(seed);
        assert!(err <= 1e-4, "seed {seed}: {err:e}");
    }
}

#[test]
fn logistic_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = LogisticModel { weights: random_vec(&mut rng, 6, 1.0), bias: 0.3 };
    let sample = vec![(random_vec(&mut rng, 6, 1.0), 1.0)];
    let (_, gw, gb) = cnn_sentiment::logistic_loss_and_gradient(&m, &sample);
    let mut analytic = gw;
    analytic.push(gb);
    let mut x = m.weights.clone();
    x.push(m.bias);
    let err = max_rel_err(
        |p| {
            let v = LogisticModel { weights: p[..6].to_vec(), bias: p[6] };
            cnn_sentiment::logistic_loss_and_gradient(&v, &sample).0
        },
        &x,
        &analytic,
        1e-5,
        1e-8,
    );
    assert!(err <= 1e-6, "{err:e}");
}

#[test]
fn lstm_bptt_twenty_instances() {
    for seed in 0..20 {
        let err = lstm_gradient_error(seed);
        assert!(err <= 1e-4, "seed {seed}: {err:e}");
    }
}

#[test]
fn negative_sampling_gradient() {
    for seed in 0..5 {
        let err = negative_sampling_error(seed);
        assert!(err <= 1e-5, "seed {seed}: {err:e}");
    }
}
