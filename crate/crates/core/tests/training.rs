mod support;

use chrono::NaiveDate;
use support::corpus::{self, CLUSTER_A, CLUSTER_B, COOC_VOCAB};
use volsent::cnn_sentiment::{self, CnnConfig};
use volsent::lstm::{self, Dataset, LstmConfig, Sample};
use volsent::word2vec::{cosine_similarity, train_embeddings, W2vConfig};

#[test]
fn word2vec_clusters_separate() {
    let docs = corpus::cooccurrence_corpus(200, 7);
    let cfg = W2vConfig { dim: 20, epochs: 20, seed: 3, ..Default::default() };
    let run = train_embeddings(&docs, COOC_VOCAB, &cfg).unwrap();
    assert!(run.epoch_loss.iter().all(|l| l.is_finite()));
    assert!(run.epoch_loss.last() <= run.epoch_loss.first(), "{:?}", run.epoch_loss);
    let (within, between) = corpus::cluster_separation(&run.embeddings);
    assert!(within - between >= 0.2, "within {within} between {between}");
    let e = &run.embeddings;
    let (bull, rally, other) = (CLUSTER_A[0], CLUSTER_A[1], CLUSTER_B[0]);
    assert!(cosine_similarity(e, bull, rally).unwrap() > cosine_similarity(e, bull, other).unwrap());
}

#[test]
fn cnn_learns_marker_token() {
    let docs = corpus::separable_docs(64, 16, 11);
    let emb = corpus::random_embeddings(100, 5);
    let cfg = CnnConfig { epochs: 30, seed: 9, ..Default::default() };
    let trained = cnn_sentiment::train(&docs, &emb, &cfg).unwrap();
    assert!(trained.weights.is_finite());
    assert!(trained.epoch_loss.last() <= trained.epoch_loss.first());
    let acc = cnn_sentiment::accuracy(&trained.weights, &docs, &emb).unwrap();
    assert!(acc >= 0.95, "accuracy {acc}");
    let m = cnn_sentiment::evaluate(&trained.weights, &docs, &emb, 0.5).unwrap();
    assert!(m.f_score >= 0.95, "{m:?}");

    let again = cnn_sentiment::train(&docs, &emb, &cfg).unwrap();
    assert_eq!(again, trained);
}

#[test]
fn logistic_baseline_learns_marker_token() {
    let docs = corpus::separable_docs(64, 16, 11);
    let emb = corpus::random_embeddings(100, 5);
    let m = cnn_sentiment::logistic_baseline(&docs, &emb, 1.0, 200, 4).unwrap();
    let acc = cnn_sentiment::accuracy(&m, &docs, &emb).unwrap();
    assert!(acc >= 0.9, "accuracy {acc}");
    assert_eq!(m, cnn_sentiment::logistic_baseline(&docs, &emb, 1.0, 200, 4).unwrap());
}

fn constant_dataset(c: f64, n: usize) -> Dataset {
    let start = NaiveDate::from_ymd_opt(2012, 1, 2).unwrap();
    let samples = (0..n)
        .map(|i| Sample { date: start + chrono::Days::new(i as u64), window: vec![vec![0.4]; 5], target: c })
        .collect();
    Dataset { input_dim: 1, samples }
}

#[test]
fn lstm_fits_constant_series() {
    let c = 0.35;
    let data = constant_dataset(c, 200);
    let cfg = LstmConfig { epochs: 100, seed: 2, ..Default::default() };
    let trained = lstm::train(&data, &cfg).unwrap();
    assert!(trained.epoch_loss.last() <= trained.epoch_loss.first());
    let preds = lstm::forecast(&trained.weights, &data).unwrap();
    for p in &preds {
        assert!((p - c).abs() <= c.abs() * 0.01 + 1e-6, "prediction {p} vs {c}");
    }
    let again = lstm::train(&data, &cfg).unwrap();
    assert_eq!(again, trained);
    assert_eq!(lstm::forecast(&again.weights, &data).unwrap(), preds);
}
