//! Synthetic corpora with known structure.

#![allow(dead_code)]

use chrono::NaiveDate;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volsent::textprep::{EncodedDoc, PAD};
use volsent::word2vec::EmbeddingMatrix;

pub const MARKER: usize = 2;
pub const FILLER: std::ops::Range<usize> = 3..40;
pub const VOCAB: usize = 40;

/// `n` docs of `max_len` ids: 5 to 10 filler tokens, plus the marker token
/// at a random position for label-1 docs. Labels alternate.
pub fn separable_docs(n: usize, max_len: usize, seed: u64) -> Vec<EncodedDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let date = NaiveDate::from_ymd_opt(2015, 6, 1).unwrap();
    (0..n)
        .map(|i| {
            let label = (i % 2) as u8;
            let len = rng.random_range(5..=10).min(max_len);
            let mut ids: Vec<usize> = (0..len).map(|_| rng.random_range(FILLER)).collect();
            if label == 1 {
                let pos = rng.random_range(0..len);
                ids[pos] = MARKER;
            }
            ids.resize(max_len, PAD);
            EncodedDoc { date, token_ids: ids, label: Some(label) }
        })
        .collect()
}

/// Random N(0, 1/dim)-ish rows with a zero PAD row.
pub fn random_embeddings(dim: usize, seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (3.0 / dim as f64).sqrt();
    let rows: Vec<Vec<f64>> = (0..VOCAB)
        .map(|r| if r == PAD { vec![0.0; dim] } else { (0..dim).map(|_| rng.random_range(-scale..scale)).collect() })
        .collect();
    EmbeddingMatrix::from_rows(&rows).unwrap()
}

/// Two topic clusters of token ids; sentences mix 5 words from one
/// cluster. Ids 0 and 1 are reserved.
pub const CLUSTER_A: [usize; 5] = [2, 3, 4, 5, 6];
pub const CLUSTER_B: [usize; 5] = [7, 8, 9, 10, 11];
pub const COOC_VOCAB: usize = 12;

pub fn cooccurrence_corpus(sentences: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..sentences)
        .map(|i| {
            let cluster: &[usize] = if i % 2 == 0 { &CLUSTER_A } else { &CLUSTER_B };
            (0..5).map(|_| *cluster.choose(&mut rng).unwrap()).collect()
        })
        .collect()
}

/// Mean pairwise cosine within clusters minus across clusters.
pub fn cluster_separation(e: &EmbeddingMatrix) -> (f64, f64) {
    use volsent::word2vec::cosine_similarity;
    let mut within = Vec::new();
    let mut between = Vec::new();
    for c in [&CLUSTER_A, &CLUSTER_B] {
        for (i, a) in c.iter().enumerate() {
            for b in &c[i + 1..] {
                within.push(cosine_similarity(e, *a, *b).unwrap());
            }
        }
    }
    for a in CLUSTER_A {
        for b in CLUSTER_B {
            between.push(cosine_similarity(e, a, b).unwrap());
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    (mean(&within), mean(&between))
}
