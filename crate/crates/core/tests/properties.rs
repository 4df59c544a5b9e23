use chrono::{Datelike, Days, NaiveDate};
use proptest::prelude::*;
use volsent::cnn_sentiment::{self, CnnConfig, CnnWeights, ClassifierMetrics, SentimentSeries};
use volsent::eval::{f_cdf_upper_tail, regression_f_test, rmse};
use volsent::garch::{conditional_variances, GarchParams};
use volsent::lstm::{self, build_features, FeatureSpec, LstmConfig, LstmWeights};
use volsent::marketdata::{align_calendars, chronological_split, squared_log_returns, PriceSeries, SplitSpec, VolatilitySeries};
use volsent::textprep::{build_vocabulary, encode, tokenize, EncodedDoc};
use volsent::word2vec::EmbeddingMatrix;

fn day(i: usize) -> NaiveDate {
    NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + Days::new(i as u64)
}

fn prices() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1.0f64..5000.0, 2..60)
}

fn vol_series() -> impl Strategy<Value = VolatilitySeries> {
    prop::collection::vec(0.0f64..0.01, 3..80)
        .prop_map(|v| VolatilitySeries::new((0..v.len()).map(day).collect(), v).unwrap())
}

proptest! {
    #[test]
    fn squared_returns_nonnegative(closes in prices()) {
        let p = PriceSeries::new((0..closes.len()).map(day).collect(), closes.clone()).unwrap();
        let v = squared_log_returns(&p).unwrap();
        prop_assert_eq!(v.len(), closes.len() - 1);
        prop_assert!(v.values().iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn squared_returns_scale_invariant(closes in prices(), k in 0.01f64..100.0) {
        let dates: Vec<NaiveDate> = (0..closes.len()).map(day).collect();
        let a = squared_log_returns(&PriceSeries::new(dates.clone(), closes.clone()).unwrap()).unwrap();
        let scaled = closes.iter().map(|c| c * k).collect();
        let b = squared_log_returns(&PriceSeries::new(dates, scaled).unwrap()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn split_is_partition(v in vol_series(), f in 0.05f64..0.95) {
        if let Ok((train, test)) = chronological_split(&v, &SplitSpec::TrainFraction(f)) {
            let mut dates = train.dates().to_vec();
            dates.extend_from_slice(test.dates());
            let mut vals = train.values().to_vec();
            vals.extend_from_slice(test.values());
            prop_assert_eq!(dates, v.dates().to_vec());
            prop_assert_eq!(vals, v.values().to_vec());
        }
    }

    #[test]
    fn alignment_idempotent(v in vol_series(), keep in prop::collection::vec(any::<bool>(), 80), offset in 0usize..10) {
        let dates: Vec<NaiveDate> = (0..v.len() + offset).map(|i| day(i + offset)).filter(|d| keep[(d.ordinal() as usize) % 80]).collect();
        let scores = vec![0.5; dates.len()];
        let s = SentimentSeries::new(dates, scores).unwrap();
        if let Ok((v1, s1)) = align_calendars(&v, &s) {
            let (v2, s2) = align_calendars(&v1, &s1).unwrap();
            prop_assert_eq!(v1, v2);
            prop_assert_eq!(s1, s2);
        }
    }

    #[test]
    fn variances_bounded_below(eps in prop::collection::vec(-3.0f64..3.0, 2..100), a0 in 0.01f64..1.0, a1 in 0.0f64..0.5, b1 in 0.0f64..0.49) {
        let p = GarchParams::garch11(a0, a1, b1).unwrap();
        for s in conditional_variances(&eps, &p).unwrap() {
            prop_assert!(s >= a0);
        }
    }

    #[test]
    fn arch_equals_zero_beta(eps in prop::collection::vec(-3.0f64..3.0, 3..60), a0 in 0.01f64..1.0, a1 in 0.0f64..0.5, a2 in 0.0f64..0.4) {
        let arch = GarchParams::new(a0, vec![a1, a2], vec![]).unwrap();
        let garch = GarchParams::new(a0, vec![a1, a2], vec![0.0]).unwrap();
        prop_assert_eq!(conditional_variances(&eps, &arch).unwrap(), conditional_variances(&eps, &garch).unwrap());
    }

    #[test]
    fn tokenize_idempotent(s in "[A-Za-z0-9 ,.!&%'-]{0,60}") {
        let once = tokenize(&s);
        prop_assert_eq!(tokenize(&once.join(" ")), once);
    }

    #[test]
    fn encode_has_fixed_length(words in prop::collection::vec("[a-e]{1,3}", 0..40), max_len in 1usize..30) {
        let vocab = build_vocabulary(&[vec!["a".to_string()]], 1).unwrap();
        prop_assert_eq!(encode(&words, &vocab, max_len).len(), max_len);
    }

    #[test]
    fn vocabulary_depends_on_multiset(mut docs in prop::collection::vec(prop::collection::vec("[a-f]{1,2}", 1..6), 1..10), seed in any::<u64>()) {
        let a = build_vocabulary(&docs, 1).unwrap();
        // reverse and rotate
        docs.reverse();
        let r = (seed as usize) % docs.len();
        docs.rotate_left(r);
        prop_assert_eq!(build_vocabulary(&docs, 1).unwrap(), a);
    }

    #[test]
    fn max_pooling_ignores_position_order(seed in 0u64..1000, perm_seed in any::<u64>()) {
        // width-1 kernels: every position is its own window
        let cfg = CnnConfig { filters: 6, kernel_width: 1, embed_dim: 3, max_len: 7, seed, ..Default::default() };
        let w = CnnWeights::init(&cfg);
        let rows: Vec<Vec<f64>> = (0..7).map(|i| (0..3).map(|j| ((seed as f64 + 1.0) * (i * 3 + j + 1) as f64).sin()).collect()).collect();
        let mut order: Vec<usize> = (0..7).collect();
        let mut s = perm_seed;
        for i in (1..7).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let flat: Vec<f64> = rows.concat();
        let permuted: Vec<f64> = order.iter().flat_map(|&i| rows[i].clone()).collect();
        prop_assert_eq!(cnn_sentiment::forward(&w, &flat).unwrap(), cnn_sentiment::forward(&w, &permuted).unwrap());
    }

    #[test]
    fn metrics_ignore_doc_order(labels in prop::collection::vec(0u8..2, 1..30), rot in 0usize..30) {
        let emb = EmbeddingMatrix::from_rows(&[vec![0.0], vec![1.0], vec![-1.0]]).unwrap();
        let mut w = CnnWeights::zeros(1, 1, 1);
        w.conv_kernels = vec![1.0];
        w.dense_w = vec![4.0];
        w.dense_b = -2.0;
        let mut docs: Vec<EncodedDoc> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| EncodedDoc { date: day(0), token_ids: vec![1 + (i % 3 == 0) as usize], label: Some(*l) })
            .collect();
        let a = cnn_sentiment::evaluate(&w, &docs, &emb, 0.5).unwrap();
        let r = rot % docs.len();
        docs.rotate_left(r);
        docs.reverse();
        let b = cnn_sentiment::evaluate(&w, &docs, &emb, 0.5).unwrap();
        prop_assert_eq!(&a, &b);
        let expect = ClassifierMetrics::from_precision_recall(a.precision, a.recall).f_score;
        prop_assert_eq!(a.f_score, expect);
        prop_assert!((0.0..=1.0).contains(&a.f_score));
    }

    #[test]
    fn gates_stay_in_range(seed in 0u64..500, x in prop::collection::vec(-1e3f64..1e3, 2), h in prop::collection::vec(-1.0f64..1.0, 3), c in prop::collection::vec(-50.0f64..50.0, 3)) {
        let w = LstmWeights::init(&LstmConfig { hidden: 3, input_dim: 2, seed, ..Default::default() });
        let [i, f, o, g] = lstm::gate_activations(&w, &x, &h, &c).unwrap();
        for v in i.iter().chain(&f).chain(&o) {
            prop_assert!(*v >= 0.0 && *v <= 1.0);
        }
        for v in &g {
            prop_assert!(*v >= -1.0 && *v <= 1.0);
        }
    }

    #[test]
    fn unshifted_windows_never_contain_target(v in vol_series(), lookback in 1usize..5) {
        prop_assume!(v.len() > lookback);
        let s = SentimentSeries::new(v.dates().to_vec(), vec![0.3; v.len()]).unwrap();
        let ds = build_features(&v, Some(&s), FeatureSpec::WITH_SENTIMENT, lookback).unwrap();
        let idx: std::collections::HashMap<NaiveDate, usize> = v.dates().iter().enumerate().map(|(i, d)| (*d, i)).collect();
        for sample in &ds.samples {
            let t = idx[&sample.date];
            // the last row holds day t-1, never day t
            prop_assert_eq!(sample.window.last().unwrap()[0], v.values()[t - 1]);
            prop_assert_eq!(sample.window.len(), lookback);
        }
    }

    #[test]
    fn constant_sentiment_makes_shift_irrelevant(v in vol_series(), level in 0.0f64..1.0, lookback in 1usize..4) {
        prop_assume!(v.len() > lookback);
        let s = SentimentSeries::new(v.dates().to_vec(), vec![level; v.len()]).unwrap();
        let a = build_features(&v, Some(&s), FeatureSpec::WITH_SENTIMENT, lookback).unwrap();
        let b = build_features(&v, Some(&s), FeatureSpec::SHIFTED, lookback).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rmse_symmetric_and_homogeneous(a in prop::collection::vec(-10.0f64..10.0, 1..40), k in -5.0f64..5.0, seed in any::<u64>()) {
        let p: Vec<f64> = a.iter().enumerate().map(|(i, x)| x + ((seed.wrapping_add(i as u64) % 7) as f64 - 3.0)).collect();
        prop_assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        prop_assert!((rmse(&a, &p).unwrap() - rmse(&p, &a).unwrap()).abs() < 1e-12);
        let ka: Vec<f64> = a.iter().map(|x| k * x).collect();
        let kp: Vec<f64> = p.iter().map(|x| k * x).collect();
        let lhs = rmse(&ka, &kp).unwrap();
        let rhs = k.abs() * rmse(&a, &p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn tail_is_monotone(x1 in 0.0f64..50.0, dx in 0.0f64..50.0, d1 in 1u32..20, d2 in 1u32..200) {
        let (t1, t2) = (f_cdf_upper_tail(x1, d1, d2), f_cdf_upper_tail(x1 + dx, d1, d2));
        prop_assert!((0.0..=1.0).contains(&t1) && (0.0..=1.0).contains(&t2));
        prop_assert!(t2 <= t1 + 1e-12);
    }

    #[test]
    fn f_test_affine_invariant(a in prop::collection::vec(-5.0f64..5.0, 5..40), noise in prop::collection::vec(-1.0f64..1.0, 40), scale in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0], shift in -10.0f64..10.0) {
        let p: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| 0.5 * x + e).collect();
        prop_assume!(p.iter().any(|v| (v - p[0]).abs() > 1e-6));
        let q: Vec<f64> = p.iter().map(|v| scale * v + shift).collect();
        let (t1, t2) = (regression_f_test(&a, &p).unwrap(), regression_f_test(&a, &q).unwrap());
        prop_assert!((t1.f_stat - t2.f_stat).abs() <= 1e-6 * (1.0 + t1.f_stat));
        prop_assert!((t1.p_value - t2.p_value).abs() <= 1e-9);
    }
}
