mod common;

use std::collections::BTreeMap;

use affect_trace::metrics::{self, RatingsMatrix, WmaeWeighting};
use affect_trace::types::Landmarks68;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: u64 = 1000;
const TOL: f64 = 1e-9;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn ccc_and_mae_match_oracle() {
    for s in 0..CASES {
        let mut r = rng(s);
        let n = r.random_range(2..300);
        let x = common::random_vec(&mut r, n, -1.0, 1.0);
        let bias = r.random_range(-0.5..0.5);
        let y: Vec<f64> = x.iter().map(|v| 0.7 * v + bias + r.random_range(-0.4..0.4)).collect();
        assert!((metrics::ccc(&x, &y).unwrap() - common::ccc(&x, &y)).abs() <= TOL, "seed {s}");
        assert!((metrics::mae(&x, &y).unwrap() - common::mae(&x, &y)).abs() <= TOL, "seed {s}");
    }
}

#[test]
fn icc31_matches_residual_oracle() {
    for s in 0..CASES {
        let mut r = rng(s);
        let n = r.random_range(2..40);
        let k = r.random_range(2..6);
        let offsets = common::random_vec(&mut r, k, -0.5, 0.5);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let t = r.random_range(-1.0..1.0);
                offsets.iter().map(|o| t + o + r.random_range(-0.3..0.3)).collect()
            })
            .collect();
        let m = RatingsMatrix::new(&rows).unwrap();
        let got = metrics::icc31(&m).unwrap();
        assert!((got - common::icc31(&rows)).abs() <= TOL, "seed {s}");
    }
}

#[test]
fn nme_and_ced_auc_match_oracle() {
    for s in 0..CASES {
        let mut r = rng(s);
        let gt = common::random_points(&mut r);
        let pred: Vec<[f64; 2]> = gt
            .iter()
            .map(|p| [p[0] + r.random_range(-8.0..8.0), p[1] + r.random_range(-8.0..8.0)])
            .collect();
        let got = metrics::nme(&Landmarks68::new(pred.clone()).unwrap(), &Landmarks68::new(gt.clone()).unwrap()).unwrap();
        assert!((got - common::nme(&pred, &gt)).abs() <= TOL, "seed {s}");

        let n = r.random_range(1..200);
        let nmes = common::random_vec(&mut r, n, 0.0, 0.12);
        let steps = r.random_range(2..120);
        let thr = r.random_range(0.02..0.15);
        let got = metrics::ced_auc(&nmes, thr, steps);
        assert!((got - common::ced_auc(&nmes, thr, steps)).abs() <= TOL, "seed {s}");
    }
}

#[test]
fn wmae_matches_ordered_pair_oracle() {
    for s in 0..CASES {
        let mut r = rng(s);
        let clips = r.random_range(1..20);
        let anns = common::random_annotations(&mut r, clips);
        let rel: BTreeMap<String, f64> = (0..6).map(|i| (format!("r{i}"), r.random_range(0.05..1.0))).collect();

        let got = metrics::wmae(&anns, &rel, WmaeWeighting::Reliability).unwrap();
        let want = common::wmae(&anns, &|g, i| rel[&g[i].rater_id]);
        assert!((got.0 - want.0).abs() <= TOL && (got.1 - want.1).abs() <= TOL, "seed {s}");

        let got = metrics::wmae(&anns, &rel, WmaeWeighting::InverseDistance).unwrap();
        let want = common::wmae(&anns, &common::inverse_distance);
        assert!((got.0 - want.0).abs() <= TOL && (got.1 - want.1).abs() <= TOL, "seed {s}");
    }
}

#[test]
fn perfect_agreement_and_sign_flip() {
    let x: Vec<f64> = (0..50).map(|i| i as f64 - 24.5).collect();
    assert!((metrics::ccc(&x, &x).unwrap() - 1.0).abs() < 1e-12);
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    assert!((metrics::ccc(&x, &neg).unwrap() + 1.0).abs() < 1e-9);
}
