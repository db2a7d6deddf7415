//! Brute-force reference implementations and seeded input generators shared
//! by the integration tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;

use affect_trace::io::{ClipAnnotation, FeatureTrace};
use affect_trace::types::{FrameFeatures, Landmarks68, VAPoint, N_AUS, N_LANDMARKS};
use rand::Rng;

fn avg(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// CCC through the mean squared deviation: 1 - E[(x-y)^2] / (vx + vy + (mx-my)^2).
pub fn ccc(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (avg(x), avg(y));
    let vx = avg(&x.iter().map(|a| (a - mx) * (a - mx)).collect::<Vec<_>>());
    let vy = avg(&y.iter().map(|b| (b - my) * (b - my)).collect::<Vec<_>>());
    let msd = avg(&x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).collect::<Vec<_>>());
    let den = vx + vy + (mx - my) * (mx - my);
    if den <= 0.0 {
        0.0
    } else {
        1.0 - msd / den
    }
}

pub fn mae(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in (0..x.len()).rev() {
        s += (x[i] - y[i]).abs();
    }
    s / x.len() as f64
}

/// ICC(3,1) from the residuals of the additive two-way fit.
pub fn icc31(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let k = rows[0].len();
    let grand = rows.iter().flatten().sum::<f64>() / (n * k) as f64;
    let row_m: Vec<f64> = rows.iter().map(|r| avg(r)).collect();
    let col_m: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let mut sse = 0.0;
    for i in 0..n {
        for j in 0..k {
            let e = rows[i][j] - row_m[i] - col_m[j] + grand;
            sse += e * e;
        }
    }
    let ems = sse / ((n - 1) * (k - 1)) as f64;
    let bms = k as f64 * row_m.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (n - 1) as f64;
    (bms - ems) / (bms + (k as f64 - 1.0) * ems)
}

pub fn nme(pred: &[[f64; 2]], gt: &[[f64; 2]]) -> f64 {
    let d = (gt[36][0] - gt[45][0]).hypot(gt[36][1] - gt[45][1]);
    let per_point: Vec<f64> = pred
        .iter()
        .zip(gt)
        .map(|(p, q)| (p[0] - q[0]).hypot(p[1] - q[1]) / d)
        .collect();
    avg(&per_point)
}

/// Trapezoid over `steps` thresholds with the CDF counted by linear scan.
pub fn ced_auc(nmes: &[f64], threshold: f64, steps: usize) -> f64 {
    let cdf = |e: f64| nmes.iter().filter(|v| **v <= e).count() as f64 / nmes.len() as f64;
    let h = threshold / (steps - 1) as f64;
    let mut area = 0.0;
    for j in 1..steps {
        let (e0, e1) = (threshold * (j - 1) as f64 / (steps - 1) as f64, threshold * j as f64 / (steps - 1) as f64);
        area += 0.5 * (cdf(e0) + cdf(e1)) * h;
    }
    100.0 * area / threshold
}

/// Weighted pairwise disagreement over ordered pairs `i != j`, averaged over clips.
pub fn wmae(anns: &[ClipAnnotation], weight: &dyn Fn(&[&ClipAnnotation], usize) -> f64) -> (f64, f64) {
    let mut clips: BTreeMap<&str, Vec<&ClipAnnotation>> = BTreeMap::new();
    for a in anns {
        clips.entry(&a.clip_id).or_default().push(a);
    }
    let (mut tv, mut ta) = (0.0, 0.0);
    for g in clips.values() {
        let (mut nv, mut na, mut den) = (0.0, 0.0, 0.0);
        for i in 0..g.len() {
            for j in 0..g.len() {
                if i == j {
                    continue;
                }
                let w = weight(g, i) * weight(g, j);
                nv += w * (g[i].va.valence - g[j].va.valence).abs();
                na += w * (g[i].va.arousal - g[j].va.arousal).abs();
                den += w;
            }
        }
        tv += nv / den;
        ta += na / den;
    }
    (tv / clips.len() as f64, ta / clips.len() as f64)
}

/// Inverse mean VA distance of rater `i` to the rest of its clip group.
pub fn inverse_distance(g: &[&ClipAnnotation], i: usize) -> f64 {
    let d: f64 = (0..g.len())
        .filter(|&j| j != i)
        .map(|j| (g[i].va.valence - g[j].va.valence).hypot(g[i].va.arousal - g[j].va.arousal))
        .sum::<f64>()
        / (g.len() - 1) as f64;
    1.0 / (d + 1e-3)
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn random_points<R: Rng>(rng: &mut R) -> Vec<[f64; 2]> {
    (0..N_LANDMARKS)
        .map(|_| [rng.random_range(100.0..500.0), rng.random_range(100.0..400.0)])
        .collect()
}

/// Clip groups of 2..=4 raters drawn from a pool of 6, values on a 1e-6 grid.
pub fn random_annotations<R: Rng>(rng: &mut R, clips: usize) -> Vec<ClipAnnotation> {
    let mut out = Vec::new();
    for c in 0..clips {
        let k = rng.random_range(2..=4);
        for r in rand::seq::index::sample(rng, 6, k) {
            let q = |v: f64| (v * 1e6).round() / 1e6;
            out.push(ClipAnnotation {
                clip_id: format!("c{c:03}"),
                rater_id: format!("r{r}"),
                va: VAPoint::clamped(q(rng.random_range(-1.0..1.0)), q(rng.random_range(-1.0..1.0))),
            });
        }
    }
    out
}

/// A drifting face of random size; every third frame (offset by `seed`) is invalid.
pub fn synthetic_trace(len: usize, seed: u64) -> FeatureTrace {
    let frames = (0..len)
        .map(|i| {
            let t = i as f64 + seed as f64;
            let s = 80.0 + 10.0 * (0.3 * t).sin();
            let pts: Vec<[f64; 2]> = (0..N_LANDMARKS)
                .map(|k| {
                    let a = k as f64 * 0.37;
                    [300.0 + 2.0 * t + s * a.cos(), 240.0 + s * (1.3 * a).sin()]
                })
                .collect();
            FrameFeatures {
                frame_index: i,
                valid: (i as u64 + seed) % 3 != 1,
                landmarks: Landmarks68::new(pts).unwrap(),
                landmark_uncertainties: (0..N_LANDMARKS).map(|k| ((k + i) % 10) as f64 / 10.0).collect(),
                au_intensities: (0..N_AUS).map(|k| ((k * 7 + i) % 11) as f64 / 2.0).collect(),
            }
        })
        .collect();
    FeatureTrace { clip_id: format!("synthetic{seed}"), fps: 30.0, frames }
}

/// A run configuration small enough for end-to-end command tests.
pub fn tiny_config() -> affect_trace::config::RunConfig {
    let mut cfg = affect_trace::config::RunConfig::default();
    cfg.sim.clip_len_frames = 40;
    cfg.plan = affect_trace::sim::DatasetPlan { train: 12, val: 2, test: 6, clips_per_subject: 2 };
    cfg.train.epochs = 2;
    cfg.pipeline.window_len = 16;
    cfg
}

/// simulate -> train -> infer (test split) -> eval under `root/{data,model,pred,eval}`.
pub fn run_all(cfg: &affect_trace::config::RunConfig, root: &std::path::Path) -> affect_trace::Result<()> {
    use affect_trace::io::Split;
    use affect_trace::run::{self, InferInput};
    let (data, model, pred, eval) = (root.join("data"), root.join("model"), root.join("pred"), root.join("eval"));
    run::cmd_simulate(cfg, &data)?;
    run::cmd_train(cfg, &data, &model)?;
    let input = InferInput::Dataset { dir: data.clone(), split: Some(Split::Test) };
    run::cmd_infer(cfg, &model.join(run::CHECKPOINT_FILE), &input, &pred)?;
    run::cmd_eval(cfg, &data, &pred, &eval)?;
    Ok(())
}

/// Every file under `root`, keyed by relative path.
pub fn snapshot(root: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &std::path::Path, dir: &std::path::Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                let rel = p.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}
