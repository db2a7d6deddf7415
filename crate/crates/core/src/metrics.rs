//! Scalar evaluation metrics: agreement (CCC, ICC), error (MAE, NME, CED-AUC)
//! and inter-rater disagreement (WMAE).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::ClipAnnotation;
use crate::types::{Landmarks68, N_LANDMARKS};

/// iBUG indices (0-based) of the outer eye corners.
pub const OUTER_EYE_CORNERS: (usize, usize) = (36, 45);

/// Default CED failure threshold for NME.
pub const DEFAULT_CED_THRESHOLD: f64 = 0.08;

/// Human inter-rater WMAE for valence and arousal, used as grid-report thresholds.
pub const HUMAN_WMAE: (f64, f64) = (0.17, 0.19);

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Lin's concordance correlation coefficient with population moments.
///
/// Returns 0 when the denominator vanishes (both sequences constant and equal).
pub fn ccc(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooShort { min: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let denom = sxx / n + syy / n + (mx - my) * (mx - my);
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * sxy / n / denom).clamp(-1.0, 1.0))
}

pub fn mae(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>() / x.len() as f64)
}

/// Mean of absolute errors pooled over every frame of every clip.
pub fn mae_pooled<S: AsRef<[f64]>>(clip_errors: &[S]) -> Result<f64> {
    let (sum, n) = clip_errors.iter().fold((0.0, 0usize), |(s, n), c| {
        let c = c.as_ref();
        (s + c.iter().map(|e| e.abs()).sum::<f64>(), n + c.len())
    });
    if n == 0 {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    Ok(sum / n as f64)
}

/// `n_targets x k_raters` ratings, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl RatingsMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooShort { min: 2, got: n });
        }
        let k = rows[0].len();
        if k < 2 {
            return Err(Error::TooShort { min: 2, got: k });
        }
        let mut data = Vec::with_capacity(n * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::LengthMismatch(k, row.len()));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { field: "ratings", index: j });
                }
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, k, data })
    }

    /// Builds from rater columns (each column one rater over all targets).
    pub fn from_columns(cols: &[&[f64]]) -> Result<Self> {
        let n = cols.first().map_or(0, |c| c.len());
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| cols.iter().map(|c| c.get(i).copied().unwrap_or(f64::NAN)).collect())
            .collect();
        Self::new(&rows)
    }

    pub fn targets(&self) -> usize {
        self.n
    }

    pub fn raters(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.k + j]
    }
}

/// Mean squares of a two-way ANOVA without replication.
struct Anova {
    bms: f64,
    ems: f64,
}

fn two_way_anova(m: &RatingsMatrix) -> Anova {
    let (n, k) = (m.n as f64, m.k as f64);
    let grand = mean(&m.data);
    let sst: f64 = m.data.iter().map(|v| (v - grand).powi(2)).sum();
    let ssr: f64 = (0..m.n)
        .map(|i| {
            let rm = (0..m.k).map(|j| m.get(i, j)).sum::<f64>() / k;
            k * (rm - grand).powi(2)
        })
        .sum();
    let ssc: f64 = (0..m.k)
        .map(|j| {
            let cm = (0..m.n).map(|i| m.get(i, j)).sum::<f64>() / n;
            n * (cm - grand).powi(2)
        })
        .sum();
    let sse = (sst - ssr - ssc).max(0.0);
    Anova {
        bms: ssr / (n - 1.0),
        ems: sse / ((n - 1.0) * (k - 1.0)),
    }
}

/// ICC(3,1): two-way mixed, single measure, consistency.
pub fn icc31(m: &RatingsMatrix) -> Result<f64> {
    let Anova { bms, ems } = two_way_anova(m);
    let denom = bms + (m.k as f64 - 1.0) * ems;
    if denom.abs() < 1e-300 {
        return Err(Error::DegenerateAnova);
    }
    Ok((bms - ems) / denom)
}

/// Normalised mean error over the 68 points, normalised by outer-eye-corner distance of `gt`.
pub fn nme(pred: &Landmarks68, gt: &Landmarks68) -> Result<f64> {
    let g = gt.points();
    let (l, r) = OUTER_EYE_CORNERS;
    let d_io = ((g[l][0] - g[r][0]).powi(2) + (g[l][1] - g[r][1]).powi(2)).sqrt();
    if d_io <= 0.0 {
        return Err(Error::ZeroInterOcular);
    }
    let total: f64 = pred
        .points()
        .iter()
        .zip(g)
        .map(|(p, q)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
        .sum();
    Ok(total / N_LANDMARKS as f64 / d_io)
}

/// Cumulative error distribution sampled at `steps` evenly spaced thresholds in `[0, threshold]`.
pub fn ced_curve(nmes: &[f64], threshold: f64, steps: usize) -> Vec<(f64, f64)> {
    let mut sorted = nmes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len().max(1) as f64;
    (0..steps)
        .map(|j| {
            let e = threshold * j as f64 / (steps - 1) as f64;
            let count = sorted.partition_point(|v| *v <= e);
            (e, count as f64 / n)
        })
        .collect()
}

/// Trapezoidal area under the CED curve up to `threshold`, as a percentage.
///
/// # Panics
/// If `threshold <= 0` or `steps < 2`.
pub fn ced_auc(nmes: &[f64], threshold: f64, steps: usize) -> f64 {
    assert!(threshold > 0.0 && steps >= 2, "need threshold > 0 and steps >= 2");
    if nmes.is_empty() {
        return 0.0;
    }
    let curve = ced_curve(nmes, threshold, steps);
    let area: f64 = curve
        .windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum();
    100.0 * area / threshold
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooShort { min: 2, got: x.len() });
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let (mx, my) = (mean(&rx), mean(&ry));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            out[t] = r;
        }
        i = j + 1;
    }
    out
}

/// Lower bound applied to annotator reliabilities before normalisation.
pub const RELIABILITY_FLOOR: f64 = 1e-3;

/// How pairwise rater weights are formed in [`wmae`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WmaeWeighting {
    /// `w_ij = r_i * r_j` from per-annotator ICC(3,1) reliabilities.
    #[default]
    Reliability,
    /// Per-clip weights from the inverse mean VA distance of each rater to the others.
    InverseDistance,
}

pub fn group_by_clip(annotations: &[ClipAnnotation]) -> BTreeMap<&str, Vec<&ClipAnnotation>> {
    let mut groups: BTreeMap<&str, Vec<&ClipAnnotation>> = BTreeMap::new();
    for a in annotations {
        groups.entry(a.clip_id.as_str()).or_default().push(a);
    }
    groups
}

/// Per-rater consistency with the consensus of the other raters.
///
/// For each rater, ICC(3,1) is computed between their labels and the mean of the
/// other raters over the clips they share, separately for valence and arousal,
/// and the two are averaged. Scores are floored at [`RELIABILITY_FLOOR`] and
/// scaled so the most reliable rater has weight 1.
pub fn annotator_reliability(annotations: &[ClipAnnotation]) -> Result<BTreeMap<String, f64>> {
    let groups = group_by_clip(annotations);
    let mut per_rater: BTreeMap<&str, [Vec<f64>; 4]> = BTreeMap::new();
    for anns in groups.values() {
        if anns.len() < 2 {
            continue;
        }
        for (i, a) in anns.iter().enumerate() {
            let others = anns.len() as f64 - 1.0;
            let (mut sv, mut sa) = (0.0, 0.0);
            for (j, b) in anns.iter().enumerate() {
                if i != j {
                    sv += b.va.valence;
                    sa += b.va.arousal;
                }
            }
            let cols = per_rater.entry(a.rater_id.as_str()).or_default();
            cols[0].push(a.va.valence);
            cols[1].push(sv / others);
            cols[2].push(a.va.arousal);
            cols[3].push(sa / others);
        }
    }
    let mut raters: Vec<&str> = annotations.iter().map(|a| a.rater_id.as_str()).collect();
    raters.sort_unstable();
    raters.dedup();

    let mut raw = BTreeMap::new();
    for r in raters {
        let cols = per_rater.get(r);
        let shared = cols.map_or(0, |c| c[0].len());
        if shared < 2 {
            return Err(Error::InsufficientOverlap(r.to_string()));
        }
        let c = cols.unwrap();
        let iv = consistency(&c[0], &c[1])?;
        let ia = consistency(&c[2], &c[3])?;
        raw.insert(r.to_string(), (0.5 * (iv + ia)).max(RELIABILITY_FLOOR));
    }
    let max = raw.values().copied().fold(RELIABILITY_FLOOR, f64::max);
    Ok(raw.into_iter().map(|(k, v)| (k, v / max)).collect())
}

/// ICC(3,1) of two columns; a matrix with no variance at all counts as perfect agreement.
fn consistency(a: &[f64], b: &[f64]) -> Result<f64> {
    let m = RatingsMatrix::from_columns(&[a, b])?;
    match icc31(&m) {
        Ok(v) => Ok(v),
        Err(Error::DegenerateAnova) => Ok(1.0),
        Err(e) => Err(e),
    }
}

fn pairwise_wmae(values: &[f64], weights: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let w = weights[i] * weights[j];
            num += w * (values[i] - values[j]).abs();
            den += w;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Dataset-level inter-rater disagreement `(valence, arousal)`: the per-clip
/// weighted mean of pairwise absolute differences, averaged over clips.
pub fn wmae(
    annotations: &[ClipAnnotation],
    reliabilities: &BTreeMap<String, f64>,
    weighting: WmaeWeighting,
) -> Result<(f64, f64)> {
    let groups = group_by_clip(annotations);
    if groups.is_empty() {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    let (mut tv, mut ta) = (0.0, 0.0);
    for (clip, anns) in &groups {
        if anns.len() < 2 {
            return Err(Error::SingleRaterClip(clip.to_string()));
        }
        let weights: Vec<f64> = match weighting {
            WmaeWeighting::Reliability => anns
                .iter()
                .map(|a| {
                    reliabilities
                        .get(&a.rater_id)
                        .copied()
                        .ok_or_else(|| Error::InsufficientOverlap(a.rater_id.clone()))
                })
                .collect::<Result<_>>()?,
            WmaeWeighting::InverseDistance => inverse_distance_weights(anns),
        };
        let v: Vec<f64> = anns.iter().map(|a| a.va.valence).collect();
        let a: Vec<f64> = anns.iter().map(|a| a.va.arousal).collect();
        tv += pairwise_wmae(&v, &weights);
        ta += pairwise_wmae(&a, &weights);
    }
    let n = groups.len() as f64;
    Ok((tv / n, ta / n))
}

const INVERSE_DISTANCE_EPS: f64 = 1e-3;

fn inverse_distance_weights(anns: &[&ClipAnnotation]) -> Vec<f64> {
    anns.iter()
        .enumerate()
        .map(|(i, a)| {
            let d: f64 = anns
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| {
                    ((a.va.valence - b.va.valence).powi(2) + (a.va.arousal - b.va.arousal).powi(2))
                        .sqrt()
                })
                .sum::<f64>()
                / (anns.len() - 1) as f64;
            1.0 / (d + INVERSE_DISTANCE_EPS)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::VAPoint;

    fn ann(c: &str, r: &str, v: f64, a: f64) -> ClipAnnotation {
        ClipAnnotation {
            clip_id: c.into(),
            rater_id: r.into(),
            va: VAPoint::checked(v, a).unwrap(),
        }
    }

    #[test]
    fn ccc_examples() {
        let x = [0.1, 0.5, 0.9];
        assert!((ccc(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(ccc(&[0.2, 0.2, 0.2], &[-0.4, 0.0, 0.4]).unwrap(), 0.0);
        let v = ccc(&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!((v - 2.5 / 3.5).abs() < 1e-12);
        assert_eq!(ccc(&[0.3, 0.3], &[0.3, 0.3]).unwrap(), 0.0);
        assert!(matches!(ccc(&[1.0], &[1.0]), Err(Error::TooShort { .. })));
        assert!(matches!(ccc(&[1.0, 2.0], &[1.0]), Err(Error::LengthMismatch(2, 1))));
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[0.1, 0.2], &[0.1, 0.2]).unwrap(), 0.0);
        assert_eq!(mae(&[0.0, 0.0], &[0.5, -0.5]).unwrap(), 0.5);
        let pooled = mae_pooled(&[vec![0.1, 0.3], vec![0.2]]).unwrap();
        assert!((pooled - 0.2).abs() < 1e-12);
        assert!(mae(&[0.0], &[]).is_err());
    }

    #[test]
    fn icc_examples() {
        let perfect = RatingsMatrix::new(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        assert!((icc31(&perfect).unwrap() - 1.0).abs() < 1e-12);
        let offset =
            RatingsMatrix::new(&[vec![1.0, 1.5], vec![2.0, 2.5], vec![3.0, 3.5]]).unwrap();
        assert!((icc31(&offset).unwrap() - 1.0).abs() < 1e-12);
        // residual-form two-way ANOVA by hand: BMS = 50/9, EMS = 1/3 -> 19/23
        let m = RatingsMatrix::new(&[
            vec![1.0, 2.0],
            vec![3.0, 3.0],
            vec![5.0, 4.0],
            vec![2.0, 2.0],
        ])
        .unwrap();
        assert!((icc31(&m).unwrap() - 19.0 / 23.0).abs() < 1e-12);
        let flat = RatingsMatrix::new(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(icc31(&flat), Err(Error::DegenerateAnova)));
        assert!(RatingsMatrix::new(&[vec![1.0, 2.0]]).is_err());
    }

    fn face() -> Landmarks68 {
        Landmarks68::new((0..68).map(|i| [i as f64 * 1.5, (i % 7) as f64]).collect()).unwrap()
    }

    #[test]
    fn nme_examples() {
        let g = face();
        assert_eq!(nme(&g, &g).unwrap(), 0.0);
        let p = g.points();
        let d = ((p[36][0] - p[45][0]).powi(2) + (p[36][1] - p[45][1]).powi(2)).sqrt();
        let shifted = Landmarks68::new(p.iter().map(|q| [q[0] + d, q[1]]).collect()).unwrap();
        assert!((nme(&shifted, &g).unwrap() - 1.0).abs() < 1e-12);
        let flat = Landmarks68::new(vec![[1.0, 1.0]; 68]).unwrap();
        assert!(matches!(nme(&g, &flat), Err(Error::ZeroInterOcular)));
    }

    #[test]
    fn ced_examples() {
        assert!((ced_auc(&[0.0; 10], 0.08, 101) - 100.0).abs() < 1e-9);
        assert_eq!(ced_auc(&[0.2; 10], 0.08, 101), 0.0);
        let half = [0.0, 0.0, 0.5, 0.5];
        assert!((ced_auc(&half, 0.08, 101) - 50.0).abs() < 1e-9);
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn reliability_identical_raters() {
        let mut anns = Vec::new();
        for c in 0..5 {
            let v = -0.8 + 0.3 * c as f64;
            for r in ["r1", "r2", "r3"] {
                anns.push(ann(&format!("c{c}"), r, v, -v / 2.0));
            }
        }
        let w = annotator_reliability(&anns).unwrap();
        assert!(w.values().all(|x| (x - 1.0).abs() < 1e-12));
        assert_eq!(wmae(&anns, &w, WmaeWeighting::Reliability).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn reliability_constant_rater_hits_floor() {
        let mut anns = Vec::new();
        for c in 0..6 {
            let v = -0.9 + 0.35 * c as f64;
            let a = 0.5 - 0.2 * c as f64;
            anns.push(ann(&format!("c{c}"), "good1", v, a));
            anns.push(ann(&format!("c{c}"), "good2", v + 0.01 * (c % 2) as f64, a));
            anns.push(ann(&format!("c{c}"), "lazy", 0.0, 0.0));
        }
        let w = annotator_reliability(&anns).unwrap();
        // the lazy rater's ICC is exactly 0 on both dims (BMS = EMS for a constant column)
        assert!((w["lazy"] - RELIABILITY_FLOOR / w_max_raw(&anns)).abs() < 1e-9);
        assert!(w["lazy"] < 0.01);
        assert!(w.values().any(|x| *x == 1.0));
    }

    fn w_max_raw(anns: &[ClipAnnotation]) -> f64 {
        // recompute the unnormalised best reliability from the good raters' columns
        let groups = group_by_clip(anns);
        let mut best: f64 = 0.0;
        for r in ["good1", "good2"] {
            let mut cols = [vec![], vec![], vec![], vec![]];
            for g in groups.values() {
                let me = g.iter().find(|a| a.rater_id == r).unwrap();
                let others: Vec<_> = g.iter().filter(|a| a.rater_id != r).collect();
                cols[0].push(me.va.valence);
                cols[1].push(others.iter().map(|a| a.va.valence).sum::<f64>() / 2.0);
                cols[2].push(me.va.arousal);
                cols[3].push(others.iter().map(|a| a.va.arousal).sum::<f64>() / 2.0);
            }
            let iv = consistency(&cols[0], &cols[1]).unwrap();
            let ia = consistency(&cols[2], &cols[3]).unwrap();
            best = best.max(0.5 * (iv + ia));
        }
        best
    }

    #[test]
    fn wmae_two_raters() {
        let anns = vec![ann("c1", "a", 0.3, 0.0), ann("c1", "b", 0.5, 0.0)];
        let w: BTreeMap<String, f64> = [("a".into(), 1.0), ("b".into(), 1.0)].into();
        let (v, a) = wmae(&anns, &w, WmaeWeighting::Reliability).unwrap();
        assert!((v - 0.2).abs() < 1e-12);
        assert_eq!(a, 0.0);
        let (v2, _) = wmae(&anns, &w, WmaeWeighting::InverseDistance).unwrap();
        assert!((v2 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn wmae_errors() {
        let anns = vec![ann("c1", "a", 0.3, 0.0)];
        let w: BTreeMap<String, f64> = [("a".into(), 1.0)].into();
        assert!(matches!(
            wmae(&anns, &w, WmaeWeighting::Reliability),
            Err(Error::SingleRaterClip(_))
        ));
        let anns = vec![ann("c1", "a", 0.3, 0.0), ann("c1", "b", 0.1, 0.0)];
        assert!(matches!(
            annotator_reliability(&anns),
            Err(Error::InsufficientOverlap(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ccc_symmetric_and_bounded(
                x in proptest::collection::vec(-1.0f64..1.0, 2..40),
                seed in proptest::collection::vec(-1.0f64..1.0, 40),
            ) {
                let y: Vec<f64> = x.iter().zip(&seed).map(|(a, b)| 0.5 * a + b).collect();
                let c1 = ccc(&x, &y).unwrap();
                let c2 = ccc(&y, &x).unwrap();
                prop_assert!((c1 - c2).abs() < 1e-12);
                prop_assert!(c1.abs() <= 1.0);
            }

            #[test]
            fn icc_column_offset_invariance(
                rows in proptest::collection::vec(proptest::collection::vec(0.0f64..5.0, 3), 3..12),
                shift in -3.0f64..3.0,
            ) {
                let m = RatingsMatrix::new(&rows).unwrap();
                let shifted: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[1] + shift, r[2]]).collect();
                let ms = RatingsMatrix::new(&shifted).unwrap();
                if let (Ok(a), Ok(b)) = (icc31(&m), icc31(&ms)) {
                    prop_assert!((a - b).abs() < 1e-9);
                    prop_assert!(a <= 1.0 + 1e-12);
                }
            }

            #[test]
            fn nme_scale_invariant(
                pts in proptest::collection::vec((0.0f64..100.0, 0.0f64..100.0), 68),
                noise in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 68),
                s in 0.1f64..10.0,
            ) {
                let mut gt_pts: Vec<[f64; 2]> = pts.iter().map(|p| [p.0, p.1]).collect();
                gt_pts[36] = [10.0, 50.0];
                gt_pts[45] = [90.0, 50.0];
                let gt = Landmarks68::new(gt_pts.clone()).unwrap();
                let pred = Landmarks68::new(
                    gt_pts.iter().zip(&noise).map(|(p, n)| [p[0] + n.0, p[1] + n.1]).collect(),
                ).unwrap();
                let a = nme(&pred, &gt).unwrap();
                let b = nme(&pred.scaled(s), &gt.scaled(s)).unwrap();
                prop_assert!((a - b).abs() < 1e-9);
            }

            #[test]
            fn ced_auc_monotone_under_improvement(
                nmes in proptest::collection::vec(0.0f64..0.2, 1..50),
                shrink in proptest::collection::vec(0.0f64..1.0, 50),
            ) {
                let better: Vec<f64> = nmes.iter().zip(&shrink).map(|(e, s)| e * s).collect();
                prop_assert!(ced_auc(&better, 0.08, 81) >= ced_auc(&nmes, 0.08, 81) - 1e-9);
            }
        }
    }
}
