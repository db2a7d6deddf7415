//! Evaluation reports over aligned per-frame predictions and ground truth:
//! overall agreement, per-quadrant and per-grid-cell breakdowns, head-pose
//! bins, uncertainty filtering curves and inter-rater disagreement.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{ClipAnnotation, DatasetManifest, PoseBin, PredictionRecord, PredictionTrace};
use crate::metrics::{self, WmaeWeighting, HUMAN_WMAE};
use crate::types::{grid_bin_of, quadrant_of, Dim, Quadrant, VAPoint};

/// Predictions of one clip paired frame-by-frame with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipResult {
    pub clip_id: String,
    pub records: Vec<PredictionRecord>,
    pub targets: Vec<VAPoint>,
}

impl ClipResult {
    /// Pairs a prediction trace with targets, requiring frames `0..len` in order.
    pub fn align(pred: &PredictionTrace, targets: Vec<VAPoint>) -> Result<Self> {
        if pred.records.len() != targets.len() {
            return Err(Error::Misalignment(format!(
                "clip `{}`: {} predictions for {} labels",
                pred.clip_id,
                pred.records.len(),
                targets.len()
            )));
        }
        let mut records = pred.records.clone();
        records.sort_by_key(|r| r.frame_index);
        for (i, r) in records.iter().enumerate() {
            if r.frame_index != i {
                return Err(Error::Misalignment(format!(
                    "clip `{}`: expected frame {i}, found {}",
                    pred.clip_id, r.frame_index
                )));
            }
        }
        Ok(Self {
            clip_id: pred.clip_id.clone(),
            records,
            targets,
        })
    }
}

/// Every frame of every clip, ordered by `(clip_id, frame_index)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Frames {
    pub preds: Vec<VAPoint>,
    pub gts: Vec<VAPoint>,
    /// Cumulative uncertainty per frame, `[valence, arousal]`.
    pub uncertainty: Vec<[f64; 2]>,
}

impl Frames {
    pub fn from_clips(clips: &[ClipResult]) -> Self {
        let mut sorted: Vec<&ClipResult> = clips.iter().collect();
        sorted.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
        let mut out = Frames::default();
        for c in sorted {
            for (r, gt) in c.records.iter().zip(&c.targets) {
                out.preds.push(r.output.va);
                out.gts.push(*gt);
                out.uncertainty.push([
                    r.output.uncertainty_valence.cumulative,
                    r.output.uncertainty_arousal.cumulative,
                ]);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }
}

fn column(points: &[VAPoint], dim: Dim) -> Vec<f64> {
    points.iter().map(|p| p.get(dim)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overall {
    pub ccc_v: f64,
    pub ccc_a: f64,
    pub mae_v: f64,
    pub mae_a: f64,
    pub n_frames: usize,
}

/// Pooled per-frame CCC and MAE.
pub fn overall_eval(preds: &[VAPoint], gts: &[VAPoint]) -> Result<Overall> {
    if preds.len() != gts.len() {
        return Err(Error::Misalignment(format!(
            "{} predictions for {} labels",
            preds.len(),
            gts.len()
        )));
    }
    if preds.len() < 2 {
        return Err(Error::TooShort { min: 2, got: preds.len() });
    }
    let [pv, pa, gv, ga] = [
        column(preds, Dim::Valence),
        column(preds, Dim::Arousal),
        column(gts, Dim::Valence),
        column(gts, Dim::Arousal),
    ];
    Ok(Overall {
        ccc_v: metrics::ccc(&pv, &gv)?,
        ccc_a: metrics::ccc(&pa, &ga)?,
        mae_v: metrics::mae(&pv, &gv)?,
        mae_a: metrics::mae(&pa, &ga)?,
        n_frames: preds.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    /// Too few frames or no variance; CCC reported as 0.
    Degenerate,
    Empty,
}

/// Metrics over a subset of frames, tolerant of empty and tiny subsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetMetrics {
    pub count: usize,
    pub ccc_v: f64,
    pub ccc_a: f64,
    pub mae_v: f64,
    pub mae_a: f64,
    pub status: CellStatus,
}

fn ccc_is_degenerate(x: &[f64], y: &[f64]) -> bool {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    sxx == 0.0 || syy == 0.0
}

fn subset_metrics(preds: &[VAPoint], gts: &[VAPoint]) -> SubsetMetrics {
    let count = preds.len();
    if count == 0 {
        return SubsetMetrics {
            count,
            ccc_v: 0.0,
            ccc_a: 0.0,
            mae_v: 0.0,
            mae_a: 0.0,
            status: CellStatus::Empty,
        };
    }
    let [pv, pa, gv, ga] = [
        column(preds, Dim::Valence),
        column(preds, Dim::Arousal),
        column(gts, Dim::Valence),
        column(gts, Dim::Arousal),
    ];
    let mae_v = metrics::mae(&pv, &gv).unwrap_or(0.0);
    let mae_a = metrics::mae(&pa, &ga).unwrap_or(0.0);
    let degenerate = count < 2
        || ccc_is_degenerate(&pv, &gv)
        || ccc_is_degenerate(&pa, &ga);
    let ccc = |x: &[f64], y: &[f64]| if count < 2 { 0.0 } else { metrics::ccc(x, y).unwrap_or(0.0) };
    SubsetMetrics {
        count,
        ccc_v: ccc(&pv, &gv),
        ccc_a: ccc(&pa, &ga),
        mae_v,
        mae_a,
        status: if degenerate { CellStatus::Degenerate } else { CellStatus::Ok },
    }
}

fn pick(points: &[VAPoint], idx: &[usize]) -> Vec<VAPoint> {
    idx.iter().map(|&i| points[i]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrantRow {
    pub quadrant: Quadrant,
    #[serde(flatten)]
    pub metrics: SubsetMetrics,
}

/// Metrics per emotion quadrant of the ground truth.
pub fn quadrant_report(preds: &[VAPoint], gts: &[VAPoint]) -> Vec<QuadrantRow> {
    let mut members: [Vec<usize>; 4] = Default::default();
    for (i, g) in gts.iter().enumerate().take(preds.len()) {
        members[quadrant_of(*g).index()].push(i);
    }
    Quadrant::ALL
        .iter()
        .map(|q| {
            let idx = &members[q.index()];
            QuadrantRow {
                quadrant: *q,
                metrics: subset_metrics(&pick(preds, idx), &pick(gts, idx)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridFlag {
    BelowHuman,
    AboveHuman,
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    /// Arousal bin, 0 = most negative.
    pub row: usize,
    /// Valence bin, 0 = most negative.
    pub col: usize,
    pub count: usize,
    pub mae_v: f64,
    pub mae_a: f64,
    pub flag: GridFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub resolution: usize,
    pub thresholds: (f64, f64),
    /// Row-major, `resolution * resolution` cells.
    pub cells: Vec<GridCell>,
}

/// Per-cell MAE on an `R x R` grid over the ground truth, flagged against
/// the human disagreement thresholds `(valence, arousal)`.
pub fn grid_report(preds: &[VAPoint], gts: &[VAPoint], resolution: usize, thresholds: (f64, f64)) -> Result<GridReport> {
    if resolution == 0 {
        return Err(Error::Config("grid resolution must be >= 1".to_string()));
    }
    let mut sums = vec![(0usize, 0.0, 0.0); resolution * resolution];
    for (p, g) in preds.iter().zip(gts) {
        let b = grid_bin_of(*g, resolution);
        let s = &mut sums[b.row * resolution + b.col];
        s.0 += 1;
        s.1 += (p.valence - g.valence).abs();
        s.2 += (p.arousal - g.arousal).abs();
    }
    let cells = sums
        .iter()
        .enumerate()
        .map(|(k, &(count, sv, sa))| {
            let (mae_v, mae_a, flag) = if count == 0 {
                (0.0, 0.0, GridFlag::Empty)
            } else {
                let (mv, ma) = (sv / count as f64, sa / count as f64);
                let flag = if mv <= thresholds.0 && ma <= thresholds.1 {
                    GridFlag::BelowHuman
                } else {
                    GridFlag::AboveHuman
                };
                (mv, ma, flag)
            };
            GridCell {
                row: k / resolution,
                col: k % resolution,
                count,
                mae_v,
                mae_a,
                flag,
            }
        })
        .collect();
    Ok(GridReport {
        resolution,
        thresholds,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseRow {
    pub label: String,
    pub bin: PoseBin,
    pub clips: usize,
    #[serde(flatten)]
    pub metrics: SubsetMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseReport {
    pub bins: Vec<PoseRow>,
    /// Clips without pose metadata (excluded from `bins`).
    pub missing_metadata: usize,
}

/// Metrics per head-pose bin declared in the manifest. Standard bins come
/// first in a fixed order, any other bins follow sorted; unpopulated bins are omitted.
pub fn pose_report(clips: &[ClipResult], manifest: &DatasetManifest) -> PoseReport {
    let pose: BTreeMap<&str, Option<PoseBin>> =
        manifest.clips.iter().map(|e| (e.clip_id.as_str(), e.pose_bin)).collect();
    let mut groups: BTreeMap<PoseBin, Vec<&ClipResult>> = BTreeMap::new();
    let mut missing = 0;
    let mut sorted: Vec<&ClipResult> = clips.iter().collect();
    sorted.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
    for c in sorted {
        match pose.get(c.clip_id.as_str()).copied().flatten() {
            Some(b) => groups.entry(b).or_default().push(c),
            None => missing += 1,
        }
    }
    let mut order: Vec<PoseBin> = PoseBin::STANDARD.iter().copied().filter(|b| groups.contains_key(b)).collect();
    order.extend(groups.keys().copied().filter(|b| !PoseBin::STANDARD.contains(b)));
    let bins = order
        .into_iter()
        .map(|bin| {
            let members = &groups[&bin];
            let mut preds = Vec::new();
            let mut gts = Vec::new();
            for c in members {
                preds.extend(c.records.iter().map(|r| r.output.va));
                gts.extend_from_slice(&c.targets);
            }
            PoseRow {
                label: bin.label(),
                bin,
                clips: members.len(),
                metrics: subset_metrics(&preds, &gts),
            }
        })
        .collect();
    PoseReport {
        bins,
        missing_metadata: missing,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    /// Keep the frames with the lowest uncertainty.
    Lowest,
    /// Keep the frames with the highest uncertainty.
    Highest,
}

impl std::str::FromStr for FilterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest" => Ok(FilterMode::Lowest),
            "highest" => Ok(FilterMode::Highest),
            _ => Err(Error::Config(format!("unknown filter `{s}` (lowest|highest)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaveNPoint {
    pub n_percent: f64,
    pub kept: usize,
    pub ccc: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaveNCurve {
    pub mode: FilterMode,
    pub valence: Vec<LeaveNPoint>,
    pub arousal: Vec<LeaveNPoint>,
}

/// Number of frames kept at `n` percent of `total`.
pub fn kept_count(n_percent: f64, total: usize) -> usize {
    ((n_percent * total as f64 / 100.0).ceil() as usize).clamp(1.min(total), total)
}

/// Indices kept at `n` percent for one dimension, in ascending index order.
///
/// Frames are ranked by uncertainty with ties broken by index, so kept sets
/// are nested in `n`.
pub fn kept_indices(uncertainty: &[f64], n_percent: f64, mode: FilterMode) -> Vec<usize> {
    let mut order: Vec<usize> = (0..uncertainty.len()).collect();
    order.sort_by(|&a, &b| {
        let c = uncertainty[a].total_cmp(&uncertainty[b]);
        let c = if mode == FilterMode::Highest { c.reverse() } else { c };
        c.then(a.cmp(&b))
    });
    let mut kept = order[..kept_count(n_percent, uncertainty.len())].to_vec();
    kept.sort_unstable();
    kept
}

/// CCC and MAE on the `N%` of frames with the lowest or highest cumulative
/// uncertainty, separately per dimension. Metrics are computed in the original
/// frame order so `N = 100` reproduces the overall figures exactly.
pub fn leave_n_in(
    preds: &[VAPoint],
    uncertainty: &[[f64; 2]],
    gts: &[VAPoint],
    ns: &[f64],
    mode: FilterMode,
) -> Result<LeaveNCurve> {
    if preds.len() != gts.len() || preds.len() != uncertainty.len() {
        return Err(Error::Misalignment(format!(
            "{} predictions, {} uncertainties, {} labels",
            preds.len(),
            uncertainty.len(),
            gts.len()
        )));
    }
    for &n in ns {
        if !(n > 0.0 && n <= 100.0) {
            return Err(Error::Range {
                field: "leave_n",
                value: n,
                lo: 0.0,
                hi: 100.0,
            });
        }
    }
    let mut curves: [Vec<LeaveNPoint>; 2] = Default::default();
    for (di, dim) in Dim::BOTH.iter().enumerate() {
        let u: Vec<f64> = uncertainty.iter().map(|x| x[di]).collect();
        let p = column(preds, *dim);
        let g = column(gts, *dim);
        for &n in ns {
            let idx = kept_indices(&u, n, mode);
            let kp: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
            let kg: Vec<f64> = idx.iter().map(|&i| g[i]).collect();
            curves[di].push(LeaveNPoint {
                n_percent: n,
                kept: idx.len(),
                ccc: if idx.len() < 2 { 0.0 } else { metrics::ccc(&kp, &kg)? },
                mae: if idx.is_empty() { 0.0 } else { metrics::mae(&kp, &kg)? },
            });
        }
    }
    let [valence, arousal] = curves;
    Ok(LeaveNCurve { mode, valence, arousal })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WmaeReport {
    pub weighting: WmaeWeighting,
    pub valence: f64,
    pub arousal: f64,
    pub raters: usize,
    pub clips: usize,
    pub reliabilities: BTreeMap<String, f64>,
}

pub fn wmae_report(annotations: &[ClipAnnotation], weighting: WmaeWeighting) -> Result<WmaeReport> {
    let reliabilities = metrics::annotator_reliability(annotations)?;
    let (valence, arousal) = metrics::wmae(annotations, &reliabilities, weighting)?;
    Ok(WmaeReport {
        weighting,
        valence,
        arousal,
        raters: reliabilities.len(),
        clips: metrics::group_by_clip(annotations).len(),
        reliabilities,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    pub grid_resolution: usize,
    /// `(valence, arousal)` MAE thresholds for grid flags.
    pub thresholds: (f64, f64),
    pub leave_n: Vec<f64>,
    /// Filter modes for the leave-N-in curves; both when `None`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterMode>,
    pub wmae_weighting: WmaeWeighting,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            grid_resolution: 10,
            thresholds: HUMAN_WMAE,
            leave_n: vec![25.0, 50.0, 75.0, 100.0],
            filter: None,
            wmae_weighting: WmaeWeighting::Reliability,
        }
    }
}

impl EvalOptions {
    pub fn modes(&self) -> Vec<FilterMode> {
        match self.filter {
            Some(m) => vec![m],
            None => vec![FilterMode::Lowest, FilterMode::Highest],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: Overall,
    pub quadrants: Vec<QuadrantRow>,
    pub grid: GridReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pose: Option<PoseReport>,
    pub leave_n_in: Vec<LeaveNCurve>,
    /// Spearman correlation between cumulative uncertainty and absolute error, `[valence, arousal]`.
    pub uncertainty_error_spearman: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wmae: Option<WmaeReport>,
}

/// Spearman correlation of cumulative uncertainty with absolute error, per dimension.
pub fn uncertainty_error_spearman(frames: &Frames) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for (di, dim) in Dim::BOTH.iter().enumerate() {
        let u: Vec<f64> = frames.uncertainty.iter().map(|x| x[di]).collect();
        let e: Vec<f64> = frames
            .preds
            .iter()
            .zip(&frames.gts)
            .map(|(p, g)| (p.get(*dim) - g.get(*dim)).abs())
            .collect();
        out[di] = metrics::spearman(&u, &e)?;
    }
    Ok(out)
}

/// Full report. Pose bins need a manifest; WMAE needs multi-rater annotations.
pub fn evaluate(
    clips: &[ClipResult],
    manifest: Option<&DatasetManifest>,
    annotations: Option<&[ClipAnnotation]>,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let frames = Frames::from_clips(clips);
    let overall = overall_eval(&frames.preds, &frames.gts)?;
    let leave = opts
        .modes()
        .into_iter()
        .map(|m| leave_n_in(&frames.preds, &frames.uncertainty, &frames.gts, &opts.leave_n, m))
        .collect::<Result<_>>()?;
    Ok(EvalReport {
        overall,
        quadrants: quadrant_report(&frames.preds, &frames.gts),
        grid: grid_report(&frames.preds, &frames.gts, opts.grid_resolution, opts.thresholds)?,
        pose: manifest.map(|m| pose_report(clips, m)),
        leave_n_in: leave,
        uncertainty_error_spearman: uncertainty_error_spearman(&frames)?,
        wmae: annotations.map(|a| wmae_report(a, opts.wmae_weighting)).transpose()?,
    })
}

pub fn report_json(r: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

fn status_str(s: CellStatus) -> &'static str {
    match s {
        CellStatus::Ok => "ok",
        CellStatus::Degenerate => "degenerate",
        CellStatus::Empty => "empty",
    }
}

/// Flat CSV view: one row per (block, key) with the common metric columns.
pub fn report_csv(r: &EvalReport) -> String {
    let mut s = String::from("block,key,count,ccc_v,ccc_a,mae_v,mae_a,flag\n");
    let o = &r.overall;
    let _ = writeln!(
        s,
        "overall,all,{},{:.6},{:.6},{:.6},{:.6},",
        o.n_frames, o.ccc_v, o.ccc_a, o.mae_v, o.mae_a
    );
    let mut row = |block: &str, key: &str, m: &SubsetMetrics| {
        let _ = writeln!(
            s,
            "{block},{key},{},{:.6},{:.6},{:.6},{:.6},{}",
            m.count,
            m.ccc_v,
            m.ccc_a,
            m.mae_v,
            m.mae_a,
            status_str(m.status)
        );
    };
    for q in &r.quadrants {
        row("quadrant", &format!("{:?}", q.quadrant), &q.metrics);
    }
    if let Some(p) = &r.pose {
        for b in &p.bins {
            row("pose", &b.label, &b.metrics);
        }
    }
    for c in &r.grid.cells {
        let flag = match c.flag {
            GridFlag::BelowHuman => "below_human",
            GridFlag::AboveHuman => "above_human",
            GridFlag::Empty => "empty",
        };
        let _ = writeln!(
            s,
            "grid,r{}c{},{},,,{:.6},{:.6},{flag}",
            c.row, c.col, c.count, c.mae_v, c.mae_a
        );
    }
    for curve in &r.leave_n_in {
        let mode = match curve.mode {
            FilterMode::Lowest => "lowest",
            FilterMode::Highest => "highest",
        };
        for (v, a) in curve.valence.iter().zip(&curve.arousal) {
            let _ = writeln!(
                s,
                "leave_n_in_{mode},{},{},{:.6},{:.6},{:.6},{:.6},",
                v.n_percent, v.kept, v.ccc, a.ccc, v.mae, a.mae
            );
        }
    }
    if let Some(w) = &r.wmae {
        let _ = writeln!(s, "wmae,all,{},,,{:.6},{:.6},", w.clips, w.valence, w.arousal);
    }
    s
}

/// Gnuplot data: one indexed block per filter mode with columns
/// `n ccc_v mae_v ccc_a mae_a`.
pub fn leave_n_in_dat(curves: &[LeaveNCurve]) -> String {
    let mut s = String::new();
    for (k, c) in curves.iter().enumerate() {
        if k > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# {:?}\n# n ccc_v mae_v ccc_a mae_a", c.mode);
        for (v, a) in c.valence.iter().zip(&c.arousal) {
            let _ = writeln!(s, "{} {:.6} {:.6} {:.6} {:.6}", v.n_percent, v.ccc, v.mae, a.ccc, a.mae);
        }
    }
    s
}

/// Gnuplot data for a CED curve: `nme fraction` per line.
pub fn ced_dat(curve: &[(f64, f64)]) -> String {
    let mut s = String::from("# nme fraction\n");
    for (x, y) in curve {
        let _ = writeln!(s, "{x:.6} {y:.6}");
    }
    s
}
