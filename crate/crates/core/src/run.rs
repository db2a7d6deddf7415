//! The four commands behind the binary, as library functions. Every command
//! writes the fully resolved `RunConfig` next to its outputs.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{RunConfig, RUN_CONFIG_FILE};
use crate::error::{Error, Result};
use crate::eval::{self, ClipResult, EvalReport};
use crate::io::{
    self, parse_annotations, parse_predictions, write_annotations, write_file, write_frame_labels, write_manifest,
    write_predictions, write_trace, Dataset, DatasetManifest, PredictionTrace, Split, ANNOTATIONS_FILE,
    MANIFEST_FILE,
};
use crate::model::{self, Model, Sample, TrainReport};
use crate::pipeline::process_trace;
use crate::sim;
use crate::types::{quadrant_of_bin2, VAPoint};

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const HISTORY_FILE: &str = "history.csv";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const LEAVE_N_DAT: &str = "leave_n_in.dat";
pub const THREADS_ENV: &str = "XTRACE_THREADS";

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Range { .. } => 2,
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::WrongArity { .. }
        | Error::NonFiniteValue { .. }
        | Error::NonMonotoneFrameIndex { .. }
        | Error::DuplicateAnnotation { .. }
        | Error::Manifest(_) => 3,
        Error::NonFiniteLoss => 4,
        Error::Checkpoint(_) | Error::ShapeMismatch { .. } => 5,
        Error::Misalignment(_) => 6,
        _ => 1,
    }
}

/// Caps the global thread pool from `XTRACE_THREADS` when set. Call once, early.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    // a pool may already exist (tests, embedding); that is not an error here
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn write_run_config(cfg: &RunConfig, dir: &Path) -> Result<()> {
    write_file(&dir.join(RUN_CONFIG_FILE), cfg.to_toml().as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub clips: usize,
    pub frames: usize,
    /// Frames whose ground truth falls in Q1..Q4.
    pub quadrant_frames: [usize; 4],
    pub annotations: usize,
}

impl fmt::Display for SimulateSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.quadrant_frames;
        write!(
            f,
            "{} clips, {} frames, {} annotations; frames per quadrant Q1 {} Q2 {} Q3 {} Q4 {}",
            self.clips, self.frames, self.annotations, q[0], q[1], q[2], q[3]
        )
    }
}

/// Frames per ground-truth quadrant, counted on a 2x2 grid.
pub fn quadrant_coverage(labels: &[VAPoint]) -> [usize; 4] {
    let grid = eval::grid_report(labels, labels, 2, crate::metrics::HUMAN_WMAE).expect("resolution 2 is valid");
    let mut out = [0; 4];
    for c in &grid.cells {
        let q = quadrant_of_bin2(crate::types::GridBin { row: c.row, col: c.col });
        out[q.index()] += c.count;
    }
    out
}

/// Writes `traces/`, `labels/`, `manifest.json` and `annotations.csv` under `out`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateSummary> {
    cfg.validate()?;
    let clips = sim::simulate_dataset(&cfg.sim, &cfg.plan)?;
    clips.par_iter().try_for_each(|c| {
        write_file(&out.join(&c.entry.trace_path), &write_trace(&c.trace))?;
        let lp = c.entry.frame_labels_path.as_ref().expect("simulated clips carry frame labels");
        write_file(&out.join(lp), &write_frame_labels(&c.truth))
    })?;
    let manifest = DatasetManifest {
        clips: clips.iter().map(|c| c.entry.clone()).collect(),
    };
    write_file(&out.join(MANIFEST_FILE), &write_manifest(&manifest))?;
    let labels: Vec<(String, VAPoint)> = clips.iter().map(|c| (c.entry.clip_id.clone(), c.label())).collect();
    let anns = sim::simulate_annotations(cfg.sim.seed, &labels, &cfg.annotations)?;
    write_file(&out.join(ANNOTATIONS_FILE), &write_annotations(&anns))?;
    write_run_config(cfg, out)?;
    let truth: Vec<VAPoint> = clips.iter().flat_map(|c| c.truth.iter().copied()).collect();
    Ok(SimulateSummary {
        clips: clips.len(),
        frames: truth.len(),
        quadrant_frames: quadrant_coverage(&truth),
        annotations: anns.len(),
    })
}

/// Training samples for every clip of `split`, in manifest order.
pub fn load_samples(ds: &Dataset, split: Split, receptive_field: usize) -> Result<Vec<Sample>> {
    let entries: Vec<_> = ds.manifest.split(split).collect();
    entries
        .par_iter()
        .map(|e| {
            let trace = ds.trace(e)?;
            let targets = ds.frame_targets(e, trace.len())?.ok_or_else(|| {
                Error::Manifest(format!("clip `{}` has no label", e.clip_id))
            })?;
            Sample::from_trace(&trace, targets, receptive_field)
        })
        .collect()
}

pub fn history_csv(report: &TrainReport) -> String {
    let mut s = String::from("epoch,loss,nll,ccc_valence,ccc_arousal\n");
    for e in std::iter::once(&report.initial).chain(&report.epochs) {
        s.push_str(&format!(
            "{},{:.9},{:.9},{:.6},{:.6}\n",
            e.epoch, e.loss, e.nll, e.ccc_valence, e.ccc_arousal
        ));
    }
    s
}

/// Trains on the `train` split of `data`; writes `model.ckpt` and `history.csv` under `out`.
pub fn cmd_train(cfg: &RunConfig, data: &Path, out: &Path) -> Result<TrainReport> {
    cfg.validate()?;
    let ds = Dataset::open(data)?;
    let init = Model::init(cfg.model.clone())?;
    let samples = load_samples(&ds, Split::Train, cfg.model.receptive_field())?;
    let (model, report) = model::train(init, &samples, &cfg.train)?;
    model::save_checkpoint(&model, &out.join(CHECKPOINT_FILE))?;
    write_file(&out.join(HISTORY_FILE), history_csv(&report).as_bytes())?;
    write_run_config(cfg, out)?;
    Ok(report)
}

/// Loads a checkpoint and checks it against the configured architecture (seed excluded).
pub fn load_model(cfg: &RunConfig, checkpoint: &Path) -> Result<Model> {
    let m = model::load_checkpoint(checkpoint)?;
    let mut want = cfg.model.clone();
    want.seed = m.config().seed;
    if *m.config() != want {
        return Err(Error::Checkpoint(format!(
            "checkpoint architecture {:?} differs from configured {:?}",
            m.config(),
            cfg.model
        )));
    }
    Ok(m)
}

/// Inference inputs: a dataset directory (optionally one split) or a single trace file.
#[derive(Debug, Clone, PartialEq)]
pub enum InferInput {
    Dataset { dir: PathBuf, split: Option<Split> },
    Trace(PathBuf),
}

/// Writes one `<clip_id>.csv` prediction file per input trace under `out`.
pub fn cmd_infer(cfg: &RunConfig, checkpoint: &Path, input: &InferInput, out: &Path) -> Result<Vec<PredictionTrace>> {
    cfg.validate()?;
    let model = load_model(cfg, checkpoint)?;
    let traces = match input {
        InferInput::Trace(p) => vec![io::read_trace(p)?],
        InferInput::Dataset { dir, split } => {
            let ds = Dataset::open(dir)?;
            let entries: Vec<_> = ds
                .manifest
                .clips
                .iter()
                .filter(|e| split.is_none_or(|s| e.split == s))
                .collect();
            entries.par_iter().map(|e| ds.trace(e)).collect::<Result<Vec<_>>>()?
        }
    };
    let preds: Vec<PredictionTrace> = traces
        .par_iter()
        .map(|t| {
            Ok(PredictionTrace {
                clip_id: t.clip_id.clone(),
                records: process_trace(&model, &cfg.pipeline, t)?,
            })
        })
        .collect::<Result<_>>()?;
    preds
        .par_iter()
        .try_for_each(|p| write_file(&out.join(format!("{}.csv", p.clip_id)), &write_predictions(p)))?;
    write_run_config(cfg, out)?;
    Ok(preds)
}

/// Reads every `*.csv` prediction file in `dir`, sorted by clip id.
pub fn read_prediction_dir(dir: &Path) -> Result<Vec<PredictionTrace>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            parse_predictions(&bytes, id)
        })
        .collect()
}

/// Pairs predictions with the dataset's per-frame targets.
pub fn align_with_dataset(ds: &Dataset, preds: &[PredictionTrace]) -> Result<Vec<ClipResult>> {
    preds
        .iter()
        .map(|p| {
            let entry = ds
                .manifest
                .clips
                .iter()
                .find(|e| e.clip_id == p.clip_id)
                .ok_or_else(|| Error::Misalignment(format!("clip `{}` is not in the manifest", p.clip_id)))?;
            let targets = ds
                .frame_targets(entry, p.records.len())?
                .ok_or_else(|| Error::Misalignment(format!("clip `{}` has no label", p.clip_id)))?;
            ClipResult::align(p, targets)
        })
        .collect()
}

/// Builds the report from a dataset and a directory of predictions and writes
/// `report.json`, `report.csv` and `leave_n_in.dat` under `out`. WMAE is
/// included when the dataset's annotations give every rater at least two
/// shared clips among the evaluated ones.
pub fn cmd_eval(cfg: &RunConfig, data: &Path, predictions: &Path, out: &Path) -> Result<EvalReport> {
    cfg.validate()?;
    let ds = Dataset::open(data)?;
    let preds = read_prediction_dir(predictions)?;
    let clips = align_with_dataset(&ds, &preds)?;
    let ann_path = data.join(ANNOTATIONS_FILE);
    let annotations = if ann_path.exists() {
        let bytes = fs::read(&ann_path).map_err(|e| Error::io(&ann_path, e))?;
        let ids: std::collections::BTreeSet<&str> = clips.iter().map(|c| c.clip_id.as_str()).collect();
        let anns: Vec<_> = parse_annotations(&bytes)?
            .into_iter()
            .filter(|a| ids.contains(a.clip_id.as_str()))
            .collect();
        // too little rater overlap among the evaluated clips: report without WMAE
        Some(anns).filter(|a| eval::wmae_report(a, cfg.eval.wmae_weighting).is_ok())
    } else {
        None
    };
    let has_pose = ds.manifest.clips.iter().any(|e| e.pose_bin.is_some());
    let report = eval::evaluate(
        &clips,
        has_pose.then_some(&ds.manifest),
        annotations.as_deref(),
        &cfg.eval,
    )?;
    write_file(&out.join(REPORT_JSON), eval::report_json(&report).as_bytes())?;
    write_file(&out.join(REPORT_CSV), eval::report_csv(&report).as_bytes())?;
    write_file(&out.join(LEAVE_N_DAT), eval::leave_n_in_dat(&report.leave_n_in).as_bytes())?;
    write_run_config(cfg, out)?;
    Ok(report)
}
