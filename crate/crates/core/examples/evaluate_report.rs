//! Trains on a small simulated dataset and prints the full evaluation report:
//! quadrants, the VA error grid, head-pose bins, leave-N-in curves and rater WMAE.
//!
//! cargo run --release --example evaluate_report -- [train_clips] [test_clips]

use affect_trace::eval::{evaluate, report_json, ClipResult, EvalOptions, GridFlag};
use affect_trace::io::{DatasetManifest, PredictionTrace, Split};
use affect_trace::model::{train, Model, ModelConfig, Sample, TrainConfig};
use affect_trace::pipeline::{process_trace, PipelineConfig};
use affect_trace::sim::{simulate_annotations, simulate_dataset, AnnotationConfig, DatasetPlan, SimConfig};
use affect_trace::types::VAPoint;

fn main() -> affect_trace::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let plan = DatasetPlan {
        train: args.first().copied().unwrap_or(200),
        val: 0,
        test: args.get(1).copied().unwrap_or(80),
        clips_per_subject: 4,
    };
    let clips = simulate_dataset(&SimConfig::default(), &plan)?;
    let rf = ModelConfig::default().receptive_field();
    let samples: Vec<Sample> = clips
        .iter()
        .filter(|c| c.entry.split == Split::Train)
        .map(|c| Sample::from_trace(&c.trace, c.truth.clone(), rf))
        .collect::<affect_trace::Result<_>>()?;
    let (model, _) = train(Model::init(ModelConfig::default())?, &samples, &TrainConfig { epochs: 6, ..TrainConfig::default() })?;

    let test: Vec<_> = clips.iter().filter(|c| c.entry.split == Split::Test).collect();
    let results: Vec<ClipResult> = test
        .iter()
        .map(|c| {
            let records = process_trace(&model, &PipelineConfig::default(), &c.trace)?;
            ClipResult::align(&PredictionTrace { clip_id: c.entry.clip_id.clone(), records }, c.truth.clone())
        })
        .collect::<affect_trace::Result<_>>()?;
    let manifest = DatasetManifest { clips: test.iter().map(|c| c.entry.clone()).collect() };
    let labels: Vec<(String, VAPoint)> = test.iter().map(|c| (c.entry.clip_id.clone(), c.label())).collect();
    let anns = simulate_annotations(0, &labels, &AnnotationConfig::default())?;

    let opts = EvalOptions { grid_resolution: 4, ..EvalOptions::default() };
    let r = evaluate(&results, Some(&manifest), Some(&anns), &opts)?;

    let o = r.overall;
    println!("overall {} frames: CCC V {:.3} A {:.3}, MAE V {:.3} A {:.3}", o.n_frames, o.ccc_v, o.ccc_a, o.mae_v, o.mae_a);
    for q in &r.quadrants {
        let m = &q.metrics;
        println!("  {:?}: {:>5} frames, CCC {:.3}/{:.3}, MAE {:.3}/{:.3} ({:?})", q.quadrant, m.count, m.ccc_v, m.ccc_a, m.mae_v, m.mae_a, m.status);
    }
    println!("grid {}x{} (rows: arousal high to low; '+' beats human disagreement)", opts.grid_resolution, opts.grid_resolution);
    for row in (0..opts.grid_resolution).rev() {
        let line: String = (0..opts.grid_resolution)
            .map(|col| {
                let c = r.grid.cells.iter().find(|c| c.row == row && c.col == col).unwrap();
                match c.flag {
                    GridFlag::BelowHuman => format!(" + {:>5}", c.count),
                    GridFlag::AboveHuman => format!(" - {:>5}", c.count),
                    GridFlag::Empty => "       .".to_string(),
                }
            })
            .collect();
        println!("  {line}");
    }
    if let Some(p) = &r.pose {
        for b in &p.bins {
            println!("  pose {:<22} {:>3} clips, CCC {:.3}/{:.3}", b.label, b.clips, b.metrics.ccc_v, b.metrics.ccc_a);
        }
    }
    for c in &r.leave_n_in {
        for (v, a) in c.valence.iter().zip(&c.arousal) {
            println!("  {:?} {:>3}%: CCC {:.3}/{:.3}, MAE {:.3}/{:.3}", c.mode, v.n_percent, v.ccc, a.ccc, v.mae, a.mae);
        }
    }
    let s = r.uncertainty_error_spearman;
    println!("spearman(uncertainty, |error|) V {:.3} A {:.3}", s[0], s[1]);
    if let Some(w) = &r.wmae {
        println!("rater WMAE V {:.3} A {:.3}", w.valence, w.arousal);
    }
    println!("JSON report: {} bytes", report_json(&r).len());
    Ok(())
}
