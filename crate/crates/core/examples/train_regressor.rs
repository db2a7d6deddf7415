//! Simulates a dataset, trains the regressor and reports held-out agreement.
//!
//! cargo run --release --example train_regressor -- [train_clips] [test_clips] [epochs]

use std::time::Instant;

use affect_trace::eval::{leave_n_in, overall_eval, uncertainty_error_spearman, ClipResult, FilterMode, Frames};
use affect_trace::io::{PredictionTrace, Split};
use affect_trace::model::{train, Model, ModelConfig, Sample, TrainConfig};
use affect_trace::pipeline::{process_trace, PipelineConfig};
use affect_trace::sim::{simulate_dataset, DatasetPlan, SimConfig};

fn main() -> affect_trace::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n_train = args.first().copied().unwrap_or(400);
    let n_test = args.get(1).copied().unwrap_or(100);
    let tc = TrainConfig {
        epochs: args.get(2).copied().unwrap_or(TrainConfig::default().epochs),
        ..TrainConfig::default()
    };

    let sim = SimConfig::default();
    let plan = DatasetPlan { train: n_train, val: 0, test: n_test, clips_per_subject: 4 };
    let clips = simulate_dataset(&sim, &plan)?;
    let mcfg = ModelConfig::default();
    let rf = mcfg.receptive_field();
    let samples: Vec<Sample> = clips
        .iter()
        .filter(|c| c.entry.split == Split::Train)
        .map(|c| Sample::from_trace(&c.trace, c.truth.clone(), rf))
        .collect::<affect_trace::Result<_>>()?;

    let t0 = Instant::now();
    let (model, report) = train(Model::init(mcfg)?, &samples, &tc)?;
    println!("trained {} clips in {:.1}s", samples.len(), t0.elapsed().as_secs_f64());
    for e in std::iter::once(&report.initial).chain(&report.epochs) {
        println!(
            "epoch {:>3}  loss {:>9.4}  nll {:>9.4}  ccc_v {:.3}  ccc_a {:.3}",
            e.epoch, e.loss, e.nll, e.ccc_valence, e.ccc_arousal
        );
    }

    let pcfg = PipelineConfig::default();
    let results: Vec<ClipResult> = clips
        .iter()
        .filter(|c| c.entry.split == Split::Test)
        .map(|c| {
            let records = process_trace(&model, &pcfg, &c.trace)?;
            let p = PredictionTrace { clip_id: c.entry.clip_id.clone(), records };
            ClipResult::align(&p, c.truth.clone())
        })
        .collect::<affect_trace::Result<_>>()?;
    let frames = Frames::from_clips(&results);
    let o = overall_eval(&frames.preds, &frames.gts)?;
    println!(
        "held-out {} frames: CCC V {:.3} A {:.3}  MAE V {:.3} A {:.3}",
        o.n_frames, o.ccc_v, o.ccc_a, o.mae_v, o.mae_a
    );
    let rho = uncertainty_error_spearman(&frames)?;
    println!("spearman(uncertainty, |error|): V {:.3} A {:.3}", rho[0], rho[1]);
    for mode in [FilterMode::Lowest, FilterMode::Highest] {
        let c = leave_n_in(&frames.preds, &frames.uncertainty, &frames.gts, &[25.0, 50.0, 75.0, 100.0], mode)?;
        for (v, a) in c.valence.iter().zip(&c.arousal) {
            println!(
                "{mode:?} {:>3}%  V ccc {:.3} mae {:.3}  A ccc {:.3} mae {:.3}",
                v.n_percent, v.ccc, v.mae, a.ccc, a.mae
            );
        }
    }
    Ok(())
}
