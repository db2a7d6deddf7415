//! How held-out agreement degrades as more frames fail the face-validity check.
//!
//! cargo run --release --example gating_robustness

use affect_trace::eval::{overall_eval, ClipResult, Frames};
use affect_trace::io::{PredictionTrace, Split};
use affect_trace::model::{train, Model, ModelConfig, Sample, TrainConfig};
use affect_trace::pipeline::{process_trace, PipelineConfig};
use affect_trace::sim::{corrupt, simulate_dataset, CorruptionSpan, DatasetPlan, SimConfig, SpanKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> affect_trace::Result<()> {
    let clips = simulate_dataset(&SimConfig::default(), &DatasetPlan { train: 200, val: 0, test: 60, clips_per_subject: 4 })?;
    let rf = ModelConfig::default().receptive_field();
    let samples: Vec<Sample> = clips
        .iter()
        .filter(|c| c.entry.split == Split::Train)
        .map(|c| Sample::from_trace(&c.trace, c.truth.clone(), rf))
        .collect::<affect_trace::Result<_>>()?;
    let (model, _) = train(Model::init(ModelConfig::default())?, &samples, &TrainConfig { epochs: 6, ..TrainConfig::default() })?;

    let test: Vec<_> = clips.iter().filter(|c| c.entry.split == Split::Test).collect();
    for fraction in [0.0, 0.1, 0.2, 0.4, 0.6] {
        let results: Vec<ClipResult> = test
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
                let k = (fraction * c.trace.len() as f64).round() as usize;
                let spans: Vec<CorruptionSpan> = rand::seq::index::sample(&mut rng, c.trace.len(), k)
                    .into_iter()
                    .map(|f| CorruptionSpan { start: f, end: f + 1, kind: SpanKind::Invalid })
                    .collect();
                let trace = corrupt(&c.trace, &spans)?;
                let records = process_trace(&model, &PipelineConfig::default(), &trace)?;
                ClipResult::align(&PredictionTrace { clip_id: c.entry.clip_id.clone(), records }, c.truth.clone())
            })
            .collect::<affect_trace::Result<_>>()?;
        let f = Frames::from_clips(&results);
        let o = overall_eval(&f.preds, &f.gts)?;
        let mean_u = |d: usize| f.uncertainty.iter().map(|u| u[d]).sum::<f64>() / f.len() as f64;
        println!(
            "{:>3.0}% extra invalid frames: CCC V {:.3} A {:.3}, mean cumulative uncertainty {:.3}/{:.3}",
            100.0 * fraction,
            o.ccc_v,
            o.ccc_a,
            mean_u(0),
            mean_u(1)
        );
    }
    Ok(())
}
