//! Frame-by-frame inference with both warm-up policies, plus a checkpoint round trip.
//!
//! cargo run --release --example stream_inference

use affect_trace::io::Split;
use affect_trace::model::{read_checkpoint, train, write_checkpoint, Model, ModelConfig, Sample, TrainConfig};
use affect_trace::pipeline::{Pipeline, PipelineConfig, Warmup};
use affect_trace::sim::{simulate_dataset, DatasetPlan, SimConfig};

fn main() -> affect_trace::Result<()> {
    let clips = simulate_dataset(&SimConfig::default(), &DatasetPlan { train: 120, val: 0, test: 1, clips_per_subject: 4 })?;
    let rf = ModelConfig::default().receptive_field();
    let samples: Vec<Sample> = clips
        .iter()
        .filter(|c| c.entry.split == Split::Train)
        .map(|c| Sample::from_trace(&c.trace, c.truth.clone(), rf))
        .collect::<affect_trace::Result<_>>()?;
    let tc = TrainConfig { epochs: 4, ..TrainConfig::default() };
    let (model, _) = train(Model::init(ModelConfig::default())?, &samples, &tc)?;

    let bytes = write_checkpoint(&model);
    let model = read_checkpoint(&bytes)?;
    println!("checkpoint: {} bytes, {} parameters, receptive field {rf} frames", bytes.len(), model.param_count());

    let clip = clips.last().unwrap();
    for warmup in [Warmup::ReplicateFirst, Warmup::EmitAfterFill] {
        let mut p = Pipeline::new(&model, PipelineConfig { window_len: 32, warmup })?;
        println!("\n{warmup:?}, window 32");
        for f in &clip.trace.frames {
            let out = p.push_frame(f)?;
            if f.frame_index % 20 == 0 || f.frame_index == 31 {
                let gt = clip.truth[f.frame_index];
                match out.first() {
                    Some(r) => println!(
                        "  frame {:>3} valid={:<5} -> V {:+.2} A {:+.2} (truth {:+.2} {:+.2}), cumulative unc {:.3}/{:.3}",
                        f.frame_index,
                        f.valid,
                        r.output.va.valence,
                        r.output.va.arousal,
                        gt.valence,
                        gt.arousal,
                        r.output.uncertainty_valence.cumulative,
                        r.output.uncertainty_arousal.cumulative
                    ),
                    None => println!("  frame {:>3} buffered ({} held)", f.frame_index, p.buffered()),
                }
            }
        }
        let tail = p.flush()?;
        println!("  flush released {} records; {} emitted for {} frames", tail.len(), p.emitted(), p.frames_seen());
    }
    Ok(())
}
