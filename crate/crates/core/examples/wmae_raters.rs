//! Inter-rater disagreement on simulated single-point clip annotations.

use affect_trace::eval::wmae_report;
use affect_trace::io::ClipAnnotation;
use affect_trace::metrics::{annotator_reliability, WmaeWeighting};
use affect_trace::sim::{simulate_annotations, simulate_dataset, AnnotationConfig, DatasetPlan, SimConfig};
use affect_trace::types::VAPoint;

fn main() -> affect_trace::Result<()> {
    let clips = simulate_dataset(&SimConfig { clip_len_frames: 60, ..SimConfig::default() }, &DatasetPlan::from_total(300))?;
    let labels: Vec<(String, VAPoint)> = clips.iter().map(|c| (c.entry.clip_id.clone(), c.label())).collect();

    for sigma in [0.05, 0.10, 0.15] {
        let cfg = AnnotationConfig { noise_valence: sigma, noise_arousal: sigma, ..AnnotationConfig::default() };
        let r = wmae_report(&simulate_annotations(1, &labels, &cfg)?, WmaeWeighting::Reliability)?;
        println!("rater noise {sigma:.2}: WMAE V {:.3} A {:.3}", r.valence, r.arousal);
    }

    let cfg = AnnotationConfig::default();
    let mut anns = simulate_annotations(1, &labels, &cfg)?;
    let r = wmae_report(&anns, WmaeWeighting::Reliability)?;
    println!(
        "default noise {:.3}/{:.3}: WMAE V {:.3} A {:.3} over {} clips, {} raters",
        cfg.noise_valence, cfg.noise_arousal, r.valence, r.arousal, r.clips, r.raters
    );

    // one careless rater: answers are pushed toward the origin and jittered
    for (i, a) in anns.iter_mut().filter(|a| a.rater_id == "rater03").enumerate() {
        let j = ((i * 37) % 11) as f64 / 10.0 - 0.5;
        *a = ClipAnnotation { va: VAPoint::clamped(0.2 * a.va.valence + j, 0.2 * a.va.arousal - j), ..a.clone() };
    }
    let rel = annotator_reliability(&anns)?;
    for (rater, w) in &rel {
        println!("  {rater}: reliability {w:.3}");
    }
    for w in [WmaeWeighting::Reliability, WmaeWeighting::InverseDistance] {
        let r = wmae_report(&anns, w)?;
        println!("{w:?} weighting: WMAE V {:.3} A {:.3}", r.valence, r.arousal);
    }
    Ok(())
}
