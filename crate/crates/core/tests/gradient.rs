use affect_trace::io::Split;
use affect_trace::model::{grad_check, grad_check_scaled, sample_coordinates, Model, ModelConfig, Sample, TrainConfig};
use affect_trace::sim::{simulate_dataset, DatasetPlan, SimConfig};

fn batch(cfg: &ModelConfig) -> Vec<Sample> {
    let sim = SimConfig { clip_len_frames: 24, ..SimConfig::default() };
    let plan = DatasetPlan { train: 3, val: 0, test: 0, clips_per_subject: 4 };
    simulate_dataset(&sim, &plan)
        .unwrap()
        .iter()
        .filter(|c| c.entry.split == Split::Train)
        .map(|c| Sample::from_trace(&c.trace, c.truth.clone(), cfg.receptive_field()).unwrap())
        .collect()
}

#[test]
fn full_model_gradient_matches_central_differences() {
    let cfg = ModelConfig::default();
    let model = Model::init(cfg.clone()).unwrap();
    let samples = batch(&cfg);
    let tc = TrainConfig::default();
    let coords = sample_coordinates(&model, 400, 16, 11);
    assert!(coords.len() >= 200);
    let r = grad_check(&model, &samples, &tc, 1e-5, Some(&coords)).unwrap();
    assert!(r.max_relative_error <= 1e-4, "{r:?}");
    let m = grad_check_scaled(&model, &samples, &tc, 1e-5, Some(&coords), 1.01).unwrap();
    assert!(m.max_relative_error > 1e-4, "{m:?}");
}
