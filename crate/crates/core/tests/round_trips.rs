mod common;

use affect_trace::io::{
    parse_annotations, parse_frame_labels, parse_manifest, parse_predictions, parse_trace, write_annotations,
    write_frame_labels, write_manifest, write_predictions, write_trace, DatasetManifest, PredictionRecord,
    PredictionTrace,
};
use affect_trace::model::{read_checkpoint, write_checkpoint, Model, ModelConfig};
use affect_trace::sim::{simulate_dataset, DatasetPlan, SimConfig};
use affect_trace::types::{AffectOutput, UncertaintyTriple, VAPoint};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_sim(seed: u64, len: usize) -> (SimConfig, DatasetPlan) {
    (
        SimConfig { seed, clip_len_frames: len, ..SimConfig::default() },
        DatasetPlan { train: 3, val: 1, test: 1, clips_per_subject: 2 },
    )
}

fn unit() -> impl Strategy<Value = f64> {
    0.0f64..=1.0
}

fn record(i: usize, v: [f64; 8]) -> PredictionRecord {
    PredictionRecord {
        frame_index: i,
        output: AffectOutput {
            va: VAPoint::clamped(v[0] * 2.0 - 1.0, v[1] * 2.0 - 1.0),
            uncertainty_valence: UncertaintyTriple::clamped(v[2], v[3], v[4]),
            uncertainty_arousal: UncertaintyTriple::clamped(v[5], v[6], v[7]),
        },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulated_traces_are_fixpoints(seed in 0u64..10_000, len in 1usize..40) {
        let (sim, plan) = small_sim(seed, len);
        for c in simulate_dataset(&sim, &plan).unwrap() {
            let bytes = write_trace(&c.trace);
            let back = parse_trace(&bytes).unwrap();
            prop_assert_eq!(&back, &c.trace);
            prop_assert_eq!(write_trace(&back), bytes);
            let lb = write_frame_labels(&c.truth);
            prop_assert_eq!(parse_frame_labels(&lb).unwrap(), c.truth);
        }
    }

    #[test]
    fn manifest_is_a_fixpoint(seed in 0u64..10_000) {
        let (sim, plan) = small_sim(seed, 4);
        let m = DatasetManifest { clips: simulate_dataset(&sim, &plan).unwrap().into_iter().map(|c| c.entry).collect() };
        let bytes = write_manifest(&m);
        prop_assert_eq!(write_manifest(&parse_manifest(&bytes).unwrap()), bytes);
    }

    #[test]
    fn annotations_are_fixpoints(seed in any::<u64>(), clips in 1usize..30) {
        let anns = common::random_annotations(&mut ChaCha8Rng::seed_from_u64(seed), clips);
        let bytes = write_annotations(&anns);
        let back = parse_annotations(&bytes).unwrap();
        prop_assert_eq!(&back, &anns);
        prop_assert_eq!(write_annotations(&back), bytes);
    }

    #[test]
    fn predictions_reach_a_fixpoint(rows in prop::collection::vec(prop::array::uniform8(unit()), 0..50)) {
        let p = PredictionTrace {
            clip_id: "c".to_string(),
            records: rows.iter().enumerate().map(|(i, v)| record(i, *v)).collect(),
        };
        let once = write_predictions(&p);
        let parsed = parse_predictions(&once, "c").unwrap();
        prop_assert_eq!(parsed.records.len(), p.records.len());
        prop_assert_eq!(write_predictions(&parsed), once);
    }
}

#[test]
fn checkpoint_preserves_every_parameter_bit() {
    let mut m = Model::init(ModelConfig { seed: 17, ..ModelConfig::default() }).unwrap();
    for (i, p) in m.params_mut().iter_mut().enumerate() {
        *p += (i as f64).sin() * 1e-3 + f64::EPSILON * i as f64;
    }
    let bytes = write_checkpoint(&m);
    let back = read_checkpoint(&bytes).unwrap();
    assert_eq!(back.config(), m.config());
    assert!(back.params().iter().zip(m.params()).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(write_checkpoint(&back), bytes);
}
