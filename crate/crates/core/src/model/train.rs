use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{evidential_loss, HeadGrad, LossBreakdown};
use super::{Model, HEAD_OUTPUTS};
use crate::error::{Error, Result};
use crate::io::FeatureTrace;
use crate::pipeline::normalize_frame;
use crate::types::VAPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Clips per update.
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Cosine decay of the step size down to this fraction of `learning_rate`
    /// by the last update; 1 keeps it constant.
    pub lr_final_fraction: f64,
    pub lambda_reg: f64,
    pub lambda_ccc: f64,
    /// Global gradient-norm clip; 0 disables.
    pub grad_clip: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 12,
            batch_size: 4,
            learning_rate: 2e-3,
            lr_final_fraction: 0.05,
            lambda_reg: 0.01,
            lambda_ccc: 0.5,
            grad_clip: 5.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".to_string()));
        }
        if !(0.0..=1.0).contains(&self.lr_final_fraction) {
            return Err(Error::Config("lr_final_fraction must lie in [0, 1]".to_string()));
        }
        if !(self.learning_rate >= 0.0 && self.lambda_reg >= 0.0 && self.lambda_ccc >= 0.0) {
            return Err(Error::Config(
                "learning_rate, lambda_reg and lambda_ccc must be >= 0".to_string(),
            ));
        }
        Ok(())
    }
}

/// One training clip: a left-padded window of normalized features and the
/// per-frame targets for positions `first_target..`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub window: Vec<Vec<f64>>,
    pub first_target: usize,
    pub targets: Vec<VAPoint>,
}

impl Sample {
    /// Normalizes `trace` and left-pads it with copies of the first frame so
    /// that every target position sees a full receptive field, mirroring the
    /// streaming pipeline's replicate-first warm-up.
    pub fn from_trace(trace: &FeatureTrace, targets: Vec<VAPoint>, receptive_field: usize) -> Result<Self> {
        if targets.len() != trace.len() {
            return Err(Error::LengthMismatch(trace.len(), targets.len()));
        }
        if trace.is_empty() {
            return Err(Error::TooShort { min: 1, got: 0 });
        }
        let norm: Vec<Vec<f64>> = trace.frames.iter().map(normalize_frame).collect::<Result<_>>()?;
        let pad = receptive_field.saturating_sub(1);
        let mut window = Vec::with_capacity(pad + norm.len());
        window.extend(std::iter::repeat_n(norm[0].clone(), pad));
        window.extend(norm);
        Ok(Self {
            window,
            first_target: pad,
            targets,
        })
    }
}

/// Loss of a batch without gradients.
pub(crate) fn batch_loss(model: &Model, batch: &[&Sample], tc: &TrainConfig) -> Result<LossBreakdown> {
    let outputs: Vec<Vec<[f64; HEAD_OUTPUTS]>> = batch
        .par_iter()
        .map(|s| {
            let pos: Vec<usize> = (s.first_target..s.first_target + s.targets.len()).collect();
            model.run(&s.window, &pos).raw
        })
        .collect();
    let raw: Vec<[f64; HEAD_OUTPUTS]> = outputs.into_iter().flatten().collect();
    let targets: Vec<VAPoint> = batch.iter().flat_map(|s| s.targets.iter().copied()).collect();
    Ok(evidential_loss(&raw, &targets, tc.lambda_reg, tc.lambda_ccc)?.0)
}

/// Loss and flat parameter gradient for a batch of samples.
pub(crate) fn batch_loss_grad(model: &Model, batch: &[&Sample], tc: &TrainConfig) -> Result<(LossBreakdown, Vec<f64>)> {
    let positions: Vec<Vec<usize>> = batch.iter().map(|s| (0..s.window.len()).collect()).collect();
    let acts: Vec<_> = batch
        .par_iter()
        .zip(&positions)
        .map(|(s, pos)| model.run(&s.window, pos))
        .collect();

    let mut raw = Vec::new();
    let mut targets = Vec::new();
    for (s, a) in batch.iter().zip(&acts) {
        raw.extend_from_slice(&a.raw[s.first_target..s.first_target + s.targets.len()]);
        targets.extend_from_slice(&s.targets);
    }
    let (loss, head_grads) = evidential_loss(&raw, &targets, tc.lambda_reg, tc.lambda_ccc)?;

    let mut offset = 0;
    let mut d_raws: Vec<Vec<HeadGrad>> = Vec::with_capacity(batch.len());
    for s in batch {
        let mut d = vec![[0.0; HEAD_OUTPUTS]; s.window.len()];
        d[s.first_target..s.first_target + s.targets.len()]
            .copy_from_slice(&head_grads[offset..offset + s.targets.len()]);
        offset += s.targets.len();
        d_raws.push(d);
    }
    let n = model.param_count();
    let grads: Vec<Vec<f64>> = batch
        .par_iter()
        .zip(acts.par_iter())
        .zip(d_raws.par_iter())
        .map(|((s, a), d)| {
            let mut g = vec![0.0; n];
            model.backward(&s.window, a, d, &mut g);
            g
        })
        .collect();
    let mut total = vec![0.0; n];
    for g in &grads {
        for (t, v) in total.iter_mut().zip(g) {
            *t += v;
        }
    }
    Ok((loss, total))
}

/// Per-epoch training statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub nll: f64,
    pub ccc_valence: f64,
    pub ccc_arousal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Statistics of the untrained model over the same batches (epoch 0).
    pub initial: EpochStats,
    pub epochs: Vec<EpochStats>,
}

impl TrainReport {
    pub fn loss_history(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.loss).collect()
    }

    pub fn final_loss(&self) -> f64 {
        self.epochs.last().map_or(self.initial.loss, |e| e.loss)
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = Self::B1 * *m + (1.0 - Self::B1) * g;
            *v = Self::B2 * *v + (1.0 - Self::B2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

fn accumulate(stats: &mut EpochStats, l: &LossBreakdown, w: f64) {
    stats.loss += w * l.total;
    stats.nll += w * l.nll;
    stats.ccc_valence += w * l.ccc[0];
    stats.ccc_arousal += w * l.ccc[1];
}

fn empty_stats(epoch: usize) -> EpochStats {
    EpochStats {
        epoch,
        loss: 0.0,
        nll: 0.0,
        ccc_valence: 0.0,
        ccc_arousal: 0.0,
    }
}

/// Mini-batch Adam over shuffled clips. Deterministic in `(model, samples, tc)`
/// regardless of thread count: per-clip gradients are summed in batch order.
pub fn train(mut model: Model, samples: &[Sample], tc: &TrainConfig) -> Result<(Model, TrainReport)> {
    tc.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyTrainSet);
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let n_batches = samples.len().div_ceil(tc.batch_size);
    let w = 1.0 / n_batches as f64;

    let mut initial = empty_stats(0);
    for chunk in order.chunks(tc.batch_size) {
        let batch: Vec<&Sample> = chunk.iter().map(|&i| &samples[i]).collect();
        let l = batch_loss(&model, &batch, tc)?;
        accumulate(&mut initial, &l, w);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut adam = Adam::new(model.param_count());
    let mut epochs = Vec::with_capacity(tc.epochs);
    let total_steps = (tc.epochs * n_batches).max(1) as f64;
    let mut step = 0usize;
    for epoch in 1..=tc.epochs {
        order.shuffle(&mut rng);
        let mut stats = empty_stats(epoch);
        for chunk in order.chunks(tc.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &samples[i]).collect();
            let (l, mut g) = batch_loss_grad(&model, &batch, tc)?;
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteLoss);
            }
            if tc.grad_clip > 0.0 {
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > tc.grad_clip {
                    let s = tc.grad_clip / norm;
                    g.iter_mut().for_each(|v| *v *= s);
                }
            }
            let progress = step as f64 / total_steps;
            let f = tc.lr_final_fraction;
            let lr = tc.learning_rate * (f + (1.0 - f) * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()));
            adam.step(model.params_mut(), &g, lr);
            step += 1;
            accumulate(&mut stats, &l, w);
        }
        if !stats.loss.is_finite() {
            return Err(Error::NonFiniteLoss);
        }
        epochs.push(stats);
    }
    Ok((model, TrainReport { initial, epochs }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use crate::sim::{simulate_dataset, DatasetPlan, SimConfig};

    fn tiny_samples(n: usize) -> (ModelConfig, Vec<Sample>) {
        let cfg = ModelConfig { hidden_dim: 6, seed: 1, ..ModelConfig::default() };
        let sim = SimConfig { clip_len_frames: 20, ..SimConfig::default() };
        let clips = simulate_dataset(&sim, &DatasetPlan::from_total(n)).unwrap();
        let samples = clips
            .iter()
            .map(|c| Sample::from_trace(&c.trace, c.truth.clone(), cfg.receptive_field()).unwrap())
            .collect();
        (cfg, samples)
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let (cfg, samples) = tiny_samples(4);
        let model = Model::init(cfg).unwrap();
        let tc = TrainConfig { epochs: 1, learning_rate: 0.0, batch_size: 2, ..TrainConfig::default() };
        let (trained, report) = train(model.clone(), &samples, &tc).unwrap();
        assert_eq!(trained, model);
        assert_eq!(report.epochs.len(), 1);
    }

    #[test]
    fn training_is_deterministic() {
        let (cfg, samples) = tiny_samples(6);
        let tc = TrainConfig { epochs: 2, batch_size: 2, ..TrainConfig::default() };
        let (a, ra) = train(Model::init(cfg.clone()).unwrap(), &samples, &tc).unwrap();
        let (b, rb) = train(Model::init(cfg).unwrap(), &samples, &tc).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a, b);
    }

    #[test]
    fn empty_train_set() {
        let model = Model::init(ModelConfig { hidden_dim: 4, ..ModelConfig::default() }).unwrap();
        assert!(matches!(
            train(model, &[], &TrainConfig::default()),
            Err(Error::EmptyTrainSet)
        ));
    }

    #[test]
    fn padding_matches_receptive_field() {
        let (cfg, samples) = tiny_samples(2);
        let s = &samples[0];
        assert_eq!(s.first_target, cfg.receptive_field() - 1);
        assert_eq!(s.window.len(), 20 + 12);
        assert!(s.window[..12].iter().all(|r| *r == s.window[12]));
    }
}
