use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::train::{batch_loss, batch_loss_grad, Sample, TrainConfig};
use super::Model;
use crate::error::Result;

/// Gradients smaller than this are compared in absolute terms.
pub const GRAD_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_index: usize,
    pub checked: usize,
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRAD_FLOOR)
}

/// Central-difference check of `analytic` against `f` at the given coordinates.
pub fn finite_difference_check<F>(mut f: F, x: &[f64], analytic: &[f64], coords: &[usize], eps: f64) -> GradCheckReport
where
    F: FnMut(&[f64]) -> f64,
{
    let mut xp = x.to_vec();
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst_index: 0,
        checked: coords.len(),
    };
    for &i in coords {
        let orig = xp[i];
        xp[i] = orig + eps;
        let up = f(&xp);
        xp[i] = orig - eps;
        let dn = f(&xp);
        xp[i] = orig;
        let err = relative_error(analytic[i], (up - dn) / (2.0 * eps));
        if err > report.max_relative_error || !err.is_finite() {
            report.max_relative_error = err;
            report.worst_index = i;
        }
    }
    report
}

/// Seeded coordinate subset: at least `per_block` from every parameter block
/// (or the whole block when smaller), topped up uniformly to `total`.
pub fn sample_coordinates(model: &Model, total: usize, per_block: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::new();
    for (_, start, len, _) in model.layout().blocks(model.config()) {
        let take = per_block.min(len);
        coords.extend(sample(&mut rng, len, take).into_iter().map(|i| start + i));
    }
    let n = model.param_count();
    if coords.len() < total {
        coords.extend(sample(&mut rng, n, (total - coords.len()).min(n)));
    }
    coords.sort_unstable();
    coords.dedup();
    coords
}

/// Compares the backpropagated gradient of the training loss on `batch`
/// against central differences on `coords` (all parameters when `None`).
pub fn grad_check(
    model: &Model,
    batch: &[Sample],
    tc: &TrainConfig,
    eps: f64,
    coords: Option<&[usize]>,
) -> Result<GradCheckReport> {
    grad_check_scaled(model, batch, tc, eps, coords, 1.0)
}

/// As [`grad_check`], with the analytic gradient multiplied by `scale`
/// (a mutation hook: any scale other than 1 should be detected).
pub fn grad_check_scaled(
    model: &Model,
    batch: &[Sample],
    tc: &TrainConfig,
    eps: f64,
    coords: Option<&[usize]>,
    scale: f64,
) -> Result<GradCheckReport> {
    let refs: Vec<&Sample> = batch.iter().collect();
    let (_, mut grad) = batch_loss_grad(model, &refs, tc)?;
    grad.iter_mut().for_each(|g| *g *= scale);
    let all: Vec<usize>;
    let coords = match coords {
        Some(c) => c,
        None => {
            all = (0..model.param_count()).collect();
            &all
        }
    };
    let mut probe = model.clone();
    let loss = |p: &[f64]| -> f64 {
        probe.params_mut().copy_from_slice(p);
        batch_loss(&probe, &refs, tc).map_or(f64::NAN, |l| l.total)
    };
    Ok(finite_difference_check(loss, model.params(), &grad, coords, eps))
}
