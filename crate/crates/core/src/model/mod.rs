//! Causal temporal-convolution regressor with evidential (Normal-Inverse-Gamma)
//! output heads.
//!
//! Architecture, per time step `t` of a window of `FEATURE_DIM`-vectors:
//!
//! ```text
//! h0[t] = W_in x[t] + b_in
//! h_l[t] = h_{l-1}[t] + tanh(b_l + sum_k W_l[k] h_{l-1}[t - (K-1-k) d_l])   d_l = 2^(l-1)
//! o[t]   = W_head h_L[t] + b_head            (8 = 2 dims x (gamma, nu, alpha, beta))
//! ```
//!
//! Taps that fall before the start of the window read zeros. The network is
//! causal and a single forward pass yields both the prediction and its
//! uncertainty, so inference is sampling-free.

mod checkpoint;
mod gradcheck;
mod loss;
mod train;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{finite_difference_check, grad_check, grad_check_scaled, sample_coordinates, GradCheckReport, GRAD_FLOOR};
pub use loss::{ccc_with_grad, evidential_loss, nig_nll, HeadGrad, LossBreakdown};
pub use train::{train, EpochStats, Sample, TrainConfig, TrainReport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{AffectOutput, UncertaintyTriple, VAPoint, FEATURE_DIM};

/// Raw head outputs per frame: `[gamma, nu, alpha, beta]` pre-activation for valence then arousal.
pub const HEAD_OUTPUTS: usize = 8;
/// Lower bound added to `nu` and `beta` after softplus.
pub const POSITIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub temporal_layers: usize,
    pub kernel_size: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            input_dim: FEATURE_DIM,
            hidden_dim: 64,
            temporal_layers: 2,
            kernel_size: 5,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_dim == 0 || self.kernel_size == 0 {
            return Err(Error::Config(
                "input_dim, hidden_dim and kernel_size must be >= 1".to_string(),
            ));
        }
        if self.temporal_layers > 16 {
            return Err(Error::Config("at most 16 temporal layers".to_string()));
        }
        Ok(())
    }

    pub fn dilation(&self, layer: usize) -> usize {
        1 << layer
    }

    /// Number of input frames that can influence one output.
    pub fn receptive_field(&self) -> usize {
        1 + (self.kernel_size - 1) * (0..self.temporal_layers).map(|l| self.dilation(l)).sum::<usize>()
    }

    /// Closed-form parameter count.
    pub fn param_count(&self) -> usize {
        let (d, h, k) = (self.input_dim, self.hidden_dim, self.kernel_size);
        h * d + h + self.temporal_layers * (h * h * k + h) + HEAD_OUTPUTS * h + HEAD_OUTPUTS
    }
}

/// Offsets of each parameter block in the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub w_in: usize,
    pub b_in: usize,
    pub conv: Vec<(usize, usize)>,
    pub w_head: usize,
    pub b_head: usize,
    pub total: usize,
}

impl Layout {
    fn new(cfg: &ModelConfig) -> Self {
        let (d, h, k) = (cfg.input_dim, cfg.hidden_dim, cfg.kernel_size);
        let w_in = 0;
        let b_in = w_in + h * d;
        let mut off = b_in + h;
        let mut conv = Vec::with_capacity(cfg.temporal_layers);
        for _ in 0..cfg.temporal_layers {
            conv.push((off, off + h * h * k));
            off += h * h * k + h;
        }
        let w_head = off;
        let b_head = w_head + HEAD_OUTPUTS * h;
        Self {
            w_in,
            b_in,
            conv,
            w_head,
            b_head,
            total: b_head + HEAD_OUTPUTS,
        }
    }

    /// `(name, start, len, fan_in)` per block.
    pub(crate) fn blocks(&self, cfg: &ModelConfig) -> Vec<(String, usize, usize, usize)> {
        let (d, h, k) = (cfg.input_dim, cfg.hidden_dim, cfg.kernel_size);
        let mut out = vec![
            ("w_in".to_string(), self.w_in, h * d, d),
            ("b_in".to_string(), self.b_in, h, d),
        ];
        for (l, (w, b)) in self.conv.iter().enumerate() {
            out.push((format!("conv{l}.w"), *w, h * h * k, h * k));
            out.push((format!("conv{l}.b"), *b, h, h * k));
        }
        out.push(("w_head".to_string(), self.w_head, HEAD_OUTPUTS * h, h));
        out.push(("b_head".to_string(), self.b_head, HEAD_OUTPUTS, h));
        out
    }
}

/// Normal-Inverse-Gamma parameters for one dimension of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvidentialParams {
    pub gamma: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameHeads {
    pub valence: EvidentialParams,
    pub arousal: EvidentialParams,
}

pub(crate) fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl EvidentialParams {
    /// Applies the positivity transforms to raw head outputs.
    pub fn from_raw(raw: &[f64]) -> Self {
        Self {
            gamma: raw[0],
            nu: softplus(raw[1]) + POSITIVE_FLOOR,
            alpha: 1.0 + softplus(raw[2]) + POSITIVE_FLOOR,
            beta: softplus(raw[3]) + POSITIVE_FLOOR,
        }
    }
}

impl FrameHeads {
    pub fn from_raw(raw: &[f64; HEAD_OUTPUTS]) -> Self {
        Self {
            valence: EvidentialParams::from_raw(&raw[0..4]),
            arousal: EvidentialParams::from_raw(&raw[4..8]),
        }
    }
}

/// Closed-form moments of the NIG posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub aleatoric_raw: f64,
    pub epistemic_raw: f64,
}

/// `mean = gamma`, `aleatoric = beta / (alpha - 1)`, `epistemic = beta / (nu (alpha - 1))`.
pub fn moments(p: &EvidentialParams) -> Moments {
    let am1 = p.alpha - 1.0;
    Moments {
        mean: p.gamma,
        aleatoric_raw: p.beta / am1,
        epistemic_raw: p.beta / (p.nu * am1),
    }
}

/// Bounded squash `u / (1 + u)` of a non-negative variance into `[0, 1)`.
pub fn squash(u: f64) -> f64 {
    let u = u.max(0.0);
    if u.is_infinite() {
        1.0
    } else {
        u / (1.0 + u)
    }
}

fn triple(m: &Moments) -> UncertaintyTriple {
    UncertaintyTriple::clamped(
        squash(m.epistemic_raw),
        squash(m.aleatoric_raw),
        squash(m.epistemic_raw + m.aleatoric_raw),
    )
}

/// Clamps the means into `[-1, 1]` and squashes the raw variances into `[0, 1]`.
pub fn to_affect_output(valence: &Moments, arousal: &Moments) -> AffectOutput {
    AffectOutput {
        va: VAPoint::clamped(valence.mean, arousal.mean),
        uncertainty_valence: triple(valence),
        uncertainty_arousal: triple(arousal),
    }
}

impl FrameHeads {
    pub fn to_affect_output(&self) -> AffectOutput {
        to_affect_output(&moments(&self.valence), &moments(&self.arousal))
    }
}

/// Intermediate activations of a forward pass.
///
/// `hidden[l]` holds `T x H` values (row-major) for layer `l` (0 = input
/// projection), `act[l]` the tanh outputs of conv layer `l`. Positions that were
/// not needed for the requested outputs are left at zero.
#[derive(Debug, Clone)]
pub(crate) struct Activations {
    pub len: usize,
    pub hidden: Vec<Vec<f64>>,
    pub act: Vec<Vec<f64>>,
    pub raw: Vec<[f64; HEAD_OUTPUTS]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    cfg: ModelConfig,
    layout: Layout,
    params: Vec<f64>,
}

impl Model {
    /// Scaled-uniform initialisation, `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` per block,
    /// from the config seed. Biases start at zero.
    pub fn init(cfg: ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let layout = Layout::new(&cfg);
        let mut params = vec![0.0; layout.total];
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for (name, start, len, fan_in) in layout.blocks(&cfg) {
            if name.starts_with('b') || name.ends_with(".b") {
                continue;
            }
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut params[start..start + len] {
                *p = rng.random_range(-bound..bound);
            }
        }
        Ok(Self {
            cfg,
            layout,
            params,
        })
    }

    pub fn from_params(cfg: ModelConfig, params: Vec<f64>) -> Result<Self> {
        cfg.validate()?;
        let layout = Layout::new(&cfg);
        if params.len() != layout.total {
            return Err(Error::ShapeMismatch {
                expected: format!("{} parameters", layout.total),
                got: format!("{} parameters", params.len()),
            });
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFiniteValue { field: "params", index: i });
        }
        Ok(Self {
            cfg,
            layout,
            params,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub(crate) fn layout(&self) -> &Layout {
        &self.layout
    }

    fn check_window<X: AsRef<[f64]>>(&self, window: &[X]) -> Result<()> {
        if window.is_empty() {
            return Err(Error::ShapeMismatch {
                expected: "non-empty window".to_string(),
                got: "0 frames".to_string(),
            });
        }
        for row in window {
            let row = row.as_ref();
            if row.len() != self.cfg.input_dim {
                return Err(Error::ShapeMismatch {
                    expected: format!("{} features per frame", self.cfg.input_dim),
                    got: format!("{}", row.len()),
                });
            }
        }
        Ok(())
    }

    /// Sequence-to-sequence pass: one set of head parameters per window position.
    pub fn forward<X: AsRef<[f64]>>(&self, window: &[X]) -> Result<Vec<FrameHeads>> {
        self.check_window(window)?;
        let all: Vec<usize> = (0..window.len()).collect();
        let acts = self.run(window, &all);
        Ok(acts.raw.iter().map(FrameHeads::from_raw).collect())
    }

    /// Heads for the final window position only, computing just the positions
    /// inside its receptive field. Bitwise identical to `forward(window).last()`.
    pub fn forward_last<X: AsRef<[f64]>>(&self, window: &[X]) -> Result<FrameHeads> {
        self.check_window(window)?;
        let acts = self.run(window, &[window.len() - 1]);
        Ok(FrameHeads::from_raw(&acts.raw[0]))
    }

    /// Computes activations at exactly the positions needed for `outputs`
    /// (sorted, in-window). `raw` is returned in the order of `outputs`.
    pub(crate) fn run<X: AsRef<[f64]>>(&self, window: &[X], outputs: &[usize]) -> Activations {
        let t_len = window.len();
        let h = self.cfg.hidden_dim;
        let k = self.cfg.kernel_size;
        let n_layers = self.cfg.temporal_layers;

        // needed[l]: positions where layer-l hidden state must exist
        let mut needed = vec![vec![false; t_len]; n_layers + 1];
        for &t in outputs {
            needed[n_layers][t] = true;
        }
        for l in (0..n_layers).rev() {
            let d = self.cfg.dilation(l);
            for t in 0..t_len {
                if needed[l + 1][t] {
                    for j in 0..k {
                        if let Some(s) = t.checked_sub(j * d) {
                            needed[l][s] = true;
                        }
                    }
                }
            }
        }

        let p = &self.params;
        let mut hidden = vec![vec![0.0; t_len * h]; n_layers + 1];
        let mut act = vec![vec![0.0; t_len * h]; n_layers];

        let w_in = &p[self.layout.w_in..self.layout.b_in];
        let b_in = &p[self.layout.b_in..self.layout.b_in + h];
        let d_in = self.cfg.input_dim;
        for t in 0..t_len {
            if !needed[0][t] {
                continue;
            }
            let x = window[t].as_ref();
            let out = &mut hidden[0][t * h..(t + 1) * h];
            for o in 0..h {
                out[o] = b_in[o] + dot(&w_in[o * d_in..(o + 1) * d_in], x);
            }
        }

        for l in 0..n_layers {
            let (wo, bo) = self.layout.conv[l];
            let w = &p[wo..bo];
            let b = &p[bo..bo + h];
            let d = self.cfg.dilation(l);
            let (prev_layers, next_layers) = hidden.split_at_mut(l + 1);
            let prev = &prev_layers[l];
            let next = &mut next_layers[0];
            let a_l = &mut act[l];
            for t in 0..t_len {
                if !needed[l + 1][t] {
                    continue;
                }
                for o in 0..h {
                    let mut z = b[o];
                    for j in 0..k {
                        // tap j reads t - (k-1-j) d
                        let back = (k - 1 - j) * d;
                        if let Some(s) = t.checked_sub(back) {
                            z += dot(&w[(o * k + j) * h..(o * k + j + 1) * h], &prev[s * h..(s + 1) * h]);
                        }
                    }
                    let a = z.tanh();
                    a_l[t * h + o] = a;
                    next[t * h + o] = prev[t * h + o] + a;
                }
            }
        }

        let w_head = &p[self.layout.w_head..self.layout.b_head];
        let b_head = &p[self.layout.b_head..self.layout.b_head + HEAD_OUTPUTS];
        let last = &hidden[n_layers];
        let raw = outputs
            .iter()
            .map(|&t| {
                let hv = &last[t * h..(t + 1) * h];
                let mut o = [0.0; HEAD_OUTPUTS];
                for (j, oj) in o.iter_mut().enumerate() {
                    *oj = b_head[j] + dot(&w_head[j * h..(j + 1) * h], hv);
                }
                o
            })
            .collect();

        Activations {
            len: t_len,
            hidden,
            act,
            raw,
        }
    }

    /// Backpropagates `d_raw` (one gradient per position in `0..len`, zeros
    /// where a position carries no loss) through a full-window forward pass and
    /// accumulates parameter gradients into `grad`.
    pub(crate) fn backward<X: AsRef<[f64]>>(
        &self,
        window: &[X],
        acts: &Activations,
        d_raw: &[[f64; HEAD_OUTPUTS]],
        grad: &mut [f64],
    ) {
        let t_len = acts.len;
        let h = self.cfg.hidden_dim;
        let k = self.cfg.kernel_size;
        let n_layers = self.cfg.temporal_layers;
        let p = &self.params;
        let lay = &self.layout;

        // head
        let mut dh = vec![0.0; t_len * h];
        {
            let w_head = &p[lay.w_head..lay.b_head];
            let last = &acts.hidden[n_layers];
            let (g_w, g_rest) = grad[lay.w_head..].split_at_mut(HEAD_OUTPUTS * h);
            let g_b = &mut g_rest[..HEAD_OUTPUTS];
            for t in 0..t_len {
                let dr = &d_raw[t];
                if dr.iter().all(|v| *v == 0.0) {
                    continue;
                }
                let hv = &last[t * h..(t + 1) * h];
                let dht = &mut dh[t * h..(t + 1) * h];
                for j in 0..HEAD_OUTPUTS {
                    let g = dr[j];
                    if g == 0.0 {
                        continue;
                    }
                    g_b[j] += g;
                    axpy(g, hv, &mut g_w[j * h..(j + 1) * h]);
                    axpy(g, &w_head[j * h..(j + 1) * h], dht);
                }
            }
        }

        // conv layers, last to first
        for l in (0..n_layers).rev() {
            let (wo, bo) = lay.conv[l];
            let w = &p[wo..bo];
            let d = self.cfg.dilation(l);
            let prev = &acts.hidden[l];
            let a_l = &acts.act[l];
            // residual path
            let mut dprev = dh.clone();
            let (g_w, g_rest) = grad[wo..].split_at_mut(h * h * k);
            let g_b = &mut g_rest[..h];
            let mut dz = vec![0.0; h];
            for t in 0..t_len {
                let mut any = false;
                for o in 0..h {
                    let a = a_l[t * h + o];
                    dz[o] = dh[t * h + o] * (1.0 - a * a);
                    any |= dz[o] != 0.0;
                }
                if !any {
                    continue;
                }
                for o in 0..h {
                    let g = dz[o];
                    if g == 0.0 {
                        continue;
                    }
                    g_b[o] += g;
                    for j in 0..k {
                        let back = (k - 1 - j) * d;
                        if let Some(s) = t.checked_sub(back) {
                            let wi = (o * k + j) * h;
                            axpy(g, &prev[s * h..(s + 1) * h], &mut g_w[wi..wi + h]);
                            axpy(g, &w[wi..wi + h], &mut dprev[s * h..(s + 1) * h]);
                        }
                    }
                }
            }
            dh = dprev;
        }

        // input projection
        let d_in = self.cfg.input_dim;
        let (g_w, g_rest) = grad[lay.w_in..].split_at_mut(h * d_in);
        let g_b = &mut g_rest[..h];
        for t in 0..t_len {
            let x = window[t].as_ref();
            for o in 0..h {
                let g = dh[t * h + o];
                if g == 0.0 {
                    continue;
                }
                g_b[o] += g;
                axpy(g, x, &mut g_w[o * d_in..(o + 1) * d_in]);
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators; fixed order keeps results reproducible
    let n = a.len().min(b.len());
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    let chunks = n / 4;
    for c in 0..chunks {
        let i = c * 4;
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    let mut s = (s0 + s1) + (s2 + s3);
    for i in chunks * 4..n {
        s += a[i] * b[i];
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ModelConfig {
        ModelConfig {
            hidden_dim: 8,
            seed: 3,
            ..ModelConfig::default()
        }
    }

    fn window(len: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len)
            .map(|_| (0..FEATURE_DIM).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn init_is_deterministic() {
        let a = Model::init(small()).unwrap();
        let b = Model::init(small()).unwrap();
        assert_eq!(
            a.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>(),
            b.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn zero_hidden_dim_rejected() {
        let cfg = ModelConfig { hidden_dim: 0, ..ModelConfig::default() };
        assert!(matches!(Model::init(cfg), Err(Error::Config(_))));
    }

    #[test]
    fn parameter_count_by_hand() {
        // default: 64*219 + 64 | 2 x (64*64*5 + 64) | 8*64 + 8
        let m = Model::init(ModelConfig::default()).unwrap();
        assert_eq!(m.param_count(), 14_080 + 2 * 20_544 + 520);
        assert_eq!(m.param_count(), 55_688);
        assert_eq!(ModelConfig::default().receptive_field(), 13);
    }

    #[test]
    fn zero_window_satisfies_constraints() {
        let m = Model::init(small()).unwrap();
        let out = m.forward(&vec![vec![0.0; FEATURE_DIM]; 6]).unwrap();
        for f in out {
            for p in [f.valence, f.arousal] {
                assert!(p.gamma.is_finite());
                assert!(p.nu > 0.0 && p.alpha > 1.0 && p.beta > 0.0);
            }
        }
    }

    #[test]
    fn causal() {
        let m = Model::init(small()).unwrap();
        let w = window(20, 1);
        let base = m.forward(&w).unwrap();
        let mut w2 = w.clone();
        w2[12][7] += 5.0;
        let pert = m.forward(&w2).unwrap();
        for t in 0..12 {
            assert_eq!(base[t], pert[t]);
        }
        assert_ne!(base[12], pert[12]);
    }

    #[test]
    fn sampling_free_repeatable() {
        let m = Model::init(small()).unwrap();
        let w = window(10, 2);
        assert_eq!(m.forward(&w).unwrap(), m.forward(&w).unwrap());
    }

    #[test]
    fn forward_last_matches_full_pass_bitwise() {
        let m = Model::init(ModelConfig { seed: 9, ..ModelConfig::default() }).unwrap();
        for len in [1, 3, 13, 64] {
            let w = window(len, len as u64);
            let full = m.forward(&w).unwrap();
            assert_eq!(*full.last().unwrap(), m.forward_last(&w).unwrap());
        }
    }

    #[test]
    fn shape_mismatch() {
        let m = Model::init(small()).unwrap();
        assert!(matches!(
            m.forward(&[vec![0.0; 10]]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(m.forward::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn moments_examples() {
        let m = moments(&EvidentialParams { gamma: 0.3, nu: 1.0, alpha: 2.0, beta: 1.0 });
        assert_eq!((m.mean, m.aleatoric_raw, m.epistemic_raw), (0.3, 1.0, 1.0));
        let m = moments(&EvidentialParams { gamma: 0.0, nu: 4.0, alpha: 3.0, beta: 2.0 });
        assert_eq!((m.aleatoric_raw, m.epistemic_raw), (1.0, 0.25));
        let m = moments(&EvidentialParams { gamma: 0.0, nu: 1e12, alpha: 3.0, beta: 2.0 });
        assert!(m.epistemic_raw < 1e-11);
    }

    #[test]
    fn affect_output_examples() {
        let mk = |mean, a, e| Moments { mean, aleatoric_raw: a, epistemic_raw: e };
        let o = to_affect_output(&mk(1.7, 0.0, 0.0), &mk(-0.2, 1.0, 1.0));
        assert_eq!(o.va.valence, 1.0);
        assert_eq!(o.uncertainty_valence, UncertaintyTriple::default());
        let ua = o.uncertainty_arousal;
        assert_eq!((ua.epistemic, ua.aleatoric), (0.5, 0.5));
        assert!((ua.cumulative - 2.0 / 3.0).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cumulative_dominates(
                g in -3.0f64..3.0, nu in 1e-6f64..1e3, alpha in 1.0001f64..50.0, beta in 1e-6f64..1e3,
            ) {
                let p = EvidentialParams { gamma: g, nu, alpha, beta };
                let o = FrameHeads { valence: p, arousal: p }.to_affect_output();
                let u = o.uncertainty_valence;
                prop_assert!(u.cumulative >= u.epistemic.max(u.aleatoric));
                prop_assert!((-1.0..=1.0).contains(&o.va.valence));
                for v in [u.epistemic, u.aleatoric, u.cumulative] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }
}
