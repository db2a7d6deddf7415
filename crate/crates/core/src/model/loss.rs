use statrs::function::gamma::{digamma, ln_gamma};

use super::{sigmoid, EvidentialParams, HEAD_OUTPUTS};
use crate::error::{Error, Result};
use crate::types::{Dim, VAPoint};

/// Gradient of the loss with respect to one frame's raw head outputs.
pub type HeadGrad = [f64; HEAD_OUTPUTS];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub total: f64,
    /// Mean evidential NLL per frame and dimension.
    pub nll: f64,
    /// Mean evidence regulariser per frame and dimension (unweighted).
    pub reg: f64,
    /// Batch CCC for valence and arousal.
    pub ccc: [f64; 2],
}

/// Negative log-likelihood of `y` under the Student-t marginal of a NIG prior.
pub fn nig_nll(y: f64, p: &EvidentialParams) -> f64 {
    let omega = 2.0 * p.beta * (1.0 + p.nu);
    let r = y - p.gamma;
    0.5 * (std::f64::consts::PI / p.nu).ln() - p.alpha * omega.ln()
        + (p.alpha + 0.5) * (p.nu * r * r + omega).ln()
        + ln_gamma(p.alpha)
        - ln_gamma(p.alpha + 0.5)
}

/// Partial derivatives of `nig_nll` w.r.t. `(gamma, nu, alpha, beta)`.
fn nig_nll_grad(y: f64, p: &EvidentialParams) -> [f64; 4] {
    let omega = 2.0 * p.beta * (1.0 + p.nu);
    let r = y - p.gamma;
    let s = p.nu * r * r + omega;
    let a5 = p.alpha + 0.5;
    [
        -2.0 * a5 * p.nu * r / s,
        -0.5 / p.nu - p.alpha * 2.0 * p.beta / omega + a5 * (r * r + 2.0 * p.beta) / s,
        -omega.ln() + s.ln() + digamma(p.alpha) - digamma(p.alpha + 0.5),
        -p.alpha / p.beta + a5 * 2.0 * (1.0 + p.nu) / s,
    ]
}

/// Lin's CCC and its gradient w.r.t. `x`. Degenerate inputs give `(0, zeros)`.
pub fn ccc_with_grad(x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    if x.len() < 2 {
        return (0.0, vec![0.0; x.len()]);
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    sxx /= n;
    syy /= n;
    sxy /= n;
    let gap = mx - my;
    let denom = sxx + syy + gap * gap;
    if denom <= 0.0 {
        return (0.0, vec![0.0; x.len()]);
    }
    let c = 2.0 * sxy / denom;
    let grad = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let d_sxy = (b - my) / n;
            let d_den = 2.0 * (a - mx) / n + 2.0 * gap / n;
            (2.0 * d_sxy * denom - 2.0 * sxy * d_den) / (denom * denom)
        })
        .collect();
    (c, grad)
}

/// Evidential objective over a set of frames, with gradients w.r.t. raw head outputs.
///
/// `total = mean_{frames,dims}(NLL + lambda_reg * |y - gamma| * (2 nu + alpha))
///        + lambda_ccc * mean_dims(1 - CCC(gamma, y))`
pub fn evidential_loss(
    raw: &[HeadGrad],
    targets: &[VAPoint],
    lambda_reg: f64,
    lambda_ccc: f64,
) -> Result<(LossBreakdown, Vec<HeadGrad>)> {
    if raw.len() != targets.len() {
        return Err(Error::LengthMismatch(raw.len(), targets.len()));
    }
    if raw.is_empty() {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    let scale = 1.0 / (2.0 * raw.len() as f64);
    let mut grads = vec![[0.0; HEAD_OUTPUTS]; raw.len()];
    let mut out = LossBreakdown::default();
    for (di, dim) in Dim::BOTH.iter().enumerate() {
        let off = di * 4;
        let mut gammas = Vec::with_capacity(raw.len());
        let mut ys = Vec::with_capacity(raw.len());
        for (i, (r, tgt)) in raw.iter().zip(targets).enumerate() {
            let p = EvidentialParams::from_raw(&r[off..off + 4]);
            let y = tgt.get(*dim);
            let res = y - p.gamma;
            out.nll += scale * nig_nll(y, &p);
            let reg = res.abs() * (2.0 * p.nu + p.alpha);
            out.reg += scale * reg;

            let g = nig_nll_grad(y, &p);
            let sign = if res > 0.0 {
                1.0
            } else if res < 0.0 {
                -1.0
            } else {
                0.0
            };
            let d_gamma = g[0] - lambda_reg * sign * (2.0 * p.nu + p.alpha);
            let d_nu = g[1] + lambda_reg * 2.0 * res.abs();
            let d_alpha = g[2] + lambda_reg * res.abs();
            let d_beta = g[3];
            let gr = &mut grads[i];
            gr[off] = scale * d_gamma;
            gr[off + 1] = scale * d_nu * sigmoid(r[off + 1]);
            gr[off + 2] = scale * d_alpha * sigmoid(r[off + 2]);
            gr[off + 3] = scale * d_beta * sigmoid(r[off + 3]);
            gammas.push(p.gamma);
            ys.push(y);
        }
        let (c, dc) = ccc_with_grad(&gammas, &ys);
        out.ccc[di] = c;
        if lambda_ccc != 0.0 {
            for (g, d) in grads.iter_mut().zip(&dc) {
                g[off] -= 0.5 * lambda_ccc * d;
            }
        }
    }
    out.total = out.nll
        + lambda_reg * out.reg
        + lambda_ccc * 0.5 * ((1.0 - out.ccc[0]) + (1.0 - out.ccc[1]));
    if !out.total.is_finite() {
        return Err(Error::NonFiniteLoss);
    }
    Ok((out, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::softplus;

    fn inverse_softplus(y: f64) -> f64 {
        (y.exp() - 1.0).ln()
    }

    #[test]
    fn nll_monotone_in_residual() {
        let p = EvidentialParams { gamma: 0.2, nu: 1.5, alpha: 2.5, beta: 0.7 };
        let mut last = f64::NEG_INFINITY;
        for k in 0..20 {
            let y = 0.2 + 0.05 * k as f64;
            let v = nig_nll(y, &p);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn nll_minimum_closed_form() {
        // at y = gamma: 0.5 ln(pi/nu) - alpha ln(Omega) + (alpha+0.5) ln(Omega) + lnG(a) - lnG(a+.5)
        let p = EvidentialParams { gamma: -0.1, nu: 2.0, alpha: 3.0, beta: 0.5 };
        let omega: f64 = 2.0 * 0.5 * 3.0;
        let expected = 0.5 * (std::f64::consts::PI / 2.0).ln() + 0.5 * omega.ln() + ln_gamma(3.0)
            - ln_gamma(3.5);
        assert!((nig_nll(-0.1, &p) - expected).abs() < 1e-12);
    }

    #[test]
    fn loss_deterministic() {
        let raw = vec![[0.1, 0.2, 0.3, -0.1, -0.2, 0.5, 0.0, 1.0]; 3];
        let tg = vec![VAPoint::clamped(0.3, 0.1), VAPoint::clamped(-0.2, 0.4), VAPoint::clamped(0.0, 0.0)];
        let a = evidential_loss(&raw, &tg, 0.01, 0.5).unwrap();
        let b = evidential_loss(&raw, &tg, 0.01, 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn raw_gradients_match_finite_differences() {
        let raw = vec![
            [0.1, 0.2, 0.3, -0.1, -0.2, 0.5, 0.0, 1.0],
            [0.4, -0.3, 0.1, 0.2, 0.3, -0.5, 0.7, -0.4],
            [-0.6, 0.9, -0.2, 0.5, 0.1, 0.0, 0.2, 0.3],
        ];
        let tg = vec![VAPoint::clamped(0.3, 0.1), VAPoint::clamped(-0.2, 0.4), VAPoint::clamped(0.5, -0.7)];
        let (_, g) = evidential_loss(&raw, &tg, 0.05, 0.7).unwrap();
        let eps = 1e-6;
        for i in 0..raw.len() {
            for j in 0..HEAD_OUTPUTS {
                let mut up = raw.clone();
                up[i][j] += eps;
                let mut dn = raw.clone();
                dn[i][j] -= eps;
                let fd = (evidential_loss(&up, &tg, 0.05, 0.7).unwrap().0.total
                    - evidential_loss(&dn, &tg, 0.05, 0.7).unwrap().0.total)
                    / (2.0 * eps);
                assert!((fd - g[i][j]).abs() < 1e-7, "{i} {j}: {fd} vs {}", g[i][j]);
            }
        }
    }

    #[test]
    fn ccc_grad_matches_metric() {
        let x = [0.1, 0.4, -0.3, 0.8];
        let y = [0.0, 0.5, -0.1, 0.6];
        let (c, _) = ccc_with_grad(&x, &y);
        assert!((c - crate::metrics::ccc(&x, &y).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn reg_penalises_confident_errors() {
        let target = [VAPoint::clamped(0.5, 0.5)];
        let mk = |nu: f64| {
            let r = inverse_softplus(nu);
            [[0.0, r, 1.0, 0.0, 0.0, r, 1.0, 0.0]]
        };
        let lo = evidential_loss(&mk(0.5), &target, 1.0, 0.0).unwrap().0.reg;
        let hi = evidential_loss(&mk(5.0), &target, 1.0, 0.0).unwrap().0.reg;
        assert!(hi > lo);
        assert!((softplus(inverse_softplus(0.5)) - 0.5).abs() < 1e-12);
    }
}
