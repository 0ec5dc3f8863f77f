use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::geomspace;
use crate::domain::{Domain, Parity};
use crate::error::{Error, Result};
use crate::field::{velocity_parities, Field, Rank};
use crate::norms::{fit_decay_exponent, lp_norm};
use crate::semigroup::{semigroup_apply, Operator, SemigroupQuery, Wrap};

#[derive(Clone, Debug)]
pub struct SmoothingOptions {
    /// Fit window.
    pub times: Vec<f64>,
    /// Widths of the heat-kernel data; a very wide kernel stands in for the
    /// slowest eigenmodes.
    pub widths: Vec<f64>,
    pub seed: u64,
}

impl Default for SmoothingOptions {
    fn default() -> Self {
        let mut widths = geomspace(1e-5, 3.0, 80);
        widths.push(50.0);
        SmoothingOptions { times: geomspace(5e-4, 5e-3, 12), widths, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothingFit {
    pub p: f64,
    pub q: f64,
    pub wrap: Wrap,
    pub slope: f64,
    pub predicted: f64,
    pub r2: f64,
    pub intercept: f64,
    pub pass: bool,
    /// `r2 < 0.99`.
    pub degenerate: bool,
}

/// `-(n/2)(1/p - 1/q)`, minus `1/2` for the derivative wraps.
pub fn predicted_slope(p: f64, q: f64, n: usize, wrap: Wrap) -> f64 {
    // adding 0.0 turns -0.0 into 0.0
    let base = -(n as f64) / 2.0 * (1.0 / p - 1.0 / q) + 0.0;
    match wrap {
        Wrap::None => base,
        _ => base - 0.5,
    }
}

/// One spike at `node`, smoothed by the heat flow for `width`, with the
/// constant mode removed. The mean goes in spectral space: for wide kernels
/// the oscillating part sits far below the rounding error of the mean.
fn kernel(domain: &Arc<Domain>, parity: Parity, node: usize, width: f64) -> Result<Field> {
    let mut v = vec![0.0; domain.len()];
    v[node] = 1.0;
    let spike = Field::from_values(domain, Rank::Scalar, vec![v], &[parity])?;
    let ksq = &domain.ksq;
    Ok(spike.multiply(|i| if ksq[i] == 0.0 { 0.0 } else { (-ksq[i] * width).exp() }))
}

fn batch_input(domain: &Arc<Domain>, wrap: Wrap, node: usize, width: f64) -> Result<Field> {
    match wrap {
        Wrap::PDiv => {
            let n = domain.dim();
            let vp = velocity_parities(domain);
            let par: Vec<Parity> = (0..n * n).map(|c| vp[c / n].combine(vp[c % n])).collect();
            let k = kernel(domain, par[1], node, width)?;
            let values = (0..n * n)
                .map(|c| if c == 1 { k.values(0).to_vec() } else { vec![0.0; domain.len()] })
                .collect();
            Field::from_values(domain, Rank::Tensor(n, n), values, &par)
        }
        _ => kernel(domain, domain.director_parity(), node, width),
    }
}

/// Fits the decay exponent of `||S(t) f||_q / ||f||_p`, maximised over a
/// batch of heat kernels of many widths centred at random nodes, for the
/// heat semigroup, its gradient and `e^{-tA} P div`. The exponential factor
/// is removed with the semigroup's `omega` before fitting.
pub fn smoothing_rate_suite(
    domain: &Arc<Domain>,
    pairs: &[(f64, f64)],
    options: &SmoothingOptions,
) -> Result<Vec<SmoothingFit>> {
    if domain.dim() < 2 {
        return Err(Error::InvalidArgument("the P div wrap needs dimension >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let nodes: Vec<usize> = options.widths.iter().map(|_| rng.random_range(0..domain.len())).collect();
    let mut out = Vec::new();
    for wrap in [Wrap::None, Wrap::Gradient, Wrap::PDiv] {
        let (operator, omega) = match wrap {
            Wrap::PDiv => (Operator::Stokes, domain.stokes_omega()),
            _ => (Operator::Heat, domain.heat_omega()),
        };
        let inputs = options
            .widths
            .par_iter()
            .zip(&nodes)
            .map(|(&w, &node)| batch_input(domain, wrap, node, w))
            .collect::<Result<Vec<_>>>()?;
        // ratios[t][pair]
        let ratios = options
            .times
            .par_iter()
            .map(|&t| {
                let q = SemigroupQuery::new(operator, t, wrap);
                let mut best = vec![0.0f64; pairs.len()];
                for f in &inputs {
                    let g = semigroup_apply(&q, f)?;
                    for (k, &(p, qq)) in pairs.iter().enumerate() {
                        let den = lp_norm(f, p)?;
                        if den > 0.0 {
                            best[k] = best[k].max(lp_norm(&g, qq)? / den);
                        }
                    }
                }
                Ok(best)
            })
            .collect::<Result<Vec<_>>>()?;
        for (k, &(p, q)) in pairs.iter().enumerate() {
            let samples: Vec<(f64, f64)> = options.times.iter().zip(&ratios).map(|(&t, r)| (t, r[k])).collect();
            let fit = fit_decay_exponent(&samples, omega)?;
            let predicted = predicted_slope(p, q, domain.dim(), wrap);
            let tol = if predicted == 0.0 { 1e-9 } else { 0.1 * predicted.abs() };
            let degenerate = fit.r2 < 0.99;
            out.push(SmoothingFit {
                p,
                q,
                wrap,
                slope: fit.slope,
                predicted,
                r2: fit.r2,
                intercept: fit.intercept,
                pass: (fit.slope - predicted).abs() <= tol && !degenerate,
                degenerate,
            });
        }
    }
    Ok(out)
}
