//! Grid `L^p` norms, time-weighted suprema and decay-exponent fits.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::ops::gradient;

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p <= 1.0 {
        return Err(Error::InvalidArgument(format!("norm exponent must exceed 1, got {p}")));
    }
    Ok(())
}

/// Rectangle-rule `L^p` norm of the pointwise Euclidean magnitude;
/// `p = f64::INFINITY` gives the largest sample.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(lp_of_magnitude(&f.magnitude(), p, f.domain().cell_volume()))
}

pub(crate) fn lp_of_magnitude(mag: &[f64], p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        return mag.iter().fold(0.0, |m, &v| m.max(v));
    }
    // scale by the max to stay clear of overflow for large p
    let top = mag.iter().fold(0.0f64, |m, &v| m.max(v));
    if top == 0.0 {
        return 0.0;
    }
    let s: f64 = mag.iter().map(|v| (v / top).powf(p)).sum();
    top * (s * cell).powf(1.0 / p)
}

/// `||f||_p + ||grad f||_p`.
pub fn w1p_norm(f: &Field, p: f64) -> Result<f64> {
    Ok(lp_norm(f, p)? + lp_norm(&gradient(f)?, p)?)
}

/// Weight `e^{omega s / 2} s^{exponent}` with `exponent = (n/2)(1/p - 1/q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedSupSpec {
    pub p: f64,
    pub q: f64,
    pub omega: f64,
    pub exponent: f64,
}

impl WeightedSupSpec {
    pub fn new(p: f64, q: f64, dim: usize, omega: f64) -> Result<WeightedSupSpec> {
        check_exponent(p)?;
        check_exponent(q)?;
        if q < p {
            return Err(Error::InvalidArgument(format!("need q >= p, got p = {p}, q = {q}")));
        }
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::InvalidArgument(format!("omega must be >= 0, got {omega}")));
        }
        let exponent = if p == q { 0.0 } else { dim as f64 / 2.0 * (1.0 / p - 1.0 / q) };
        Ok(WeightedSupSpec { p, q, omega, exponent })
    }

    /// Plain supremum in time.
    pub fn unweighted() -> WeightedSupSpec {
        WeightedSupSpec { p: 2.0, q: 2.0, omega: 0.0, exponent: 0.0 }
    }

    pub fn weight(&self, s: f64) -> f64 {
        if s == 0.0 {
            return if self.exponent > 0.0 { 0.0 } else { 1.0 };
        }
        (0.5 * self.omega * s).exp() * s.powf(self.exponent)
    }
}

/// Largest `weight(t_k) * norms[k]` over the grid. At `t = 0` the term is
/// dropped when the exponent is positive and is the plain norm otherwise.
pub fn weighted_sup(times: &[f64], norms: &[f64], spec: &WeightedSupSpec) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("weighted supremum over an empty grid".into()));
    }
    if times.len() != norms.len() {
        return Err(Error::InvalidArgument(format!(
            "{} times but {} norms",
            times.len(),
            norms.len()
        )));
    }
    Ok(times
        .iter()
        .zip(norms)
        .map(|(&s, &v)| if s == 0.0 && spec.exponent > 0.0 { 0.0 } else { spec.weight(s) * v })
        .fold(0.0, f64::max))
}

/// Weighted suprema of one iterate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KQuantities {
    pub k_u: f64,
    pub k_grad_y: f64,
    pub k_y: f64,
    pub k_x: f64,
}

impl KQuantities {
    pub fn k_q(&self) -> f64 {
        self.k_u + self.k_grad_y
    }

    pub fn k_inf(&self) -> f64 {
        self.k_y + self.k_x
    }

    pub fn total(&self) -> f64 {
        self.k_q() + self.k_inf()
    }
}

/// The same suprema applied to the difference of two consecutive iterates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DeltaQuantities {
    pub d_u: f64,
    pub d_grad_y: f64,
    pub d_y: f64,
    pub d_x: f64,
}

impl DeltaQuantities {
    pub fn total(&self) -> f64 {
        self.d_u + self.d_grad_y + self.d_y + self.d_x
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares slope of `log norm + omega t` against `log t`.
///
/// Needs at least 8 samples spanning a decade in `t` and positive norms.
pub fn fit_decay_exponent(samples: &[(f64, f64)], omega: f64) -> Result<DecayFit> {
    if samples.len() < 8 {
        return Err(Error::DegenerateFit(format!(
            "need at least 8 samples, got {}",
            samples.len()
        )));
    }
    if let Some(&(t, v)) = samples.iter().find(|(t, v)| !(*v > 0.0 && v.is_finite() && *t > 0.0)) {
        return Err(Error::DegenerateFit(format!(
            "samples need t > 0 and a positive finite norm, got ({t}, {v})"
        )));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(t, _)| (lo.min(t), hi.max(t)));
    if hi < 10.0 * lo * (1.0 - 1e-12) {
        return Err(Error::DegenerateFit(format!(
            "times span [{lo}, {hi}], less than a decade"
        )));
    }
    let xs: Vec<f64> = samples.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(t, v)| v.ln() + omega * t).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r2 = if ss_tot <= 1e-24 * n * (1.0 + my * my) { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(DecayFit { slope, intercept, r2 })
}
