//! Constants of the contraction estimate and the smallness test for global
//! existence.
//!
//! With `m = n (1/p - 1/q)`:
//!
//! ```text
//! beta_1 = B(1 - m, 1/2 - n/(2q))     beta_3 = B(1 - m, 1 - n/q)
//! C1(T) = sup_{0<t<T} e^{-w t/2} t^{1/2 - n/(2p)}
//! C2(T) = sup_{0<t<T} e^{-w t}   t^{1 - n/p}
//! C3(T) = int_0^T e^{-w s} s^{-m} ds = gamma(1 - m, w T) / w^{1 - m}
//! K1 = 2 k0_q,  K2 = max(2 k0_inf, |b_mean|, 1),  K = max(K1, K1^2)
//! lhs = 144 C C~_T K (1 + |b|_inf)      passes iff lhs < 1
//! ```
//!
//! The beta factors are reported but, as in the estimate itself, absorbed
//! into the generic constant `C`, which is a user input (`generic_c`).

use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::mild::{k_quantities, MildProblem};
use crate::norms::{lp_norm, WeightedSupSpec};
use crate::ops::gradient;

/// `B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y)` for `x, y > 0`.
pub fn beta_fn(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) || !(x.is_finite() && y.is_finite()) {
        return Err(Error::Inadmissible(format!(
            "beta function needs positive finite arguments, got B({x}, {y})"
        )));
    }
    Ok((ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp())
}

/// `sup_{0 < t < T} e^{-a t} t^b` for `a > 0`, `b >= 0`, `T` possibly infinite.
pub fn sup_exp_power(a: f64, b: f64, horizon: f64) -> f64 {
    if b == 0.0 {
        return 1.0;
    }
    let peak = b / a;
    if horizon <= peak {
        horizon.powf(b) * (-a * horizon).exp()
    } else {
        peak.powf(b) * (-b).exp()
    }
}

/// `int_0^T e^{-w s} s^{-m} ds` for `0 <= m < 1`.
pub fn decay_integral(omega: f64, m: f64, horizon: f64) -> f64 {
    let a = 1.0 - m;
    let scale = (ln_gamma(a) - a * omega.ln()).exp();
    if horizon.is_infinite() {
        scale
    } else if m == 0.0 {
        -(-omega * horizon).exp_m1() / omega
    } else {
        scale * gamma_lr(a, omega * horizon)
    }
}

/// The time-only constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProofConstants {
    pub beta_1: f64,
    pub beta_2: f64,
    pub beta_3: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c_tilde: f64,
}

fn require(ok: bool, what: &str, value: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Inadmissible(format!("{what} (value {value})")))
    }
}

/// Exponent checks shared by the constants and the beta factors.
fn check_exponents(p: f64, q: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    require(p > 1.0 && q.is_finite(), "need 1 < p and a finite q", p)?;
    require(q >= p, "need q >= p", q - p)?;
    let m = nf * (1.0 / p - 1.0 / q);
    require(1.0 - m > 0.0, "need 1 - n(1/p - 1/q) > 0: q is too far from p", 1.0 - m)?;
    require(0.5 - nf / (2.0 * q) > 0.0, "need 1/2 - n/(2q) > 0: q must exceed n", 0.5 - nf / (2.0 * q))?;
    require(0.5 - nf / (2.0 * p) >= 0.0, "need 1/2 - n/(2p) >= 0: p must be at least n", 0.5 - nf / (2.0 * p))?;
    Ok(m)
}

pub fn proof_constants(p: f64, q: f64, n: usize, omega: f64, horizon: f64) -> Result<ProofConstants> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    if !(horizon > 0.0) || horizon.is_nan() {
        return Err(Error::InvalidArgument(format!("horizon must be in (0, inf], got {horizon}")));
    }
    let m = check_exponents(p, q, n)?;
    let nf = n as f64;
    // all three factors share the first argument 1 - m
    let beta_1 = beta_fn(1.0 - m, 0.5 - nf / (2.0 * q))?;
    let beta_2 = beta_1;
    let beta_3 = beta_fn(1.0 - m, 1.0 - nf / q)?;
    let c1 = sup_exp_power(omega / 2.0, 0.5 - nf / (2.0 * p), horizon);
    let c2 = sup_exp_power(omega, 1.0 - nf / p, horizon);
    let c3 = decay_integral(omega, m, horizon);
    Ok(ProofConstants { beta_1, beta_2, beta_3, c1, c2, c3, c_tilde: c1.max(c2).max(c3) })
}

/// Computed suprema of the linear trajectories.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct K0 {
    pub k0_u: f64,
    pub k0_grad_y: f64,
    pub k0_y: f64,
    pub k0_x: f64,
}

impl K0 {
    pub fn k0_q(&self) -> f64 {
        self.k0_u + self.k0_grad_y
    }

    pub fn k0_inf(&self) -> f64 {
        self.k0_y + self.k0_x
    }
}

/// Time grid for the k0 suprema on `(0, T]`: `nodes` uniform points merged
/// with `nodes` geometric points down to `1e-6 T`. An infinite horizon is
/// replaced by `40 / omega`, beyond which every weighted norm has decayed
/// by `e^{-20}`.
pub fn k0_time_grid(horizon: f64, omega: f64, nodes: usize) -> Vec<f64> {
    let t_end = if horizon.is_finite() { horizon } else { 40.0 / omega };
    let nodes = nodes.max(2);
    let mut grid: Vec<f64> = (0..=nodes).map(|k| t_end * k as f64 / nodes as f64).collect();
    let lo = t_end * 1e-6;
    grid.extend((0..nodes).map(|k| lo * (t_end / lo).powf(k as f64 / (nodes - 1) as f64)));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * t_end);
    grid
}

/// Weighted suprema of `e^{-tA} a` and `e^{-tB} y_0` on `times`;
/// `k0_x` is zero by definition.
pub fn k0_bounds(problem: &MildProblem, p: f64, q: f64, times: &[f64]) -> Result<K0> {
    let domain = problem.domain();
    let spec = WeightedSupSpec::new(p, q, domain.dim(), domain.omega())?;
    let traj = problem.linear_trajectory_at(times)?;
    let k = k_quantities(&traj, &spec)?;
    Ok(K0 { k0_u: k.k_u, k0_grad_y: k.k_grad_y, k0_y: k.k_y, k0_x: 0.0 })
}

/// `||a||_p + ||grad b||_p`.
pub fn kappa(a: &Field, b: &Field, p: f64) -> Result<f64> {
    Ok(lp_norm(a, p)? + lp_norm(&gradient(b)?, p)?)
}

/// Everything the smallness test needs besides the time constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyInputs {
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub omega: f64,
    pub horizon: f64,
    pub k0_q: f64,
    pub k0_inf: f64,
    pub b_mean_abs: f64,
    pub b_sup: f64,
    pub kappa: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsReport {
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub omega: f64,
    pub horizon: f64,
    pub constants: ProofConstants,
    pub k0_q: f64,
    pub k0_inf: f64,
    pub k1: f64,
    pub k2: f64,
    pub k: f64,
    pub kappa: f64,
    pub b_sup: f64,
    pub generic_c: f64,
    pub smallness_lhs: f64,
    pub kappa_lhs: f64,
    /// `generic_c` at which `smallness_lhs` equals 1 (infinite when `K = 0`).
    pub breakeven_c: f64,
    pub passes: bool,
    pub passes_kappa: bool,
    /// `p` outside `[3, 3.5]`, the window the existence theory is stated for.
    pub outside_range: bool,
}

/// Evaluates both smallness conditions. Failing is a result, not an error.
///
/// The second condition reads `max(kappa, kappa^2)(1 + |b|_inf) < 1/C`; it is
/// reported as `kappa_lhs = C max(kappa, kappa^2)(1 + |b|_inf) < 1` so both
/// share the same `generic_c`.
pub fn smallness_check(inputs: &CertifyInputs, generic_c: f64) -> Result<ConstantsReport> {
    if !(generic_c > 0.0 && generic_c.is_finite()) {
        return Err(Error::InvalidArgument(format!("generic_c must be positive, got {generic_c}")));
    }
    let constants = proof_constants(inputs.p, inputs.q, inputs.n, inputs.omega, inputs.horizon)?;
    let k1 = 2.0 * inputs.k0_q;
    let k2 = (2.0 * inputs.k0_inf).max(inputs.b_mean_abs).max(1.0);
    let k = k1.max(k1 * k1);
    let factor = 144.0 * constants.c_tilde * k * (1.0 + inputs.b_sup);
    let smallness_lhs = generic_c * factor;
    let kappa_lhs = generic_c * inputs.kappa.max(inputs.kappa * inputs.kappa) * (1.0 + inputs.b_sup);
    Ok(ConstantsReport {
        p: inputs.p,
        q: inputs.q,
        n: inputs.n,
        omega: inputs.omega,
        horizon: inputs.horizon,
        constants,
        k0_q: inputs.k0_q,
        k0_inf: inputs.k0_inf,
        k1,
        k2,
        k,
        kappa: inputs.kappa,
        b_sup: inputs.b_sup,
        generic_c,
        smallness_lhs,
        kappa_lhs,
        breakeven_c: if factor > 0.0 { 1.0 / factor } else { f64::INFINITY },
        passes: smallness_lhs < 1.0,
        passes_kappa: kappa_lhs < 1.0,
        outside_range: !(3.0..=3.5).contains(&inputs.p),
    })
}

/// Full pipeline on a mild problem: k0 on [`k0_time_grid`], kappa on the
/// grid, then [`smallness_check`].
pub fn certify(
    problem: &MildProblem,
    p: f64,
    q: f64,
    horizon: f64,
    generic_c: f64,
    nodes: usize,
) -> Result<ConstantsReport> {
    let domain = problem.domain();
    let omega = domain.omega();
    // validate exponents before the expensive part
    proof_constants(p, q, domain.dim(), omega, horizon)?;
    let k0 = k0_bounds(problem, p, q, &k0_time_grid(horizon, omega, nodes))?;
    let bm = problem.b_mean();
    let inputs = CertifyInputs {
        p,
        q,
        n: domain.dim(),
        omega,
        horizon,
        k0_q: k0.k0_q(),
        k0_inf: k0.k0_inf(),
        b_mean_abs: bm.iter().map(|v| v * v).sum::<f64>().sqrt(),
        b_sup: problem.b_sup(),
        kappa: kappa(problem.velocity_data(), problem.director_data(), p)?,
    };
    smallness_check(&inputs, generic_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn classical_beta_values() {
        assert!((beta_fn(0.5, 0.5).unwrap() - PI).abs() < 1e-13);
        assert!((beta_fn(1.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((beta_fn(2.0, 3.0).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!(beta_fn(0.0, 1.0).is_err());
        assert!(beta_fn(1.0, -0.5).is_err());
    }

    #[test]
    fn equal_exponents_and_critical_p() {
        let c = proof_constants(3.5, 3.5, 3, 2.0, f64::INFINITY).unwrap();
        assert!((c.c3 - 0.5).abs() < 1e-15);
        for t in [1e-3, 0.5, 7.0, f64::INFINITY] {
            let c = proof_constants(3.0, 3.4, 3, 1.0, t).unwrap();
            assert_eq!(c.c1, 1.0);
        }
    }

    #[test]
    fn inadmissible_pairs_name_the_inequality() {
        let msg = proof_constants(2.5, 100.0, 3, 1.0, 1.0).unwrap_err().to_string();
        assert!(msg.contains("too far"), "{msg}");
        let msg = proof_constants(2.0, 2.5, 3, 1.0, 1.0).unwrap_err().to_string();
        assert!(msg.contains("q must exceed n"), "{msg}");
        assert!(proof_constants(3.5, 3.0, 3, 1.0, 1.0).is_err());
        assert!(proof_constants(3.0, 3.5, 3, 0.0, 1.0).is_err());
        assert!(proof_constants(3.0, 3.5, 3, 1.0, 0.0).is_err());
    }

    #[test]
    fn sup_of_exp_power_regimes() {
        assert_eq!(sup_exp_power(1.0, 0.0, 5.0), 1.0);
        // T before the peak: monotone branch
        assert!((sup_exp_power(1.0, 0.5, 0.25) - 0.5 * (-0.25f64).exp()).abs() < 1e-15);
        // T past the peak
        let v = sup_exp_power(2.0, 1.0, 10.0);
        assert!((v - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(v, sup_exp_power(2.0, 1.0, f64::INFINITY));
    }

    #[test]
    fn equilibrium_passes_with_zero_lhs() {
        let inputs = CertifyInputs {
            p: 3.0,
            q: 3.5,
            n: 3,
            omega: 1.0,
            horizon: f64::INFINITY,
            k0_q: 0.0,
            k0_inf: 0.0,
            b_mean_abs: 1.0,
            b_sup: 1.0,
            kappa: 0.0,
        };
        let r = smallness_check(&inputs, 1.0).unwrap();
        assert_eq!(r.k, 0.0);
        assert_eq!(r.smallness_lhs, 0.0);
        assert!(r.passes && r.passes_kappa);
        assert!(r.breakeven_c.is_infinite());
        assert_eq!(r.k2, 1.0);
        assert!(smallness_check(&inputs, 0.0).is_err());
    }

    #[test]
    fn k0_grid_is_sorted_and_covers_the_horizon() {
        let g = k0_time_grid(2.0, 1.0, 16);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(g[1] <= 2.0 * 1e-6 * 1.0001);
        let g = k0_time_grid(f64::INFINITY, 0.5, 16);
        assert_eq!(*g.last().unwrap(), 80.0);
    }
}
