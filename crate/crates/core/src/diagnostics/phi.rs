use serde::Serialize;

use crate::error::Result;
use crate::field::{Field, Rank};
use crate::mild::Trajectory;
use crate::ops::gradient;

/// `phi = |d|^2 - 1` along a trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct PhiReport {
    pub times: Vec<f64>,
    /// `max |phi|` per node.
    pub sup_phi: Vec<f64>,
    /// `max ||d| - 1|` per node.
    pub sup_norm_drift: Vec<f64>,
    /// `|1/2 ||phi(t)||^2 + int_0^t ||grad phi||^2 - 2 int_0^t int |grad d|^2 phi^2|`.
    pub energy_residual: Vec<f64>,
    /// `int u . phi grad phi`, evaluated as `1/2 int u . grad(phi^2)`.
    pub transport: Vec<f64>,
    /// `log2` of the ratio of coarse to fine `max sup_phi`; set by
    /// [`PhiReport::with_refinement`].
    pub drift_order: Option<f64>,
}

impl PhiReport {
    pub fn max_sup_phi(&self) -> f64 {
        self.sup_phi.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.sup_norm_drift.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn max_residual(&self) -> f64 {
        self.energy_residual.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn max_transport(&self) -> f64 {
        self.transport.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// Records the observed order against a run on a refined grid.
    pub fn with_refinement(mut self, fine: &PhiReport) -> PhiReport {
        let (c, f) = (self.max_sup_phi(), fine.max_sup_phi());
        self.drift_order = if c > 0.0 && f > 0.0 { Some((c / f).log2()) } else { None };
        self
    }
}

struct NodeTerms {
    sup_phi: f64,
    sup_drift: f64,
    half_l2: f64,
    grad_l2: f64,
    source: f64,
    transport: f64,
}

fn node_terms(state: &crate::mild::State) -> Result<NodeTerms> {
    let domain = state.domain();
    let cell = domain.cell_volume();
    let d = state.director_values();
    let phi: Vec<f64> = (0..domain.len())
        .map(|j| d[0][j] * d[0][j] + d[1][j] * d[1][j] + d[2][j] * d[2][j] - 1.0)
        .collect();
    let sup_phi = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sup_drift = phi.iter().fold(0.0f64, |m, v| m.max(((1.0 + v).max(0.0).sqrt() - 1.0).abs()));
    let phi_f = Field::from_values(domain, Rank::Scalar, vec![phi.clone()], &[domain.director_parity()])?;
    let grad_phi = gradient(&phi_f)?;
    let grad_d = state.grad_director();
    let mut grad_l2 = 0.0;
    let mut source = 0.0;
    for j in 0..domain.len() {
        grad_l2 += (0..domain.dim()).map(|k| grad_phi.values(k)[j].powi(2)).sum::<f64>();
        let gd: f64 = (0..grad_d.n_components()).map(|c| grad_d.values(c)[j].powi(2)).sum();
        source += gd * phi[j] * phi[j];
    }
    let sq: Vec<f64> = phi.iter().map(|v| v * v).collect();
    let sq_f = Field::from_values(domain, Rank::Scalar, vec![sq], &[crate::domain::Parity::EVEN])?;
    let grad_sq = gradient(&sq_f)?;
    let mut transport = 0.0;
    for k in 0..domain.dim() {
        transport += state.u.values(k).iter().zip(grad_sq.values(k)).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(NodeTerms {
        sup_phi,
        sup_drift,
        half_l2: 0.5 * phi.iter().map(|v| v * v).sum::<f64>() * cell,
        grad_l2: grad_l2 * cell,
        source: 2.0 * source * cell,
        transport: 0.5 * transport * cell,
    })
}

/// Assembles `phi` at every node; time integrals use the trapezoid rule.
pub fn phi_diagnostics(trajectory: &Trajectory) -> Result<PhiReport> {
    use rayon::prelude::*;
    let terms = trajectory
        .states()
        .par_iter()
        .map(node_terms)
        .collect::<Result<Vec<_>>>()?;
    let times = trajectory.times();
    let mut energy_residual = Vec::with_capacity(terms.len());
    let (mut int_grad, mut int_src) = (0.0, 0.0);
    for (n, t) in terms.iter().enumerate() {
        if n > 0 {
            let h = times[n] - times[n - 1];
            int_grad += 0.5 * h * (t.grad_l2 + terms[n - 1].grad_l2);
            int_src += 0.5 * h * (t.source + terms[n - 1].source);
        }
        energy_residual.push((t.half_l2 + int_grad - int_src).abs());
    }
    Ok(PhiReport {
        times,
        sup_phi: terms.iter().map(|t| t.sup_phi).collect(),
        sup_norm_drift: terms.iter().map(|t| t.sup_drift).collect(),
        energy_residual,
        transport: terms.iter().map(|t| t.transport).collect(),
        drift_order: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DirectorBc, Domain, Parity};
    use crate::mild::{MildProblem, State};
    use std::sync::Arc;

    fn state(d: &Arc<Domain>, t: f64, scale: f64) -> State {
        State {
            regime: d.regime(),
            t,
            u: Field::zero_velocity(d),
            y: Field::zero_director(d),
            x: [0.0; 3],
            b_mean: [0.0, 0.0, scale],
        }
    }

    #[test]
    fn equilibrium_has_zero_phi() {
        let d = Domain::torus(2, 16).unwrap();
        let a = Field::zero_velocity(&d);
        let b = Field::from_fn(&d, Rank::Vector(3), &[Parity::EVEN; 3], |c, _| [0.6, 0.0, 0.8][c]).unwrap();
        let p = MildProblem::new(&a, &b, None, 0.5, 8).unwrap();
        let r = phi_diagnostics(&p.linear_trajectory().unwrap()).unwrap();
        assert_eq!(r.times.len(), 9);
        assert!(r.max_sup_phi() < 1e-12, "{}", r.max_sup_phi());
        assert!(r.max_residual() < 1e-28);
        assert_eq!(r.max_transport(), 0.0);
    }

    #[test]
    fn manufactured_length() {
        for bc in [DirectorBc::PeriodicMeanSplit, DirectorBc::NeumannBox] {
            let d = Domain::new(2, &[3.0, 3.0], &[8, 8], bc).unwrap();
            let s = state(&d, 0.0, 1.1);
            let tr = Trajectory::new(vec![s]).unwrap();
            let r = phi_diagnostics(&tr).unwrap();
            assert!((r.sup_phi[0] - 0.21).abs() < 1e-14);
            assert!((r.sup_norm_drift[0] - 0.1).abs() < 1e-14);
            // phi is constant: 1/2 * 0.21^2 * volume
            assert!((r.energy_residual[0] - 0.5 * 0.21f64.powi(2) * 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_order() {
        let d = Domain::torus(2, 8).unwrap();
        let coarse = phi_diagnostics(&Trajectory::new(vec![state(&d, 0.0, 1.1)]).unwrap()).unwrap();
        let fine = phi_diagnostics(&Trajectory::new(vec![state(&d, 0.0, 1.05)]).unwrap()).unwrap();
        let r = coarse.with_refinement(&fine);
        let expect = (0.21f64 / (1.05f64 * 1.05 - 1.0)).log2();
        assert!((r.drift_order.unwrap() - expect).abs() < 1e-12);
    }
}
