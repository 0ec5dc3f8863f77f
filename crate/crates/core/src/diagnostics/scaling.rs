use serde::Serialize;

use crate::domain::{DirectorBc, Domain};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::mild::{picard_solve, MildProblem, PicardConfig, Trajectory};

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub alpha: f64,
    /// `max |u_alpha - alpha u| / max |alpha u|` over matching nodes.
    pub deviation_u: f64,
    /// `max |d_alpha - d| / max |d|`.
    pub deviation_d: f64,
    pub max_deviation: f64,
    pub iterations_base: usize,
    pub iterations_dilated: usize,
}

fn relative(num: f64, den: f64) -> f64 {
    if num == 0.0 { 0.0 } else { num / den }
}

/// Solves on the configured torus and on the torus shrunk by `alpha` with
/// time shrunk by `alpha^2` and data `alpha a`, `b` at the same grid
/// indices, then compares `u_alpha` with `alpha u` and `d_alpha` with `d`
/// node for node.
pub fn scaling_invariance_check(
    a: &Field,
    b: &Field,
    horizon: f64,
    intervals: usize,
    config: &PicardConfig,
    alpha: f64,
) -> Result<ScalingReport> {
    let domain = a.domain();
    if domain.director_bc() != DirectorBc::PeriodicMeanSplit {
        return Err(Error::InvalidArgument("the scaling check runs on the torus only".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive and finite, got {alpha}")));
    }
    let extent: Vec<f64> = domain.extent().iter().map(|l| l / alpha).collect();
    let small = Domain::new(domain.dim(), &extent, domain.resolution(), domain.director_bc())?;
    let carry = |f: &Field, s: f64| -> Result<Field> {
        let values = (0..f.n_components()).map(|c| f.values(c).iter().map(|v| s * v).collect()).collect();
        Field::from_values(&small, f.rank(), values, &f.parities())
    };
    let base = MildProblem::new(a, b, None, horizon, intervals)?;
    let dil = MildProblem::new(&carry(a, alpha)?, &carry(b, 1.0)?, None, horizon / (alpha * alpha), intervals)?;
    let (tb, trace_b) = picard_solve(&base, config)?;
    let (td, trace_d) = picard_solve(&dil, config)?;
    let (du, dd) = compare(&tb, &td, alpha);
    Ok(ScalingReport {
        alpha,
        deviation_u: du,
        deviation_d: dd,
        max_deviation: du.max(dd),
        iterations_base: trace_b.iterations_used,
        iterations_dilated: trace_d.iterations_used,
    })
}

fn compare(base: &Trajectory, dil: &Trajectory, alpha: f64) -> (f64, f64) {
    let (mut eu, mut su, mut ed, mut sd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (s, r) in base.states().iter().zip(dil.states()) {
        for c in 0..s.u.n_components() {
            for (x, y) in s.u.values(c).iter().zip(r.u.values(c)) {
                eu = eu.max((y - alpha * x).abs());
                su = su.max((alpha * x).abs());
            }
        }
        for (x, y) in s.director_values().iter().zip(r.director_values()) {
            for (x, y) in x.iter().zip(y) {
                ed = ed.max((y - x).abs());
                sd = sd.max(x.abs());
            }
        }
    }
    (relative(eu, su), relative(ed, sd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Parity;
    use crate::field::Rank;

    fn constant(d: &std::sync::Arc<Domain>, e: [f64; 3]) -> Field {
        Field::from_fn(d, Rank::Vector(3), &[Parity::EVEN; 3], |c, _| e[c]).unwrap()
    }

    #[test]
    fn equilibrium_is_scale_free() {
        let d = Domain::torus(2, 16).unwrap();
        let r = scaling_invariance_check(&Field::zero_velocity(&d), &constant(&d, [0.0, 0.0, 1.0]), 0.2, 8, &PicardConfig::default(), 2.0)
            .unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn rejects_boxes_and_bad_alpha() {
        let d = Domain::new(2, &[1.0, 1.0], &[8, 8], DirectorBc::NeumannBox).unwrap();
        let b = constant(&d, [1.0, 0.0, 0.0]);
        assert!(scaling_invariance_check(&Field::zero_velocity(&d), &b, 0.1, 8, &PicardConfig::default(), 2.0).is_err());
        let d = Domain::torus(2, 8).unwrap();
        let b = constant(&d, [1.0, 0.0, 0.0]);
        assert!(scaling_invariance_check(&Field::zero_velocity(&d), &b, 0.1, 8, &PicardConfig::default(), 0.0).is_err());
    }
}
