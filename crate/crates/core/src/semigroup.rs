//! The Stokes and heat semigroups as Fourier multipliers, optionally composed
//! with a derivative: `grad e^{-tB}`, `e^{-tA} P div` and `B^{1/2}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Rank};
use crate::ops::{divergence, gradient, leray_project};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    /// `e^{-tA}`: projected, mean-free heat flow of the velocity.
    Stokes,
    /// `e^{-tB}`: heat flow of the director in the domain's regime.
    Heat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Wrap {
    None,
    /// `grad e^{-tB}` (heat only).
    Gradient,
    /// `e^{-tA} P div` of a tensor field (Stokes only).
    PDiv,
    /// `B^{1/2} e^{-tB}` (heat only).
    Sqrt,
}

impl Wrap {
    pub fn as_str(self) -> &'static str {
        match self {
            Wrap::None => "none",
            Wrap::Gradient => "gradient",
            Wrap::PDiv => "pdiv",
            Wrap::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemigroupQuery {
    pub operator: Operator,
    pub t: f64,
    pub wrap: Wrap,
}

impl SemigroupQuery {
    pub fn new(operator: Operator, t: f64, wrap: Wrap) -> SemigroupQuery {
        SemigroupQuery { operator, t, wrap }
    }

    pub fn heat(t: f64) -> SemigroupQuery {
        SemigroupQuery::new(Operator::Heat, t, Wrap::None)
    }

    pub fn stokes(t: f64) -> SemigroupQuery {
        SemigroupQuery::new(Operator::Stokes, t, Wrap::None)
    }
}

/// Applies the queried operator family to `f`.
///
/// The Stokes family projects its argument (a no-op on solenoidal input) and
/// drops the mean, so it acts on mean-free solenoidal fields. The heat family
/// keeps the mean on periodic and Neumann domains.
pub fn semigroup_apply(query: &SemigroupQuery, f: &Field) -> Result<Field> {
    let t = query.t;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "semigroup time must be finite and >= 0, got {t}"
        )));
    }
    let domain = f.domain().clone();
    let decay = |i: usize| (-domain.ksq[i] * t).exp();
    match (query.operator, query.wrap) {
        (Operator::Heat, Wrap::None) => Ok(f.multiply(decay)),
        (Operator::Heat, Wrap::Gradient) => gradient(&f.multiply(decay)),
        (Operator::Heat, Wrap::Sqrt) => Ok(f.multiply(|i| domain.ksq[i].sqrt() * decay(i))),
        (Operator::Stokes, Wrap::None) => Ok(stokes_multiply(&leray_project(f)?, t)),
        (Operator::Stokes, Wrap::PDiv) => {
            if !matches!(f.rank(), Rank::Tensor(..)) {
                return Err(Error::Rank(format!(
                    "the P div wrap needs a tensor field, got {:?}",
                    f.rank()
                )));
            }
            Ok(stokes_multiply(&leray_project(&divergence(f)?)?, t))
        }
        (op, wrap) => Err(Error::InvalidArgument(format!(
            "wrap {} is not defined for the {op:?} semigroup",
            wrap.as_str()
        ))),
    }
}

/// `e^{-|k|^2 t}` with the zero mode removed.
fn stokes_multiply(u: &Field, t: f64) -> Field {
    let ksq = &u.domain().ksq;
    u.multiply(|i| {
        if ksq[i] == 0.0 {
            0.0
        } else {
            (-ksq[i] * t).exp()
        }
    })
}

/// Per-mode decay factors `e^{-|k|^2 t}` (used by the Duhamel sweeps).
pub(crate) fn decay_factors(ksq: &[f64], t: f64) -> Vec<f64> {
    ksq.iter().map(|k| (-k * t).exp()).collect()
}

/// Multiplies each coefficient vector by the per-mode factors.
pub(crate) fn scale_modes(coeffs: &[Complex64], factors: &[f64]) -> Vec<Complex64> {
    coeffs.iter().zip(factors).map(|(c, f)| c * f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DirectorBc, Domain, Parity};
    use crate::field::velocity_parities;
    use crate::testing::{random_smooth, random_velocity};
    use std::f64::consts::PI;

    #[test]
    fn heat_on_eigenfunction() {
        let d = Domain::torus(2, 16).unwrap();
        let f = Field::from_fn(&d, Rank::Scalar, &[Parity::EVEN], |_, x| {
            (2.0 * x[0] + x[1]).cos()
        })
        .unwrap();
        let t = 0.3;
        let g = semigroup_apply(&SemigroupQuery::heat(t), &f).unwrap();
        assert!(g.max_abs_diff(&f.scale((-5.0 * t).exp())) < 1e-14);
    }

    #[test]
    fn heat_at_zero_is_identity() {
        for bc in [DirectorBc::PeriodicMeanSplit, DirectorBc::NeumannBox, DirectorBc::DirichletBox] {
            let d = Domain::new(2, &[1.0, 2.0], &[8, 12], bc).unwrap();
            let f = random_smooth(&d, Rank::Vector(3), &[d.director_parity()], 3, 2);
            let g = semigroup_apply(&SemigroupQuery::heat(0.0), &f).unwrap();
            assert!(g.max_abs_diff(&f) < 1e-14);
        }
    }

    #[test]
    fn semigroup_law() {
        let d = Domain::new(2, &[PI, PI], &[16, 16], DirectorBc::NeumannBox).unwrap();
        let f = random_smooth(&d, Rank::Scalar, &[Parity::EVEN], 6, 9);
        let (t, s) = (0.013, 0.041);
        let a = semigroup_apply(&SemigroupQuery::heat(t + s), &f).unwrap();
        let b = semigroup_apply(
            &SemigroupQuery::heat(t),
            &semigroup_apply(&SemigroupQuery::heat(s), &f).unwrap(),
        )
        .unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }

    #[test]
    fn gradient_commutes_with_heat() {
        let d = Domain::torus(2, 16).unwrap();
        let f = random_smooth(&d, Rank::Vector(3), &[Parity::EVEN], 5, 1);
        let t = 0.2;
        let wrapped =
            semigroup_apply(&SemigroupQuery::new(Operator::Heat, t, Wrap::Gradient), &f).unwrap();
        let direct = semigroup_apply(&SemigroupQuery::heat(t), &gradient(&f).unwrap()).unwrap();
        for c in 0..6 {
            for (a, b) in wrapped.coeffs(c).iter().zip(direct.coeffs(c)) {
                assert!((a - b).norm() < 1e-16);
            }
        }
    }

    #[test]
    fn stokes_output_is_solenoidal_and_mean_free() {
        let d = Domain::torus(2, 16).unwrap();
        let u = random_velocity(&d, 5, 4);
        let v = semigroup_apply(&SemigroupQuery::stokes(0.1), &u).unwrap();
        assert!(divergence(&v).unwrap().max_abs() < 1e-12);
        assert!(v.mean().iter().all(|m| m.abs() < 1e-14));
    }

    #[test]
    fn pdiv_matches_composition() {
        let d = Domain::torus(2, 16).unwrap();
        let pars: Vec<Parity> = (0..4).map(|_| Parity::EVEN).collect();
        let g = random_smooth(&d, Rank::Tensor(2, 2), &pars, 4, 8);
        let t = 0.05;
        let a = semigroup_apply(&SemigroupQuery::new(Operator::Stokes, t, Wrap::PDiv), &g).unwrap();
        let b = semigroup_apply(&SemigroupQuery::stokes(t), &divergence(&g).unwrap()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
        assert_eq!(a.parities(), velocity_parities(&d));
    }

    #[test]
    fn invalid_queries() {
        let d = Domain::torus(2, 8).unwrap();
        let f = Field::zero_velocity(&d);
        let s = Field::zeros(&d, Rank::Scalar, &[Parity::EVEN]);
        assert!(semigroup_apply(&SemigroupQuery::heat(-1.0), &f).is_err());
        assert!(semigroup_apply(&SemigroupQuery::new(Operator::Heat, 1.0, Wrap::PDiv), &f).is_err());
        assert!(semigroup_apply(&SemigroupQuery::new(Operator::Stokes, 1.0, Wrap::Sqrt), &f).is_err());
        assert!(matches!(
            semigroup_apply(&SemigroupQuery::new(Operator::Stokes, 1.0, Wrap::PDiv), &f),
            Err(Error::Rank(_))
        ));
        assert!(semigroup_apply(&SemigroupQuery::new(Operator::Heat, 1.0, Wrap::Sqrt), &s).is_ok());
    }

    #[test]
    fn sqrt_on_eigenfunction() {
        let d = Domain::new(2, &[PI, PI], &[16, 16], DirectorBc::DirichletBox).unwrap();
        let f = Field::from_fn(&d, Rank::Scalar, &[d.director_parity()], |_, x| {
            (2.0 * x[0]).sin() * x[1].sin()
        })
        .unwrap();
        let g = semigroup_apply(&SemigroupQuery::new(Operator::Heat, 0.0, Wrap::Sqrt), &f).unwrap();
        assert!(g.max_abs_diff(&f.scale(5f64.sqrt())) < 1e-13);
    }
}
