use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Domain, Parity};
use crate::error::{Error, Result};
use crate::field::{Field, Rank};
use crate::norms::lp_norm;
use crate::ops::{gradient, mean_split};
use crate::random::band_limited;
use crate::semigroup::{semigroup_apply, Operator, SemigroupQuery, Wrap};

#[derive(Clone, Debug, Serialize)]
pub struct MaxPrincipleReport {
    pub times: Vec<f64>,
    /// Worst `||e^{-tB} d||_inf / ||d||_inf` per time.
    pub worst_per_time: Vec<f64>,
    pub worst_ratio: f64,
    pub batch_size: usize,
}

fn batch(domain: &Arc<Domain>, size: usize, seed: u64, mean_free: bool) -> Result<Vec<Field>> {
    let band = domain.resolution().iter().min().copied().unwrap_or(0) / 3;
    (0..size)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let f = band_limited(domain, Rank::Scalar, &[domain.director_parity()], band, &mut rng)?;
            if mean_free && domain.canonical(domain.director_parity()) == Parity::EVEN {
                Ok(mean_split(&f).1)
            } else {
                Ok(f)
            }
        })
        .collect()
}

/// Sup-norm ratios of the heat flow on random band-limited fields (means
/// kept) and on the constant field.
pub fn max_principle_check(
    domain: &Arc<Domain>,
    batch_size: usize,
    times: &[f64],
    seed: u64,
) -> Result<MaxPrincipleReport> {
    let mut fields = batch(domain, batch_size, seed, false)?;
    if domain.canonical(domain.director_parity()) == Parity::EVEN {
        fields.push(Field::from_fn(domain, Rank::Scalar, &[Parity::EVEN], |_, _| 1.0)?);
    }
    let worst_per_time = times
        .iter()
        .map(|&t| {
            let q = SemigroupQuery::heat(t);
            fields
                .par_iter()
                .map(|f| {
                    let top = f.max_abs();
                    if top == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(semigroup_apply(&q, f)?.max_abs() / top)
                })
                .collect::<Result<Vec<f64>>>()
                .map(|r| r.into_iter().fold(0.0, f64::max))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MaxPrincipleReport {
        times: times.to_vec(),
        worst_ratio: worst_per_time.iter().copied().fold(0.0, f64::max),
        worst_per_time,
        batch_size: fields.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SqrtBounds {
    pub p: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Range of `||B^{1/2} f||_p / ||grad f||_p` over random mean-free fields.
pub fn sqrt_equivalence_check(
    domain: &Arc<Domain>,
    ps: &[f64],
    batch_size: usize,
    seed: u64,
) -> Result<Vec<SqrtBounds>> {
    if batch_size == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let fields = batch(domain, batch_size, seed, true)?;
    let pairs = fields
        .par_iter()
        .map(|f| Ok((semigroup_apply(&SemigroupQuery::new(Operator::Heat, 0.0, Wrap::Sqrt), f)?, gradient(f)?)))
        .collect::<Result<Vec<_>>>()?;
    ps.iter()
        .map(|&p| {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for (s, g) in &pairs {
                let r = lp_norm(s, p)? / lp_norm(g, p)?;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            Ok(SqrtBounds { p, min_ratio: lo, max_ratio: hi })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DirectorBc;

    #[test]
    fn max_principle_batch() {
        for bc in [DirectorBc::PeriodicMeanSplit, DirectorBc::NeumannBox, DirectorBc::DirichletBox] {
            let d = Domain::new(2, &[std::f64::consts::PI; 2], &[32, 32], bc).unwrap();
            let r = max_principle_check(&d, 10, &[0.1, 1.0], 3).unwrap();
            assert!(r.worst_ratio <= 1.0 + 1e-12, "{bc} {}", r.worst_ratio);
            assert!(r.worst_ratio > 0.0);
        }
    }

    #[test]
    fn constant_ratio_is_one() {
        let d = Domain::torus(2, 16).unwrap();
        let r = max_principle_check(&d, 0, &[0.5], 0).unwrap();
        assert_eq!(r.batch_size, 1);
        assert!((r.worst_ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_l2_is_isometric() {
        for bc in [DirectorBc::PeriodicMeanSplit, DirectorBc::NeumannBox, DirectorBc::DirichletBox] {
            let d = Domain::new(2, &[2.0, 3.0], &[24, 32], bc).unwrap();
            let b = sqrt_equivalence_check(&d, &[2.0, 3.0], 6, 1).unwrap();
            assert!((b[0].min_ratio - 1.0).abs() < 1e-10 && (b[0].max_ratio - 1.0).abs() < 1e-10, "{bc} {:?}", b[0]);
            assert!(b[1].min_ratio > 0.0 && b[1].max_ratio.is_finite());
        }
    }
}
