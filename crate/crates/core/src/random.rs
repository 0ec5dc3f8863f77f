//! Random band-limited fields.
//!
//! [`band_limited`] draws samples uniformly in physical space and removes
//! every spectral mode with a signed index above `band` on some axis, together
//! with the Nyquist modes. [`trig_field`] instead draws the coefficients of a
//! trigonometric polynomial in a fixed order, so the same seed describes the
//! same continuous function on every resolution.

use std::sync::Arc;

use rand::Rng;

use crate::domain::{Domain, Parity};
use crate::error::{Error, Result};
use crate::field::{Field, Rank};

pub fn band_limited<R: Rng + ?Sized>(
    domain: &Arc<Domain>,
    rank: Rank,
    parities: &[Parity],
    band: usize,
    rng: &mut R,
) -> Result<Field> {
    let values: Vec<Vec<f64>> = (0..rank.components())
        .map(|_| (0..domain.len()).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let raw = Field::from_values(domain, rank, values, parities)?;
    let mask = band_mask(domain, band);
    Ok(raw.multiply(|i| mask[i]))
}

#[derive(Clone, Copy)]
enum Kind {
    Cos,
    Sin,
}

/// Random trigonometric polynomial of degree `band` per axis with the given
/// symmetry: `cos`/`sin` of `2 pi j x / L` on periodic axes, `cos` (even) or
/// `sin` (odd) of `pi j x / L` on box axes. Coefficients are uniform in
/// `[-1, 1)` and drawn in an order that does not depend on the resolution.
pub fn trig_field<R: Rng + ?Sized>(
    domain: &Arc<Domain>,
    rank: Rank,
    parities: &[Parity],
    band: usize,
    rng: &mut R,
) -> Result<Field> {
    let dim = domain.dim();
    let reflect = domain.director_bc().is_box();
    if let Some(&n) = domain.resolution().iter().find(|&&n| 2 * band >= n) {
        return Err(Error::InvalidArgument(format!(
            "band {band} is not resolved by {n} nodes"
        )));
    }
    let coords: Vec<Vec<f64>> = (0..dim).map(|a| domain.coordinates(a)).collect();
    let mut values = Vec::with_capacity(rank.components());
    for &parity in parities {
        // admissible one-dimensional factors per axis
        let factors: Vec<Vec<(usize, Kind)>> = (0..dim)
            .map(|a| {
                let mut f = Vec::new();
                for j in 0..=band {
                    if !reflect {
                        f.push((j, Kind::Cos));
                        if j > 0 {
                            f.push((j, Kind::Sin));
                        }
                    } else if parity.is_odd(a) {
                        if j > 0 {
                            f.push((j, Kind::Sin));
                        }
                    } else {
                        f.push((j, Kind::Cos));
                    }
                }
                f
            })
            .collect();
        let tables: Vec<Vec<Vec<f64>>> = (0..dim)
            .map(|a| {
                let base = if reflect { std::f64::consts::PI } else { 2.0 * std::f64::consts::PI }
                    / domain.extent()[a];
                factors[a]
                    .iter()
                    .map(|&(j, kind)| {
                        coords[a]
                            .iter()
                            .map(|&x| match kind {
                                Kind::Cos => (base * j as f64 * x).cos(),
                                Kind::Sin => (base * j as f64 * x).sin(),
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let shape: Vec<usize> = factors.iter().map(|f| f.len()).collect();
        let total: usize = shape.iter().product();
        let res = domain.resolution();
        let mut out = vec![0.0; domain.len()];
        let mut pick = vec![0usize; dim];
        let mut node = vec![0usize; dim];
        for flat in 0..total {
            let mut r = flat;
            for a in (0..dim).rev() {
                pick[a] = r % shape[a];
                r /= shape[a];
            }
            let c: f64 = rng.random_range(-1.0..1.0);
            for (i, o) in out.iter_mut().enumerate() {
                let mut r = i;
                for a in (0..dim).rev() {
                    node[a] = r % res[a];
                    r /= res[a];
                }
                let mut v = c;
                for a in 0..dim {
                    v *= tables[a][pick[a]][node[a]];
                }
                *o += v;
            }
        }
        values.push(out);
    }
    Field::from_values(domain, rank, values, parities)
}

/// 1 on modes with every `|index| <= band` (Nyquist excluded), else 0.
pub(crate) fn band_mask(domain: &Domain, band: usize) -> Vec<f64> {
    let shape = domain.spectral_shape().to_vec();
    (0..domain.spectral_len())
        .map(|i| {
            let inside = domain
                .mode_of(i)
                .iter()
                .zip(&shape)
                .all(|(&m, &len)| m.unsigned_abs() as usize <= band && 2 * m.unsigned_abs() as usize != len);
            if inside {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DirectorBc;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trig_fields_agree_across_resolutions() {
        for bc in [DirectorBc::PeriodicMeanSplit, DirectorBc::NeumannBox, DirectorBc::DirichletBox] {
            let coarse = Domain::new(2, &[2.0, 3.0], &[16, 16], bc).unwrap();
            let fine = Domain::new(2, &[2.0, 3.0], &[32, 48], bc).unwrap();
            let p = [coarse.velocity_parity(0), coarse.director_parity()];
            let a = trig_field(&coarse, Rank::Vector(2), &p, 3, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
            let b = trig_field(&fine, Rank::Vector(2), &p, 3, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
            // compare the shared spectral content
            for c in 0..2 {
                for i in 0..coarse.spectral_len() {
                    let m = coarse.mode_of(i);
                    if m.iter().all(|v| v.abs() <= 3) {
                        let z = a.coeffs(c)[i] - b.coeffs(c)[fine.index_of(&m)];
                        assert!(z.norm() < 1e-13, "{bc} {m:?}");
                    }
                }
            }
        }
        let d = Domain::torus(2, 8).unwrap();
        assert!(trig_field(&d, Rank::Scalar, &[Parity::EVEN], 4, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn band_limited_fields_keep_parity_and_band() {
        let d = Domain::new(2, &[1.0, 1.0], &[16, 16], DirectorBc::DirichletBox).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = band_limited(&d, Rank::Scalar, &[d.director_parity()], 4, &mut rng).unwrap();
        for (i, c) in f.coeffs(0).iter().enumerate() {
            if d.mode_of(i).iter().any(|m| m.abs() > 4) {
                assert_eq!(c.norm(), 0.0);
            }
        }
        // round trip through values reproduces the truncated coefficients
        let g = Field::from_values(&d, Rank::Scalar, vec![f.values(0).to_vec()], &f.parities())
            .unwrap();
        let err = f
            .coeffs(0)
            .iter()
            .zip(g.coeffs(0))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err < 1e-14);
    }
}
