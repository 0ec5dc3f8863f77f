//! Spectral differential operators.
//!
//! Derivatives use the symbol `i k` with the Nyquist entry zeroed, so the
//! gradient of a real field stays real and `div`, `grad` and the Leray
//! projector form an exact discrete algebra (`div P = 0`, `P grad = 0`). The
//! Laplacian keeps the full `|k|^2`; it agrees with `div grad` on fields
//! without Nyquist content.

use num_complex::Complex64;

use crate::domain::Parity;
use crate::error::{Error, Result};
use crate::field::{Field, Rank};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Gradient: scalar to vector, vector of length `l` to an `l x dim` tensor
/// with entry `(i, k) = d_k f_i`.
pub fn gradient(f: &Field) -> Result<Field> {
    let domain = f.domain().clone();
    let dim = domain.dim();
    let (rows, rank) = match f.rank() {
        Rank::Scalar => (1, Rank::Vector(dim)),
        Rank::Vector(l) => (l, Rank::Tensor(l, dim)),
        Rank::Tensor(..) => {
            return Err(Error::Rank("gradient of a tensor field is not supported".into()))
        }
    };
    let parities: Vec<Parity> = (0..rows)
        .flat_map(|i| (0..dim).map(move |k| (i, k)))
        .map(|(i, k)| f.parity(i).flip(k))
        .collect();
    Ok(f.map_spectral(rank, &parities, |c| {
        let (i, k) = (c / dim, c % dim);
        let kd = &domain.kd[k];
        f.coeffs(i)
            .iter()
            .zip(kd)
            .map(|(z, &kk)| z * I * kk)
            .collect()
    }))
}

/// Divergence: vector of length `dim` to scalar, `r x dim` tensor to a
/// vector of length `r` with `(div G)_i = sum_k d_k G_ik`.
pub fn divergence(f: &Field) -> Result<Field> {
    let domain = f.domain().clone();
    let dim = domain.dim();
    let (rows, rank) = match f.rank() {
        Rank::Vector(l) if l == dim => (1, Rank::Scalar),
        Rank::Tensor(r, c) if c == dim => (r, Rank::Vector(r)),
        other => {
            return Err(Error::Rank(format!(
                "divergence needs a vector of length {dim} or an r x {dim} tensor, got {other:?}"
            )))
        }
    };
    let mut parities = Vec::with_capacity(rows);
    for i in 0..rows {
        let p = f.parity(i * dim).flip(0);
        for k in 1..dim {
            if domain.canonical(f.parity(i * dim + k).flip(k)) != domain.canonical(p) {
                return Err(Error::BasisMismatch(format!(
                    "row {i}: derivative terms of the divergence have different symmetry"
                )));
            }
        }
        parities.push(p);
    }
    let n = domain.spectral_len();
    Ok(f.map_spectral(rank, &parities, |i| {
        let mut out = vec![Complex64::default(); n];
        for k in 0..dim {
            let kd = &domain.kd[k];
            for ((o, z), &kk) in out.iter_mut().zip(f.coeffs(i * dim + k)).zip(kd) {
                *o += z * I * kk;
            }
        }
        out
    }))
}

/// Spectral Laplacian `-|k|^2`, any rank.
pub fn laplacian_apply(f: &Field) -> Field {
    let ksq = &f.domain().ksq;
    f.multiply(|i| -ksq[i])
}

/// Leray-Helmholtz projection onto divergence-free fields. The mean is
/// preserved. Input components must carry the free-slip pattern
/// `parity(u_i) = base ^ e_i`.
pub fn leray_project(u: &Field) -> Result<Field> {
    let domain = u.domain().clone();
    let dim = domain.dim();
    if u.rank() != Rank::Vector(dim) {
        return Err(Error::Rank(format!(
            "Leray projection needs a vector field of length {dim}, got {:?}",
            u.rank()
        )));
    }
    let base = u.parity(0).flip(0);
    for i in 1..dim {
        if domain.canonical(u.parity(i).flip(i)) != domain.canonical(base) {
            return Err(Error::BasisMismatch(
                "velocity components do not share a free-slip symmetry pattern".into(),
            ));
        }
    }
    let n = domain.spectral_len();
    // k.u per mode, computed once
    let mut kdotu = vec![Complex64::default(); n];
    for k in 0..dim {
        for ((acc, z), &kk) in kdotu.iter_mut().zip(u.coeffs(k)).zip(&domain.kd[k]) {
            *acc += z * kk;
        }
    }
    let kd2: Vec<f64> = (0..n)
        .map(|j| (0..dim).map(|k| domain.kd[k][j].powi(2)).sum())
        .collect();
    let parities = u.parities();
    Ok(u.map_spectral(u.rank(), &parities, |i| {
        u.coeffs(i)
            .iter()
            .enumerate()
            .map(|(j, z)| {
                if kd2[j] == 0.0 {
                    *z
                } else {
                    z - kdotu[j] * (domain.kd[i][j] / kd2[j])
                }
            })
            .collect()
    }))
}

/// Splits a field into its componentwise mean and the mean-free remainder.
pub fn mean_split(f: &Field) -> (Vec<f64>, Field) {
    let mean = f.mean();
    let domain = f.domain().clone();
    let values = (0..f.n_components())
        .map(|c| f.values(c).iter().map(|v| v - mean[c]).collect())
        .collect();
    let fluct = Field::from_values(&domain, f.rank(), values, &f.parities())
        .expect("same shape as input");
    (mean, fluct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DirectorBc, Domain};
    use crate::field::velocity_parities;
    use crate::testing::{random_smooth, random_velocity};
    use std::f64::consts::PI;

    #[test]
    fn gradient_of_sine_is_cosine() {
        let d = Domain::torus(2, 16).unwrap();
        let f = Field::from_fn(&d, Rank::Scalar, &[Parity::EVEN], |_, x| x[0].sin()).unwrap();
        let g = gradient(&f).unwrap();
        let expect = Field::from_fn(&d, Rank::Vector(2), &[Parity::EVEN; 2], |c, x| {
            if c == 0 {
                x[0].cos()
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(g.max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let d = Domain::new(2, &[1.0, 2.0], &[8, 8], DirectorBc::NeumannBox).unwrap();
        let f = Field::from_fn(&d, Rank::Vector(3), &[Parity::EVEN; 3], |c, _| c as f64 + 0.5)
            .unwrap();
        assert!(gradient(&f).unwrap().max_abs() < 1e-14);
        assert!(gradient(&gradient(&f).unwrap()).is_err());
    }

    #[test]
    fn neumann_gradient_shifts_cosine_to_sine() {
        let d = Domain::new(2, &[PI, PI], &[16, 16], DirectorBc::NeumannBox).unwrap();
        let f = Field::from_fn(&d, Rank::Scalar, &[Parity::EVEN], |_, x| {
            (2.0 * x[0]).cos() * x[1].cos()
        })
        .unwrap();
        let g = gradient(&f).unwrap();
        assert!(g.parity(0).is_odd(0) && !g.parity(0).is_odd(1));
        assert!((g.basis_amplitude(0, &[2, 1]).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_of_shear_flow_vanishes() {
        let d = Domain::torus(2, 16).unwrap();
        let u = Field::from_fn(&d, Rank::Vector(2), &velocity_parities(&d), |c, x| {
            if c == 0 {
                x[1].cos()
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(divergence(&u).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn div_grad_is_laplacian_on_band_limited_fields() {
        for bc in [
            DirectorBc::PeriodicMeanSplit,
            DirectorBc::NeumannBox,
            DirectorBc::DirichletBox,
        ] {
            let d = Domain::new(2, &[2.0, 3.0], &[16, 24], bc).unwrap();
            let s = random_smooth(&d, Rank::Scalar, &[d.director_parity()], 5, 11);
            let lhs = divergence(&gradient(&s).unwrap()).unwrap();
            let rhs = laplacian_apply(&s);
            assert!(lhs.max_abs_diff(&rhs) < 1e-10, "{bc}");
        }
    }

    #[test]
    fn leray_single_modes() {
        let d = Domain::torus(2, 8).unwrap();
        let along = Field::from_fn(&d, Rank::Vector(2), &velocity_parities(&d), |c, x| {
            if c == 0 {
                x[0].cos()
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(leray_project(&along).unwrap().max_abs() < 1e-15);
        let across = Field::from_fn(&d, Rank::Vector(2), &velocity_parities(&d), |c, x| {
            if c == 1 {
                x[0].cos()
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(leray_project(&across).unwrap().max_abs_diff(&across) < 1e-15);
    }

    #[test]
    fn leray_algebra_on_random_fields() {
        for bc in [DirectorBc::PeriodicMeanSplit, DirectorBc::NeumannBox] {
            let d = Domain::new(2, &[2.0 * PI, PI], &[16, 12], bc).unwrap();
            let u = random_velocity(&d, 8, 3);
            let pu = leray_project(&u).unwrap();
            assert!(divergence(&pu).unwrap().max_abs() < 1e-10);
            assert!(leray_project(&pu).unwrap().max_abs_diff(&pu) < 1e-12);
            let s = random_smooth(&d, Rank::Scalar, &[Parity::EVEN], 6, 4);
            let g = gradient(&s).unwrap();
            assert!(leray_project(&g).unwrap().max_abs() < 1e-10);
            // self-adjoint in the L2 pairing
            let v = random_velocity(&d, 6, 5);
            let lhs = pu.dot(&v);
            let rhs = u.dot(&leray_project(&v).unwrap());
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn leray_rejects_director_shaped_input() {
        let d = Domain::torus(2, 8).unwrap();
        let f = Field::zero_director(&d);
        assert!(matches!(leray_project(&f), Err(Error::Rank(_))));
    }

    #[test]
    fn mean_split_of_constant_and_sine() {
        let d = Domain::torus(2, 8).unwrap();
        let e = Field::from_fn(&d, Rank::Vector(3), &[Parity::EVEN; 3], |c, _| [0.0, 0.6, 0.8][c])
            .unwrap();
        let (m, f) = mean_split(&e);
        assert_eq!(m.len(), 3);
        assert!((m[1] - 0.6).abs() < 1e-15 && (m[2] - 0.8).abs() < 1e-15);
        assert!(f.max_abs() < 1e-15);
        let s = Field::from_fn(&d, Rank::Vector(3), &[Parity::EVEN; 3], |c, x| {
            if c == 0 {
                x[0].sin()
            } else {
                0.0
            }
        })
        .unwrap();
        let (m, f) = mean_split(&s);
        assert!(m.iter().all(|v| v.abs() < 1e-15));
        assert!(f.max_abs_diff(&s) < 1e-15);
    }
}
