//! Pointwise nonlinearities. Products are formed on the physical grid,
//! transformed with the symmetry of the target quantity and truncated by the
//! 2/3 rule.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Rank};
use crate::ops::gradient;

fn check_shapes(u: &Field, grad_y: &Field) -> Result<()> {
    let dim = u.domain().dim();
    if u.rank() != Rank::Vector(dim) {
        return Err(Error::Rank(format!("velocity must be a {dim}-vector, got {:?}", u.rank())));
    }
    if grad_y.rank() != Rank::Tensor(3, dim) {
        return Err(Error::Rank(format!(
            "director gradient must be a 3 x {dim} tensor, got {:?}",
            grad_y.rank()
        )));
    }
    if !std::sync::Arc::ptr_eq(u.domain(), grad_y.domain()) {
        return Err(Error::InvalidArgument("fields live on different domains".into()));
    }
    Ok(())
}

/// `G = u (x) u + [grad y]^T grad y`, i.e.
/// `G_kl = u_k u_l + sum_i d_k y_i d_l y_i`. The velocity source of the
/// Duhamel step is `-P div G`.
pub fn eval_fu(u: &Field, grad_y: &Field) -> Result<Field> {
    check_shapes(u, grad_y)?;
    let domain = u.domain();
    let dim = domain.dim();
    let mut values = Vec::with_capacity(dim * dim);
    let mut parities = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        for l in 0..dim {
            let mut g: Vec<f64> = u.values(k).iter().zip(u.values(l)).map(|(a, b)| a * b).collect();
            for i in 0..3 {
                let (dk, dl) = (grad_y.values(i * dim + k), grad_y.values(i * dim + l));
                for ((g, a), b) in g.iter_mut().zip(dk).zip(dl) {
                    *g += a * b;
                }
            }
            values.push(g);
            parities.push(domain.velocity_parity(k).combine(domain.velocity_parity(l)));
        }
    }
    Ok(Field::from_values(domain, Rank::Tensor(dim, dim), values, &parities)?.dealias())
}

/// Coefficients of `-P div G` for a `dim x dim` tensor `G`.
pub(crate) fn minus_pdiv_coeffs(g: &Field) -> Vec<Vec<Complex64>> {
    let domain = g.domain();
    let dim = domain.dim();
    let n = domain.spectral_len();
    let i_unit = Complex64::new(0.0, 1.0);
    let mut div = vec![vec![Complex64::default(); n]; dim];
    for (r, row) in div.iter_mut().enumerate() {
        for k in 0..dim {
            for ((o, z), &kk) in row.iter_mut().zip(g.coeffs(r * dim + k)).zip(&domain.kd[k]) {
                *o += z * i_unit * kk;
            }
        }
    }
    for j in 0..n {
        let kd2: f64 = (0..dim).map(|k| domain.kd[k][j].powi(2)).sum();
        if kd2 == 0.0 {
            for row in div.iter_mut() {
                row[j] = Complex64::default();
            }
            continue;
        }
        let dot: Complex64 = (0..dim).map(|k| div[k][j] * domain.kd[k][j]).sum::<Complex64>() / kd2;
        for (k, row) in div.iter_mut().enumerate() {
            row[j] = -(row[j] - dot * domain.kd[k][j]);
        }
    }
    div
}

/// Director-side terms of one time slice.
pub(crate) struct DirectorTerms {
    /// `F_y` (mean-free) or `F_delta`.
    pub source: Field,
    /// `F_x`, zero in the Dirichlet regime.
    pub fx: [f64; 3],
    /// Mean of `(u.grad) y`; vanishes for solenoidal `u`.
    pub transport: [f64; 3],
}

/// `-(u.grad) y + |grad y|^2 (y + offset)`; with `split` the cubic term's
/// mean is returned as `fx` and removed from the source.
pub(crate) fn director_terms(
    u: &Field,
    grad_y: &Field,
    y: &Field,
    offset: [f64; 3],
    split: bool,
) -> Result<DirectorTerms> {
    check_shapes(u, grad_y)?;
    if y.rank() != Rank::Vector(3) {
        return Err(Error::Rank(format!("director part must be a 3-vector, got {:?}", y.rank())));
    }
    let domain = u.domain();
    let dim = domain.dim();
    let npts = domain.len();
    let mut grad_sq = vec![0.0; npts];
    for c in 0..3 * dim {
        for (s, v) in grad_sq.iter_mut().zip(grad_y.values(c)) {
            *s += v * v;
        }
    }
    let mut values = Vec::with_capacity(3);
    let mut fx = [0.0; 3];
    let mut transport = [0.0; 3];
    for i in 0..3 {
        let mut adv = vec![0.0; npts];
        for k in 0..dim {
            for ((a, uk), g) in adv.iter_mut().zip(u.values(k)).zip(grad_y.values(i * dim + k)) {
                *a += uk * g;
            }
        }
        let cubic: Vec<f64> = grad_sq
            .iter()
            .zip(y.values(i))
            .map(|(s, yi)| s * (yi + offset[i]))
            .collect();
        transport[i] = mean(&adv);
        let shift = if split {
            fx[i] = mean(&cubic);
            fx[i]
        } else {
            0.0
        };
        values.push(adv.iter().zip(&cubic).map(|(a, c)| c - shift - a).collect());
    }
    let parities = vec![domain.director_parity(); 3];
    let mut source = Field::from_values(domain, Rank::Vector(3), values, &parities)?;
    source = if split { mean_free_dealias(&source) } else { source.dealias() };
    Ok(DirectorTerms { source, fx, transport })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// 2/3 truncation that also zeroes the constant mode.
fn mean_free_dealias(f: &Field) -> Field {
    let keep = &f.domain().keep;
    f.multiply(|i| if i != 0 && keep[i] { 1.0 } else { 0.0 })
}

fn offset_of(x: [f64; 3], b_mean: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| x[i] + b_mean[i])
}

/// `F_y = -(u.grad) y + P_s |grad y|^2 (x + y + b_mean)`.
pub fn eval_fy(u: &Field, y: &Field, x: [f64; 3], b_mean: [f64; 3]) -> Result<Field> {
    Ok(director_terms(u, &gradient(y)?, y, offset_of(x, b_mean), true)?.source)
}

/// `F_x = P_c |grad y|^2 (x + y + b_mean)`.
pub fn eval_fx(y: &Field, x: [f64; 3], b_mean: [f64; 3]) -> Result<[f64; 3]> {
    let g = gradient(y)?;
    let domain = y.domain();
    let zero_u = Field::zero_velocity(domain);
    Ok(director_terms(&zero_u, &g, y, offset_of(x, b_mean), true)?.fx)
}

/// `F_delta = -(u.grad) delta + |grad delta|^2 (delta + e)`.
pub fn eval_fdelta(u: &Field, delta: &Field, e: [f64; 3]) -> Result<Field> {
    Ok(director_terms(u, &gradient(delta)?, delta, e, false)?.source)
}

/// Mean of `(u.grad) y` per component (the term `P_c (u.grad) y`).
pub fn transport_mean(u: &Field, grad_y: &Field) -> Result<[f64; 3]> {
    check_shapes(u, grad_y)?;
    let dim = u.domain().dim();
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        let s: f64 = (0..dim)
            .map(|k| u.values(k).iter().zip(grad_y.values(i * dim + k)).map(|(a, b)| a * b).sum::<f64>())
            .sum();
        *o = s / u.domain().len() as f64;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DirectorBc, Domain, Parity};
    use crate::field::velocity_parities;
    use crate::ops::{divergence, leray_project};
    use crate::testing::{random_smooth, random_velocity};
    use std::f64::consts::PI;

    fn solenoidal(d: &std::sync::Arc<Domain>, seed: u64) -> Field {
        leray_project(&random_velocity(d, 5, seed)).unwrap()
    }

    fn director_part(d: &std::sync::Arc<Domain>, seed: u64) -> Field {
        let y = random_smooth(d, Rank::Vector(3), &[d.director_parity()], 5, seed);
        crate::ops::mean_split(&y).1
    }

    #[test]
    fn zero_inputs_give_zero() {
        let d = Domain::torus(2, 16).unwrap();
        let u = Field::zero_velocity(&d);
        let y = Field::zero_director(&d);
        let g = eval_fu(&u, &gradient(&y).unwrap()).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        assert_eq!(eval_fy(&u, &y, [0.0; 3], [0.0, 0.0, 1.0]).unwrap().max_abs(), 0.0);
        assert_eq!(eval_fx(&y, [0.0; 3], [0.0, 0.0, 1.0]).unwrap(), [0.0; 3]);
        assert_eq!(eval_fdelta(&u, &y, [1.0, 0.0, 0.0]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn constant_director_leaves_only_u_tensor_u() {
        let d = Domain::torus(2, 16).unwrap();
        let u = Field::from_fn(&d, Rank::Vector(2), &velocity_parities(&d), |c, x| {
            if c == 0 {
                x[1].sin()
            } else {
                0.0
            }
        })
        .unwrap();
        let y = Field::zero_director(&d);
        let g = eval_fu(&u, &gradient(&y).unwrap()).unwrap();
        let expect = Field::from_fn(&d, Rank::Tensor(2, 2), &[Parity::EVEN; 4], |c, x| {
            if c == 0 {
                x[1].sin().powi(2)
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(g.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn pdiv_of_g_matches_direct_form() {
        for bc in [DirectorBc::PeriodicMeanSplit, DirectorBc::NeumannBox] {
            let d = Domain::new(2, &[2.0 * PI, PI], &[32, 32], bc).unwrap();
            let u = solenoidal(&d, 1).scale(0.7);
            let y = director_part(&d, 2).scale(0.4);
            let gy = gradient(&y).unwrap();
            let g = eval_fu(&u, &gy).unwrap();
            let lhs = minus_pdiv_coeffs(&g);
            // (u.grad) u + div([grad y]^T grad y), built from products of
            // derivatives; bands of 5 keep every product below the 2/3 cut
            let dim = 2;
            let gu = gradient(&u).unwrap();
            let mut vals = Vec::new();
            for l in 0..dim {
                let mut v = vec![0.0; d.len()];
                for k in 0..dim {
                    for (o, (a, b)) in v.iter_mut().zip(u.values(k).iter().zip(gu.values(l * dim + k))) {
                        *o += a * b;
                    }
                }
                vals.push(v);
            }
            let mut tensor = Vec::new();
            for k in 0..dim {
                for l in 0..dim {
                    let mut v = vec![0.0; d.len()];
                    for i in 0..3 {
                        for (o, (a, b)) in v
                            .iter_mut()
                            .zip(gy.values(i * dim + k).iter().zip(gy.values(i * dim + l)))
                        {
                            *o += a * b;
                        }
                    }
                    tensor.push(v);
                }
            }
            let pars: Vec<Parity> = (0..dim)
                .flat_map(|k| (0..dim).map(move |l| (k, l)))
                .map(|(k, l)| d.velocity_parity(k).combine(d.velocity_parity(l)))
                .collect();
            let t = Field::from_values(&d, Rank::Tensor(dim, dim), tensor, &pars).unwrap();
            // div acts on the first index here; the tensor is symmetric
            let adv = Field::from_values(&d, Rank::Vector(dim), vals, &velocity_parities(&d)).unwrap();
            let total = adv.add(&divergence(&t).unwrap()).unwrap();
            let rhs = leray_project(&total).unwrap().scale(-1.0);
            let lhs = Field::from_coeffs(&d, Rank::Vector(dim), lhs, &velocity_parities(&d)).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-8 * (1.0 + rhs.max_abs()), "{bc}");
        }
    }

    #[test]
    fn fx_against_quadrature() {
        let d = Domain::new(2, &[PI, PI], &[16, 16], DirectorBc::NeumannBox).unwrap();
        let y = Field::from_fn(&d, Rank::Vector(3), &[Parity::EVEN; 3], |c, x| {
            if c == 0 {
                0.3 * x[0].cos()
            } else {
                0.0
            }
        })
        .unwrap();
        let b = [0.0, 0.6, 0.8];
        let fx = eval_fx(&y, [0.0; 3], b).unwrap();
        // oracle: |grad y|^2 = 0.09 sin^2 x, d = (0.3 cos x, 0.6, 0.8)
        let xs = d.coordinates(0);
        let n = xs.len() as f64;
        let mut expect = [0.0; 3];
        for &x in &xs {
            let s = 0.09 * x.sin().powi(2);
            expect[0] += s * 0.3 * x.cos() / n;
            expect[1] += s * 0.6 / n;
            expect[2] += s * 0.8 / n;
        }
        for i in 0..3 {
            assert!((fx[i] - expect[i]).abs() < 1e-10);
        }
        assert!((fx[1] - 0.6 * 0.045).abs() < 1e-12);
    }

    #[test]
    fn fy_is_mean_free_and_transport_vanishes() {
        for bc in [DirectorBc::PeriodicMeanSplit, DirectorBc::NeumannBox] {
            let d = Domain::new(2, &[2.0, 3.0], &[16, 16], bc).unwrap();
            let u = solenoidal(&d, 5);
            let y = director_part(&d, 6);
            let f = eval_fy(&u, &y, [0.01, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
            assert!(f.mean().iter().all(|m| m.abs() < 1e-12));
            let tm = transport_mean(&u, &gradient(&y).unwrap()).unwrap();
            assert!(tm.iter().all(|m| m.abs() < 1e-10), "{tm:?}");
        }
    }

    #[test]
    fn fdelta_matches_pointwise_oracle() {
        let d = Domain::new(2, &[PI, PI], &[16, 16], DirectorBc::DirichletBox).unwrap();
        let u = Field::zero_velocity(&d);
        // constant delta has no gradient
        let c = Field::from_fn(&d, Rank::Vector(3), &[d.director_parity(); 3], |_, _| 0.0).unwrap();
        assert_eq!(eval_fdelta(&u, &c, [0.0, 0.0, 1.0]).unwrap().max_abs(), 0.0);
        // band-limited inputs: dealiasing leaves the product intact
        let delta = Field::from_fn(&d, Rank::Vector(3), &[d.director_parity(); 3], |c, x| {
            if c == 2 {
                0.2 * x[0].sin() * x[1].sin()
            } else {
                0.0
            }
        })
        .unwrap();
        let u = solenoidal(&d, 3).scale(0.0);
        let f = eval_fdelta(&u, &delta, [0.0, 0.0, 1.0]).unwrap();
        let oracle = d.sample(|x| {
            let (s0, c0, s1, c1) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
            let g2 = 0.04 * (c0 * c0 * s1 * s1 + s0 * s0 * c1 * c1);
            g2 * (0.2 * s0 * s1 + 1.0)
        });
        // the cubic term exceeds the 2/3 band, compare its resolved part
        let o = Field::from_values(&d, Rank::Scalar, vec![oracle], &[d.director_parity()])
            .unwrap()
            .dealias();
        let err = f
            .values(2)
            .iter()
            .zip(o.values(0))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn shape_errors() {
        let d = Domain::torus(2, 8).unwrap();
        let u = Field::zero_velocity(&d);
        let y = Field::zero_director(&d);
        assert!(eval_fu(&u, &y).is_err());
        assert!(eval_fu(&y, &gradient(&y).unwrap()).is_err());
    }
}
