//! Scalar, vector and tensor fields sampled on a [`Domain`].
//!
//! A field stores, per component, the physical samples and the spectral
//! coefficients on the computational torus. Both are kept consistent: every
//! constructor runs the forward or inverse transform. Fields are immutable
//! values; operations return new fields.

use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::{BasisTag, Domain, Parity};
use crate::error::{Error, Result};

/// Tensor rank and shape of a field. `Vector(n)` has `n` components,
/// `Tensor(r, c)` is stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rank {
    Scalar,
    Vector(usize),
    Tensor(usize, usize),
}

impl Rank {
    pub fn components(self) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector(n) => n,
            Rank::Tensor(r, c) => r * c,
        }
    }
}

#[derive(Clone, Debug)]
struct Component {
    parity: Parity,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct Field {
    domain: Arc<Domain>,
    rank: Rank,
    comps: Vec<Component>,
}

/// Free-slip velocity parities, one per spatial direction.
pub fn velocity_parities(domain: &Domain) -> Vec<Parity> {
    (0..domain.dim()).map(|i| domain.velocity_parity(i)).collect()
}

/// Director parities: three components, all with the regime's symmetry.
pub fn director_parities(domain: &Domain) -> Vec<Parity> {
    vec![domain.director_parity(); 3]
}

impl Field {
    /// Forward transform of physical samples.
    pub fn from_values(
        domain: &Arc<Domain>,
        rank: Rank,
        values: Vec<Vec<f64>>,
        parities: &[Parity],
    ) -> Result<Field> {
        check_shape(domain, rank, values.len(), parities.len())?;
        let comps = values
            .into_iter()
            .zip(parities)
            .map(|(v, &p)| {
                if v.len() != domain.len() {
                    return Err(Error::InvalidArgument(format!(
                        "component has {} samples, domain has {}",
                        v.len(),
                        domain.len()
                    )));
                }
                let p = domain.canonical(p);
                let coeffs = domain.forward(&v, p);
                Ok(Component { parity: p, values: v, coeffs })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Field { domain: domain.clone(), rank, comps })
    }

    /// Forward transform with explicit per-axis basis tags for each
    /// component. Tags that do not fit the domain's axes are rejected.
    pub fn from_tagged_values(
        domain: &Arc<Domain>,
        rank: Rank,
        values: Vec<Vec<f64>>,
        tags: &[Vec<BasisTag>],
    ) -> Result<Field> {
        let parities = tags
            .iter()
            .map(|t| domain.parity_of_tags(t))
            .collect::<Result<Vec<_>>>()?;
        Field::from_values(domain, rank, values, &parities)
    }

    /// Inverse transform of spectral coefficients.
    pub fn from_coeffs(
        domain: &Arc<Domain>,
        rank: Rank,
        coeffs: Vec<Vec<Complex64>>,
        parities: &[Parity],
    ) -> Result<Field> {
        check_shape(domain, rank, coeffs.len(), parities.len())?;
        let comps = coeffs
            .into_iter()
            .zip(parities)
            .map(|(c, &p)| {
                if c.len() != domain.spectral_len() {
                    return Err(Error::InvalidArgument(format!(
                        "component has {} coefficients, domain has {}",
                        c.len(),
                        domain.spectral_len()
                    )));
                }
                let values = domain.inverse(&c);
                Ok(Component { parity: domain.canonical(p), values, coeffs: c })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Field { domain: domain.clone(), rank, comps })
    }

    /// Samples one closure per component.
    pub fn from_fn(
        domain: &Arc<Domain>,
        rank: Rank,
        parities: &[Parity],
        f: impl Fn(usize, &[f64]) -> f64,
    ) -> Result<Field> {
        let values = (0..rank.components())
            .map(|c| domain.sample(|x| f(c, x)))
            .collect();
        Field::from_values(domain, rank, values, parities)
    }

    pub fn zeros(domain: &Arc<Domain>, rank: Rank, parities: &[Parity]) -> Field {
        let n = rank.components();
        assert_eq!(n, parities.len(), "one parity per component");
        let comps = parities
            .iter()
            .map(|&p| Component {
                parity: domain.canonical(p),
                values: vec![0.0; domain.len()],
                coeffs: vec![Complex64::default(); domain.spectral_len()],
            })
            .collect();
        Field { domain: domain.clone(), rank, comps }
    }

    pub fn zero_velocity(domain: &Arc<Domain>) -> Field {
        Field::zeros(domain, Rank::Vector(domain.dim()), &velocity_parities(domain))
    }

    pub fn zero_director(domain: &Arc<Domain>) -> Field {
        Field::zeros(domain, Rank::Vector(3), &director_parities(domain))
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn n_components(&self) -> usize {
        self.comps.len()
    }

    pub fn values(&self, comp: usize) -> &[f64] {
        &self.comps[comp].values
    }

    pub fn coeffs(&self, comp: usize) -> &[Complex64] {
        &self.comps[comp].coeffs
    }

    pub fn parity(&self, comp: usize) -> Parity {
        self.comps[comp].parity
    }

    pub fn parities(&self) -> Vec<Parity> {
        self.comps.iter().map(|c| c.parity).collect()
    }

    pub fn basis_tags(&self, comp: usize) -> Vec<BasisTag> {
        self.domain.basis_tags(self.comps[comp].parity)
    }

    /// Builds a new field from per-component coefficients computed by `f`.
    pub(crate) fn map_spectral(
        &self,
        rank: Rank,
        parities: &[Parity],
        mut f: impl FnMut(usize) -> Vec<Complex64>,
    ) -> Field {
        let coeffs = (0..rank.components()).map(&mut f).collect();
        Field::from_coeffs(&self.domain, rank, coeffs, parities)
            .expect("spectral map produced consistent shapes")
    }

    /// Applies a real multiplier `m(flat)` to every component.
    pub(crate) fn multiply(&self, m: impl Fn(usize) -> f64) -> Field {
        let parities = self.parities();
        self.map_spectral(self.rank, &parities, |c| {
            self.coeffs(c)
                .iter()
                .enumerate()
                .map(|(i, z)| z * m(i))
                .collect()
        })
    }

    /// 2/3-rule truncation.
    pub fn dealias(&self) -> Field {
        let keep = &self.domain.keep;
        self.multiply(|i| if keep[i] { 1.0 } else { 0.0 })
    }

    fn zip_values(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.rank != other.rank || !Arc::ptr_eq(&self.domain, &other.domain) {
            return Err(Error::Rank(format!(
                "cannot combine {:?} with {:?} (or different domains)",
                self.rank, other.rank
            )));
        }
        if self.parities() != other.parities() {
            return Err(Error::BasisMismatch(
                "cannot combine fields with different bases".into(),
            ));
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| Component {
                parity: a.parity,
                values: a.values.iter().zip(&b.values).map(|(&x, &y)| f(x, y)).collect(),
                coeffs: a
                    .coeffs
                    .iter()
                    .zip(&b.coeffs)
                    .map(|(&x, &y)| Complex64::new(f(x.re, y.re), f(x.im, y.im)))
                    .collect(),
            })
            .collect();
        Ok(Field { domain: self.domain.clone(), rank: self.rank, comps })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_values(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_values(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Field {
        let comps = self
            .comps
            .iter()
            .map(|c| Component {
                parity: c.parity,
                values: c.values.iter().map(|v| v * s).collect(),
                coeffs: c.coeffs.iter().map(|z| z * s).collect(),
            })
            .collect();
        Field { domain: self.domain.clone(), rank: self.rank, comps }
    }

    /// Quadrature mean of each component over the physical domain.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.domain.len() as f64;
        self.comps
            .iter()
            .map(|c| c.values.iter().sum::<f64>() / n)
            .collect()
    }

    /// Euclidean (Frobenius) magnitude at every node.
    pub fn magnitude(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.domain.len()];
        for c in &self.comps {
            for (a, v) in acc.iter_mut().zip(&c.values) {
                *a += v * v;
            }
        }
        acc.iter_mut().for_each(|a| *a = a.sqrt());
        acc
    }

    /// Largest absolute sample over all components.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.values.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.values.iter().zip(&b.values))
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    /// L2 norm from the coefficients (Parseval).
    pub fn l2_spectral(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.coeffs.iter())
            .map(|z| z.norm_sqr())
            .sum();
        (self.domain.volume() * s).sqrt()
    }

    /// L2 inner product by grid quadrature.
    pub fn dot(&self, other: &Field) -> f64 {
        let dv = self.domain.cell_volume();
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum::<f64>())
            .sum::<f64>()
            * dv
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| {
            c.values.iter().all(|v| v.is_finite()) && c.coeffs.iter().all(|z| z.is_finite())
        })
    }

    /// Real amplitude of the cosine/sine product mode `mode` (non-negative
    /// indices) of component `comp` on a box domain.
    pub fn basis_amplitude(&self, comp: usize, mode: &[usize]) -> Result<f64> {
        let domain = &self.domain;
        if !domain.director_bc().is_box() || mode.len() != domain.dim() {
            return Err(Error::BasisMismatch(
                "basis amplitudes are defined for box domains only".into(),
            ));
        }
        let parity = self.comps[comp].parity;
        let coeffs = &self.comps[comp].coeffs;
        let dim = domain.dim();
        let mut total = Complex64::default();
        for signs in 0..(1u32 << dim) {
            let mut weight = Complex64::new(1.0, 0.0);
            let mut signed = vec![0i64; dim];
            let mut skip = false;
            for (a, &m) in mode.iter().enumerate() {
                let negative = signs & (1 << a) != 0;
                let nyquist = m == domain.resolution()[a];
                if negative && (m == 0 || nyquist) {
                    skip = true;
                    break;
                }
                let s = if negative { -1.0 } else { 1.0 };
                signed[a] = if negative { -(m as i64) } else { m as i64 };
                if parity.is_odd(a) {
                    weight *= Complex64::new(0.0, s);
                }
            }
            if !skip {
                total += coeffs[domain.index_of(&signed)] * weight;
            }
        }
        Ok(total.re)
    }
}

fn check_shape(domain: &Domain, rank: Rank, n_data: usize, n_parities: usize) -> Result<()> {
    let n = rank.components();
    if n_data != n || n_parities != n {
        return Err(Error::Rank(format!(
            "{rank:?} needs {n} components, got {n_data} data and {n_parities} parities"
        )));
    }
    let _ = domain;
    Ok(())
}
