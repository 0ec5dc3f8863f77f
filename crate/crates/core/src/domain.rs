//! Rectangular computational domains and their spectral bases.
//!
//! Every axis is either periodic (Fourier basis on `N` equispaced nodes
//! `x_j = j L / N`) or a reflecting box axis on `[0, L]` with cell-centred
//! nodes `x_j = (j + 1/2) L / N`. A box axis is realised as the even or odd
//! extension onto a torus of period `2L` sampled at `2N` nodes, so the cosine
//! (Neumann) and sine (Dirichlet) transforms are exact discrete transforms of
//! the extended data and every operator below is a Fourier multiplier.
//!
//! The velocity always lives on the (possibly extended) torus. On box domains
//! it carries the free-slip symmetry: component `u_i` is odd across the walls
//! normal to axis `i` and even across the others. No-slip walls have no
//! diagonal Stokes semigroup and are not represented.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary regime of the director field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectorBc {
    /// Torus; the director is split into its mean and a mean-free part.
    #[serde(alias = "periodic")]
    PeriodicMeanSplit,
    /// Box with homogeneous Neumann walls (cosine basis), mean split.
    #[serde(alias = "neumann")]
    NeumannBox,
    /// Box with constant Dirichlet data `e` (sine basis for `d - e`).
    #[serde(alias = "dirichlet")]
    DirichletBox,
}

impl DirectorBc {
    pub fn is_box(self) -> bool {
        !matches!(self, DirectorBc::PeriodicMeanSplit)
    }

    pub fn regime(self) -> Regime {
        match self {
            DirectorBc::DirichletBox => Regime::Dirichlet,
            _ => Regime::Neumann,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DirectorBc::PeriodicMeanSplit => "periodic-mean-split",
            DirectorBc::NeumannBox => "neumann-box",
            DirectorBc::DirichletBox => "dirichlet-box",
        }
    }
}

impl fmt::Display for DirectorBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Formulation used by the iteration: mean split `(u, y, x)` or shifted
/// Dirichlet `(u, delta)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Neumann,
    Dirichlet,
}

/// Reflection symmetry of one field component: bit `a` set means the
/// component is odd across the walls normal to axis `a`. Bits on periodic
/// axes are always clear.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Parity(u8);

impl Parity {
    pub const EVEN: Parity = Parity(0);

    pub fn from_bits(bits: u8) -> Parity {
        Parity(bits)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn is_odd(self, axis: usize) -> bool {
        self.0 & (1 << axis) != 0
    }

    pub fn flip(self, axis: usize) -> Parity {
        Parity(self.0 ^ (1 << axis))
    }

    /// Parity of a pointwise product.
    pub fn combine(self, other: Parity) -> Parity {
        Parity(self.0 ^ other.0)
    }
}

/// Per-axis basis of one component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisTag {
    Fourier,
    Cosine,
    Sine,
}

pub(crate) struct Axis {
    pub reflect: bool,
    pub n: usize,
    pub m: usize,
    pub h: f64,
    /// Wavenumber of each computational index, Nyquist taken positive.
    pub k: Vec<f64>,
    /// Differentiation symbol: `k` with the Nyquist entry zeroed.
    pub kd: Vec<f64>,
    /// Signed mode index of each computational index.
    pub idx: Vec<i64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Axis {
    fn new(length: f64, n: usize, reflect: bool, planner: &mut FftPlanner<f64>) -> Axis {
        let m = if reflect { 2 * n } else { n };
        let period = if reflect { 2.0 * length } else { length };
        let idx: Vec<i64> = (0..m)
            .map(|j| if j <= m / 2 { j as i64 } else { j as i64 - m as i64 })
            .collect();
        let k: Vec<f64> = idx.iter().map(|&i| 2.0 * PI * i as f64 / period).collect();
        let kd = k
            .iter()
            .enumerate()
            .map(|(j, &kj)| if j == m / 2 { 0.0 } else { kj })
            .collect();
        Axis {
            reflect,
            n,
            m,
            h: length / n as f64,
            k,
            kd,
            idx,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    fn coordinate(&self, j: usize) -> f64 {
        if self.reflect {
            (j as f64 + 0.5) * self.h
        } else {
            j as f64 * self.h
        }
    }
}

/// Geometry, resolution and boundary regime, together with the precomputed
/// spectral tables every operator needs.
pub struct Domain {
    dim: usize,
    extent: Vec<f64>,
    resolution: Vec<usize>,
    director_bc: DirectorBc,
    heat_omega: f64,
    stokes_omega: f64,
    pub(crate) axes: Vec<Axis>,
    comp_shape: Vec<usize>,
    comp_len: usize,
    phys_len: usize,
    volume: f64,
    reflect_mask: u8,
    /// `|k|^2` per computational index.
    pub(crate) ksq: Vec<f64>,
    /// Differentiation symbol per axis and computational index.
    pub(crate) kd: Vec<Vec<f64>>,
    /// 2/3-rule mask per computational index.
    pub(crate) keep: Vec<bool>,
    /// Cell-centring phase `exp(-i k h / 2)` over reflecting axes.
    phase: Option<Vec<Complex64>>,
    /// For each computational index: physical source index and the mask of
    /// axes along which the sample is mirrored.
    ext_map: Vec<(usize, u8)>,
    /// Computational index of every physical node.
    restrict_map: Vec<usize>,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("dim", &self.dim)
            .field("extent", &self.extent)
            .field("resolution", &self.resolution)
            .field("director_bc", &self.director_bc)
            .field("omega", &self.omega())
            .finish()
    }
}

impl Domain {
    /// Builds a domain. Resolutions must be even and at least 4, extents
    /// strictly positive, and the dimension 2 or 3.
    pub fn new(
        dimension: usize,
        extent: &[f64],
        resolution: &[usize],
        director_bc: DirectorBc,
    ) -> Result<Arc<Domain>> {
        if !(2..=3).contains(&dimension) {
            return Err(Error::InvalidDomain(format!(
                "dimension must be 2 or 3, got {dimension}"
            )));
        }
        if extent.len() != dimension || resolution.len() != dimension {
            return Err(Error::InvalidDomain(format!(
                "expected {dimension} extents and resolutions, got {} and {}",
                extent.len(),
                resolution.len()
            )));
        }
        for (axis, &l) in extent.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidDomain(format!(
                    "extent along axis {axis} must be positive and finite, got {l}"
                )));
            }
        }
        for (axis, &n) in resolution.iter().enumerate() {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidDomain(format!(
                    "resolution along axis {axis} must be even and >= 4, got {n}"
                )));
            }
        }

        let reflect = director_bc.is_box();
        let mut planner = FftPlanner::new();
        let axes: Vec<Axis> = extent
            .iter()
            .zip(resolution)
            .map(|(&l, &n)| Axis::new(l, n, reflect, &mut planner))
            .collect();
        let comp_shape: Vec<usize> = axes.iter().map(|a| a.m).collect();
        let comp_len: usize = comp_shape.iter().product();
        let phys_len: usize = resolution.iter().product();
        let reflect_mask = if reflect { (1u8 << dimension) - 1 } else { 0 };

        let mut ksq = vec![0.0; comp_len];
        let mut kd = vec![vec![0.0; comp_len]; dimension];
        let mut keep = vec![true; comp_len];
        let mut ext_map = Vec::with_capacity(comp_len);
        let mut phase = reflect.then(|| vec![Complex64::new(1.0, 0.0); comp_len]);
        let mut multi = vec![0usize; dimension];
        for flat in 0..comp_len {
            unravel(flat, &comp_shape, &mut multi);
            let mut src = 0usize;
            let mut mirrored = 0u8;
            for (a, axis) in axes.iter().enumerate() {
                let j = multi[a];
                ksq[flat] += axis.k[j] * axis.k[j];
                kd[a][flat] = axis.kd[j];
                if 3 * axis.idx[j].unsigned_abs() as usize > axis.m {
                    keep[flat] = false;
                }
                let jp = if j < axis.n {
                    j
                } else {
                    mirrored |= 1 << a;
                    2 * axis.n - 1 - j
                };
                src = src * axis.n + jp;
                if let Some(ph) = phase.as_mut() {
                    ph[flat] *= Complex64::from_polar(1.0, -axis.k[j] * axis.h / 2.0);
                }
            }
            ext_map.push((src, mirrored));
        }
        let phys_shape: Vec<usize> = resolution.to_vec();
        let mut restrict_map = Vec::with_capacity(phys_len);
        for flat in 0..phys_len {
            unravel(flat, &phys_shape, &mut multi);
            restrict_map.push(ravel(&multi, &comp_shape));
        }

        let (heat_omega, stokes_omega) = smallest_eigenvalues(extent, director_bc);
        Ok(Arc::new(Domain {
            dim: dimension,
            extent: extent.to_vec(),
            resolution: resolution.to_vec(),
            director_bc,
            heat_omega,
            stokes_omega,
            axes,
            comp_shape,
            comp_len,
            phys_len,
            volume: extent.iter().product(),
            reflect_mask,
            ksq,
            kd,
            keep,
            phase,
            ext_map,
            restrict_map,
        }))
    }

    /// `2 pi`-periodic square/cube with the given resolution per axis.
    pub fn torus(dimension: usize, n: usize) -> Result<Arc<Domain>> {
        Domain::new(
            dimension,
            &vec![2.0 * PI; dimension],
            &vec![n; dimension],
            DirectorBc::PeriodicMeanSplit,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn director_bc(&self) -> DirectorBc {
        self.director_bc
    }

    pub fn regime(&self) -> Regime {
        self.director_bc.regime()
    }

    /// Smallest decay rate shared by the heat and Stokes semigroups on their
    /// exponentially stable subspaces.
    pub fn omega(&self) -> f64 {
        self.heat_omega.min(self.stokes_omega)
    }

    pub fn heat_omega(&self) -> f64 {
        self.heat_omega
    }

    pub fn stokes_omega(&self) -> f64 {
        self.stokes_omega
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume / self.phys_len as f64
    }

    /// Number of physical grid nodes.
    pub fn len(&self) -> usize {
        self.phys_len
    }

    pub fn is_empty(&self) -> bool {
        self.phys_len == 0
    }

    /// Number of spectral coefficients per component.
    pub fn spectral_len(&self) -> usize {
        self.comp_len
    }

    pub fn spectral_shape(&self) -> &[usize] {
        &self.comp_shape
    }

    /// Signed mode indices of a spectral index.
    pub fn mode_of(&self, flat: usize) -> Vec<i64> {
        let mut multi = vec![0; self.dim];
        unravel(flat, &self.comp_shape, &mut multi);
        multi
            .iter()
            .zip(&self.axes)
            .map(|(&j, axis)| axis.idx[j])
            .collect()
    }

    /// Spectral index of signed mode indices (wrapped modulo the grid).
    pub fn index_of(&self, mode: &[i64]) -> usize {
        let mut flat = 0;
        for (a, axis) in self.axes.iter().enumerate() {
            let m = axis.m as i64;
            flat = flat * axis.m + mode[a].rem_euclid(m) as usize;
        }
        flat
    }

    /// Wavenumber vector of a spectral index.
    pub fn wavevector(&self, flat: usize) -> Vec<f64> {
        let mut multi = vec![0; self.dim];
        unravel(flat, &self.comp_shape, &mut multi);
        multi
            .iter()
            .zip(&self.axes)
            .map(|(&j, axis)| axis.k[j])
            .collect()
    }

    pub fn laplacian_symbol(&self) -> &[f64] {
        &self.ksq
    }

    /// Node coordinates along one axis.
    pub fn coordinates(&self, axis: usize) -> Vec<f64> {
        let ax = &self.axes[axis];
        (0..ax.n).map(|j| ax.coordinate(j)).collect()
    }

    /// Samples `f` at every physical node (row-major, last axis fastest).
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let coords: Vec<Vec<f64>> = (0..self.dim).map(|a| self.coordinates(a)).collect();
        let mut multi = vec![0; self.dim];
        let mut point = vec![0.0; self.dim];
        (0..self.phys_len)
            .map(|flat| {
                unravel(flat, &self.resolution, &mut multi);
                for a in 0..self.dim {
                    point[a] = coords[a][multi[a]];
                }
                f(&point)
            })
            .collect()
    }

    /// Drops parity bits on periodic axes.
    pub fn canonical(&self, parity: Parity) -> Parity {
        Parity(parity.0 & self.reflect_mask)
    }

    pub fn basis_tags(&self, parity: Parity) -> Vec<BasisTag> {
        (0..self.dim)
            .map(|a| {
                if !self.axes[a].reflect {
                    BasisTag::Fourier
                } else if parity.is_odd(a) {
                    BasisTag::Sine
                } else {
                    BasisTag::Cosine
                }
            })
            .collect()
    }

    /// Parity encoded by per-axis basis tags; rejects tags that do not fit
    /// the axis kind.
    pub fn parity_of_tags(&self, tags: &[BasisTag]) -> Result<Parity> {
        if tags.len() != self.dim {
            return Err(Error::BasisMismatch(format!(
                "expected {} basis tags, got {}",
                self.dim,
                tags.len()
            )));
        }
        let mut p = Parity::EVEN;
        for (a, tag) in tags.iter().enumerate() {
            match (self.axes[a].reflect, tag) {
                (false, BasisTag::Fourier) | (true, BasisTag::Cosine) => {}
                (true, BasisTag::Sine) => p = p.flip(a),
                (reflect, tag) => {
                    return Err(Error::BasisMismatch(format!(
                        "{tag:?} basis on axis {a} of a {} domain ({} axis)",
                        self.director_bc,
                        if reflect { "box" } else { "periodic" }
                    )))
                }
            }
        }
        Ok(p)
    }

    /// Parity of every director component.
    pub fn director_parity(&self) -> Parity {
        match self.director_bc {
            DirectorBc::DirichletBox => Parity(self.reflect_mask),
            _ => Parity::EVEN,
        }
    }

    /// Free-slip parity of velocity component `i`.
    pub fn velocity_parity(&self, i: usize) -> Parity {
        self.canonical(Parity::EVEN.flip(i))
    }

    /// Extends physical samples onto the computational torus.
    pub(crate) fn extend(&self, values: &[f64], parity: Parity) -> Vec<Complex64> {
        let odd = parity.0 & self.reflect_mask;
        self.ext_map
            .iter()
            .map(|&(src, mirrored)| {
                let sign = if (mirrored & odd).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                Complex64::new(sign * values[src], 0.0)
            })
            .collect()
    }

    pub(crate) fn restrict(&self, full: &[Complex64]) -> Vec<f64> {
        self.restrict_map.iter().map(|&i| full[i].re).collect()
    }

    /// Physical samples to spectral coefficients `c_k` with
    /// `f(x) = sum_k c_k exp(i k.x)` in physical coordinates.
    pub(crate) fn forward(&self, values: &[f64], parity: Parity) -> Vec<Complex64> {
        let mut buf = self.extend(values, parity);
        for a in 0..self.dim {
            self.fft_axis(&mut buf, a, true);
        }
        let scale = 1.0 / self.comp_len as f64;
        match &self.phase {
            Some(ph) => buf.iter_mut().zip(ph).for_each(|(c, p)| *c *= p * scale),
            None => buf.iter_mut().for_each(|c| *c *= scale),
        }
        buf
    }

    pub(crate) fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        if let Some(ph) = &self.phase {
            buf.iter_mut().zip(ph).for_each(|(c, p)| *c *= p.conj());
        }
        for a in 0..self.dim {
            self.fft_axis(&mut buf, a, false);
        }
        self.restrict(&buf)
    }

    fn fft_axis(&self, buf: &mut [Complex64], axis: usize, forward: bool) {
        let ax = &self.axes[axis];
        let plan = if forward { &ax.fwd } else { &ax.inv };
        let len = ax.m;
        let stride: usize = self.comp_shape[axis + 1..].iter().product();
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        if stride == 1 {
            plan.process_with_scratch(buf, &mut scratch);
            return;
        }
        let block = len * stride;
        let mut lines = vec![Complex64::default(); block];
        for chunk in buf.chunks_mut(block) {
            for j in 0..len {
                for i in 0..stride {
                    lines[i * len + j] = chunk[j * stride + i];
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            for j in 0..len {
                for i in 0..stride {
                    chunk[j * stride + i] = lines[i * len + j];
                }
            }
        }
    }
}

fn unravel(mut flat: usize, shape: &[usize], out: &mut [usize]) {
    for a in (0..shape.len()).rev() {
        out[a] = flat % shape[a];
        flat /= shape[a];
    }
}

fn ravel(multi: &[usize], shape: &[usize]) -> usize {
    multi.iter().zip(shape).fold(0, |acc, (&j, &m)| acc * m + j)
}

/// Smallest nonzero eigenvalues of the director Laplacian and of the Stokes
/// operator, found by enumerating the lowest lattice modes.
fn smallest_eigenvalues(extent: &[f64], bc: DirectorBc) -> (f64, f64) {
    let dim = extent.len();
    let base: Vec<f64> = extent
        .iter()
        .map(|&l| if bc.is_box() { PI / l } else { 2.0 * PI / l })
        .collect();
    let mut heat = f64::INFINITY;
    let mut stokes = f64::INFINITY;
    let mut mode = vec![0usize; dim];
    for flat in 0..3usize.pow(dim as u32) {
        unravel(flat, &vec![3; dim], &mut mode);
        let nonzero = mode.iter().filter(|&&m| m != 0).count();
        if nonzero == 0 {
            continue;
        }
        let lambda: f64 = mode
            .iter()
            .zip(&base)
            .map(|(&m, &b)| (m as f64 * b).powi(2))
            .sum();
        let heat_ok = match bc {
            DirectorBc::DirichletBox => nonzero == dim,
            _ => true,
        };
        // a solenoidal free-slip mode needs two active directions; on the
        // torus any nonzero wavevector has a transverse polarisation
        let stokes_ok = if bc.is_box() { nonzero >= 2 } else { dim >= 2 };
        if heat_ok {
            heat = heat.min(lambda);
        }
        if stokes_ok {
            stokes = stokes.min(lambda);
        }
    }
    (heat, stokes)
}
