//! TOML run configuration.
//!
//! ```toml
//! [domain]
//! dimension = 2
//! resolution = 64                 # or one entry per axis
//! extent = 6.283185307179586      # default 2 pi, scalar or per axis
//! director_bc = "periodic"        # "neumann", "dirichlet"
//!
//! [exponents]
//! p = 3.0
//! q = 3.5
//!
//! [time]
//! horizon = 0.1
//! nodes = 64                      # time steps; the grid has nodes + 1 points
//! ```
//!
//! Optional sections `[iteration]`, `[data]`, `[certify]`, `[output]` and
//! `[diagnostics]` are documented on their structs. Unknown keys are errors.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{DirectorBc, Domain};
use crate::error::{Error, Result};
use crate::mild::{InitialIterate, PicardConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    One(T),
    Each(Vec<T>),
}

impl<T: Copy> PerAxis<T> {
    fn expand(&self, dim: usize, what: &str) -> Result<Vec<T>> {
        match self {
            PerAxis::One(v) => Ok(vec![*v; dim]),
            PerAxis::Each(v) if v.len() == dim => Ok(v.clone()),
            PerAxis::Each(v) => Err(Error::Config(format!(
                "domain.{what} has {} entries, dimension is {dim}",
                v.len()
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub dimension: usize,
    pub resolution: PerAxis<usize>,
    #[serde(default = "default_extent")]
    pub extent: PerAxis<f64>,
    #[serde(default = "default_bc")]
    pub director_bc: DirectorBc,
}

fn default_extent() -> PerAxis<f64> {
    PerAxis::One(2.0 * std::f64::consts::PI)
}

fn default_bc() -> DirectorBc {
    DirectorBc::PeriodicMeanSplit
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
}

impl Default for Exponents {
    fn default() -> Self {
        Exponents { p: 3.0, q: 3.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub horizon: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_nodes() -> usize {
    64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Seed {
    Linear,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IterationConfig {
    /// Relative Picard tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub initial: Seed,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig { tol: 1e-10, max_iter: 40, initial: Seed::Linear }
    }
}

/// Random initial data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Target `||a||_p`.
    pub amplitude_a: f64,
    /// Largest size of the director perturbation before normalisation.
    pub amplitude_b: f64,
    /// Highest wave index per axis of both random fields.
    pub band: usize,
    /// Constant director; the Dirichlet boundary value. Normalised on load.
    pub e: [f64; 3],
    pub seed: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig { amplitude_a: 1e-3, amplitude_b: 1e-3, band: 4, e: [0.0, 0.0, 1.0], seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifyConfig {
    /// The unquantified constant of the smallness conditions.
    pub generic_c: f64,
    /// Horizon of the certificate; `inf` allowed. Defaults to `time.horizon`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Points of the k0 grid.
    pub nodes: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig { generic_c: 1.0, horizon: None, nodes: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Grid of the smoothing suite (all axes).
    pub smoothing_resolution: usize,
    pub smoothing_pairs: Vec<[f64; 2]>,
    /// Random fields per batch check.
    pub batch: usize,
    pub max_principle_times: Vec<f64>,
    pub sqrt_p: Vec<f64>,
    pub alpha: f64,
    /// Also solve on the doubled grid for the phi suite.
    pub refine: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            smoothing_resolution: 128,
            smoothing_pairs: vec![[2.0, 2.0], [2.0, f64::INFINITY], [3.0, 3.5]],
            batch: 100,
            max_principle_times: vec![0.1, 0.25, 0.5, 1.0, 2.0],
            sqrt_p: vec![2.0, 3.0],
            alpha: 2.0,
            refine: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    #[serde(default)]
    pub exponents: Exponents,
    pub time: TimeConfig,
    #[serde(default)]
    pub iteration: IterationConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
}

fn fail(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parses and validates; defaults are filled and `data.e` is normalised.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    let n = cfg.data.e.iter().map(|v| v * v).sum::<f64>().sqrt();
    // dividing an already unit vector can move it by an ulp, which would make
    // the canonical text drift on every reload
    if (n - 1.0).abs() > 4.0 * f64::EPSILON {
        cfg.data.e = cfg.data.e.map(|v| v / n);
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        if !(2..=3).contains(&d.dimension) {
            return Err(fail(format!("domain.dimension must be 2 or 3, got {}", d.dimension)));
        }
        let res = d.resolution.expand(d.dimension, "resolution")?;
        let ext = d.extent.expand(d.dimension, "extent")?;
        if let Some(n) = res.iter().find(|&&n| n < 8) {
            return Err(fail(format!("need domain.resolution >= 8, got {n}")));
        }
        if let Some(l) = ext.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(fail(format!("need domain.extent > 0, got {l}")));
        }
        let Exponents { p, q } = self.exponents;
        if !(p > 1.0 && p.is_finite()) {
            return Err(fail(format!("need exponents.p > 1, got {p}")));
        }
        if !(q >= p) {
            return Err(fail(format!("need p <= q, got p = {p}, q = {q}")));
        }
        if !(self.time.horizon > 0.0 && self.time.horizon.is_finite()) {
            return Err(fail(format!("need time.horizon T > 0, got {}", self.time.horizon)));
        }
        if self.time.nodes < 8 {
            return Err(fail(format!("need time.nodes N >= 8, got {}", self.time.nodes)));
        }
        let it = &self.iteration;
        if !(it.tol >= 0.0) || it.max_iter == 0 {
            return Err(fail("need iteration.tol >= 0 and iteration.max_iter >= 1"));
        }
        let data = &self.data;
        if !(data.amplitude_a >= 0.0 && data.amplitude_a.is_finite()) {
            return Err(fail(format!("need data.amplitude_a >= 0, got {}", data.amplitude_a)));
        }
        if !(data.amplitude_b >= 0.0 && data.amplitude_b < 1.0) {
            return Err(fail(format!("need 0 <= data.amplitude_b < 1, got {}", data.amplitude_b)));
        }
        let min_res = res.iter().copied().min().unwrap_or(0);
        if 2 * data.band >= min_res {
            return Err(fail(format!(
                "need 2 * data.band < resolution, got band {} on {min_res} nodes",
                data.band
            )));
        }
        if !(data.e.iter().map(|v| v * v).sum::<f64>() > 0.0) || data.e.iter().any(|v| !v.is_finite()) {
            return Err(fail("data.e must be a finite non-zero vector"));
        }
        let c = &self.certify;
        if !(c.generic_c > 0.0 && c.generic_c.is_finite()) {
            return Err(fail(format!("need certify.generic_c > 0, got {}", c.generic_c)));
        }
        if let Some(h) = c.horizon {
            if !(h > 0.0) {
                return Err(fail(format!("need certify.horizon > 0, got {h}")));
            }
        }
        if c.nodes < 2 {
            return Err(fail("need certify.nodes >= 2"));
        }
        let g = &self.diagnostics;
        if g.smoothing_resolution < 8 || g.batch == 0 {
            return Err(fail("need diagnostics.smoothing_resolution >= 8 and diagnostics.batch >= 1"));
        }
        if let Some([p, q]) = g.smoothing_pairs.iter().find(|[p, q]| !(*p > 1.0 && q >= p)) {
            return Err(fail(format!("smoothing pair needs 1 < p <= q, got ({p}, {q})")));
        }
        if !(g.alpha > 0.0 && g.alpha.is_finite()) {
            return Err(fail(format!("need diagnostics.alpha > 0, got {}", g.alpha)));
        }
        Ok(())
    }

    /// Soft issues: exponents outside the window of the existence theory.
    pub fn warnings(&self) -> Vec<String> {
        let Exponents { p, q } = self.exponents;
        let mut w = Vec::new();
        if !(3.0..=3.5).contains(&p) {
            w.push(format!("p = {p} lies outside [3, 3.5]"));
        }
        if q > 3.5 {
            w.push(format!("q = {q} exceeds 3.5"));
        }
        if p == q {
            w.push("p = q: the weights carry no power of t".into());
        }
        w
    }

    pub fn build_domain(&self) -> Result<Arc<Domain>> {
        let d = &self.domain;
        let res = d.resolution.expand(d.dimension, "resolution")?;
        let ext = d.extent.expand(d.dimension, "extent")?;
        Domain::new(d.dimension, &ext, &res, d.director_bc)
    }

    pub fn picard(&self) -> PicardConfig {
        PicardConfig {
            p: self.exponents.p,
            q: self.exponents.q,
            tol: self.iteration.tol,
            max_iter: self.iteration.max_iter,
            initial: match self.iteration.initial {
                Seed::Linear => InitialIterate::Linear,
                Seed::Zero => InitialIterate::Zero,
            },
        }
    }

    pub fn certify_horizon(&self) -> f64 {
        self.certify.horizon.unwrap_or(self.time.horizon)
    }

    /// Same run on a grid refined by `factor` in space and time.
    pub fn refined(&self, factor: usize) -> Result<RunConfig> {
        let mut c = self.clone();
        let res = self.domain.resolution.expand(self.domain.dimension, "resolution")?;
        c.domain.resolution = PerAxis::Each(res.iter().map(|n| n * factor).collect());
        c.time.nodes *= factor;
        Ok(c)
    }

    /// Canonical TOML text; the input of the config hash.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[domain]\ndimension = 2\nresolution = 16\n[time]\nhorizon = 0.1\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.time.nodes, 64);
        assert_eq!(c.exponents, Exponents { p: 3.0, q: 3.5 });
        assert_eq!(c.domain.director_bc, DirectorBc::PeriodicMeanSplit);
        assert!(c.warnings().is_empty());
        let d = c.build_domain().unwrap();
        assert_eq!(d.resolution(), &[16, 16]);
        assert_eq!(c.certify_horizon(), 0.1);
    }

    #[test]
    fn round_trip_through_canonical_text() {
        let text = format!("{MINIMAL}[certify]\nhorizon = inf\n[data]\ne = [0.0, 3.0, 4.0]\n");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.data.e, [0.0, 0.6, 0.8]);
        assert!(c.certify_horizon().is_infinite());
        let again = parse_config(&c.canonical()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn low_p_warns() {
        let c = parse_config(&format!("{MINIMAL}[exponents]\np = 2.5\nq = 3.0\n")).unwrap();
        assert_eq!(c.warnings().len(), 1);
    }

    #[test]
    fn violations_name_the_inequality() {
        let msg = parse_config(&format!("{MINIMAL}[exponents]\np = 3.5\nq = 3.0\n")).unwrap_err().to_string();
        assert!(msg.contains("p <= q"), "{msg}");
        let msg = parse_config(&MINIMAL.replace("horizon = 0.1", "horizon = 0.1\nnodes = 4")).unwrap_err().to_string();
        assert!(msg.contains("N >= 8"), "{msg}");
        let msg = parse_config(&MINIMAL.replace("0.1", "-1.0")).unwrap_err().to_string();
        assert!(msg.contains("T > 0"), "{msg}");
    }

    #[test]
    fn unknown_and_missing_keys_are_rejected() {
        assert!(matches!(parse_config(&format!("{MINIMAL}bogus = 1\n")), Err(Error::Parse(_))));
        assert!(matches!(parse_config(&format!("{MINIMAL}[data]\nsigma = 1\n")), Err(Error::Parse(_))));
        assert!(parse_config("[domain]\ndimension = 2\n[time]\nhorizon = 1.0\n").is_err());
        assert!(parse_config("[domain]\ndimension = 2\nresolution = 16\n").is_err());
        assert!(parse_config(&MINIMAL.replace("resolution = 16", "resolution = [16, 16, 16]")).is_err());
    }
}
