//! Spectral realisation of the mild-solution Picard iteration for the
//! simplified Ericksen-Leslie system (incompressible Navier-Stokes coupled to
//! a director heat flow), with a calculator for the constants of the global
//! existence estimate and a set of numerical diagnostics.
//!
//! The layers, bottom up:
//!
//! * [`domain`], [`field`], [`ops`], [`semigroup`]: box and torus geometries
//!   with exactly diagonal Stokes and heat semigroups;
//! * [`norms`]: `L^p` norms, time-weighted suprema and decay fits;
//! * [`mild`]: nonlinearities, exponential-time-differencing Duhamel sweeps
//!   and the Picard driver;
//! * [`certifier`]: beta factors, the `C_i(T)` suprema and the smallness test;
//! * [`diagnostics`]: unit-norm drift, smoothing rates, scaling, maximum
//!   principle and square-root equivalence checks;
//! * [`io`]: configuration, initial data, report files and the CLI verbs.

pub mod certifier;
pub mod diagnostics;
pub mod domain;
mod error;
pub mod field;
pub mod io;
pub mod mild;
pub mod norms;
pub mod ops;
pub mod random;
pub mod semigroup;

#[cfg(test)]
pub(crate) mod testing;

pub use domain::{BasisTag, DirectorBc, Domain, Parity, Regime};
pub use error::{Error, Result};
pub use field::{Field, Rank};

/// Version string embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
