//! The Picard iteration on mild (Duhamel) formulations.
//!
//! Neumann regime (periodic or Neumann box): the director is split as
//! `d = x + y + b_mean` with `y` mean-free and `x(t)` a 3-vector, and
//!
//! ```text
//! u = e^{-tA} a   + int e^{-(t-s)A} (-P div G) ds,  G = u (x) u + [grad y]^T grad y
//! y = e^{-tB} b_s + int e^{-(t-s)B} F_y ds,          F_y = -(u.grad) y + P_s |grad y|^2 d
//! x =               int F_x ds,                      F_x = P_c |grad y|^2 d
//! ```
//!
//! Dirichlet regime: `d = e + delta` with the same velocity equation and
//! `delta = e^{-tB}(b - e) + int e^{-(t-s)B} (-(u.grad) delta + |grad delta|^2 d) ds`.
//!
//! Every integral is evaluated per spectral mode by exponential time
//! differencing with a piecewise-linear source, so the weak singularity of the
//! continuous smoothing estimates never enters the quadrature.

mod etd;
pub mod iteration;
pub mod nonlinear;
pub mod state;

pub use iteration::{
    delta_quantities, k_quantities, picard_solve, InitialIterate, IterationTrace, MildProblem, PicardConfig, Source};
pub use nonlinear::{eval_fdelta, eval_fu, eval_fx, eval_fy, transport_mean};
pub use state::{State, Trajectory};
