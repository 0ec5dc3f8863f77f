//! Checks of the qualitative properties on computed solutions and on the
//! semigroups: preservation of `|d| = 1`, smoothing rates, parabolic scaling,
//! the maximum principle and the square-root equivalence.

mod checks;
mod phi;
mod scaling;
mod smoothing;

pub use checks::{max_principle_check, sqrt_equivalence_check, MaxPrincipleReport, SqrtBounds};
pub use phi::{phi_diagnostics, PhiReport};
pub use scaling::{scaling_invariance_check, ScalingReport};
pub use smoothing::{smoothing_rate_suite, SmoothingFit, SmoothingOptions};

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| {
                    if k + 1 == n {
                        hi
                    } else {
                        (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}
