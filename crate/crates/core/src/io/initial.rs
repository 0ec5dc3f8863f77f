use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use crate::domain::{Domain, Parity};
use crate::error::Result;
use crate::field::{director_parities, velocity_parities, Field, Rank};
use crate::norms::lp_norm;
use crate::ops::leray_project;
use crate::random::trig_field;

/// Seeded data `(a, b)` on the configured grid.
///
/// `a` is the projected, mean-free part of a random trigonometric polynomial
/// scaled to `||a||_p = amplitude_a`. `b` normalises `e + eta` pointwise,
/// where `eta` is a random polynomial with `max |eta| = amplitude_b` and the
/// director symmetry (so `b = e` on Dirichlet walls). The polynomials are
/// drawn independently of the resolution: refining the grid samples the same
/// functions. Zero amplitudes give exactly `a = 0` and `b = e`.
pub fn gen_initial_data(config: &RunConfig, seed: u64) -> Result<(Field, Field)> {
    let domain = config.build_domain()?;
    let data = &config.data;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = trig_field(&domain, Rank::Vector(domain.dim()), &velocity_parities(&domain), data.band, &mut rng)?;
    let eta = trig_field(&domain, Rank::Vector(3), &director_parities(&domain), data.band, &mut rng)?;

    let a = if data.amplitude_a == 0.0 {
        Field::zero_velocity(&domain)
    } else {
        let ksq = &domain.ksq;
        let a = leray_project(&raw)?.multiply(|i| if ksq[i] == 0.0 { 0.0 } else { 1.0 });
        let n = lp_norm(&a, config.exponents.p)?;
        if n > 0.0 { a.scale(data.amplitude_a / n) } else { a }
    };
    let b = unit_director(&domain, data.e, &eta, data.amplitude_b)?;
    Ok((a, b))
}

fn unit_director(domain: &Arc<Domain>, e: [f64; 3], eta: &Field, amplitude: f64) -> Result<Field> {
    let len = domain.len();
    let mut values = vec![vec![0.0; len]; 3];
    if amplitude == 0.0 {
        for (c, v) in values.iter_mut().enumerate() {
            v.fill(e[c]);
        }
    } else {
        let scale = amplitude / eta.max_abs();
        for j in 0..len {
            let raw = [0, 1, 2].map(|c| e[c] + scale * eta.values(c)[j]);
            let m = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
            for c in 0..3 {
                values[c][j] = raw[c] / m;
            }
        }
    }
    Field::from_values(domain, Rank::Vector(3), values, &[Parity::EVEN; 3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::parse_config;
    use crate::ops::divergence;

    fn config(extra: &str) -> RunConfig {
        parse_config(&format!(
            "[domain]\ndimension = 2\nresolution = 16\n{extra}\n[time]\nhorizon = 0.1\n[data]\namplitude_a = 0.5\namplitude_b = 0.2\nband = 3\n"
        ))
        .unwrap()
    }

    #[test]
    fn admissible_and_deterministic() {
        for bc in ["periodic", "neumann", "dirichlet"] {
            let c = config(&format!("director_bc = \"{bc}\""));
            let (a, b) = gen_initial_data(&c, 7).unwrap();
            assert!(divergence(&a).unwrap().max_abs() <= 1e-10);
            assert!((lp_norm(&a, 3.0).unwrap() - 0.5).abs() < 1e-12);
            let drift = b.magnitude().iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
            assert!(drift <= 1e-14, "{bc} {drift}");
            let (a2, b2) = gen_initial_data(&c, 7).unwrap();
            for i in 0..2 {
                assert_eq!(a.values(i), a2.values(i));
            }
            for i in 0..3 {
                assert_eq!(b.values(i), b2.values(i));
            }
            let (a3, _) = gen_initial_data(&c, 8).unwrap();
            assert!(a3.max_abs_diff(&a) > 0.0);
        }
    }

    #[test]
    fn zero_amplitude_is_equilibrium() {
        let mut c = config("");
        c.data.amplitude_a = 0.0;
        c.data.amplitude_b = 0.0;
        c.data.e = [0.6, 0.0, 0.8];
        let (a, b) = gen_initial_data(&c, 1).unwrap();
        assert_eq!(a.max_abs(), 0.0);
        for (i, e) in [0.6, 0.0, 0.8].iter().enumerate() {
            assert!(b.values(i).iter().all(|v| v == e));
        }
    }
}
