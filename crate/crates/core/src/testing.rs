use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{Domain, Parity};
use crate::field::{velocity_parities, Field, Rank};
use crate::random::band_limited;

pub fn random_smooth(
    domain: &Arc<Domain>,
    rank: Rank,
    parities: &[Parity],
    band: usize,
    seed: u64,
) -> Field {
    let parities = if parities.len() == 1 && rank.components() > 1 {
        vec![parities[0]; rank.components()]
    } else {
        parities.to_vec()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    band_limited(domain, rank, &parities, band, &mut rng).unwrap()
}

/// Band-limited vector field with free-slip parities (not projected).
pub fn random_velocity(domain: &Arc<Domain>, band: usize, seed: u64) -> Field {
    random_smooth(
        domain,
        Rank::Vector(domain.dim()),
        &velocity_parities(domain),
        band,
        seed,
    )
}
