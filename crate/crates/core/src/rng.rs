//! Seeded random draws shared by initialization, corruption, and t-SNE.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard-normal sampler over a counter-based stream (Box-Muller).
pub(crate) struct NormalSampler {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalSampler {
    pub(crate) fn new(seed: u64) -> Self {
        NormalSampler {
            rng: seeded(seed),
            spare: None,
        }
    }

    pub(crate) fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the log finite.
        let u1: f64 = 1.0 - self.rng.gen::<f64>();
        let u2: f64 = self.rng.gen();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let angle = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(radius * libm::sin(angle));
        radius * libm::cos(angle)
    }
}
