//! Seed derivation and the small counter-based generator used inside the
//! per-pixel loops. Everything random in a sequence hangs off its config seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `ordinal`-th child stream of `parent`.
///
/// For a fixed parent the map is injective in `ordinal`: the pre-image
/// `parent + (ordinal + 1) * gamma` is distinct for distinct ordinals because
/// gamma is odd, and [`mix64`] is a bijection.
#[inline]
pub fn derive_seed(parent: u64, ordinal: u64) -> u64 {
    mix64(parent.wrapping_add(ordinal.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Hashes a list of words into one seed, order-sensitive.
pub fn hash_words(seed: u64, words: &[u64]) -> u64 {
    words.iter().fold(mix64(seed ^ GOLDEN_GAMMA), |h, &w| {
        mix64(h.wrapping_add(GOLDEN_GAMMA) ^ mix64(w))
    })
}

/// Stream generator used for plan-level sampling.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tiny SplitMix64 stream for per-pixel sample jitter. Cheap to construct,
/// so every pixel gets its own stream and results do not depend on the
/// order in which pixels are scheduled.
#[derive(Debug, Clone)]
pub struct PixelRng {
    state: u64,
}

impl PixelRng {
    pub fn new(seed: u64) -> Self {
        PixelRng { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn derived_seeds_are_distinct() {
        let seeds: HashSet<u64> = (0..100_000).map(|i| derive_seed(42, i)).collect();
        assert_eq!(seeds.len(), 100_000);
    }

    #[test]
    fn pixel_rng_is_in_unit_interval() {
        let mut rng = PixelRng::new(7);
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let v = rng.next_f64();
            assert!((0.0..1.0).contains(&v));
            sum += v;
        }
        assert!((sum / 10_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn hash_words_is_order_sensitive() {
        assert_ne!(hash_words(1, &[2, 3]), hash_words(1, &[3, 2]));
        assert_eq!(hash_words(1, &[2, 3]), hash_words(1, &[2, 3]));
    }
}
