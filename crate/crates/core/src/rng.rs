//! Seeded pseudo-random streams.
//!
//! Graph generation and optimizer start points use [`SplitMix64`] so instances
//! are bit-reproducible in any language. Neural-network initialization and
//! policy noise use ChaCha streams seeded through [`derive_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 generator, seeded directly with the user seed.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` built from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Mixes a parent seed with a sequence of stream indices into a child seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut acc = SplitMix64::new(seed).next_u64();
    for &p in path {
        acc = SplitMix64::new(acc ^ p.wrapping_mul(GOLDEN_GAMMA)).next_u64();
    }
    acc
}

pub fn chacha(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}
