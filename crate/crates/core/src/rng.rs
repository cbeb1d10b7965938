//! Deterministic, splittable random streams.
//!
//! A [`SeedStream`] is a named root seed. Child streams are derived by
//! mixing tag words into the seed with SplitMix64, so every (probe, basis,
//! repetition) or (iteration, evaluation, term) tuple gets its own
//! reproducible ChaCha generator regardless of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream {
    seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sub-stream identified by `tags`. Distinct tag paths give
    /// statistically independent streams.
    pub fn child(&self, tags: &[u64]) -> SeedStream {
        let mut s = splitmix64(self.seed);
        for &t in tags {
            s = splitmix64(s ^ splitmix64(t.wrapping_add(0xA076_1D64_78BD_642F)));
        }
        SeedStream { seed: s }
    }

    /// Convenience for string-named sub-streams ("bootstrap", "drift", ...).
    pub fn named(&self, name: &str) -> SeedStream {
        // FNV-1a keeps the mapping stable across platforms and releases.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in name.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        self.child(&[h])
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}
