//! Seeded, splittable random streams.
//!
//! A trial owns one master seed. Every random decision in the engine is made
//! on a stream derived from that seed plus a structural key (round, agent id,
//! vertex index, purpose tag), never on a shared sequential generator. That
//! way the order in which vertices or agents happen to be visited cannot
//! change any outcome, which is what makes synchronous-round semantics
//! testable.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::num::{real, Real};

// Purpose tags keeping unrelated draw families on disjoint streams.
pub const TAG_ALPHA: u64 = 1;
pub const TAG_CLAIM: u64 = 2;
pub const TAG_MESSAGE: u64 = 3;
pub const TAG_PLACEMENT: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A deterministic generator identified by a 64-bit seed.
///
/// `keyed` derives an independent child stream from the seed and a key; the
/// derivation ignores how many draws were already taken from `self`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream for the given structural key.
    pub fn keyed(&self, parts: &[u64]) -> RngStream {
        let mut h = splitmix64(self.seed);
        for &p in parts {
            h = splitmix64(h ^ splitmix64(p));
        }
        RngStream::new(h)
    }

    /// Uniform draw in [0, 1).
    pub fn unit<F: Real>(&mut self) -> F {
        real(self.rng.random::<f64>())
    }

    /// Bernoulli draw; `p = 0` never fires, `p >= 1` always does.
    pub fn chance<F: Real>(&mut self, p: F) -> bool {
        self.unit::<F>() < p
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }

    /// Uniform index in [0, n).
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.rng.random_range(0..n)
    }

    /// Index drawn proportionally to the (not necessarily normalized) weights.
    pub fn weighted_index<F: Real>(&mut self, weights: &[F]) -> usize {
        debug_assert!(!weights.is_empty());
        let total: F = weights.iter().copied().sum();
        let mut target = self.unit::<F>() * total;
        for (i, &w) in weights.iter().enumerate() {
            if target < w {
                return i;
            }
            target -= w;
        }
        weights.len() - 1
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
