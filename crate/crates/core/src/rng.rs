//! Deterministic seed derivation.
//!
//! All randomness flows from explicit seeds. Sub-tasks (dataset records,
//! sweep trials, held-out evaluation inputs) derive their own seed from the
//! master seed and their index, so results are independent of worker count
//! and iteration order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; full-period bijection on `u64`.
#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `(master, stream, index)`.
///
/// `stream` separates independent uses of the same master seed (dataset
/// generation vs. evaluation inputs vs. trial circuits) so they never share
/// a random stream.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index)
}

/// A seeded RNG for the derived stream.
pub fn derived_rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, index))
}

/// Stream tags used by the harness.
pub mod streams {
    pub const DATASET: u64 = 1;
    pub const CIRCUIT: u64 = 2;
    pub const EVAL_INPUTS: u64 = 3;
    pub const PREP_ANGLES: u64 = 4;
    pub const SHADOWS: u64 = 5;
    pub const CHECKS: u64 = 6;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_across_streams_and_indices() {
        let a = derive_seed(7, 1, 0);
        let b = derive_seed(7, 1, 1);
        let c = derive_seed(7, 2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
        // and are stable
        assert_eq!(a, derive_seed(7, 1, 0));
    }
}
