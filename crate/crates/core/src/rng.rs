//! Random streams and seed derivation.

use rand::SeedableRng;

/// The generator used by every simulation in this crate.
///
/// ChaCha8 gives the same stream on every platform, which the replay and
/// byte-identical CSV guarantees depend on.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Builds a [`SimRng`] from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a path of integer keys.
///
/// Each key is folded in with one SplitMix64 finalisation round:
/// `h = splitmix64(h ^ key)`, starting from `h = splitmix64(master)`.
/// The result depends on the order of the keys.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(master), |h, &k| splitmix64(h ^ k))
}
