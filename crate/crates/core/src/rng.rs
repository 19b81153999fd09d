//! Seeded random streams.
//!
//! Every stochastic operation takes an explicit `u64` seed. Independent
//! sub-streams (per fold, per stage) are derived by hashing the parent seed
//! with a path of tags, so a pipeline can be replayed piece by piece.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a tag path.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(seed), |acc, &tag| mix(acc ^ mix(tag)))
}

pub fn stream(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(seed: u64, path: &[u64]) -> Rng {
    stream(derive(seed, path))
}

// Stage tags used when splitting a pipeline seed.
pub(crate) const TAG_SEEDS: u64 = 1;
pub(crate) const TAG_SYNTH: u64 = 2;
pub(crate) const TAG_REFRESH: u64 = 3;
