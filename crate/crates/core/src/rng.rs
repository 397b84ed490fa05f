//! Seeded generators and per-shard seed derivation.

use rand::SeedableRng;

pub type SeedRng = rand_chacha::ChaCha8Rng;

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x0C5F_2013;

pub fn rng_from_seed(seed: u64) -> SeedRng {
    SeedRng::seed_from_u64(seed)
}

/// Child seed for shard `index` (splitmix64 finalizer over both inputs).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
