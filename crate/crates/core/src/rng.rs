//! Seeded, portable random streams.
//!
//! Every stochastic component consumes ChaCha streams derived from one master
//! seed, so runs are bit-reproducible across platforms and independent of
//! evaluation order (each cell, ant or phase owns its own derived stream).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate.
pub type Rng = ChaCha8Rng;

/// SplitMix64 step; decorrelates derived seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with a stream tag into a derived seed.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag))
}

/// A fresh RNG for the given master seed.
pub fn seeded(master: u64) -> Rng {
    Rng::seed_from_u64(master)
}

/// A fresh RNG for a derived stream, e.g. per (iteration, ant) or per cell.
pub fn stream(master: u64, tag: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(master, tag))
}

/// Two-level stream derivation.
pub fn stream2(master: u64, tag_a: u64, tag_b: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(derive_seed(master, tag_a), tag_b))
}
