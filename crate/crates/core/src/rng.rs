//! Seed plumbing. Every random consumer draws from a ChaCha stream derived
//! from a master seed and a stream id, so independent parts of a run never
//! share state and can be executed in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type BenchRng = ChaCha8Rng;

/// Stream ids used by the construction pipeline.
pub mod streams {
    pub const MATCHINGS: u64 = 1;
    pub const EXPANDERS: u64 = 2;
    pub const LABELS: u64 = 3;
    pub const TRIALS: u64 = 4;
    pub const QUANTUM: u64 = 5;
}

/// A ChaCha8 generator on stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> BenchRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed; used when a stream needs to fan out further
/// (e.g. one expander per cluster, one oracle per trial).
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
