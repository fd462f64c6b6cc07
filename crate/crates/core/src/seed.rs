//! Counter-based seed splitting.
//!
//! Every random stream is keyed by `(seed, stream, index)`, so results do not
//! depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Named random streams used by the pipeline.
pub mod stream {
    pub const SAMPLE_ORDER: u64 = 1;
    pub const PLACEMENT: u64 = 2;
    pub const CAMERA: u64 = 3;
    pub const DOWNSAMPLE: u64 = 4;
    pub const ORACLE: u64 = 5;
    pub const OBJECT_CHOICE: u64 = 6;
}

/// Mixes the three keys into a child seed.
pub fn derive(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)
}

pub fn rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, stream, index))
}
