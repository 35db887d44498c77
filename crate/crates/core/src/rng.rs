//! Seeded, counter-based random streams.
//!
//! Every random object is drawn from a ChaCha8 stream keyed by `(seed, stream)`.
//! Distinct draws inside one algorithm use distinct stream ids, so results do
//! not depend on how many values some other draw consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids for the draws made inside the library.
pub mod stream {
    pub const TEST_MATRIX: u64 = 1;
    pub const TEST_MATRIX_LEFT: u64 = 2;
    pub const PROBES: u64 = 3;
    pub const SRFT_DIAG: u64 = 4;
    pub const SRFT_PICKS: u64 = 5;
    pub const GSRFT: u64 = 6;
    pub const NORM_ESTIMATE: u64 = 7;
    pub const SYNTHETIC: u64 = 8;
    pub const HAAR: u64 = 9;
}

pub fn rng_for(seed: u64, stream: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// SplitMix64 finalizer, used to derive well separated per-trial seeds.
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
