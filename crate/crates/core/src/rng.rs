//! Seed derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! 64-bit seed. Independent consumers of one seed use distinct stream ids so
//! that, e.g., resampling spreading codes never perturbs node placement.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const STREAM_TOPOLOGY: u64 = 1;
pub(crate) const STREAM_GAINS: u64 = 2;
pub(crate) const STREAM_CODES: u64 = 3;
pub(crate) const STREAM_MONTE_CARLO: u64 = 4;
pub(crate) const STREAM_INIT_POWER: u64 = 5;

/// Returns the ChaCha8 generator for `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer, used to derive child seeds from a parent seed and
/// an index.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    let mut z = parent
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
