//! Seed derivation shared by the generators and the dataset builder.
//!
//! Every example owns a 64-bit seed derived from `(base_seed, split, index)`
//! with the SplitMix64 finalizer. Two independent ChaCha8 streams are opened
//! from it: one for parameter sampling and one for rendering and noise, so
//! redrawing parameters never shifts the pixels of unrelated examples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StimulusRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const RENDER_STREAM: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(base ^ splitmix64(split_id)) ^ index)`.
pub fn example_seed(base_seed: u64, split_id: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base_seed ^ splitmix64(split_id)) ^ index)
}

pub fn param_rng(seed: u64) -> StimulusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn render_rng(seed: u64) -> StimulusRng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ RENDER_STREAM))
}
