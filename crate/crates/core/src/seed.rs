//! Seed derivation.
//!
//! Every stage seed is derived from one global seed with
//! `derive(seed, stream, index)`: the three words are mixed through the
//! SplitMix64 finaliser, so for example the dataset of training problem
//! `k` uses `derive(seed, Stream::Dataset, k)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent seed streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Dataset = 1,
    Surrogate = 2,
    Policy = 3,
    Evaluation = 4,
    Baseline = 5,
    Transform = 6,
    Split = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream as u64) ^ index)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
