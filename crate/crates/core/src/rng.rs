//! Deterministic random streams.
//!
//! Every random draw in the simulator comes from a ChaCha stream addressed by
//! `(seed, path)`. ChaCha is counter based, so streams with different paths are
//! independent and any stream can be recreated without replaying the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags used below a trial index.
pub mod tag {
    pub const CHANNEL: u64 = 1;
    pub const RANDOM_PHASES: u64 = 2;
    pub const PSO_JOINT: u64 = 3;
    pub const PSO_FIXED_PHASE: u64 = 4;
    pub const PSO_MOVABLE_POSITION: u64 = 5;
    pub const PSO_RELAY: u64 = 6;
    pub const ORACLE: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a stream path into a single 64-bit stream id.
pub fn stream_id(path: &[u64]) -> u64 {
    path.iter()
        .fold(0x5350_4944_4552_5249, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Opens the stream addressed by `(seed, path)`.
pub fn stream(seed: u64, path: &[u64]) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(path));
    rng
}
