//! Seed handling. Every random consumer draws from a ChaCha8 stream keyed by
//! a root seed; independent trajectories use distinct stream ids of the same
//! key, so substreams never overlap regardless of how work is scheduled.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for the root stream (stream id 0).
pub fn root(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for substream `index` under `seed`. Stream 0 is reserved for
/// the root, so substream `i` uses stream id `i + 1`.
pub fn substream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Key for an independent consumer labelled `label` under `seed`. Drawn
/// from a stream id with the top bit set, which trajectory substreams never
/// reach.
pub fn child_seed(seed: u64, label: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1 << 63) | label);
    rng.random()
}
