//! Seeded random streams.
//!
//! Every generator is ChaCha8 (`rand_chacha`), keyed by `seed_from_u64(seed)`,
//! with the 64-bit ChaCha stream id selecting a disjoint stream. Per-step
//! streams put the stream kind in the top 16 bits and the step in the rest.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Theta = 1,
    Context = 2,
    Noise = 3,
    Learner = 4,
    Design = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream as u64) << 48);
    rng
}

/// Independent generator for step `t` of a stream, usable in any order.
pub fn step_rng(seed: u64, stream: Stream, t: u64) -> ChaCha8Rng {
    debug_assert!(t < 1 << 48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 48) | (t + 1));
    rng
}
