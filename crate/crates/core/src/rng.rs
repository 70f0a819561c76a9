//! Seeded random streams.
//!
//! Every round, trial and sweep point owns its own ChaCha stream derived from
//! the session seed and an index, so results do not depend on scheduling or
//! thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream `index` of the generator seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an independent child seed, used for sweep points and trial batches.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // Stream numbers from the top of the range never collide with round indices.
    substream(seed, u64::MAX - index).next_u64()
}
