//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator whose key comes from the user seed and
//! whose stream id packs `(round, purpose)`, so the draws of one round never
//! depend on how many draws another round made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Walk = 1,
    Rounding = 2,
    Slice = 3,
    RandomColoring = 4,
    Retry = 5,
    Instances = 6,
}

pub fn stream(seed: u64, round: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((round << 8) | purpose as u64);
    rng
}
