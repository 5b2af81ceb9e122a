//! Deterministic random streams derived from a single user seed.
//!
//! Every consumer draws from its own ChaCha stream selected by a
//! `(purpose, round, index)` counter, so adding a draw in one place never
//! shifts the numbers seen elsewhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    GridWeights = 1,
    TreeHeuristic = 2,
    HeatVectors = 3,
    LambdaMax = 4,
    Rhs = 5,
    Fiedler = 6,
    Oracle = 7,
}

pub fn stream(seed: u64, purpose: Purpose, round: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) ^ ((round & 0xffff) << 32) ^ (index & 0xffff_ffff));
    rng
}
