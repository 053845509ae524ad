//! Reproducible randomness built on ChaCha8, a counter-based generator.
//!
//! Stream splitting: every random quantity in the system lives on its own
//! ChaCha stream, selected with `set_stream`. Environment streams are
//! additionally *counter-addressed*: each round owns a fixed-size block of
//! the keystream (`set_word_pos(counter * words_per_counter)`), so
//! per-round values are pure functions of `(seed, stream, round)` and can
//! be queried in any order. Episode streams (action sampling) are drawn
//! sequentially, one per episode seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::types::RngSeed;

/// Stream identifiers. Environment streams are keyed by the environment
/// seed; episode streams by the episode seed.
pub mod streams {
    /// Base true-loss generator (per-round counter).
    pub const BASE_LOSS: u64 = 1;
    /// Hint noise for optimistic-delayed feedback (per-origin counter).
    pub const HINT: u64 = 2;
    /// Unit perturbation directions for decaying-noise feedback.
    pub const PERTURB: u64 = 3;
    /// Composite partial-loss splitting.
    pub const PARTIAL: u64 = 4;
    /// Action sampling inside an episode.
    pub const ACTION: u64 = 16;
    /// Monte Carlo oracle draws.
    pub const MC_ORACLE: u64 = 17;
}

/// Counter-addressed view of one ChaCha stream. `words_per_counter` is the
/// keystream block (in 32-bit words) reserved for each counter value; a
/// 64-bit uniform consumes two words.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    seed: u64,
    stream: u64,
    words_per_counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64, words_per_counter: u64) -> Self {
        assert!(words_per_counter >= 2);
        Self {
            seed,
            stream,
            words_per_counter,
        }
    }

    /// Generator positioned at the start of `counter`'s block.
    pub fn at(&self, counter: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(u128::from(counter) * u128::from(self.words_per_counter));
        rng
    }
}

/// Sequential generator for one episode's action sampling.
pub fn episode_rng(seed: RngSeed) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    rng.set_stream(streams::ACTION);
    rng
}

/// Sequential generator for Monte Carlo oracle draws.
pub fn oracle_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(streams::MC_ORACLE);
    rng
}
