//! Per-market random substreams.
//!
//! Each market draws from its own ChaCha8 stream, keyed by the master seed,
//! the market index and a purpose tag. Results therefore do not depend on
//! how markets are scheduled across threads, and two engines run on the same
//! seed see identical bettors and winners.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Outcome count, probabilities and bet count of the market.
    Setup = 0,
    /// Wager, side and rejection threshold of every bet.
    Bettors = 1,
    /// Resolution.
    Winner = 2,
}

const STREAMS_PER_MARKET: u64 = 4;

pub fn substream(seed: u64, market: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(market * STREAMS_PER_MARKET + stream as u64);
    rng
}
