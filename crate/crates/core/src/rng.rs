//! Reproducible random streams.
//!
//! Every stochastic computation takes a master seed and a stream index. The
//! generator is ChaCha8 keyed by the seed with the index as its 64-bit stream
//! id, so stream `k` is the same sequence no matter which thread consumes it
//! or in which order streams are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent generator for `(seed, stream)`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws a fresh master seed from OS entropy, for callers that did not supply
/// one.
pub fn fresh_seed() -> u64 {
    rand::random()
}
