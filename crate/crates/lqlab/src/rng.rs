//! Seeded random streams.
//!
//! Every stochastic operation in the crate draws from a [`ChaCha8Rng`]
//! derived from a master seed and a stream id, so independent tasks
//! (environments, trees, grid points) can run in any order or in parallel
//! and still produce bit-identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer, used to decorrelate seed/stream combinations.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A random stream derived from `master` for the given `stream` id.
///
/// Distinct stream ids yield statistically independent streams; the same
/// (master, stream) pair always yields the same stream.
pub fn derive_stream(master: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master ^ splitmix64(stream)))
}

/// The root stream for a master seed (stream id 0).
pub fn master_stream(master: u64) -> ChaCha8Rng {
    derive_stream(master, 0)
}
