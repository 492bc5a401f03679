//! Counter-based random substreams.
//!
//! Each consumer of randomness gets its own ChaCha stream keyed by
//! `(master seed, purpose label, two free indices)`. Compression dither for
//! agent `i` at iteration `k` uses `(seed, COMPRESS, i, k)`, so draws are
//! independent across agents and iterations and identical across reruns
//! regardless of execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Initial state of each agent's estimate matrix row.
pub const LABEL_INIT: u64 = 1;
/// Random graph sampling.
pub const LABEL_GRAPH: u64 = 2;
/// Per-(agent, iteration) compression dither.
pub const LABEL_COMPRESS: u64 = 3;
/// Sampling in measurement helpers (constant estimation, bound checks).
pub const LABEL_SAMPLE: u64 = 4;

/// splitmix64 finalizer; full-avalanche mixing of one word.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a deterministic generator for `(seed, label, a, b)`.
///
/// The four inputs are absorbed sequentially into a 256-bit ChaCha key, one
/// mixed word per 64-bit lane, so distinct tuples get uncorrelated streams.
pub fn substream(seed: u64, label: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = mix(seed ^ 0x9e37_79b9_7f4a_7c15);
    for (lane, word) in [label, a, b, !seed].into_iter().enumerate() {
        state = mix(state.wrapping_add(word).wrapping_add(
            (lane as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15),
        ));
        key[lane * 8..(lane + 1) * 8].copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// First word of the `(seed, label, a, b)` substream, for components that
/// take a plain `u64` seed rather than a generator.
pub fn derive_seed(seed: u64, label: u64, a: u64, b: u64) -> u64 {
    use rand_chacha::rand_core::RngCore;
    substream(seed, label, a, b).next_u64()
}
