//! Reproducible random-number streams.
//!
//! Every randomized routine in this crate draws from a [`StreamRng`] derived
//! from a master seed and a label path, e.g. `substream(seed, &[CELL, k, b,
//! replicate])`. Streams for distinct paths are statistically independent, so
//! replicates can run on any number of threads in any order and still produce
//! identical results.

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;

/// The counter-based generator used throughout the crate.
pub type StreamRng = ChaCha12Rng;

/// SplitMix64 step; used only to derive seeds, never to produce samples.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a generator for the stream identified by `(master, path)`.
pub fn substream(master: u64, path: &[u64]) -> StreamRng {
    let mut state = master;
    let mut acc = splitmix64(&mut state);
    for &label in path {
        state ^= label.wrapping_mul(0xFF51_AFD7_ED55_8CCD).rotate_left(23);
        acc ^= splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    let mut expand = acc;
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut expand).to_le_bytes());
    }
    StreamRng::from_seed(seed)
}
