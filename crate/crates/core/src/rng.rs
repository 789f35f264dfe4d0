//! Deterministic RNG substreams.
//!
//! Every stochastic routine in this crate draws from a stream derived from
//! `(master_seed, domain, indices...)`. Streams are independent of each other
//! and of execution order, so estimates are bit-identical for a fixed master
//! seed regardless of how many worker threads process the sample indices.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; full-period mixing of a 64-bit state.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_label(label: &str) -> u64 {
    // FNV-1a over the label bytes.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in label.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// An RNG stream keyed by `(master_seed, domain, indices)`.
///
/// The key is folded into a 256-bit ChaCha seed; distinct keys yield
/// independent streams for all practical purposes.
pub fn substream(master_seed: u64, domain: &str, indices: &[u64]) -> ChaCha8Rng {
    let mut state = mix(master_seed ^ hash_label(domain));
    for &ix in indices {
        state = mix(state ^ mix(ix));
    }
    let mut seed = [0u8; 32];
    for (word, chunk) in seed.chunks_exact_mut(8).enumerate() {
        state = mix(state ^ (word as u64).wrapping_mul(0xa076_1d64_78bd_642f));
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
