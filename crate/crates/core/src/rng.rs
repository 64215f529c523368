//! Counter-based random streams.
//!
//! A campaign derives one ChaCha8 key from `(master seed, tag words)` and gives
//! trial `i` the ChaCha stream number `i`. Streams never overlap, so results do
//! not depend on how trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 256-bit key from a master seed and a list of tag words.
pub fn derive_key(master: u64, tag: &[u64]) -> [u8; 32] {
    let mut st = master;
    for &t in tag {
        st = splitmix64(&mut st) ^ t;
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut st).to_le_bytes());
    }
    key
}

/// Stream `index` under the key derived from `(master, tag)`.
pub fn stream(master: u64, tag: &[u64], index: u64) -> Stream {
    let mut r = ChaCha8Rng::from_seed(derive_key(master, tag));
    r.set_stream(index);
    r
}

/// Encode a real parameter as a tag word.
pub fn tag_f64(x: f64) -> u64 {
    x.to_bits()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, &[1, 2], 3).random();
        let b: u64 = stream(7, &[1, 2], 3).random();
        let c: u64 = stream(7, &[1, 2], 4).random();
        let d: u64 = stream(7, &[1, 3], 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
