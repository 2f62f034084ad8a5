//! Deterministic named RNG substreams.
//!
//! Every random quantity in a run draws from a stream identified by
//! (master seed, name, index), so adding a new consumer never perturbs the
//! draws of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for the given named substream of a master seed.
pub fn substream(master: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(fnv1a(name).wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    rng
}

/// A derived 64-bit seed for APIs that take a plain seed.
pub fn derive_seed(master: u64, name: &str, index: u64) -> u64 {
    let mut h = fnv1a(name) ^ master.rotate_left(32);
    h = h.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    // splitmix64 finalizer
    h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    h ^ (h >> 31)
}

fn fnv1a(s: &str) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for b in s.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_stable_and_distinct() {
        let a: u64 = substream(7, "formation", 0).gen();
        let b: u64 = substream(7, "formation", 0).gen();
        assert_eq!(a, b);
        let c: u64 = substream(7, "formation", 1).gen();
        let d: u64 = substream(7, "drift", 0).gen();
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_ne!(derive_seed(7, "x", 0), derive_seed(8, "x", 0));
    }
}
