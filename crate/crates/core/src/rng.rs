//! Seed derivation. Every random stream is `ChaCha8` seeded with
//! `seed + h(purpose)`, where `h` is the first eight little-endian bytes of
//! the SHA-256 digest of the purpose string.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn derive_seed(seed: u64, purpose: &str) -> u64 {
    let digest = Sha256::digest(purpose.as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    seed.wrapping_add(u64::from_le_bytes(head))
}

pub fn stream(seed: u64, purpose: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, purpose))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_stable_and_distinct() {
        assert_eq!(derive_seed(1, "init"), derive_seed(1, "init"));
        assert_ne!(derive_seed(1, "init"), derive_seed(1, "shuffle"));
        assert_ne!(derive_seed(1, "init"), derive_seed(2, "init"));
        let a: u64 = stream(9, "x").random();
        let b: u64 = stream(9, "x").random();
        assert_eq!(a, b);
    }
}
