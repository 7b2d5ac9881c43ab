//! Derivation of independent, reproducible RNG streams from one master seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// One component of a derived-seed key.
#[derive(Debug, Clone, Copy)]
pub enum SeedPart<'a> {
    U64(u64),
    Str(&'a str),
}

impl From<u64> for SeedPart<'_> {
    fn from(v: u64) -> Self {
        SeedPart::U64(v)
    }
}

impl From<usize> for SeedPart<'_> {
    fn from(v: usize) -> Self {
        SeedPart::U64(v as u64)
    }
}

impl<'a> From<&'a str> for SeedPart<'a> {
    fn from(v: &'a str) -> Self {
        SeedPart::Str(v)
    }
}

/// Hashes `(seed, parts...)` into a new 64-bit seed.
///
/// The value is stable across platforms, thread counts and crate versions,
/// since it only depends on SHA-256 of a length-prefixed encoding.
pub fn derive_seed(seed: u64, parts: &[SeedPart<'_>]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for part in parts {
        match part {
            SeedPart::U64(v) => {
                h.update([0u8]);
                h.update(v.to_le_bytes());
            }
            SeedPart::Str(s) => {
                h.update([1u8]);
                h.update((s.len() as u64).to_le_bytes());
                h.update(s.as_bytes());
            }
        }
    }
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng_for(seed: u64, parts: &[SeedPart<'_>]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, parts))
}
