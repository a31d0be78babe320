//! Stable sub-seed derivation: one user-facing seed, independent streams
//! per (label, indices) so adding a consumer never shifts another's draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// splitmix64 finalizer; full-avalanche 64-bit mixer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn derive_seed(seed: u64, label: &str, indices: &[u64]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(label.as_bytes());
    hasher.update([0u8]);
    for ix in indices {
        hasher.update(ix.to_le_bytes());
    }
    hasher.finalize().into()
}

pub(crate) fn rng_for(seed: u64, label: &str, indices: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(derive_seed(seed, label, indices))
}
