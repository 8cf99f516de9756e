//! Deterministic seed derivation.
//!
//! Every random stream in an experiment is addressed by a path of tags
//! hanging off the master seed. Child seeds depend only on the path, so runs
//! can be generated in any order and on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random generator used throughout the crate.
pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over raw bytes; used to turn labels into seed tags.
pub fn hash_bytes(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// A position in the seed tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedPath(u64);

impl SeedPath {
    pub fn root(seed: u64) -> Self {
        SeedPath(mix64(seed))
    }

    pub fn child(self, tag: u64) -> Self {
        SeedPath(mix64(self.0 ^ mix64(tag.wrapping_add(0x632B_E59B_D9B4_E019))))
    }

    pub fn child_str(self, label: &str) -> Self {
        self.child(hash_bytes(label.as_bytes()))
    }

    pub fn child_f64(self, value: f64) -> Self {
        self.child(value.to_bits())
    }

    pub fn seed(self) -> u64 {
        self.0
    }
}
