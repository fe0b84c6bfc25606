//! Split-stream random number generation.
//!
//! Every consumer draws from its own stream derived from `(seed, label)`, so
//! adding a consumer never shifts the numbers another consumer sees.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub type StreamRng = ChaCha8Rng;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325_u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `(seed, label)`. Stable across platforms and releases.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    splitmix64(splitmix64(seed) ^ fnv1a(label.as_bytes()))
}

pub fn rng_stream(seed: u64, label: &str) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, label))
}

/// Issues labelled streams for one run and rejects label reuse.
#[derive(Debug, Clone)]
pub struct RngStreams {
    seed: u64,
    issued: BTreeSet<String>,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed, issued: BTreeSet::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&mut self, label: &str) -> Result<StreamRng> {
        if !self.issued.insert(label.to_string()) {
            return Err(Error::DuplicateStreamLabel(label.to_string()));
        }
        Ok(rng_stream(self.seed, label))
    }
}
