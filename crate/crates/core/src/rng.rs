//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a stream identified by
//! `(master_seed, replica, purpose)`. The three parts are mixed into a
//! 256-bit ChaCha key, so a stream can be regenerated in isolation and two
//! streams with different labels never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha12Rng;

/// Label of one random stream.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StreamKey {
    pub master_seed: u64,
    pub replica: u64,
    pub purpose: String,
}

impl StreamKey {
    pub fn new(master_seed: u64, replica: u64, purpose: impl Into<String>) -> Self {
        StreamKey {
            master_seed,
            replica,
            purpose: purpose.into(),
        }
    }

    pub fn with_replica(&self, replica: u64) -> Self {
        StreamKey {
            replica,
            ..self.clone()
        }
    }

    pub fn rng(&self) -> StreamRng {
        stream(self.master_seed, self.replica, &self.purpose)
    }
}

impl std::fmt::Display for StreamKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.master_seed, self.replica, self.purpose)
    }
}

/// Opens the stream `(master_seed, replica, purpose)`.
pub fn stream(master_seed: u64, replica: u64, purpose: &str) -> StreamRng {
    let tag = fnv1a(purpose.as_bytes());
    let mut h = 0x6a09_e667_f3bc_c908u64;
    for w in [master_seed, replica, tag] {
        h = mix64(h ^ w);
    }
    let mut state = h;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Bijective 64-bit finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    mix64(*state)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
