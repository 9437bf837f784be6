//! Deterministic, counter-addressed random streams.
//!
//! A [`Stream`] is a pure value: a master seed plus a path of labels. Any
//! stream can be split into children by label without touching shared
//! state, so work items addressed by index draw the same numbers no matter
//! which thread runs them or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Address of a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Stream {
    seed: u64,
    path: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            seed,
            path: mix(seed ^ 0x5EED),
        }
    }

    /// Child stream identified by `label`. Distinct labels give
    /// statistically independent streams.
    pub fn child(&self, label: u64) -> Stream {
        Stream {
            seed: self.seed,
            path: mix(self.path ^ mix(label.wrapping_add(0x1234_5678_9ABC_DEF1))),
        }
    }

    /// Child stream addressed by a string tag and an index.
    pub fn named(&self, tag: &str, index: u64) -> Stream {
        let tag_hash = tag
            .bytes()
            .fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3));
        self.child(tag_hash).child(index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Materialize the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.path.to_le_bytes());
        key[16..24].copy_from_slice(&mix(self.path).to_le_bytes());
        key[24..].copy_from_slice(&mix(self.seed ^ self.path).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.path);
        rng
    }
}
