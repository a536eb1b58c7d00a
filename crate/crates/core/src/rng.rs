//! Seeded, splittable random streams.
//!
//! Every stochastic step draws from a [`RngStream`] keyed by `(seed, stream_id)`.
//! ChaCha8 supports 2^64 independent streams per seed, so each experiment
//! repeat, sweep point and sub-task gets its own sequence regardless of the
//! order in which workers execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derive an independent sub-stream. Children of distinct labels, or of
    /// distinct parents, do not collide in practice.
    pub fn child(&self, label: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream_id: splitmix64(
                self.stream_id ^ splitmix64(label.wrapping_add(0x9E37_79B9_7F4A_7C15)),
            ),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
