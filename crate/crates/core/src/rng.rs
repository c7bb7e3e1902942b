//! Counter-based random streams.
//!
//! Every image gets its own ChaCha8 generator keyed by the root seed and
//! selected by `stream_id` through ChaCha's 64-bit stream counter, so the
//! sequence for one image never depends on how many others are drawn or in
//! which order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator handed to samplers.
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub root_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(root_seed: u64, stream_id: u64) -> Self {
        RngStream {
            root_seed,
            stream_id,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Draws a child stream from a running generator.
    pub fn child(rng: &mut StreamRng) -> RngStream {
        RngStream::new(rng.next_u64(), 0)
    }
}
