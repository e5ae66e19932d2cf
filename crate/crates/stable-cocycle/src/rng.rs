//! Reproducible random substreams.
//!
//! Every random quantity is drawn from a ChaCha8 stream selected by the master
//! seed and a short tag path such as `(test, replica, row)`. The seed fixes the
//! key and the tag path fixes the 64-bit stream id, so a replica's draws never
//! depend on how replicas are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Tags that keep the top-level consumers of randomness apart.
pub mod tag {
    pub const SAMPLER: u64 = 1;
    pub const ARRAY: u64 = 2;
    pub const COCYCLE: u64 = 3;
    pub const ENSEMBLE: u64 = 4;
    pub const EXACT: u64 = 5;
    pub const DENSE: u64 = 6;
    pub const MOMENTS: u64 = 7;
    pub const BN: u64 = 8;
    pub const TRUNCATION: u64 = 9;
    pub const CLOSED_FORM: u64 = 10;
    pub const FRESH: u64 = 11;
    pub const HAT: u64 = 12;
    pub const AGGREGATE: u64 = 13;
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id for a tag path.
pub fn stream_id(tags: &[u64]) -> u64 {
    tags.iter().fold(0x6A09_E667_F3BC_C908, |acc, &t| splitmix(acc ^ splitmix(t)))
}

/// The generator for `(seed, tags)`.
pub fn substream(seed: u64, tags: &[u64]) -> StreamRng {
    let mut key = [0u8; 32];
    let mut s = seed;
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream_id(tags));
    rng
}
