//! Deterministic random number streams.
//!
//! All randomness in the crate flows through ChaCha8, a counter-based
//! stream cipher RNG: a master 64-bit seed selects the key and every
//! logical task (replication, dimension, fold shuffle, ...) draws from its
//! own independent stream id. Results are therefore independent of thread
//! scheduling and reproducible across runs.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags carving the stream-id space. Combined with a replication
/// (or repetition) index as `stream = index * STRIDE + purpose`.
pub mod purpose {
    pub const GENERATOR: u64 = 0;
    pub const NOISE: u64 = 1;
    pub const FIELD: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const CV_FOLDS: u64 = 4;
    pub const TREE: u64 = 5;
    pub const MISC: u64 = 6;
}

const STRIDE: u64 = 16;

/// RNG for stream `(index, purpose)` under the given master seed.
pub fn substream(seed: u64, index: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_mul(STRIDE).wrapping_add(purpose));
    rng
}

/// One splitmix64 mixing round; derives independent child seeds from a
/// master seed and a salt (replication index, command tag, ...).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
