//! Hierarchical, order-independent random streams.
//!
//! A stream is identified by the master seed plus a path of integer labels
//! (drop index, link kind, sector, user, ...). The path is folded through
//! SplitMix64 into a ChaCha8 seed, so two streams never depend on the order in
//! which they are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream labels. Values are part of the reproducibility contract: changing
/// one changes every output produced with it.
pub mod tag {
    pub const DROP: u64 = 0x01;
    pub const USERS: u64 = 0x02;
    pub const LARGE_SCALE: u64 = 0x03;
    pub const CLUSTERS: u64 = 0x04;
    pub const SCHEDULE: u64 = 0x05;
    pub const RANDOM_PHASES: u64 = 0x06;
    pub const LINK_DIRECT: u64 = 0x10;
    pub const LINK_BS_RIS: u64 = 0x11;
    pub const LINK_RIS_USER: u64 = 0x12;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a label path into a 64-bit seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &label| splitmix64(acc ^ splitmix64(label)))
}

/// Creates the stream addressed by `path` under `master`.
pub fn stream(master: u64, path: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
