//! Seed plumbing. Every random stream in the crate is a `ChaCha8Rng` seeded
//! from a user seed mixed with a fixed stream tag, so results do not depend
//! on call order across subsystems.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags. Changing any of these changes every golden output.
pub mod stream {
    pub const GRAPH: u64 = 0x6772_6170_6800_0001;
    pub const HOSTS: u64 = 0x686f_7374_7300_0002;
    pub const SOURCES: u64 = 0x7372_6373_0000_0003;
    pub const ROUTING: u64 = 0x726f_7574_6500_0004;
    pub const DESTINATIONS: u64 = 0x6473_7473_0000_0005;
    pub const ESTIMATE: u64 = 0x6573_7469_6d00_0006;
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix64(mix64(seed) ^ stream)
}

pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, stream))
}

/// Sub-stream `index` of a derived stream, e.g. one per host.
pub fn indexed_rng(seed: u64, stream: u64, index: u64) -> Rng {
    Rng::seed_from_u64(mix64(derive_seed(seed, stream) ^ mix64(index)))
}
