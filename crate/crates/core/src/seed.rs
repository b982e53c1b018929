//! Seed derivation for independent random streams.

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for stream `tag`, draw `index`, of a run seeded with `base`.
pub fn derive_seed(base: u64, tag: u64, index: u64) -> u64 {
    mix(mix(mix(base) ^ tag) ^ index)
}

/// Stream tags used by the trainer.
pub mod stream {
    pub const INIT: u64 = 1;
    pub const BOUNDARY: u64 = 2;
    pub const INITIAL: u64 = 3;
    pub const COLLOCATION: u64 = 4;
    pub const EVENT: u64 = 5;
    pub const POOL: u64 = 6;
    pub const OBSERVATION: u64 = 7;
}
