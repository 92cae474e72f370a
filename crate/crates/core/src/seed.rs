//! Seed derivation for reproducible, order-independent random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep the purposes of derived generators apart.
pub mod tag {
    pub const INITIAL_FIT: u64 = 0x494e_4954;
    pub const REPLICATE: u64 = 0x5245_504c;
    pub const PERMUTATION: u64 = 0x5045_524d;
    pub const DATASET: u64 = 0x4441_5441;
    pub const TEST: u64 = 0x5445_5354;
    pub const FOLDS: u64 = 0x464f_4c44;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of integers into a new 64-bit seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &x| splitmix64(acc ^ splitmix64(x)))
}

/// Independent generator for the given seed and stream path.
pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
