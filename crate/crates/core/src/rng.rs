//! Seeded randomness.
//!
//! Every random choice in the crate comes from ChaCha8 (`rand_chacha`),
//! seeded with `SeedableRng::seed_from_u64(seed)` and split into independent
//! streams with `set_stream(stream)`. Stream ids are fixed per use site so
//! that results depend only on `(seed, stream)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used across the crate.
pub mod stream {
    /// 1-D k-means seeding; the dimension index is added to this base.
    pub const KMEANS_1D: u64 = 0x1000;
    pub const VQ_CODEBOOK: u64 = 0x2000;
    pub const FOLDS: u64 = 0x3000;
    pub const SYNTH: u64 = 0x4000;
}

pub fn rng_for(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
