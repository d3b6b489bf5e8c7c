//! Seeded random streams.
//!
//! Every randomized step draws from a stream keyed by `(seed, domain, index)`
//! so results do not depend on iteration order or on how work is sharded
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    SplitPosts = 1,
    SplitLinks = 2,
    Subsample = 3,
    Gibbs = 4,
    Init = 5,
    Generate = 6,
    Lda = 7,
    TwitterLda = 8,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a seed with a sub-key (e.g. an iteration number).
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    splitmix64(seed ^ splitmix64(key.wrapping_add(0x5EED)))
}

/// Independent stream for one `index` (user, post, ...) within `domain`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, domain as u64));
    rng.set_stream(index);
    rng
}
