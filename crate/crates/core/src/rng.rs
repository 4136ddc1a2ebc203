//! Seed derivation.
//!
//! Every random stream in the crate comes from one user seed. A component name is
//! hashed (FNV-1a) into a ChaCha stream id and combined with a per-item index, so
//! parallel trials get independent streams whose values do not depend on thread
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in text.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Stream `index` of `component` under `seed`.
pub fn stream(seed: u64, component: &str, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(component).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
    rng
}
