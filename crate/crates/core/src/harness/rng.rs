//! Seeded random streams.
//!
//! Every consumer draws from its own ChaCha20 stream: the generator is keyed
//! by the 64-bit master seed and the stream id is the FNV-1a hash of a fixed
//! label such as `"scene/background"` or `"power/target/3"`. Streams with
//! different labels are independent, and work split across threads agrees
//! bit-for-bit with a serial run.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Generator family and stream-splitting rule, recorded in results manifests.
pub const RNG_FAMILY: &str =
    "ChaCha20Rng (rand_chacha 0.9), key = seed_from_u64(master_seed), stream = fnv1a64(label)";

/// 64-bit FNV-1a hash.
pub fn fnv1a64(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn substream(master_seed: u64, label: &str) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(fnv1a64(label));
    rng
}
