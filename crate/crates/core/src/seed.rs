//! Deterministic seed derivation.
//!
//! `derive_seed(base, parts)` folds each part into the state with the
//! SplitMix64 finalizer: `h ← mix(h ^ mix(part + GOLDEN))`, starting from
//! `h = mix(base)`. The result seeds a `ChaCha8Rng`. Stream assignment used by
//! the harness:
//!
//! - environment of trial `i` at grid point `g`: `[ENV_STREAM, g, i]`
//! - play of combo `c` (FNV-1a of its name) at grid point `g`, trial `i`:
//!   `[PLAY_STREAM, c, g, i]`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const ENV_STREAM: u64 = 0x0065_6e76;
pub const PLAY_STREAM: u64 = 0x706c_6179;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(mix(base), |h, &p| mix(h ^ mix(p.wrapping_add(GOLDEN))))
}

pub fn rng_for(base: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, parts))
}

/// 64-bit FNV-1a, used to give combos a name-stable stream id.
pub fn name_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
