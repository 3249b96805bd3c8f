//! Seeded generator shared by the simulator and the random graph generator.
//!
//! The generator is xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Uniform variates in `[0, 1)` take
//! the top 53 bits of one `next_u64` call. For seed 42 the first three
//! `next_u64` outputs are
//!
//! ```text
//! 0xd0764d4f4476689f
//! 0x519e4174576f3791
//! 0xfbe07cfb0c24ed8c
//! ```
//!
//! (checked by a unit test), which is enough to validate a port.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type WalkRng = Xoshiro256PlusPlus;

pub fn seeded(seed: u64) -> WalkRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform variate in `[0, 1)` from the top 53 bits of one draw.
pub fn next_unit(rng: &mut WalkRng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn next_u64(rng: &mut WalkRng) -> u64 {
    rng.next_u64()
}
