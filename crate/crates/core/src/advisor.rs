//! Block-length advice from the birthday problem.
//!
//! Cutting `n` bits into `m = ⌊n/s⌋` words over `S = 2^s` letters gives
//! about `c²/2` repeated words when `m = c·√S`. Tests built on repeated
//! words need `c` of a few units at least, which gives the rule
//! `n ≍ s·2^(s/2)`.

use serde::{Deserialize, Serialize};

use crate::bitstream::MAX_BLOCK_LENGTH;
use crate::error::{param, Result};

/// Load factor used when none is given.
pub const DEFAULT_TARGET_C: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockAdvice {
    pub suggested_s: u32,
    pub expected_collisions: f64,
    pub pellets_m: u64,
    pub cells_s: u64,
    pub load_c: f64,
}

/// Largest `s` with `⌊n/s⌋ ≥ target_c · 2^(s/2)`.
pub fn suggest_block_length(n_bits: u64, target_c: f64) -> Result<BlockAdvice> {
    if n_bits < 16 {
        return param(format!("{n_bits} bits is too short to advise on"));
    }
    if !(target_c > 0.0 && target_c.is_finite()) {
        return param(format!("target load {target_c} must be positive"));
    }
    let feasible = |s: u32| (n_bits / s as u64) as f64 >= target_c * (s as f64 / 2.0).exp2();
    // ⌊n/s⌋ falls and 2^(s/2) grows with s, so the feasible set is a prefix.
    let s = (1..=MAX_BLOCK_LENGTH)
        .take_while(|&s| feasible(s))
        .last()
        .ok_or_else(|| {
            crate::Error::Parameter(format!(
                "no block length satisfies n = {n_bits} with c = {target_c}"
            ))
        })?;
    let m = n_bits / s as u64;
    let load_c = m as f64 / (s as f64 / 2.0).exp2();
    Ok(BlockAdvice {
        suggested_s: s,
        expected_collisions: load_c * load_c / 2.0,
        pellets_m: m,
        cells_s: 1u64 << s,
        load_c,
    })
}

/// Asymptotic number of cells holding two or more of the `⌊n/s⌋` words.
pub fn expected_repeats(n_bits: u64, s: u32) -> Result<f64> {
    if !(1..=MAX_BLOCK_LENGTH).contains(&s) {
        return param(format!("block length {s} outside 1..={MAX_BLOCK_LENGTH}"));
    }
    let m = n_bits / s as u64;
    let c = m as f64 / (s as f64 / 2.0).exp2();
    Ok(c * c / 2.0)
}
