//! Compression-based tests.
//!
//! A word that some lossless code shortens by more than `log₂(1/α) + 1` bits
//! is evidence against randomness, and this holds for any injective code:
//! at most `2^(t+1) − 1` words have codewords of `t` bits or fewer. Codes
//! satisfying Kraft's inequality earn one more bit of slack.
//!
//! The decisions here are pure. Running an external compressor and
//! measuring its output lives in [`crate::harness`].

mod gates;
mod kt;

use serde::{Deserialize, Serialize};

use crate::bitstream::BitSequence;
use crate::error::{param, Result};

pub use gates::{
    gamma_critical, gamma_hat_critical, gamma_hat_test, gamma_test, upsilon_boundary,
    upsilon_rejection_probability, upsilon_test, CodeLengthLedger, GateOutcome, GateParams,
    UpsilonBoundary,
};
pub use kt::{kt_code_length, MAX_CONTEXT_ORDER};

/// Default `a` in `α = 2^(−a)` for byte-oriented compressors.
pub const DEFAULT_ALPHA_EXPONENT: u32 = 7;

/// Which critical value the built-in code is held to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateKind {
    /// Integer lengths `⌈ℓ⌉` against `n − log₂(1/α) − 1`.
    Gamma,
    /// Real lengths `ℓ` against `n − log₂(1/α)`.
    GammaHat,
}

/// Compresses `seq` with the built-in KT code and applies the chosen gate
/// with `|A| = 2` and `n` the number of bits.
pub fn kt_gate_test(
    seq: &BitSequence,
    context_order: u32,
    alpha: f64,
    kind: GateKind,
) -> Result<GateOutcome> {
    let params = GateParams::new(seq.len() as u64, 2, alpha)?;
    let ideal = kt_code_length(seq, context_order)?;
    match kind {
        GateKind::Gamma => gamma_test(ideal.ceil(), &params),
        GateKind::GammaHat => gamma_hat_test(ideal, &params),
    }
}

/// Byte-file rule: with `α = 2^(−alpha_exponent)` and `|A| = 256`, reject
/// when the compressed file is at most
/// `file_bytes − ⌈(alpha_exponent + 1)/8⌉` bytes. The default exponent
/// rejects any file shortened by at least one byte.
pub fn external_compressor_test(
    file_bytes: u64,
    compressed_size_bytes: u64,
    alpha_exponent: u32,
) -> Result<GateOutcome> {
    if file_bytes == 0 {
        return param("cannot test an empty file");
    }
    if compressed_size_bytes == 0 {
        return param("compressed size must be positive");
    }
    let alpha = (-(alpha_exponent as f64)).exp2();
    let params = GateParams::new(file_bytes, 256, alpha)?;
    gamma_test(8.0 * compressed_size_bytes as f64, &params)
}
