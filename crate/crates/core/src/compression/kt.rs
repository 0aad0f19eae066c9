use crate::bitstream::BitSequence;
use crate::error::{param, Result};

/// Largest context order of the built-in code.
pub const MAX_CONTEXT_ORDER: u32 = 8;

/// Ideal codeword length, in bits, of the Krichevsky–Trofimov sequential
/// estimator with `context_order` preceding bits as context.
///
/// Each bit is coded with probability `(c_b + 1/2) / (c_0 + c_1 + 1)` where
/// `c_0`, `c_1` count earlier occurrences in the same context. Positions
/// before the start of the sequence read as zeros. The probabilities of all
/// `2^n` sequences sum to one, so both the real lengths and their ceilings
/// satisfy Kraft's inequality.
pub fn kt_code_length(seq: &BitSequence, context_order: u32) -> Result<f64> {
    if context_order > MAX_CONTEXT_ORDER {
        return param(format!(
            "context order {context_order} exceeds {MAX_CONTEXT_ORDER}"
        ));
    }
    let contexts = 1usize << context_order;
    let mask = contexts - 1;
    let mut counts = vec![[0u32; 2]; contexts];
    let mut context = 0usize;
    let mut bits = 0.0;
    for &b in seq.bits() {
        let c = &mut counts[context];
        let total = (c[0] + c[1]) as f64 + 1.0;
        bits += (total / (c[b as usize] as f64 + 0.5)).log2();
        c[b as usize] += 1;
        context = ((context << 1) | b as usize) & mask;
    }
    Ok(bits)
}
