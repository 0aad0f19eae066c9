use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::Decision;

/// Word length, alphabet and significance level of a compression gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub n: u64,
    pub alphabet_size: u64,
    pub alpha: f64,
}

impl GateParams {
    /// `alpha` may be 1, where the log term vanishes.
    pub fn new(n: u64, alphabet_size: u64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return param("word length must be at least 1");
        }
        if alphabet_size < 2 {
            return param("alphabet needs at least two letters");
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return param(format!("alpha = {alpha} outside (0, 1]"));
        }
        Ok(Self {
            n,
            alphabet_size,
            alpha,
        })
    }

    /// `n·log₂|A|`, the length of the word written out plainly.
    pub fn raw_bits(&self) -> f64 {
        self.n as f64 * (self.alphabet_size as f64).log2()
    }

    /// `|A|^n`, when it fits in 128 bits.
    fn word_count(&self) -> Option<u128> {
        let n = u32::try_from(self.n).ok()?;
        (self.alphabet_size as u128).checked_pow(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub decision: Decision,
    pub observed_length_bits: f64,
    pub critical_value_bits: f64,
    pub randomized: bool,
    /// Probability of accepting at the boundary length (randomized test only).
    pub acceptance_probability: Option<f64>,
}

/// Critical value for any injective code: `n·log₂|A| − log₂(1/α) − 1`.
pub fn gamma_critical(params: &GateParams) -> f64 {
    params.raw_bits() + params.alpha.log2() - 1.0
}

/// Critical value for uniquely decodable codes: `n·log₂|A| − log₂(1/α)`.
pub fn gamma_hat_critical(params: &GateParams) -> f64 {
    params.raw_bits() + params.alpha.log2()
}

fn threshold_outcome(observed: f64, critical: f64) -> Result<GateOutcome> {
    if observed.is_nan() || observed < 0.0 {
        return param(format!("observed length {observed} is negative"));
    }
    Ok(GateOutcome {
        decision: Decision::from_reject(observed <= critical),
        observed_length_bits: observed,
        critical_value_bits: critical,
        randomized: false,
        acceptance_probability: None,
    })
}

/// Rejects randomness when the codeword is no longer than [`gamma_critical`].
pub fn gamma_test(observed_len_bits: f64, params: &GateParams) -> Result<GateOutcome> {
    threshold_outcome(observed_len_bits, gamma_critical(params))
}

/// Rejects randomness when the codeword is no longer than
/// [`gamma_hat_critical`]. Only valid for codes satisfying Kraft's
/// inequality.
pub fn gamma_hat_test(observed_len_bits: f64, params: &GateParams) -> Result<GateOutcome> {
    threshold_outcome(observed_len_bits, gamma_hat_critical(params))
}

/// Number of words per codeword length: `histogram[j] = |A_j|`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CodeLengthLedger {
    histogram: Vec<u64>,
}

impl CodeLengthLedger {
    pub fn from_histogram(histogram: Vec<u64>) -> Self {
        Self { histogram }
    }

    pub fn from_lengths<I: IntoIterator<Item = u64>>(lengths: I) -> Self {
        let mut histogram = Vec::new();
        for len in lengths {
            let len = len as usize;
            if histogram.len() <= len {
                histogram.resize(len + 1, 0);
            }
            histogram[len] += 1;
        }
        Self { histogram }
    }

    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn total(&self) -> u128 {
        self.histogram.iter().map(|&c| c as u128).sum()
    }
}

/// The randomized boundary of the exact-size test: lengths below
/// `boundary` are rejected, above it accepted, and at it accepted with
/// probability `accept_at_boundary`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpsilonBoundary {
    /// `g + 1`.
    pub boundary: u64,
    pub accept_at_boundary: f64,
    /// `Σ_{j<boundary} |A_j|`.
    pub below: u64,
}

impl UpsilonBoundary {
    /// `g`, which is `-1` when the shortest length alone exceeds `α|A|^n`.
    pub fn g(&self) -> i64 {
        self.boundary as i64 - 1
    }
}

/// Finds `g` with `Σ_{j≤g} |A_j| ≤ α|A|^n < Σ_{j≤g+1} |A_j|`, all sums from
/// `j = 0`.
pub fn upsilon_boundary(ledger: &CodeLengthLedger, params: &GateParams) -> Result<UpsilonBoundary> {
    let words = params.word_count().ok_or_else(|| {
        Error::Resource(format!(
            "{}^{} words cannot be tabulated",
            params.alphabet_size, params.n
        ))
    })?;
    if ledger.total() != words {
        return param(format!(
            "ledger covers {} words, expected {words}",
            ledger.total()
        ));
    }
    let budget = params.alpha * words as f64;
    let mut below = 0u64;
    for (len, &count) in ledger.histogram.iter().enumerate() {
        let through = below + count;
        if through as f64 > budget {
            return Ok(UpsilonBoundary {
                boundary: len as u64,
                accept_at_boundary: (through as f64 - budget) / count as f64,
                below,
            });
        }
        below = through;
    }
    // Only reachable for α = 1: every word is rejected.
    Ok(UpsilonBoundary {
        boundary: ledger.histogram.len() as u64,
        accept_at_boundary: 0.0,
        below,
    })
}

/// Randomized test with Type I error exactly `α`. `coin` is a uniform draw
/// from `[0, 1)` used only at the boundary length.
pub fn upsilon_test(
    observed_len: u64,
    ledger: &CodeLengthLedger,
    params: &GateParams,
    coin: f64,
) -> Result<GateOutcome> {
    if !(0.0..1.0).contains(&coin) {
        return param(format!("coin {coin} outside [0, 1)"));
    }
    let b = upsilon_boundary(ledger, params)?;
    let reject = match observed_len.cmp(&b.boundary) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => coin >= b.accept_at_boundary,
    };
    Ok(GateOutcome {
        decision: Decision::from_reject(reject),
        observed_length_bits: observed_len as f64,
        critical_value_bits: b.g() as f64,
        randomized: true,
        acceptance_probability: Some(b.accept_at_boundary),
    })
}

/// Rejection probability of [`upsilon_test`] when every word is equally
/// likely, computed from the ledger.
pub fn upsilon_rejection_probability(
    ledger: &CodeLengthLedger,
    params: &GateParams,
) -> Result<f64> {
    let b = upsilon_boundary(ledger, params)?;
    let at_boundary = ledger
        .histogram
        .get(b.boundary as usize)
        .copied()
        .unwrap_or(0);
    let rejected = b.below as f64 + at_boundary as f64 * (1.0 - b.accept_at_boundary);
    Ok(rejected / ledger.total() as f64)
}
