//! Randomness tests built on source coding.
//!
//! * [`compression`]: any lossless code turns into a test with a provable
//!   Type I error bound, plus a built-in universal (KT) code and the byte
//!   rule for external compressors.
//! * [`ranking`]: the book-stack (move-to-front) and order tests over
//!   `s`-bit words, scored by chi-square.
//! * [`processes`]: RANDU, fair coins and the two-faced Markov sources that
//!   look random to every test with block length up to their memory.
//! * [`advisor`]: block lengths from the birthday problem.
//! * [`harness`]: repeated-trial experiments and their reports.

pub mod advisor;
pub mod bitstream;
pub mod compression;
mod error;
pub mod harness;
pub mod processes;
pub mod ranking;

use serde::{Deserialize, Serialize};

pub use bitstream::{BitOrder, BitSequence, BlockStream};
pub use error::{Error, Result};

/// Whether the null hypothesis of fair-coin bits survives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn from_reject(reject: bool) -> Self {
        if reject {
            Decision::Reject
        } else {
            Decision::Accept
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Accept => "accept",
            Decision::Reject => "reject",
        }
    }
}
