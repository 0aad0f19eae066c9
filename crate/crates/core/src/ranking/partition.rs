use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Split of the stack positions `1..=S` into consecutive subsets
/// `A_1 = {1..k_1}`, `A_2 = {k_1+1..k_2}`, …, `A_r = {k_{r-1}+1..S}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    alphabet_size: u64,
    cuts: Vec<u64>,
}

impl PartitionSpec {
    /// `cuts` are the upper ends `k_1 < k_2 < … < k_r`; the last must be `S`.
    pub fn new(alphabet_size: u64, cuts: Vec<u64>) -> Result<Self> {
        if alphabet_size < 2 {
            return param("alphabet needs at least two letters");
        }
        if cuts.len() < 2 {
            return param("a partition needs at least two subsets");
        }
        if cuts[0] == 0 || cuts.windows(2).any(|w| w[0] >= w[1]) {
            return param(format!(
                "cut points {cuts:?} are not strictly increasing from 1"
            ));
        }
        if *cuts.last().unwrap() != alphabet_size {
            return param(format!(
                "last cut point must equal the alphabet size {alphabet_size}"
            ));
        }
        Ok(Self {
            alphabet_size,
            cuts,
        })
    }

    /// Two subsets with `|A_1| = first_size`.
    pub fn two_way(alphabet_size: u64, first_size: u64) -> Result<Self> {
        Self::new(alphabet_size, vec![first_size, alphabet_size])
    }

    /// Two subsets with `|A_1| = ⌈5·√S⌉`.
    pub fn default_for(alphabet_size: u64) -> Result<Self> {
        Self::two_way(alphabet_size, default_first_size(alphabet_size))
    }

    pub fn alphabet_size(&self) -> u64 {
        self.alphabet_size
    }

    pub fn cuts(&self) -> &[u64] {
        &self.cuts
    }

    pub fn subset_count(&self) -> usize {
        self.cuts.len()
    }

    pub fn subset_sizes(&self) -> impl Iterator<Item = u64> + '_ {
        self.cuts.iter().scan(0, |prev, &cut| {
            let size = cut - *prev;
            *prev = cut;
            Some(size)
        })
    }

    /// Index of the subset containing the 1-based `position`.
    pub fn subset_of(&self, position: u64) -> usize {
        debug_assert!(position >= 1 && position <= self.alphabet_size);
        self.cuts.partition_point(|&cut| cut < position)
    }
}

/// `⌈5·√S⌉`, the first-subset size used when none is given.
pub fn default_first_size(alphabet_size: u64) -> u64 {
    (5.0 * (alphabet_size as f64).sqrt()).ceil() as u64
}
