//! Book-stack and order tests over `s`-bit words.
//!
//! Both tests keep the alphabet `{0,1}^s` in a self-organizing order and
//! count how often the next word is found in each subset of positions
//! `A_1, …, A_r`. Under the null hypothesis each word is found at every
//! position with probability `1/S`, so the tallies are scored with a
//! chi-square test with `r − 1` degrees of freedom.
//!
//! Positions are tallied before the order is updated. The initial order is
//! the identity on word values (word `w` at position `w + 1`).
//!
//! # Scalable position tracking
//!
//! Words never observed keep their initial relative order below every
//! observed word, so the position of an unseen word `w` is
//! `seen + 1 + w − #{observed words < w}`. Observed words are ranked with a
//! binary indexed tree over keys assigned offline:
//!
//! * book stack: the time of the word's latest occurrence (newest on top);
//! * order test: the pair (count, time the word reached that count), higher
//!   counts first and earlier arrivals first within a count.
//!
//! Memory is linear in the number of words processed and each step costs
//! `O(log m)`, independent of `S`, so `s = 24` and beyond is cheap.

mod fenwick;
mod partition;
mod state;

use std::cmp::Reverse;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::checked_gamma_ur;

use crate::bitstream::BitSequence;
use crate::error::{param, Result};
use crate::Decision;
use fenwick::Fenwick;

pub use partition::{default_first_size, PartitionSpec};
pub use state::{Discipline, RankingState, MAX_MATERIALIZED_ALPHABET};

/// Hits per subset of positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetCounts {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl SubsetCounts {
    fn tally(positions: &[u64], partition: &PartitionSpec) -> Self {
        let mut counts = vec![0u64; partition.subset_count()];
        for &p in positions {
            counts[partition.subset_of(p)] += 1;
        }
        Self {
            counts,
            total: positions.len() as u64,
        }
    }
}

/// Outcome of a ranking test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test: Discipline,
    pub statistic_x2: f64,
    pub degrees_of_freedom: u32,
    pub p_value: f64,
    pub decision: Decision,
    pub alpha: f64,
    pub parameters: RankingParams,
}

/// Parameters a ranking test ran with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingParams {
    pub block_length: u32,
    pub alphabet_size: u64,
    pub cuts: Vec<u64>,
    pub n_bits: u64,
    pub words: u64,
    pub counts: Vec<u64>,
}

fn check_words(words: &[u64], alphabet_size: u64) -> Result<()> {
    if let Some(&w) = words.iter().find(|&&w| w >= alphabet_size) {
        return param(format!("word {w} outside alphabet of size {alphabet_size}"));
    }
    Ok(())
}

/// Sorted distinct words and, for each input word, its index among them.
fn compress(words: &[u64]) -> (Vec<u64>, Vec<usize>) {
    let mut distinct = words.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let ids = words
        .iter()
        .map(|w| distinct.binary_search(w).expect("word is present"))
        .collect();
    (distinct, ids)
}

/// Tracks which words have been observed, for the unseen-word position
/// formula.
struct SeenSet {
    tree: Fenwick,
    count: u64,
}

impl SeenSet {
    fn new(distinct: usize) -> Self {
        Self {
            tree: Fenwick::new(distinct),
            count: 0,
        }
    }

    /// Position of the unseen word `w` whose compressed index is `id`.
    fn unseen_position(&self, w: u64, id: usize) -> u64 {
        let seen_below = self.tree.prefix(id) as u64;
        self.count + 1 + w - seen_below
    }

    fn insert(&mut self, id: usize) {
        self.tree.add(id, 1);
        self.count += 1;
    }
}

const UNSEEN: usize = usize::MAX;

/// 1-based book-stack position of each word just before it is moved to the
/// top.
pub fn book_stack_positions(words: &[u64], alphabet_size: u64) -> Result<Vec<u64>> {
    check_words(words, alphabet_size)?;
    let (distinct, ids) = compress(words);
    let mut recency = Fenwick::new(words.len());
    let mut seen = SeenSet::new(distinct.len());
    let mut last = vec![UNSEEN; distinct.len()];
    let mut positions = Vec::with_capacity(words.len());
    for (t, (&w, &id)) in words.iter().zip(&ids).enumerate() {
        let pos = match last[id] {
            UNSEEN => {
                let pos = seen.unseen_position(w, id);
                seen.insert(id);
                pos
            }
            prev => {
                // One mark per observed word; count those touched after `prev`.
                let newer = seen.count - recency.prefix(prev + 1) as u64;
                recency.add(prev, -1);
                newer + 1
            }
        };
        recency.add(t, 1);
        last[id] = t;
        positions.push(pos);
    }
    Ok(positions)
}

/// 1-based order-test position of each word just before its count grows.
pub fn order_test_positions(words: &[u64], alphabet_size: u64) -> Result<Vec<u64>> {
    check_words(words, alphabet_size)?;
    let (distinct, ids) = compress(words);
    let m = words.len();

    // Key of step t: the count reached at t, and t itself.
    let mut running = vec![0u64; distinct.len()];
    let reached: Vec<u64> = ids
        .iter()
        .map(|&id| {
            running[id] += 1;
            running[id]
        })
        .collect();
    let mut by_key: Vec<usize> = (0..m).collect();
    by_key.sort_unstable_by_key(|&t| (Reverse(reached[t]), t));
    let mut rank = vec![0usize; m];
    for (r, &t) in by_key.iter().enumerate() {
        rank[t] = r;
    }

    let mut keys = Fenwick::new(m);
    let mut seen = SeenSet::new(distinct.len());
    let mut current = vec![UNSEEN; distinct.len()];
    let mut positions = Vec::with_capacity(m);
    for (t, (&w, &id)) in words.iter().zip(&ids).enumerate() {
        let pos = match current[id] {
            UNSEEN => {
                let pos = seen.unseen_position(w, id);
                seen.insert(id);
                pos
            }
            key => {
                let above = keys.prefix(key) as u64;
                keys.add(key, -1);
                above + 1
            }
        };
        keys.add(rank[t], 1);
        current[id] = rank[t];
        positions.push(pos);
    }
    Ok(positions)
}

/// Subset tallies of the book-stack positions.
pub fn book_stack_process(words: &[u64], partition: &PartitionSpec) -> Result<SubsetCounts> {
    let positions = book_stack_positions(words, partition.alphabet_size())?;
    Ok(SubsetCounts::tally(&positions, partition))
}

/// Subset tallies of the order-test positions.
pub fn order_test_process(words: &[u64], partition: &PartitionSpec) -> Result<SubsetCounts> {
    let positions = order_test_positions(words, partition.alphabet_size())?;
    Ok(SubsetCounts::tally(&positions, partition))
}

pub fn process(
    discipline: Discipline,
    words: &[u64],
    partition: &PartitionSpec,
) -> Result<SubsetCounts> {
    match discipline {
        Discipline::BookStack => book_stack_process(words, partition),
        Discipline::Order => order_test_process(words, partition),
    }
}

/// Pearson statistic of the tallies against expected counts `n·|A_i|/S`.
pub fn chi_square_statistic(counts: &SubsetCounts, partition: &PartitionSpec) -> Result<f64> {
    if counts.counts.len() != partition.subset_count() {
        return param("tallies and partition disagree on the number of subsets");
    }
    if counts.total == 0 {
        return param("no words were processed");
    }
    let n = counts.total as f64;
    let s = partition.alphabet_size() as f64;
    let mut x2 = 0.0;
    for (&observed, size) in counts.counts.iter().zip(partition.subset_sizes()) {
        let expected = n * size as f64 / s;
        if expected <= 0.0 {
            return param("a subset has zero expected count");
        }
        let diff = observed as f64 - expected;
        x2 += diff * diff / expected;
    }
    Ok(x2)
}

/// Upper tail `P(χ²_df > x2)`.
pub fn chi_square_pvalue(x2: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return param("degrees of freedom must be at least 1");
    }
    if x2.is_nan() || x2 < 0.0 {
        return param(format!("chi-square statistic {x2} is negative"));
    }
    if x2 == 0.0 {
        return Ok(1.0);
    }
    if x2.is_infinite() {
        return Ok(0.0);
    }
    checked_gamma_ur(df as f64 / 2.0, x2 / 2.0).map_err(|e| crate::Error::Parameter(e.to_string()))
}

/// Blocks `seq` into `s`-bit words, runs the chosen discipline and scores
/// the tallies. `partition` defaults to `|A_1| = ⌈5·√(2^s)⌉`, `r = 2`.
pub fn run_ranking_test(
    seq: &BitSequence,
    discipline: Discipline,
    s: u32,
    partition: Option<PartitionSpec>,
    alpha: f64,
) -> Result<TestOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return param(format!("alpha = {alpha} must lie strictly between 0 and 1"));
    }
    let blocks = seq.to_blocks(s)?;
    let alphabet_size = blocks.alphabet_size();
    let partition = match partition {
        Some(p) => p,
        None => PartitionSpec::default_for(alphabet_size)?,
    };
    if partition.alphabet_size() != alphabet_size {
        return param(format!(
            "partition covers {} positions but s = {s} gives {alphabet_size}",
            partition.alphabet_size()
        ));
    }
    if blocks.word_count() == 0 {
        return param(format!(
            "a {}-bit sample has no complete {s}-bit word",
            seq.len()
        ));
    }
    let tallies = process(discipline, blocks.ordinals(), &partition)?;
    let statistic_x2 = chi_square_statistic(&tallies, &partition)?;
    let degrees_of_freedom = partition.subset_count() as u32 - 1;
    let p_value = chi_square_pvalue(statistic_x2, degrees_of_freedom)?;
    Ok(TestOutcome {
        test: discipline,
        statistic_x2,
        degrees_of_freedom,
        p_value,
        decision: Decision::from_reject(p_value < alpha),
        alpha,
        parameters: RankingParams {
            block_length: s,
            alphabet_size,
            cuts: partition.cuts().to_vec(),
            n_bits: seq.len() as u64,
            words: tallies.total,
            counts: tallies.counts,
        },
    })
}
