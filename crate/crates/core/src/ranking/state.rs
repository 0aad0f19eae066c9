use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Largest alphabet a fully materialized ordering is built for.
pub const MAX_MATERIALIZED_ALPHABET: u64 = 1 << 22;

/// How the ordering reacts to an observed letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discipline {
    /// Move-to-front: the letter goes to the top of the stack.
    #[serde(rename = "bookstack")]
    BookStack,
    /// Letters kept sorted by non-increasing occurrence count. The observed
    /// letter moves to the top of its count group, then its count grows by
    /// one, leaving it at the bottom of the next group up.
    Order,
}

impl Discipline {
    pub fn name(self) -> &'static str {
        match self {
            Discipline::BookStack => "bookstack",
            Discipline::Order => "order",
        }
    }
}

/// Explicit ordering `ν` of a small alphabet, updated letter by letter.
///
/// Each step costs O(S); [`super::book_stack_process`] and
/// [`super::order_test_process`] are the scalable equivalents.
#[derive(Debug, Clone)]
pub struct RankingState {
    discipline: Discipline,
    // Letters from top (position 1) to bottom.
    order: Vec<u64>,
    position: Vec<usize>,
    counts: Vec<u64>,
}

impl RankingState {
    /// Starts from the identity order: letter `i` at position `i + 1`.
    pub fn new(discipline: Discipline, alphabet_size: u64) -> Result<Self> {
        if alphabet_size == 0 || alphabet_size > MAX_MATERIALIZED_ALPHABET {
            return param(format!(
                "alphabet size {alphabet_size} outside 1..={MAX_MATERIALIZED_ALPHABET}"
            ));
        }
        Self::with_initial_order(discipline, (0..alphabet_size).collect())
    }

    /// Starts from `order`, listed top to bottom; it must be a permutation
    /// of `0..order.len()`.
    pub fn with_initial_order(discipline: Discipline, order: Vec<u64>) -> Result<Self> {
        let s = order.len();
        let mut position = vec![usize::MAX; s];
        for (i, &letter) in order.iter().enumerate() {
            if letter as usize >= s || position[letter as usize] != usize::MAX {
                return param("initial order is not a permutation");
            }
            position[letter as usize] = i;
        }
        Ok(Self {
            discipline,
            order,
            position,
            counts: vec![0; s],
        })
    }

    pub fn discipline(&self) -> Discipline {
        self.discipline
    }

    /// Letters from top to bottom.
    pub fn order(&self) -> &[u64] {
        &self.order
    }

    /// Occurrence counts indexed by letter.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// 1-based position of `letter`.
    pub fn position(&self, letter: u64) -> u64 {
        self.position[letter as usize] as u64 + 1
    }

    /// Records `letter`, returning its 1-based position before the update.
    pub fn observe(&mut self, letter: u64) -> Result<u64> {
        let idx = letter as usize;
        if idx >= self.order.len() {
            return param(format!(
                "letter {letter} outside alphabet of {}",
                self.order.len()
            ));
        }
        let p = self.position[idx];
        let top = match self.discipline {
            Discipline::BookStack => 0,
            Discipline::Order => {
                let c = self.counts[idx];
                let mut q = p;
                while q > 0 && self.counts[self.order[q - 1] as usize] == c {
                    q -= 1;
                }
                q
            }
        };
        self.order[top..=p].rotate_right(1);
        for i in top..=p {
            self.position[self.order[i] as usize] = i;
        }
        self.counts[idx] += 1;
        Ok(p as u64 + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_based(order: &[u64]) -> Vec<u64> {
        order.iter().map(|&a| a + 1).collect()
    }

    #[test]
    fn book_stack_intermediate_orders() {
        // a3 a6 a3 a3 a6 a1 a6 a1 over a six-letter alphabet.
        let mut st = RankingState::new(Discipline::BookStack, 6).unwrap();
        assert_eq!(one_based(st.order()), vec![1, 2, 3, 4, 5, 6]);
        st.observe(2).unwrap();
        assert_eq!(one_based(st.order()), vec![3, 1, 2, 4, 5, 6]);
        st.observe(5).unwrap();
        assert_eq!(one_based(st.order()), vec![6, 3, 1, 2, 4, 5]);
    }

    #[test]
    fn order_discipline_orders() {
        // a3 a2 a3 over a three-letter alphabet.
        let mut st = RankingState::new(Discipline::Order, 3).unwrap();
        let mut seen = vec![one_based(st.order())];
        for letter in [2, 1, 2] {
            st.observe(letter).unwrap();
            seen.push(one_based(st.order()));
        }
        assert_eq!(
            seen,
            vec![vec![1, 2, 3], vec![3, 1, 2], vec![3, 2, 1], vec![3, 2, 1]]
        );
    }

    #[test]
    fn order_sorted_by_count() {
        let mut st = RankingState::new(Discipline::Order, 8).unwrap();
        for &letter in &[5, 5, 5, 2, 2, 7, 0, 5, 2, 1, 1, 1, 1] {
            st.observe(letter).unwrap();
            let counts: Vec<u64> = st
                .order()
                .iter()
                .map(|&a| st.counts()[a as usize])
                .collect();
            assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
        }
        assert_eq!(st.counts(), &[1, 4, 3, 0, 0, 4, 0, 1]);
    }

    #[test]
    fn repeated_letter_stays_on_top() {
        for discipline in [Discipline::BookStack, Discipline::Order] {
            let mut st = RankingState::new(discipline, 16).unwrap();
            let first = st.observe(9).unwrap();
            assert_eq!(first, 10);
            for _ in 0..20 {
                assert_eq!(st.observe(9).unwrap(), 1);
            }
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(RankingState::new(Discipline::Order, 0).is_err());
        assert!(RankingState::with_initial_order(Discipline::Order, vec![0, 0, 1]).is_err());
        let mut st = RankingState::new(Discipline::BookStack, 4).unwrap();
        assert!(st.observe(4).is_err());
    }
}
