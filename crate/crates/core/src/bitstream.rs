//! Binary samples and their segmentation into fixed-length words.
//!
//! Files are read as raw bytes with no header. Each byte expands to eight
//! bits, most significant bit first unless [`BitOrder::Lsb`] is requested.
//! Words of `s` bits are read most significant bit first, and any trailing
//! bits that do not fill a whole word are dropped.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Largest supported word length in bits.
pub const MAX_BLOCK_LENGTH: u32 = 32;

/// Order in which the bits of a byte are expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitOrder {
    #[default]
    Msb,
    Lsb,
}

/// A sequence of binary symbols, stored one symbol per byte.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitSequence {
    bits: Vec<u8>,
}

impl BitSequence {
    /// Builds a sequence from symbols that must each be 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return param(format!("symbol at index {pos} is not binary"));
        }
        Ok(Self { bits })
    }

    pub fn from_bytes(data: &[u8], order: BitOrder) -> Self {
        let mut bits = Vec::with_capacity(data.len() * 8);
        for &byte in data {
            for i in 0..8 {
                let shift = match order {
                    BitOrder::Msb => 7 - i,
                    BitOrder::Lsb => i,
                };
                bits.push((byte >> shift) & 1);
            }
        }
        Self { bits }
    }

    pub fn read_file(path: impl AsRef<Path>, order: BitOrder) -> Result<Self> {
        let data = std::fs::read(path)?;
        Ok(Self::from_bytes(&data, order))
    }

    /// Packs the bits into bytes, msb-first. A partial final byte is
    /// padded with zero bits.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | (b << (7 - i)))
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Keeps only the first `n` bits.
    pub fn truncate(&mut self, n: usize) {
        self.bits.truncate(n);
    }

    pub fn to_blocks(&self, s: u32) -> Result<BlockStream> {
        if !(1..=MAX_BLOCK_LENGTH).contains(&s) {
            return param(format!("block length {s} outside 1..={MAX_BLOCK_LENGTH}"));
        }
        let ordinals = self
            .bits
            .chunks_exact(s as usize)
            .map(|word| word.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
            .collect();
        Ok(BlockStream {
            block_length: s,
            ordinals,
        })
    }
}

impl From<Vec<bool>> for BitSequence {
    fn from(bits: Vec<bool>) -> Self {
        Self {
            bits: bits.into_iter().map(u8::from).collect(),
        }
    }
}

/// A bit sequence cut into `s`-bit words, each stored as its integer value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStream {
    block_length: u32,
    ordinals: Vec<u64>,
}

impl BlockStream {
    pub fn block_length(&self) -> u32 {
        self.block_length
    }

    /// Number of distinct words, `2^s`.
    pub fn alphabet_size(&self) -> u64 {
        1u64 << self.block_length
    }

    pub fn ordinals(&self) -> &[u64] {
        &self.ordinals
    }

    pub fn word_count(&self) -> usize {
        self.ordinals.len()
    }

    /// Expands the words back into bits.
    pub fn to_bits(&self) -> BitSequence {
        let s = self.block_length;
        let bits = self
            .ordinals
            .iter()
            .flat_map(|&w| (0..s).rev().map(move |i| ((w >> i) & 1) as u8))
            .collect();
        BitSequence { bits }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn seq(bits: &[u8]) -> BitSequence {
        BitSequence::from_bits(bits.to_vec()).unwrap()
    }

    #[test]
    fn msb_expansion() {
        let s = BitSequence::from_bytes(&[0xB4], BitOrder::Msb);
        assert_eq!(s.bits(), &[1, 0, 1, 1, 0, 1, 0, 0]);
    }

    #[test]
    fn lsb_expansion() {
        let s = BitSequence::from_bytes(&[0x01], BitOrder::Lsb);
        assert_eq!(s.bits(), &[1, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn empty_input() {
        let s = BitSequence::from_bytes(&[], BitOrder::Msb);
        assert!(s.is_empty());
        assert_eq!(s.len(), 0);
    }

    #[test]
    fn non_binary_symbol_rejected() {
        assert!(BitSequence::from_bits(vec![0, 1, 2]).is_err());
    }

    #[test]
    fn blocks_of_three() {
        let b = seq(&[1, 0, 1, 1, 0, 0]).to_blocks(3).unwrap();
        assert_eq!(b.ordinals(), &[5, 4]);
        assert_eq!(b.word_count(), 2);
    }

    #[test]
    fn trailing_bits_dropped() {
        let b = seq(&[1, 0, 1, 1, 0, 0, 1]).to_blocks(3).unwrap();
        assert_eq!(b.ordinals(), &[5, 4]);
    }

    #[test]
    fn whole_sequence_is_one_block() {
        let s = seq(&[1, 1, 0, 1, 0]);
        let b = s.to_blocks(5).unwrap();
        assert_eq!(b.ordinals(), &[0b11010]);
    }

    #[test]
    fn block_length_bounds() {
        let s = seq(&[1; 40]);
        assert!(s.to_blocks(0).is_err());
        assert!(s.to_blocks(33).is_err());
        let b = s.to_blocks(32).unwrap();
        assert_eq!(b.ordinals(), &[u32::MAX as u64]);
        assert_eq!(b.alphabet_size(), 1 << 32);
    }

    #[test]
    fn pack_pads_final_byte() {
        assert_eq!(seq(&[1, 0, 1]).to_bytes(), vec![0b1010_0000]);
    }

    #[test]
    fn byte_ordinals_are_uniform_for_random_input() {
        let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
        let mut data = vec![0u8; 1_000_000];
        rng.fill_bytes(&mut data);
        let blocks = BitSequence::from_bytes(&data, BitOrder::Msb)
            .to_blocks(8)
            .unwrap();
        let mut freq = [0u64; 256];
        for &w in blocks.ordinals() {
            freq[w as usize] += 1;
        }
        let n = blocks.word_count() as f64;
        let p = 1.0 / 256.0;
        let sigma = (n * p * (1.0 - p)).sqrt();
        for (value, &f) in freq.iter().enumerate() {
            assert!(
                (f as f64 - n * p).abs() < 5.0 * sigma,
                "value {value} seen {f} times"
            );
        }
    }

    proptest! {
        #[test]
        fn blocks_round_trip(bits in proptest::collection::vec(0u8..2, 0..300), s in 1u32..=32) {
            let sequence = seq(&bits);
            let blocks = sequence.to_blocks(s).unwrap();
            let m = bits.len() / s as usize;
            prop_assert_eq!(blocks.word_count(), m);
            prop_assert!(blocks.ordinals().iter().all(|&w| w < 1u64 << s));
            let expanded = blocks.to_bits();
            prop_assert_eq!(expanded.bits(), &bits[..m * s as usize]);
        }

        #[test]
        fn bytes_round_trip(data in proptest::collection::vec(any::<u8>(), 0..64)) {
            let sequence = BitSequence::from_bytes(&data, BitOrder::Msb);
            prop_assert_eq!(sequence.len(), data.len() * 8);
            prop_assert_eq!(sequence.to_bytes(), data);
        }
    }
}
