//! Packed binary words.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A fixed-length binary word packed into 64-bit blocks. Bit `i` lives in
/// block `i / 64` at position `i % 64`; unused high bits of the last block
/// are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitWord {
    len: usize,
    blocks: Vec<u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitParseError {
    #[error("invalid character {0:?} in binary word")]
    InvalidChar(char),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("word lengths differ: {left} vs {right}")]
pub struct LengthMismatch {
    pub left: usize,
    pub right: usize,
}

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        BitWord {
            len,
            blocks: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut w = BitWord {
            len,
            blocks: vec![u64::MAX; len.div_ceil(64)],
        };
        w.clear_tail();
        w
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut w = BitWord::zeros(0);
        for b in bits {
            w.push(b);
        }
        w
    }

    /// The low `len` bits of `value`, bit `i` of the word being bit `i` of the integer.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut w = BitWord::zeros(len);
        if len > 0 {
            w.blocks[0] = if len == 64 {
                value
            } else {
                value & ((1u64 << len) - 1)
            };
        }
        w
    }

    /// Inverse of [`BitWord::from_u64`] for words of at most 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64);
        self.blocks.first().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.blocks[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if bit {
            self.blocks[i >> 6] |= mask;
        } else {
            self.blocks[i >> 6] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 64 == 0 {
            self.blocks.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn extend_from(&mut self, other: &BitWord) {
        for b in other.iter() {
            self.push(b);
        }
    }

    /// Bits `start..start + len` as a new word.
    pub fn slice(&self, start: usize, len: usize) -> BitWord {
        BitWord::from_bits((start..start + len).map(|i| self.get(i)))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Hamming distance; panics on length mismatch (use [`BitWord::try_distance`] otherwise).
    pub fn distance(&self, other: &BitWord) -> usize {
        assert_eq!(
            self.len, other.len,
            "distance between words of different length"
        );
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn try_distance(&self, other: &BitWord) -> Result<usize, LengthMismatch> {
        self.check_len(other)?;
        Ok(self.distance(other))
    }

    pub fn xor_assign(&mut self, other: &BitWord) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a ^= b;
        }
    }

    pub fn or(&self, other: &BitWord) -> Result<BitWord, LengthMismatch> {
        self.check_len(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a | b)
            .collect();
        Ok(BitWord {
            len: self.len,
            blocks,
        })
    }

    fn check_len(&self, other: &BitWord) -> Result<(), LengthMismatch> {
        if self.len == other.len {
            Ok(())
        } else {
            Err(LengthMismatch {
                left: self.len,
                right: other.len,
            })
        }
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl FromStr for BitWord {
    type Err = BitParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut w = BitWord::zeros(0);
        for c in s.chars() {
            match c {
                '0' => w.push(false),
                '1' => w.push(true),
                other => return Err(BitParseError::InvalidChar(other)),
            }
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_display_and_weight() {
        let w: BitWord = "100110".parse().unwrap();
        assert_eq!(w.len(), 6);
        assert_eq!(w.weight(), 3);
        assert_eq!(w.to_string(), "100110");
        assert!("10x".parse::<BitWord>().is_err());
    }

    #[test]
    fn or_and_distance() {
        let a: BitWord = "0011".parse().unwrap();
        let b: BitWord = "0101".parse().unwrap();
        assert_eq!(a.or(&b).unwrap().to_string(), "0111");
        assert_eq!(a.distance(&b), 2);
        let c: BitWord = "01".parse().unwrap();
        assert_eq!(a.or(&c), Err(LengthMismatch { left: 4, right: 2 }));
    }

    #[test]
    fn long_words_cross_block_boundaries() {
        let mut w = BitWord::zeros(130);
        w.set(0, true);
        w.set(64, true);
        w.set(129, true);
        assert_eq!(w.weight(), 3);
        assert!(w.get(129));
        assert_eq!(BitWord::ones(130).weight(), 130);
        assert_eq!(w.slice(63, 3).to_string(), "010");
    }

    #[test]
    fn u64_round_trip() {
        let w = BitWord::from_u64(0b1011, 4);
        assert_eq!(w.to_string(), "1101");
        assert_eq!(w.to_u64(), 0b1011);
    }
}
