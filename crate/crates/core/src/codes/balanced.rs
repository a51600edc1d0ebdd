//! Constant-weight codes from the `0 -> 01`, `1 -> 10` doubling map.

use rand::Rng;

use super::BlockCode;
use crate::bits::{BitWord, LengthMismatch};

/// Doubles a word: bit `b` becomes `b, !b`.
pub fn balance(word: &BitWord) -> BitWord {
    let mut out = BitWord::zeros(2 * word.len());
    for (i, b) in word.iter().enumerate() {
        out.set(2 * i + usize::from(!b), true);
    }
    out
}

/// Hamming weight of the bitwise OR.
pub fn or_weight(a: &BitWord, b: &BitWord) -> Result<usize, LengthMismatch> {
    Ok(a.or(b)?.weight())
}

/// Every codeword has weight exactly `n_c / 2`.
#[derive(Debug, Clone)]
pub struct BalancedCode {
    base: BlockCode,
}

impl BalancedCode {
    pub fn new(base: BlockCode) -> Self {
        BalancedCode { base }
    }

    pub fn base(&self) -> &BlockCode {
        &self.base
    }

    pub fn dimension(&self) -> usize {
        self.base.dimension()
    }

    /// `n_c`.
    pub fn len(&self) -> usize {
        2 * self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.base.len()
    }

    /// Each differing base bit differs in both doubled positions.
    pub fn min_distance(&self) -> usize {
        2 * self.base.min_distance()
    }

    pub fn relative_distance(&self) -> f64 {
        self.base.relative_distance()
    }

    /// `k / n_c`.
    pub fn rate(&self) -> f64 {
        self.dimension() as f64 / self.len() as f64
    }

    pub fn encode(&self, message: &BitWord) -> BitWord {
        balance(&self.base.encode(message))
    }

    /// Uniform codeword (encoding is injective, so a uniform message suffices).
    pub fn sample_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> BitWord {
        self.encode(&self.base.random_message(rng))
    }

    pub fn codewords(&self) -> Option<Vec<BitWord>> {
        Some(self.base.codewords()?.iter().map(balance).collect())
    }
}
