//! Binary block codes: searched linear codes for small dimensions, Reed–Solomon
//! concatenated codes beyond that, and the balanced (constant-weight) wrapper
//! used by collision detection.

pub mod balanced;
pub mod codebook;
pub mod concatenated;
pub mod gf256;
pub mod linear;
pub mod reed_solomon;

use rand::Rng;
use thiserror::Error;

use crate::bits::BitWord;
pub use balanced::{balance, or_weight, BalancedCode};
pub use concatenated::ConcatenatedCode;
pub use linear::LinearCode;

/// Largest dimension handled by searched linear codes in [`build_block_code`].
pub const SEARCHED_MAX_DIMENSION: usize = 12;

/// Default block-length budget for [`build_block_code`].
pub const DEFAULT_MAX_LEN: usize = 1024;

const SEARCH_TRIES: usize = 200;
const SEARCH_SALT: u64 = 0x5eed_c0de;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodeError {
    #[error("message length must be at least 1")]
    ZeroDimension,
    #[error("relative distance {0} outside (0, 1]")]
    BadDistance(f64),
    #[error("no code with k={k} and relative distance {delta} found within length {max_len}")]
    Infeasible {
        k: usize,
        delta: f64,
        max_len: usize,
    },
}

/// Distance that makes `⌊δn/2⌋` corruptions decodable and keeps the relative
/// distance at least `δ`.
pub fn required_distance(delta: f64, n: usize) -> usize {
    let dn = delta * n as f64;
    let ceil = (dn - 1e-9).ceil().max(1.0) as usize;
    let half = (dn / 2.0 + 1e-9).floor() as usize;
    ceil.max(2 * half + 1)
}

#[derive(Debug, Clone)]
pub enum BlockCode {
    Linear(LinearCode),
    Concatenated(ConcatenatedCode),
}

impl BlockCode {
    /// A code of exactly `n` bits with distance at least `min_distance`.
    pub fn with_length(k: usize, n: usize, min_distance: usize) -> Option<Self> {
        if k <= linear::VERIFY_MAX_DIMENSION {
            if let Some(c) = LinearCode::search(k, n, min_distance, SEARCH_SALT, 16) {
                return Some(BlockCode::Linear(c));
            }
        }
        ConcatenatedCode::design(k, n, min_distance).map(BlockCode::Concatenated)
    }

    /// The best code of exactly `n` bits this crate can build for dimension `k`.
    pub fn best_for_length(k: usize, n: usize) -> Option<Self> {
        if k <= linear::CODEBOOK_MAX_DIMENSION {
            let tries = if k <= 10 { 64 } else { 16 };
            LinearCode::search_best(k, n, SEARCH_SALT, tries).map(BlockCode::Linear)
        } else {
            ConcatenatedCode::design(k, n, 1).map(BlockCode::Concatenated)
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            BlockCode::Linear(c) => c.dimension(),
            BlockCode::Concatenated(c) => c.dimension(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            BlockCode::Linear(c) => c.len(),
            BlockCode::Concatenated(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact for linear codes, the designed lower bound for concatenated ones.
    pub fn min_distance(&self) -> usize {
        match self {
            BlockCode::Linear(c) => c.min_distance(),
            BlockCode::Concatenated(c) => c.min_distance(),
        }
    }

    pub fn relative_distance(&self) -> f64 {
        self.min_distance() as f64 / self.len() as f64
    }

    pub fn rate(&self) -> f64 {
        self.dimension() as f64 / self.len() as f64
    }

    /// Number of bit errors always corrected by [`BlockCode::decode`].
    pub fn decoding_radius(&self) -> usize {
        (self.min_distance() - 1) / 2
    }

    pub fn encode(&self, message: &BitWord) -> BitWord {
        match self {
            BlockCode::Linear(c) => c.encode(message),
            BlockCode::Concatenated(c) => c.encode(message),
        }
    }

    /// Nearest-codeword decoding for linear codes; bounded-distance decoding
    /// (None past the radius) for concatenated codes.
    pub fn decode(&self, received: &BitWord) -> Option<BitWord> {
        match self {
            BlockCode::Linear(c) => Some(c.decode(received)),
            BlockCode::Concatenated(c) => c.decode(received),
        }
    }

    /// Uniformly random message.
    pub fn random_message<R: Rng + ?Sized>(&self, rng: &mut R) -> BitWord {
        BitWord::from_bits((0..self.dimension()).map(|_| rng.random::<bool>()))
    }

    /// Every codeword in message order, for dimensions up to 20.
    pub fn codewords(&self) -> Option<Vec<BitWord>> {
        let k = self.dimension();
        if k > 20 {
            return None;
        }
        if let BlockCode::Linear(c) = self {
            if let Some(book) = c.codebook() {
                return Some(book.to_vec());
            }
        }
        Some(
            (0..1u64 << k)
                .map(|m| self.encode(&BitWord::from_u64(m, k)))
                .collect(),
        )
    }
}

/// Shortest code this crate finds for `k` message bits and relative distance
/// `delta`, searching lengths up to [`DEFAULT_MAX_LEN`].
pub fn build_block_code(k: usize, delta: f64) -> Result<BlockCode, CodeError> {
    build_block_code_within(k, delta, DEFAULT_MAX_LEN)
}

pub fn build_block_code_within(
    k: usize,
    delta: f64,
    max_len: usize,
) -> Result<BlockCode, CodeError> {
    if k == 0 {
        return Err(CodeError::ZeroDimension);
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(CodeError::BadDistance(delta));
    }
    for n in k..=max_len {
        let d = required_distance(delta, n);
        if d > n {
            continue;
        }
        let code = if k <= SEARCHED_MAX_DIMENSION {
            LinearCode::search(k, n, d, SEARCH_SALT, SEARCH_TRIES).map(BlockCode::Linear)
        } else {
            ConcatenatedCode::design(k, n, d).map(BlockCode::Concatenated)
        };
        if let Some(c) = code {
            return Ok(c);
        }
    }
    Err(CodeError::Infeasible { k, delta, max_len })
}
