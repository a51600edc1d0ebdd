//! Searched binary linear codes with exhaustively verified minimum distance.

use std::sync::OnceLock;

use rand::Rng;

use crate::bits::BitWord;
use crate::seed::{self, Stream};

/// Codebooks are materialized for nearest-codeword decoding up to this dimension.
pub const CODEBOOK_MAX_DIMENSION: usize = 16;

/// Exhaustive minimum-distance verification is run up to this dimension.
pub const VERIFY_MAX_DIMENSION: usize = 24;

/// A systematic `[n, k]` binary linear code. The first `k` bits of every
/// codeword are the message; `min_distance` is exact.
#[derive(Debug)]
pub struct LinearCode {
    k: usize,
    n: usize,
    rows: Vec<BitWord>,
    min_distance: usize,
    codebook: OnceLock<Vec<BitWord>>,
}

impl Clone for LinearCode {
    fn clone(&self) -> Self {
        LinearCode {
            k: self.k,
            n: self.n,
            rows: self.rows.clone(),
            min_distance: self.min_distance,
            codebook: OnceLock::new(),
        }
    }
}

/// Minimum weight over nonzero codewords spanned by `rows`, or `None` as soon
/// as a codeword lighter than `floor` shows up. Walks the code in Gray order.
pub(crate) fn min_weight_at_least(rows: &[BitWord], n: usize, floor: usize) -> Option<usize> {
    let k = rows.len();
    assert!(
        k <= VERIFY_MAX_DIMENSION,
        "exhaustive scan limited to k <= {VERIFY_MAX_DIMENSION}"
    );
    let mut word = BitWord::zeros(n);
    let mut best = usize::MAX;
    for i in 1u64..(1u64 << k) {
        word.xor_assign(&rows[i.trailing_zeros() as usize]);
        let w = word.weight();
        if w < floor {
            return None;
        }
        best = best.min(w);
    }
    Some(if k == 0 { n } else { best })
}

impl LinearCode {
    /// Repetition code of length `n`.
    pub fn repetition(n: usize) -> Self {
        assert!(n >= 1);
        LinearCode {
            k: 1,
            n,
            rows: vec![BitWord::ones(n)],
            min_distance: n,
            codebook: OnceLock::new(),
        }
    }

    /// Builds a code from explicit generator rows and verifies its distance.
    pub fn from_rows(rows: Vec<BitWord>) -> Option<Self> {
        let n = rows.first()?.len();
        if rows.iter().any(|r| r.len() != n) || rows.len() > VERIFY_MAX_DIMENSION {
            return None;
        }
        let d = min_weight_at_least(&rows, n, 1)?;
        Some(LinearCode {
            k: rows.len(),
            n,
            rows,
            min_distance: d,
            codebook: OnceLock::new(),
        })
    }

    fn random_systematic<R: Rng>(k: usize, n: usize, rng: &mut R) -> Vec<BitWord> {
        (0..k)
            .map(|i| {
                let mut row = BitWord::zeros(n);
                row.set(i, true);
                for j in k..n {
                    row.set(j, rng.random::<bool>());
                }
                row
            })
            .collect()
    }

    /// Random search for an `[n, k]` code with minimum distance at least
    /// `min_distance`. Deterministic in `(k, n, salt)`.
    pub fn search(
        k: usize,
        n: usize,
        min_distance: usize,
        salt: u64,
        tries: usize,
    ) -> Option<Self> {
        if k == 0 || n < k || k > VERIFY_MAX_DIMENSION {
            return None;
        }
        if k == 1 {
            return (n >= min_distance).then(|| LinearCode::repetition(n));
        }
        let mut rng = seed::rng(salt, Stream::Code, ((k as u64) << 32) | n as u64);
        for _ in 0..tries {
            let rows = Self::random_systematic(k, n, &mut rng);
            if let Some(d) = min_weight_at_least(&rows, n, min_distance.max(1)) {
                return Some(LinearCode {
                    k,
                    n,
                    rows,
                    min_distance: d,
                    codebook: OnceLock::new(),
                });
            }
        }
        None
    }

    /// Best distance found among `tries` random `[n, k]` codes.
    pub fn search_best(k: usize, n: usize, salt: u64, tries: usize) -> Option<Self> {
        if k == 0 || n < k || k > VERIFY_MAX_DIMENSION {
            return None;
        }
        if k == 1 {
            return Some(LinearCode::repetition(n));
        }
        let mut rng = seed::rng(salt, Stream::Code, ((k as u64) << 32) | n as u64);
        let mut best: Option<LinearCode> = None;
        for _ in 0..tries {
            let rows = Self::random_systematic(k, n, &mut rng);
            let floor = best.as_ref().map_or(1, |b| b.min_distance + 1);
            if let Some(d) = min_weight_at_least(&rows, n, floor) {
                best = Some(LinearCode {
                    k,
                    n,
                    rows,
                    min_distance: d,
                    codebook: OnceLock::new(),
                });
            }
        }
        best
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn min_distance(&self) -> usize {
        self.min_distance
    }

    pub fn rows(&self) -> &[BitWord] {
        &self.rows
    }

    pub fn encode(&self, message: &BitWord) -> BitWord {
        assert_eq!(
            message.len(),
            self.k,
            "message length must equal the code dimension"
        );
        let mut word = BitWord::zeros(self.n);
        for (i, row) in self.rows.iter().enumerate() {
            if message.get(i) {
                word.xor_assign(row);
            }
        }
        word
    }

    /// All codewords indexed by message value (bit `i` of the index is message bit `i`).
    pub fn codebook(&self) -> Option<&[BitWord]> {
        if self.k > CODEBOOK_MAX_DIMENSION {
            return None;
        }
        Some(self.codebook.get_or_init(|| {
            let mut book = Vec::with_capacity(1 << self.k);
            book.push(BitWord::zeros(self.n));
            for m in 1usize..(1 << self.k) {
                let low = m.trailing_zeros() as usize;
                let mut w = book[m & (m - 1)].clone();
                w.xor_assign(&self.rows[low]);
                book.push(w);
            }
            book
        }))
    }

    /// Nearest codeword: `(message index, distance)`, ties to the smaller index.
    pub fn nearest(&self, received: &BitWord) -> (u64, usize) {
        assert_eq!(received.len(), self.n);
        if let Some(book) = self.codebook() {
            let mut best = (0u64, usize::MAX);
            for (m, c) in book.iter().enumerate() {
                let d = c.distance(received);
                if d < best.1 {
                    best = (m as u64, d);
                }
            }
            return best;
        }
        let mut word = BitWord::zeros(self.n);
        let mut best = (0u64, word.distance(received));
        for i in 1u64..(1u64 << self.k) {
            word.xor_assign(&self.rows[i.trailing_zeros() as usize]);
            let d = word.distance(received);
            let m = i ^ (i >> 1);
            if d < best.1 || (d == best.1 && m < best.0) {
                best = (m, d);
            }
        }
        best
    }

    /// Nearest-codeword decoding; always returns a message.
    pub fn decode(&self, received: &BitWord) -> BitWord {
        let (m, _) = self.nearest(received);
        BitWord::from_bits((0..self.k).map(|i| (m >> i) & 1 == 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repetition_distance_is_length() {
        let c = LinearCode::repetition(5);
        assert_eq!(c.min_distance(), 5);
        assert_eq!(c.codebook().unwrap().len(), 2);
    }

    #[test]
    fn hamming_7_4_from_rows() {
        let rows = ["1000110", "0100101", "0010011", "0001111"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let c = LinearCode::from_rows(rows).unwrap();
        assert_eq!(c.min_distance(), 3);
        let m: BitWord = "1011".parse().unwrap();
        let mut w = c.encode(&m);
        w.flip(5);
        assert_eq!(c.decode(&w), m);
    }

    #[test]
    fn search_is_deterministic_and_meets_target() {
        let a = LinearCode::search(6, 20, 7, 1, 200).unwrap();
        let b = LinearCode::search(6, 20, 7, 1, 200).unwrap();
        assert_eq!(a.rows(), b.rows());
        assert!(a.min_distance() >= 7);
        assert!(LinearCode::search(4, 5, 4, 1, 50).is_none());
    }

    #[test]
    fn gray_walk_decoding_matches_codebook_decoding() {
        let c = LinearCode::search(5, 16, 5, 3, 100).unwrap();
        let r: BitWord = "1011001110001011".parse().unwrap();
        let (m_book, d_book) = c.nearest(&r);
        // brute force over explicit encodings
        let mut best = (0u64, usize::MAX);
        for m in 0u64..32 {
            let d = c.encode(&BitWord::from_u64(m, 5)).distance(&r);
            if d < best.1 {
                best = (m, d);
            }
        }
        assert_eq!((m_book, d_book), best);
    }
}
