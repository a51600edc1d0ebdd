//! Reed–Solomon outer code over GF(256) concatenated with a searched binary
//! `[n_in, 8]` inner code, decoded with generalized minimum distance.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::linear::LinearCode;
use super::reed_solomon::ReedSolomon;
use crate::bits::BitWord;

const INNER_TRIES: usize = 64;
const INNER_SALT: u64 = 0x1a2b_3c4d;

/// Longest inner code considered by [`ConcatenatedCode::design`].
pub const MAX_INNER_LEN: usize = 96;

fn inner_code(n_in: usize) -> Arc<LinearCode> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<LinearCode>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().unwrap().get(&n_in) {
        return c.clone();
    }
    let code =
        Arc::new(LinearCode::search_best(8, n_in, INNER_SALT, INNER_TRIES).expect("n_in >= 8"));
    code.codebook();
    cache.lock().unwrap().entry(n_in).or_insert(code).clone()
}

#[derive(Debug, Clone)]
pub struct ConcatenatedCode {
    k: usize,
    outer: ReedSolomon,
    inner: Arc<LinearCode>,
    pad: usize,
}

impl ConcatenatedCode {
    /// Builds the code with `n_out` outer symbols and inner length `n_in`,
    /// zero-padded to `total_len` bits.
    pub fn new(k: usize, n_out: usize, n_in: usize, total_len: usize) -> Option<Self> {
        let k_sym = k.div_ceil(8);
        if k == 0 || n_in < 8 || n_out * n_in > total_len {
            return None;
        }
        let outer = ReedSolomon::new(n_out, k_sym)?;
        Some(ConcatenatedCode {
            k,
            outer,
            inner: inner_code(n_in),
            pad: total_len - n_out * n_in,
        })
    }

    /// Largest guaranteed distance over admissible `(n_out, n_in)` splits of
    /// `total_len` bits, provided it reaches `min_distance`.
    pub fn design(k: usize, total_len: usize, min_distance: usize) -> Option<Self> {
        let k_sym = k.div_ceil(8);
        let mut best: Option<(usize, usize, usize)> = None;
        for n_in in 8..=MAX_INNER_LEN.min(total_len / k_sym.max(1)) {
            let n_out = (total_len / n_in).min(256);
            if n_out < k_sym {
                continue;
            }
            let d = (n_out - k_sym + 1) * inner_code(n_in).min_distance();
            if d >= min_distance && best.is_none_or(|(bd, _, _)| d > bd) {
                best = Some((d, n_out, n_in));
            }
        }
        let (_, n_out, n_in) = best?;
        ConcatenatedCode::new(k, n_out, n_in, total_len)
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.outer.len() * self.inner.len() + self.pad
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Guaranteed (designed) minimum distance `(N - K + 1) · d_in`.
    pub fn min_distance(&self) -> usize {
        self.outer.min_distance() * self.inner.min_distance()
    }

    pub fn outer(&self) -> &ReedSolomon {
        &self.outer
    }

    pub fn inner(&self) -> &LinearCode {
        &self.inner
    }

    fn symbols(&self, message: &BitWord) -> Vec<u8> {
        (0..self.outer.dimension())
            .map(|s| {
                (0..8).fold(0u8, |acc, b| {
                    let i = 8 * s + b;
                    acc | (((i < self.k && message.get(i)) as u8) << b)
                })
            })
            .collect()
    }

    fn encode_symbols(&self, coeffs: &[u8]) -> BitWord {
        let mut word = BitWord::zeros(0);
        for sym in self.outer.encode(coeffs) {
            word.extend_from(&self.inner.encode(&BitWord::from_u64(sym as u64, 8)));
        }
        word.extend_from(&BitWord::zeros(self.pad));
        word
    }

    pub fn encode(&self, message: &BitWord) -> BitWord {
        assert_eq!(
            message.len(),
            self.k,
            "message length must equal the code dimension"
        );
        self.encode_symbols(&self.symbols(message))
    }

    /// GMD decoding: inner nearest-codeword decoding, then Berlekamp–Welch
    /// with the `j` least reliable symbols erased for `j = 0, 1, ...`. A
    /// candidate is accepted only within half the designed distance.
    pub fn decode(&self, received: &BitWord) -> Option<BitWord> {
        assert_eq!(received.len(), self.len());
        let n_in = self.inner.len();
        let n_out = self.outer.len();
        let mut syms = Vec::with_capacity(n_out);
        let mut dists = Vec::with_capacity(n_out);
        for i in 0..n_out {
            let (m, d) = self.inner.nearest(&received.slice(i * n_in, n_in));
            syms.push(m as u8);
            dists.push(d);
        }
        let mut order: Vec<usize> = (0..n_out).collect();
        order.sort_by(|&a, &b| dists[b].cmp(&dists[a]).then(a.cmp(&b)));
        let radius = (self.min_distance() - 1) / 2;
        let k_sym = self.outer.dimension();
        for erased in 0..=(n_out - k_sym) {
            let mut keep: Vec<usize> = order[erased..].to_vec();
            keep.sort_unstable();
            let Some(coeffs) = self.outer.decode_with_erasures(&syms, &keep) else {
                continue;
            };
            let spill = (self.k..8 * k_sym).any(|i| (coeffs[i / 8] >> (i % 8)) & 1 == 1);
            if spill {
                continue;
            }
            if self.encode_symbols(&coeffs).distance(received) <= radius {
                return Some(BitWord::from_bits(
                    (0..self.k).map(|i| (coeffs[i / 8] >> (i % 8)) & 1 == 1),
                ));
            }
        }
        None
    }
}
