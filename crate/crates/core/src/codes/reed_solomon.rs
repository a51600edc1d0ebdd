//! Shortened Reed–Solomon codes over GF(256) with Berlekamp–Welch decoding.

use super::gf256::{add, eval, inv, mul};

/// `[n, k]` Reed–Solomon code evaluating message polynomials at the field
/// elements `0, 1, ..., n-1` (as bytes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReedSolomon {
    n: usize,
    k: usize,
}

impl ReedSolomon {
    pub fn new(n: usize, k: usize) -> Option<Self> {
        (k >= 1 && k <= n && n <= 256).then_some(ReedSolomon { n, k })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn min_distance(&self) -> usize {
        self.n - self.k + 1
    }

    pub fn point(&self, i: usize) -> u8 {
        i as u8
    }

    pub fn encode(&self, message: &[u8]) -> Vec<u8> {
        assert_eq!(message.len(), self.k);
        (0..self.n).map(|i| eval(message, self.point(i))).collect()
    }

    /// Berlekamp–Welch over the positions listed in `keep` (the others are
    /// treated as erasures). Returns the message polynomial if one of degree
    /// `< k` agrees with all but `⌊(|keep| - k)/2⌋` kept positions.
    pub fn decode_with_erasures(&self, received: &[u8], keep: &[usize]) -> Option<Vec<u8>> {
        let m = keep.len();
        if m < self.k {
            return None;
        }
        let e = (m - self.k) / 2;
        let q_len = e + self.k;
        let unknowns = q_len + e;
        // row: [q_0..q_{q_len-1}, e_0..e_{e-1} | rhs]
        let mut rows: Vec<Vec<u8>> = keep
            .iter()
            .map(|&i| {
                let x = self.point(i);
                let y = received[i];
                let mut pw = vec![1u8; q_len.max(e) + 1];
                for j in 1..pw.len() {
                    pw[j] = mul(pw[j - 1], x);
                }
                let mut row = vec![0u8; unknowns + 1];
                row[..q_len].copy_from_slice(&pw[..q_len]);
                for j in 0..e {
                    row[q_len + j] = mul(y, pw[j]);
                }
                row[unknowns] = mul(y, pw[e]);
                row
            })
            .collect();
        let solution = solve(&mut rows, unknowns)?;
        let q = &solution[..q_len];
        let mut err_loc: Vec<u8> = solution[q_len..].to_vec();
        err_loc.push(1);
        let (p, rem) = poly_divmod(q, &err_loc);
        if rem.iter().any(|&c| c != 0) {
            return None;
        }
        let mut p = p;
        p.resize(self.k.max(p.len()), 0);
        if p[self.k..].iter().any(|&c| c != 0) {
            return None;
        }
        p.truncate(self.k);
        let disagreements = keep
            .iter()
            .filter(|&&i| eval(&p, self.point(i)) != received[i])
            .count();
        (disagreements <= e).then_some(p)
    }

    pub fn decode(&self, received: &[u8]) -> Option<Vec<u8>> {
        let keep: Vec<usize> = (0..self.n).collect();
        self.decode_with_erasures(received, &keep)
    }
}

/// Gaussian elimination on an augmented matrix; returns any solution.
fn solve(rows: &mut [Vec<u8>], unknowns: usize) -> Option<Vec<u8>> {
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let f = inv(rows[r][col]);
        for x in rows[r].iter_mut() {
            *x = mul(*x, f);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let g = rows[i][col];
                for j in col..=unknowns {
                    let v = mul(g, rows[r][j]);
                    rows[i][j] = add(rows[i][j], v);
                }
            }
        }
        pivot_cols.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    if rows[r..].iter().any(|row| row[unknowns] != 0) {
        return None;
    }
    let mut x = vec![0u8; unknowns];
    for (i, &c) in pivot_cols.iter().enumerate() {
        x[c] = rows[i][unknowns];
    }
    Some(x)
}

/// Polynomial long division (coefficients low to high); divisor must be monic.
fn poly_divmod(num: &[u8], den: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let dd = den.len() - 1;
    debug_assert_eq!(den[dd], 1);
    if num.len() <= dd {
        return (vec![0], num.to_vec());
    }
    let mut rem = num.to_vec();
    let mut quot = vec![0u8; num.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] = add(rem[i + j], mul(c, d));
            }
        }
    }
    rem.truncate(dd);
    (quot, rem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn corrects_up_to_half_distance() {
        let rs = ReedSolomon::new(20, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let msg: Vec<u8> = (0..6).map(|_| rng.random()).collect();
            let mut word = rs.encode(&msg);
            let t = (rs.min_distance() - 1) / 2;
            for _ in 0..t {
                let i = rng.random_range(0..20);
                word[i] ^= rng.random_range(1..=255u8);
            }
            assert_eq!(rs.decode(&word), Some(msg));
        }
    }

    #[test]
    fn erasures_and_errors_together() {
        let rs = ReedSolomon::new(16, 4).unwrap();
        let msg = vec![9, 200, 3, 77];
        let mut word = rs.encode(&msg);
        // 4 erasures leave 12 points: corrects (12-4)/2 = 4 errors
        for i in [0, 5, 7, 9] {
            word[i] ^= 0x5a;
        }
        let keep: Vec<usize> = (0..16).filter(|i| ![1, 2, 3, 4].contains(i)).collect();
        for i in [1, 2, 3, 4] {
            word[i] = 0;
        }
        assert_eq!(rs.decode_with_erasures(&word, &keep), Some(msg));
    }

    #[test]
    fn too_few_points_fails() {
        let rs = ReedSolomon::new(8, 4).unwrap();
        let w = rs.encode(&[1, 2, 3, 4]);
        assert!(rs.decode_with_erasures(&w, &[0, 1, 2]).is_none());
    }
}
