//! Codebook text files: one binary string per line, `#` comments and blank
//! lines ignored.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::bits::{BitParseError, BitWord};

#[derive(Debug, Error)]
pub enum CodebookError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Parse { line: usize, source: BitParseError },
    #[error("line {line}: codeword length {got}, expected {expected}")]
    Length {
        line: usize,
        expected: usize,
        got: usize,
    },
}

pub fn write_codebook<W: Write>(words: &[BitWord], mut out: W) -> io::Result<()> {
    for w in words {
        writeln!(out, "{w}")?;
    }
    Ok(())
}

pub fn read_codebook<R: BufRead>(input: R) -> Result<Vec<BitWord>, CodebookError> {
    let mut words: Vec<BitWord> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let w: BitWord = text.parse().map_err(|source| CodebookError::Parse {
            line: i + 1,
            source,
        })?;
        if let Some(first) = words.first() {
            if first.len() != w.len() {
                return Err(CodebookError::Length {
                    line: i + 1,
                    expected: first.len(),
                    got: w.len(),
                });
            }
        }
        words.push(w);
    }
    Ok(words)
}

/// Minimum pairwise distance by exhaustive scan; `None` for fewer than two words.
pub fn min_pairwise_distance(words: &[BitWord]) -> Option<usize> {
    let mut best = None;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = words[i].distance(&words[j]);
            best = Some(best.map_or(d, |b: usize| b.min(d)));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let words: Vec<BitWord> = ["0101", "1010", "0110"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let mut buf = Vec::new();
        write_codebook(&words, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "0101\n1010\n0110\n"
        );
        assert_eq!(read_codebook(&buf[..]).unwrap(), words);
        assert_eq!(min_pairwise_distance(&words), Some(2));
    }

    #[test]
    fn rejects_ragged_and_garbage() {
        assert!(matches!(
            read_codebook(&b"01\n011\n"[..]),
            Err(CodebookError::Length { line: 2, .. })
        ));
        assert!(matches!(
            read_codebook(&b"# c\n0x1\n"[..]),
            Err(CodebookError::Parse { line: 2, .. })
        ));
    }
}
