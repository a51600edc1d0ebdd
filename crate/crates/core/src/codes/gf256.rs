//! Arithmetic in GF(2^8) modulo x^8 + x^4 + x^3 + x^2 + 1.

const PRIMITIVE: u16 = 0x11d;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

const fn build() -> Tables {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= PRIMITIVE;
        }
        i += 1;
    }
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    Tables { exp, log }
}

static TABLES: Tables = build();

#[inline]
pub fn add(a: u8, b: u8) -> u8 {
    a ^ b
}

#[inline]
pub fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        0
    } else {
        TABLES.exp[TABLES.log[a as usize] as usize + TABLES.log[b as usize] as usize]
    }
}

#[inline]
pub fn inv(a: u8) -> u8 {
    assert_ne!(a, 0, "zero has no inverse");
    TABLES.exp[255 - TABLES.log[a as usize] as usize]
}

pub fn pow(a: u8, e: usize) -> u8 {
    (0..e).fold(1, |acc, _| mul(acc, a))
}

/// Evaluates `coeffs[0] + coeffs[1] x + ...` at `x` (Horner).
pub fn eval(coeffs: &[u8], x: u8) -> u8 {
    coeffs.iter().rev().fold(0, |acc, &c| add(mul(acc, x), c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_spot_check() {
        for a in 1..=255u8 {
            assert_eq!(mul(a, inv(a)), 1);
            assert_eq!(mul(a, 1), a);
        }
        assert_eq!(mul(3, 7), mul(7, 3));
        let (a, b, c) = (0x53, 0xca, 0x17);
        assert_eq!(mul(a, add(b, c)), add(mul(a, b), mul(a, c)));
        assert_eq!(eval(&[1, 2, 3], 0), 1);
    }
}
