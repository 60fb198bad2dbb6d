//! GF(2^8) arithmetic via log/antilog tables.

/// Primitive polynomial x^8 + x^4 + x^3 + x^2 + 1.
pub const FIELD_POLY: u16 = 0x11D;

/// Multiplicative order of the field, 2^8 - 1.
pub const ORDER: usize = 255;

pub struct Gf256 {
    exp: [u8; 2 * ORDER],
    log: [u16; 256],
}

impl Gf256 {
    pub fn new() -> Self {
        let mut exp = [0u8; 2 * ORDER];
        let mut log = [0u16; 256];
        let mut x: u16 = 1;
        for i in 0..ORDER {
            exp[i] = x as u8;
            exp[i + ORDER] = x as u8;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & 0x100 != 0 {
                x ^= FIELD_POLY;
            }
        }
        Gf256 { exp, log }
    }

    /// alpha^e for any non-negative exponent.
    #[inline]
    pub fn alpha_pow(&self, e: usize) -> u8 {
        self.exp[e % ORDER]
    }

    /// Discrete log of a non-zero element.
    #[inline]
    pub fn log(&self, a: u8) -> usize {
        debug_assert!(a != 0, "log of zero");
        self.log[a as usize] as usize
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0, "inverse of zero");
        self.exp[ORDER - self.log[a as usize] as usize]
    }
}

impl Default for Gf256 {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_generates_full_cycle() {
        let f = Gf256::new();
        let mut seen = [false; 256];
        for e in 0..ORDER {
            let v = f.alpha_pow(e);
            assert!(!seen[v as usize], "alpha^{e} repeats");
            seen[v as usize] = true;
        }
        assert!(!seen[0], "zero is not a power of alpha");
        assert_eq!(f.alpha_pow(0), 1);
        assert_eq!(f.alpha_pow(ORDER), 1);
    }

    #[test]
    fn mul_inv_identities() {
        let f = Gf256::new();
        for a in 1..=255u8 {
            assert_eq!(f.mul(a, f.inv(a)), 1, "a={a}");
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.mul(a, 0), 0);
        }
    }

    #[test]
    fn mul_matches_carryless_reduction() {
        // Independent route: shift-and-add multiplication reduced by the
        // field polynomial.
        fn slow_mul(mut a: u16, mut b: u16) -> u8 {
            let mut acc: u16 = 0;
            while b != 0 {
                if b & 1 != 0 {
                    acc ^= a;
                }
                b >>= 1;
                a <<= 1;
                if a & 0x100 != 0 {
                    a ^= FIELD_POLY;
                }
            }
            acc as u8
        }
        let f = Gf256::new();
        for &a in &[1u8, 2, 3, 0x53, 0xCA, 0xFF] {
            for &b in &[1u8, 2, 0x11, 0x80, 0xFE, 0xFF] {
                assert_eq!(f.mul(a, b), slow_mul(a as u16, b as u16), "a={a} b={b}");
            }
        }
    }
}
