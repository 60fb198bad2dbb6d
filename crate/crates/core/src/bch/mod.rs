//! Narrow-sense binary BCH codec of length 255 over GF(2^8).
//!
//! The generator polynomial is the least common multiple of the minimal
//! polynomials of alpha^1 .. alpha^2t. Encoding is systematic (message bits
//! occupy the leading positions of the codeword). Decoding is bounded-distance:
//! syndromes, Berlekamp-Massey, Chien search, then a full syndrome re-check of
//! the corrected word so that `Success` is only ever reported for a true
//! codeword within `t` flips of the input. Inputs beyond distance `t` of every
//! codeword yield [`DecodeOutcome::Failure`]; inputs within `t` of a *wrong*
//! codeword decode to that codeword (the unavoidable silent decoder-error
//! case, which callers can detect only by distance checks against known data).

mod gf;

pub use gf::{Gf256, FIELD_POLY, ORDER};

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Codeword length: every code in this crate is length 255.
pub const N: usize = 255;

pub struct BchCode {
    k: usize,
    t: usize,
    /// Generator coefficients, index i = coefficient of x^(n-k-i)
    /// (big-endian like every other bit string here). generator[0] = 1.
    generator: Bits,
    field: Gf256,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    /// A codeword within `t` flips of the input was found.
    Success {
        message: Bits,
        errors_corrected: usize,
    },
    /// No codeword within distance `t`; nothing decodable.
    Failure,
}

impl DecodeOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, DecodeOutcome::Success { .. })
    }
}

/// Cyclotomic coset of `i` modulo 255.
fn coset(i: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut x = i % ORDER;
    while !out.contains(&x) {
        out.push(x);
        x = (2 * x) % ORDER;
    }
    out
}

/// Union of the cyclotomic cosets of 1..=2t: the required generator roots.
fn root_set(design_t: usize) -> [bool; ORDER] {
    let mut roots = [false; ORDER];
    for i in 1..=(2 * design_t) {
        for r in coset(i) {
            roots[r] = true;
        }
    }
    roots
}

/// Largest T such that alpha^1..alpha^2T are all roots.
fn actual_t(roots: &[bool; ORDER]) -> usize {
    let mut e = 1;
    while roots[e % ORDER] {
        e += 1;
    }
    (e - 1) / 2
}

impl BchCode {
    /// Build the code correcting at least `design_t` errors. Capabilities
    /// between table entries round up, so the returned [`BchCode::t`] may
    /// exceed the request.
    pub fn with_correction(design_t: usize) -> Result<Self> {
        if design_t == 0 || design_t > 127 {
            return Err(Error::UnachievableCorrection(design_t));
        }
        let field = Gf256::new();
        let roots = root_set(design_t);
        let t = actual_t(&roots);

        // Generator as product of (x + alpha^r) over GF(256); the result of
        // multiplying out a conjugate-closed root set must be binary.
        let mut gen: Vec<u8> = vec![1];
        for (r, &is_root) in roots.iter().enumerate() {
            if !is_root {
                continue;
            }
            let a = field.alpha_pow(r);
            let mut next = vec![0u8; gen.len() + 1];
            for (i, &c) in gen.iter().enumerate() {
                // (sum c_i x^i) * (x + a)
                next[i + 1] ^= c;
                next[i] ^= field.mul(c, a);
            }
            gen = next;
        }
        let degree = gen.len() - 1;
        let k = N - degree;
        let mut generator = Bits::zeros(degree + 1);
        for (i, &c) in gen.iter().enumerate() {
            assert!(c <= 1, "generator of a conjugate-closed root set must be binary");
            generator.set(degree - i, c); // big-endian: index 0 = x^degree
        }
        Ok(BchCode {
            k,
            t,
            generator,
            field,
        })
    }

    pub fn n(&self) -> usize {
        N
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / N as f64
    }

    /// Generator polynomial, most significant coefficient first.
    pub fn generator(&self) -> &Bits {
        &self.generator
    }

    /// Systematic encoding: codeword = message followed by parity.
    pub fn encode(&self, message: &Bits) -> Result<Bits> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                actual: message.len(),
            });
        }
        let nk = N - self.k;
        // LFSR long division of m(x) * x^(n-k) by g(x).
        let mut rem = vec![0u8; nk];
        for i in 0..self.k {
            let fb = message.get(i) ^ rem[0];
            rem.rotate_left(1);
            rem[nk - 1] = 0;
            if fb == 1 {
                for (j, r) in rem.iter_mut().enumerate() {
                    *r ^= self.generator.get(j + 1);
                }
            }
        }
        let mut cw = message.clone();
        for &b in &rem {
            cw.push(b);
        }
        Ok(cw)
    }

    /// Syndromes S_1..S_2t of `word`; all zero iff `word` is a codeword.
    fn syndromes(&self, word: &Bits) -> Vec<u8> {
        let mut s = vec![0u8; 2 * self.t];
        for pos in 0..N {
            if word.get(pos) == 0 {
                continue;
            }
            let deg = N - 1 - pos; // polynomial degree of this bit
            for (i, si) in s.iter_mut().enumerate() {
                *si ^= self.field.alpha_pow((i + 1) * deg);
            }
        }
        s
    }

    /// Bounded-distance decoding.
    pub fn decode(&self, word: &Bits) -> Result<DecodeOutcome> {
        if word.len() != N {
            return Err(Error::LengthMismatch {
                expected: N,
                actual: word.len(),
            });
        }
        let synd = self.syndromes(word);
        if synd.iter().all(|&s| s == 0) {
            return Ok(DecodeOutcome::Success {
                message: word.slice(0, self.k),
                errors_corrected: 0,
            });
        }

        let sigma = match self.berlekamp_massey(&synd) {
            Some(sigma) => sigma,
            None => return Ok(DecodeOutcome::Failure),
        };
        let errors = sigma.len() - 1;

        let positions = self.chien_search(&sigma);
        if positions.len() != errors {
            return Ok(DecodeOutcome::Failure);
        }

        let mut corrected = word.clone();
        for &p in &positions {
            corrected.flip(p);
        }
        // Re-check: beyond-capacity inputs can pass Berlekamp-Massey and Chien
        // with a bogus locator; only a full syndrome check certifies a codeword.
        if self.syndromes(&corrected).iter().any(|&s| s != 0) {
            return Ok(DecodeOutcome::Failure);
        }
        Ok(DecodeOutcome::Success {
            message: corrected.slice(0, self.k),
            errors_corrected: errors,
        })
    }

    /// Error-locator polynomial via Berlekamp-Massey. Returns coefficients
    /// [1, sigma_1, .., sigma_L] or None when the implied error count
    /// exceeds `t`.
    fn berlekamp_massey(&self, synd: &[u8]) -> Option<Vec<u8>> {
        let f = &self.field;
        let two_t = synd.len();
        let mut sigma = vec![0u8; two_t + 2];
        let mut prev = vec![0u8; two_t + 2];
        sigma[0] = 1;
        prev[0] = 1;
        let mut l = 0usize;
        let mut m = 1usize;
        let mut b = 1u8;

        for n_iter in 0..two_t {
            let mut d = synd[n_iter];
            for i in 1..=l {
                d ^= f.mul(sigma[i], synd[n_iter - i]);
            }
            if d == 0 {
                m += 1;
                continue;
            }
            let coef = f.mul(d, f.inv(b));
            if 2 * l <= n_iter {
                let snapshot = sigma.clone();
                for i in 0..=(two_t + 1 - m) {
                    if prev[i] != 0 {
                        sigma[i + m] ^= f.mul(coef, prev[i]);
                    }
                }
                l = n_iter + 1 - l;
                prev = snapshot;
                b = d;
                m = 1;
            } else {
                for i in 0..=(two_t + 1 - m) {
                    if prev[i] != 0 {
                        sigma[i + m] ^= f.mul(coef, prev[i]);
                    }
                }
                m += 1;
            }
        }

        if l > self.t {
            return None;
        }
        // The locator degree must equal l; otherwise the syndrome sequence is
        // inconsistent with <= t errors.
        if sigma[l] == 0 || sigma[l + 1..].iter().any(|&c| c != 0) {
            return None;
        }
        sigma.truncate(l + 1);
        Some(sigma)
    }

    /// All bit positions whose locators are roots of sigma.
    fn chien_search(&self, sigma: &[u8]) -> Vec<usize> {
        let f = &self.field;
        let mut positions = Vec::with_capacity(sigma.len() - 1);
        for j in 0..ORDER {
            let mut acc = 0u8;
            for (i, &c) in sigma.iter().enumerate() {
                if c != 0 {
                    acc ^= f.mul(c, f.alpha_pow(i * j));
                }
            }
            if acc == 0 {
                // sigma(alpha^j) = 0 means an error at the position whose
                // locator is alpha^(255-j).
                let deg = (ORDER - j) % ORDER;
                if deg < N {
                    positions.push(N - 1 - deg);
                }
            }
        }
        positions
    }
}

/// The (k, t, rate) table of distinct length-255 codes reachable by this
/// construction, in increasing t.
pub fn rate_table() -> Vec<(usize, usize)> {
    let mut rows: Vec<(usize, usize)> = Vec::new();
    for design_t in 1..=127 {
        let roots = root_set(design_t);
        let degree = roots.iter().filter(|&&r| r).count();
        let k = N - degree;
        let t = actual_t(&roots);
        if rows.last().map(|&(pk, _)| pk != k).unwrap_or(true) {
            rows.push((k, t));
        }
    }
    rows
}
