//! Unpacked bit strings.
//!
//! Bit order convention, used by every serialized format in this crate:
//! bit 0 of a `Bits` value is the most significant bit of the first hex
//! nibble / byte. Strings whose length is not a multiple of 8 are padded
//! with trailing zero bits when written and the pad is discarded on read.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits(Vec<u8>);

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits(vec![0; len])
    }

    pub fn from_slice(bits: &[u8]) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Bits(bits.to_vec())
    }

    /// Low `len` bits of `value`, most significant first.
    pub fn from_value(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        Bits((0..len).map(|i| ((value >> (len - 1 - i)) & 1) as u8).collect())
    }

    pub fn random<R: Rng>(len: usize, rng: &mut R) -> Self {
        Bits((0..len).map(|_| rng.gen_range(0..2u8)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: u8) {
        debug_assert!(v <= 1);
        self.0[i] = v;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn push(&mut self, v: u8) {
        debug_assert!(v <= 1);
        self.0.push(v);
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, u8> {
        self.0.iter()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().map(|&b| b as usize).sum()
    }

    /// Bitwise XOR. Panics on length mismatch; equal lengths are a caller
    /// invariant everywhere this is used.
    pub fn xor(&self, other: &Bits) -> Bits {
        assert_eq!(self.len(), other.len(), "xor of unequal-length bit strings");
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    pub fn hamming(&self, other: &Bits) -> usize {
        assert_eq!(self.len(), other.len(), "hamming of unequal-length bit strings");
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn slice(&self, start: usize, end: usize) -> Bits {
        Bits(self.0[start..end].to_vec())
    }

    pub fn extend(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    /// Lowercase hex, most significant bit first, zero-padded to a whole byte.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.len().div_ceil(4));
        for chunk in self.0.chunks(4) {
            let mut nib = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                nib |= b << (3 - i);
            }
            out.push(char::from_digit(nib as u32, 16).unwrap());
        }
        if out.len() % 2 == 1 {
            out.push('0');
        }
        out
    }

    /// Parse `bit_len` bits from hex written by [`Bits::to_hex`]. Pad bits
    /// beyond `bit_len` are ignored.
    pub fn from_hex(s: &str, bit_len: usize) -> Result<Bits> {
        let s = s.trim();
        if s.len() * 4 < bit_len {
            return Err(Error::format(
                "hex bit string",
                format!("{} hex digits cannot hold {} bits", s.len(), bit_len),
            ));
        }
        let mut bits = Vec::with_capacity(bit_len);
        'outer: for c in s.chars() {
            let nib = c
                .to_digit(16)
                .ok_or_else(|| Error::format("hex bit string", format!("invalid digit {c:?}")))?
                as u8;
            for i in 0..4 {
                bits.push((nib >> (3 - i)) & 1);
                if bits.len() == bit_len {
                    break 'outer;
                }
            }
        }
        Ok(Bits(bits))
    }

    /// Pack into bytes, most significant bit first, zero-padded at the tail.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = vec![0u8; self.len().div_ceil(8)];
        for (i, &b) in self.0.iter().enumerate() {
            if b != 0 {
                bytes[i / 8] |= 1 << (7 - (i % 8));
            }
        }
        bytes
    }

    /// First `bit_len` bits of `bytes`, most significant bit first.
    pub fn from_bytes(bytes: &[u8], bit_len: usize) -> Self {
        assert!(bit_len <= bytes.len() * 8);
        Bits((0..bit_len).map(|i| (bytes[i / 8] >> (7 - (i % 8))) & 1).collect())
    }

    /// Pack into big-endian u64 words, zero-padded at the tail.
    pub fn to_words(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.len().div_ceil(64)];
        for (i, &b) in self.0.iter().enumerate() {
            if b != 0 {
                words[i / 64] |= 1 << (63 - (i % 64));
            }
        }
        words
    }
}

impl std::fmt::Debug for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.len() <= 64 {
            write!(f, "Bits[")?;
            for &b in &self.0 {
                write!(f, "{b}")?;
            }
            write!(f, "]")
        } else {
            write!(f, "Bits[len={} hex={}…]", self.len(), &self.to_hex()[..16])
        }
    }
}

impl std::ops::Index<usize> for Bits {
    type Output = u8;
    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

impl FromIterator<u8> for Bits {
    fn from_iter<T: IntoIterator<Item = u8>>(iter: T) -> Self {
        Bits(iter.into_iter().collect())
    }
}
