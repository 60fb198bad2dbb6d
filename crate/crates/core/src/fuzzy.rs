//! Code-offset secure sketch and SHA-256 extractor.
//!
//! Generation: sketch `s = w ⊕ BCH_enc(k_rand)` for a fresh random word
//! `k_rand`, key `R = SHA-256(pad(w) ⊕ x)` for a fresh public seed `x`.
//! Reconstruction: decode `w' ⊕ s`, re-encode, and XOR back; the averaged
//! response is recovered exactly iff `w'` is within the code's correction
//! capability of `w` (up to the decoder-error corner documented in [`bch`]).
//!
//! `w` is 255 bits and `x` is 256; `w` is left-padded with a single zero bit
//! before the XOR so the hash input is a whole 256-bit word.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use crate::bch::{BchCode, DecodeOutcome};
use crate::bits::Bits;
use crate::error::{Error, Result};

/// Sketch length: the BCH codeword length.
pub const SKETCH_BITS: usize = 255;
/// Extractor seed and key length.
pub const KEY_BITS: usize = 256;

/// Public helper data for one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelperData {
    /// Code-offset sketch `s`, 255 bits.
    pub sketch: Bits,
    /// Extractor seed `x`, 256 bits.
    pub mask: Bits,
}

/// A 256-bit extracted key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedKey(Bits);

impl ExtractedKey {
    pub fn bits(&self) -> &Bits {
        &self.0
    }

    pub fn into_bits(self) -> Bits {
        self.0
    }
}

fn check_len(bits: &Bits, expected: usize) -> Result<()> {
    if bits.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: bits.len(),
        });
    }
    Ok(())
}

/// Secure-sketch generation: a fresh uniform k-bit word from the seeded
/// generator and the sketch it induces. The random word must never be
/// persisted; callers keep only `s`.
pub fn ss_gen(w_avg: &Bits, code: &BchCode, seed: u64) -> Result<(Bits, Bits)> {
    check_len(w_avg, SKETCH_BITS)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let k_rand = Bits::random(code.k(), &mut rng);
    let sketch = w_avg.xor(&code.encode(&k_rand)?);
    Ok((sketch, k_rand))
}

/// Secure-sketch reconstruction: recover the enrolled response from a noisy
/// one. Decoder failure surfaces as [`Error::ReconstructionFailed`].
pub fn ss_rep(w_prime: &Bits, sketch: &Bits, code: &BchCode) -> Result<Bits> {
    check_len(w_prime, SKETCH_BITS)?;
    check_len(sketch, SKETCH_BITS)?;
    match code.decode(&w_prime.xor(sketch))? {
        DecodeOutcome::Success { message, .. } => Ok(sketch.xor(&code.encode(&message)?)),
        DecodeOutcome::Failure => Err(Error::ReconstructionFailed),
    }
}

/// Privacy amplification: `R = SHA-256(pad(w) ⊕ x)`.
pub fn extract(w: &Bits, mask: &Bits) -> Result<ExtractedKey> {
    check_len(w, SKETCH_BITS)?;
    check_len(mask, KEY_BITS)?;
    let mut padded = Bits::zeros(1);
    padded.extend(w);
    let input = padded.xor(mask);
    let digest = Sha256::digest(input.to_bytes());
    Ok(ExtractedKey(Bits::from_bytes(&digest, KEY_BITS)))
}

/// Fuzzy-extractor generation: sketch, fresh extractor seed, and the key.
pub fn gen(w_avg: &Bits, code: &BchCode, seed: u64) -> Result<(ExtractedKey, HelperData)> {
    check_len(w_avg, SKETCH_BITS)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let k_rand = Bits::random(code.k(), &mut rng);
    let sketch = w_avg.xor(&code.encode(&k_rand)?);
    let mask = Bits::random(KEY_BITS, &mut rng);
    let key = extract(w_avg, &mask)?;
    Ok((key, HelperData { sketch, mask }))
}

/// Fuzzy-extractor reproduction from a noisy response and stored helper data.
pub fn rep(w_prime: &Bits, helper: &HelperData, code: &BchCode) -> Result<ExtractedKey> {
    let w_rec = ss_rep(w_prime, &helper.sketch, code)?;
    extract(&w_rec, &helper.mask)
}
