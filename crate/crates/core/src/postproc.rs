//! Analog-to-binary post-processing: histogram equalization against empirical
//! quantiles, non-uniform resampling, cyclic adjacent-XOR whitening, and MSB
//! selection.

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Whitening {
    CyclicAdjacentXor,
    None,
}

impl std::fmt::Display for Whitening {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Whitening::CyclicAdjacentXor => write!(f, "cyclic-adjacent-xor"),
            Whitening::None => write!(f, "none"),
        }
    }
}

impl std::str::FromStr for Whitening {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cyclic-adjacent-xor" => Ok(Whitening::CyclicAdjacentXor),
            "none" => Ok(Whitening::None),
            other => Err(Error::format(
                "whitening",
                format!("expected cyclic-adjacent-xor or none, got {other:?}"),
            )),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct PostprocConfig {
    /// Resampling depth B: codes take values in [0, 2^B).
    pub resample_bits: u32,
    /// MSBs kept per sample word, 1 <= M <= B.
    pub msb_keep: u32,
    pub whitening: Whitening,
}

impl Default for PostprocConfig {
    fn default() -> Self {
        PostprocConfig {
            resample_bits: 10,
            msb_keep: 3,
            whitening: Whitening::CyclicAdjacentXor,
        }
    }
}

impl PostprocConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resample_bits < 1 || self.resample_bits > 16 {
            return Err(Error::InvalidParameter(format!(
                "resample_bits must be in 1..=16, got {}",
                self.resample_bits
            )));
        }
        if self.msb_keep < 1 || self.msb_keep > self.resample_bits {
            return Err(Error::InvalidParameter(format!(
                "msb_keep must be in 1..={}, got {}",
                self.resample_bits, self.msb_keep
            )));
        }
        Ok(())
    }
}

/// Equalizing quantizer: boundaries at the empirical j/2^B quantiles of a
/// calibration sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantizer {
    bits: u32,
    boundaries: Vec<f64>,
}

impl Quantizer {
    /// Boundaries are the j/2^B empirical quantiles (lower-rank order
    /// statistic), j = 1..2^B-1.
    pub fn build(calibration: &[f64], bits: u32) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::InvalidParameter(format!(
                "quantizer bits must be in 1..=16, got {bits}"
            )));
        }
        let levels = 1usize << bits;
        if calibration.len() < levels {
            return Err(Error::TooFewSamples {
                needed: levels,
                got: calibration.len(),
            });
        }
        if calibration.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        let mut sorted = calibration.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len();
        let mut boundaries = Vec::with_capacity(levels - 1);
        for j in 1..levels {
            let rank = (j * n).div_ceil(levels); // 1-based lower-rank order statistic
            boundaries.push(sorted[rank - 1]);
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::DegenerateQuantizer);
        }
        Ok(Quantizer { bits, boundaries })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Code = number of boundaries strictly below the sample.
    pub fn quantize_one(&self, sample: f64) -> Result<u16> {
        if !sample.is_finite() {
            return Err(Error::NonFiniteSample);
        }
        Ok(self.boundaries.partition_point(|&b| b < sample) as u16)
    }

    pub fn quantize(&self, samples: &[f64]) -> Result<Vec<u16>> {
        samples.iter().map(|&s| self.quantize_one(s)).collect()
    }
}

/// Binary response: M bits per source sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryResponse {
    pub bits: Bits,
    pub bits_per_sample: u32,
    pub source_len: usize,
}

impl BinaryResponse {
    /// Two-line text form: `bits=<count> msb=<M>` then lowercase hex.
    pub fn to_text(&self) -> String {
        format!(
            "bits={} msb={}\n{}\n",
            self.bits.len(),
            self.bits_per_sample,
            self.bits.to_hex()
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format("binary response", "missing header line"))?;
        let mut bits_n = None;
        let mut msb = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("bits", v)) => {
                    bits_n = Some(v.parse::<usize>().map_err(|e| {
                        Error::format("binary response", format!("bits: {e}"))
                    })?)
                }
                Some(("msb", v)) => {
                    msb = Some(v.parse::<u32>().map_err(|e| {
                        Error::format("binary response", format!("msb: {e}"))
                    })?)
                }
                _ => return Err(Error::format("binary response", format!("bad field {field:?}"))),
            }
        }
        let bits_n = bits_n.ok_or_else(|| Error::format("binary response", "missing bits="))?;
        let msb = msb.ok_or_else(|| Error::format("binary response", "missing msb="))?;
        if msb == 0 || bits_n % msb as usize != 0 {
            return Err(Error::format(
                "binary response",
                format!("bit count {bits_n} not a multiple of msb {msb}"),
            ));
        }
        let hex = lines
            .next()
            .ok_or_else(|| Error::format("binary response", "missing payload line"))?;
        Ok(BinaryResponse {
            bits: Bits::from_hex(hex, bits_n)?,
            bits_per_sample: msb,
            source_len: bits_n / msb as usize,
        })
    }
}

/// XOR each code with its cyclic successor (or pass through) and keep the top
/// `msb_keep` bits of each resulting word, concatenated in order.
pub fn whiten_and_select(
    codes: &[u16],
    code_bits: u32,
    msb_keep: u32,
    whitening: Whitening,
) -> Result<BinaryResponse> {
    if msb_keep < 1 || msb_keep > code_bits {
        return Err(Error::InvalidParameter(format!(
            "msb_keep {msb_keep} out of range 1..={code_bits}"
        )));
    }
    if whitening == Whitening::CyclicAdjacentXor && codes.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: codes.len(),
        });
    }
    let n = codes.len();
    let mut bits = Bits::zeros(0);
    for i in 0..n {
        let word = match whitening {
            Whitening::CyclicAdjacentXor => codes[i] ^ codes[(i + 1) % n],
            Whitening::None => codes[i],
        };
        for b in 0..msb_keep {
            bits.push(((word >> (code_bits - 1 - b)) & 1) as u8);
        }
    }
    Ok(BinaryResponse {
        bits,
        bits_per_sample: msb_keep,
        source_len: n,
    })
}

/// Full conversion of an analog sequence against a prebuilt quantizer.
pub fn binarize(
    config: &PostprocConfig,
    samples: &[f64],
    quantizer: &Quantizer,
) -> Result<BinaryResponse> {
    config.validate()?;
    if quantizer.bits() != config.resample_bits {
        return Err(Error::InvalidParameter(format!(
            "quantizer depth {} does not match config resample_bits {}",
            quantizer.bits(),
            config.resample_bits
        )));
    }
    let codes = quantizer.quantize(samples)?;
    whiten_and_select(&codes, config.resample_bits, config.msb_keep, config.whitening)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::inv_phi;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn median_of_eight_points() {
        let samples: Vec<f64> = (1..=8).map(|k| 0.1 * k as f64).collect();
        let q = Quantizer::build(&samples, 1).unwrap();
        assert_eq!(q.boundaries().len(), 1);
        let b = q.boundaries()[0];
        assert!((0.4..=0.5).contains(&b), "median boundary {b}");
    }

    #[test]
    fn uniform_quantiles_recovered() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let samples: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
        let q = Quantizer::build(&samples, 2).unwrap();
        for (b, want) in q.boundaries().iter().zip([0.25, 0.5, 0.75]) {
            assert!((b - want).abs() < 0.01, "boundary {b} vs {want}");
        }
    }

    #[test]
    fn gaussian_median_near_zero() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let samples: Vec<f64> = (0..100_000).map(|_| inv_phi(rng.gen_range(1e-12..1.0))).collect();
        let q = Quantizer::build(&samples, 1).unwrap();
        assert!(q.boundaries()[0].abs() < 0.02);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(Quantizer::build(&[0.1; 3], 2).is_err()); // too few
        assert!(Quantizer::build(&[0.1, f64::NAN, 0.3, 0.4], 1).is_err());
        assert!(Quantizer::build(&[0.5; 100], 2).is_err()); // degenerate ties
    }

    #[test]
    fn quantize_counts_boundaries_strictly_below() {
        let q = Quantizer {
            bits: 2,
            boundaries: vec![0.25, 0.5, 0.75],
        };
        assert_eq!(q.quantize_one(0.6).unwrap(), 2);
        assert_eq!(q.quantize_one(0.1).unwrap(), 0);
        assert_eq!(q.quantize_one(0.25).unwrap(), 0); // ties go down
        assert_eq!(q.quantize_one(0.9).unwrap(), 3);
        assert!(q.quantize_one(f64::INFINITY).is_err());
    }

    #[test]
    fn calibration_set_occupancies_within_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for (n, bits) in [(8550usize, 10u32), (1000, 3), (333, 2)] {
            let samples: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let q = Quantizer::build(&samples, bits).unwrap();
            let mut counts = vec![0i64; 1 << bits];
            for c in q.quantize(&samples).unwrap() {
                counts[c as usize] += 1;
            }
            let floor = (n / (1 << bits)) as i64;
            for (lvl, &c) in counts.iter().enumerate() {
                assert!(
                    (c - floor).abs() <= 1,
                    "n={n} B={bits} level {lvl}: {c} vs {floor}"
                );
            }
        }
    }

    #[test]
    fn held_out_equalization_chi_square() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let calib: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
        let q = Quantizer::build(&calib, 3).unwrap();
        let held: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
        let mut counts = [0f64; 8];
        for c in q.quantize(&held).unwrap() {
            counts[c as usize] += 1.0;
        }
        let expect = held.len() as f64 / 8.0;
        let stat: f64 = counts.iter().map(|c| (c - expect).powi(2) / expect).sum();
        let crit = ChiSquared::new(7.0).unwrap().inverse_cdf(0.99);
        assert!(stat < crit, "chi-square {stat} >= critical {crit}");
    }

    #[test]
    fn whiten_hand_example() {
        let r = whiten_and_select(&[0b101, 0b110, 0b011], 3, 1, Whitening::CyclicAdjacentXor).unwrap();
        assert_eq!(r.bits.as_slice(), &[0, 1, 1]);
        assert_eq!(r.bits_per_sample, 1);
        assert_eq!(r.source_len, 3);
    }

    #[test]
    fn whiten_none_passthrough() {
        let r = whiten_and_select(&[0b101, 0b110], 3, 3, Whitening::None).unwrap();
        assert_eq!(r.bits.as_slice(), &[1, 0, 1, 1, 1, 0]);
    }

    #[test]
    fn length_arithmetic_8550_times_3() {
        let codes = vec![0u16; 8550];
        let r = whiten_and_select(&codes, 10, 3, Whitening::CyclicAdjacentXor).unwrap();
        assert_eq!(r.bits.len(), 25_650);
    }

    #[test]
    fn whiten_validates_arguments() {
        assert!(whiten_and_select(&[1, 2], 3, 4, Whitening::None).is_err()); // M > B
        assert!(whiten_and_select(&[1], 3, 1, Whitening::CyclicAdjacentXor).is_err());
        assert!(whiten_and_select(&[1], 3, 1, Whitening::None).is_ok());
    }

    #[test]
    fn binarize_is_deterministic_and_checks_depth() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let samples: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>()).collect();
        let cfg = PostprocConfig {
            resample_bits: 6,
            msb_keep: 2,
            whitening: Whitening::CyclicAdjacentXor,
        };
        let q = Quantizer::build(&samples, 6).unwrap();
        let a = binarize(&cfg, &samples, &q).unwrap();
        let b = binarize(&cfg, &samples, &q).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bits.len(), 2 * 2000);

        let q4 = Quantizer::build(&samples, 4).unwrap();
        assert!(binarize(&cfg, &samples, &q4).is_err());
    }

    #[test]
    fn response_text_round_trip() {
        let r = BinaryResponse {
            bits: Bits::from_slice(&[1, 0, 1, 1, 0, 0]),
            bits_per_sample: 3,
            source_len: 2,
        };
        let text = r.to_text();
        assert!(text.starts_with("bits=6 msb=3\n"));
        let back = BinaryResponse::from_text(&text).unwrap();
        assert_eq!(back, r);
        assert!(BinaryResponse::from_text("bits=5 msb=3\nff\n").is_err());
        assert!(BinaryResponse::from_text("nonsense").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(PostprocConfig::default().validate().is_ok());
        let bad = PostprocConfig {
            resample_bits: 3,
            msb_keep: 4,
            whitening: Whitening::None,
        };
        assert!(bad.validate().is_err());
    }
}
