//! Statistical evaluation: FHD distributions and binomial fits, block and
//! message error prediction, ENOB, entropy rate, and CTW compression.

pub mod ctw;

use statrs::function::gamma::ln_gamma;

use crate::bch::BchCode;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::math::entropy_bits;

/// Fractional Hamming distance between equal-length bit strings.
pub fn fhd(a: &Bits, b: &Bits) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(a.hamming(b) as f64 / a.len() as f64)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FhdLabel {
    Same,
    Different,
    Clone,
}

impl std::fmt::Display for FhdLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FhdLabel::Same => write!(f, "same"),
            FhdLabel::Different => write!(f, "different"),
            FhdLabel::Clone => write!(f, "clone"),
        }
    }
}

/// An observed FHD distribution with its binomial-fit summary.
#[derive(Clone, Debug)]
pub struct FhdStats {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// p(1-p)/sigma^2; None when the distribution is degenerate.
    pub n_eff: Option<f64>,
    pub label: FhdLabel,
}

impl FhdStats {
    pub fn from_samples(samples: Vec<f64>, label: FhdLabel) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: samples.len(),
            });
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        let n_eff = (std > 0.0).then(|| mean * (1.0 - mean) / var);
        Ok(FhdStats {
            samples,
            mean,
            std,
            n_eff,
            label,
        })
    }
}

/// FHDs of each response against a reference (typically the averaged
/// response that seeded the dictionary).
pub fn fhd_distribution(
    responses: &[Bits],
    reference: &Bits,
    label: FhdLabel,
) -> Result<FhdStats> {
    if responses.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: responses.len(),
        });
    }
    let samples: Vec<f64> = responses
        .iter()
        .map(|r| fhd(r, reference))
        .collect::<Result<_>>()?;
    FhdStats::from_samples(samples, label)
}

/// Effective independent-bit count and success probability of the binomial
/// fit: N = p(1-p)/sigma^2, p = mean.
pub fn fit_binomial(stats: &FhdStats) -> Result<(f64, f64)> {
    match stats.n_eff {
        Some(n_eff) => Ok((n_eff, stats.mean)),
        None => Err(Error::ZeroVariance),
    }
}

/// Pr(X > t) for X ~ Binomial(n, p), by direct pmf summation in log space.
pub fn binomial_sf(n: usize, t: usize, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "binomial p must be in [0,1], got {p}"
        )));
    }
    if t >= n {
        return Ok(0.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let ln_n_fact = ln_gamma(n as f64 + 1.0);
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let mut acc = 0.0;
    for i in (t + 1)..=n {
        let ln_term = ln_n_fact - ln_gamma(i as f64 + 1.0) - ln_gamma((n - i) as f64 + 1.0)
            + i as f64 * ln_p
            + (n - i) as f64 * ln_q;
        acc += ln_term.exp();
    }
    Ok(acc.min(1.0))
}

/// Probability that a block's response lands beyond the code's correction
/// capability, modeling per-block errors as Binomial(255, p) with p the
/// measured mean FHD.
pub fn block_error_prob(stats: &FhdStats, code: &BchCode) -> Result<f64> {
    binomial_sf(code.n(), code.t(), stats.mean)
}

/// Same tail, but under the *fitted* binomial (N_eff, p): the block fails
/// when the FHD reaches (t+1)/n, which in fitted trials is X >=
/// ceil((t+1)/n * N_eff). Captures the overdispersion that whitening
/// introduces and is what the BER prediction sweep uses.
pub fn block_error_prob_fitted(stats: &FhdStats, code: &BchCode) -> Result<f64> {
    let (n_eff, p) = fit_binomial(stats)?;
    let n_fit = n_eff.round().max(1.0) as usize;
    let alpha = (code.t() + 1) as f64 / code.n() as f64;
    let k = (alpha * n_fit as f64).ceil() as usize;
    if k == 0 {
        return Ok(1.0);
    }
    if k > n_fit {
        return Ok(0.0);
    }
    binomial_sf(n_fit, k - 1, p)
}

/// Block corruption probability for two endpoints and the message BER it
/// implies: a corrupted block's pad is a fresh hash, so half of its bits
/// flip on average.
pub fn predict_message_ber(pr_a: f64, pr_b: f64) -> f64 {
    let block = 1.0 - (1.0 - pr_a) * (1.0 - pr_b);
    block / 2.0
}

/// ENOB from the classic 6.02 dB/bit law.
pub fn enob_from_snr_db(snr_db: f64) -> f64 {
    (snr_db - 1.76) / 6.02
}

/// Effective number of bits from repeated measurements: rows are challenges,
/// columns repetitions. SNR is the variance of per-challenge means over the
/// mean per-challenge variance.
pub fn enob(measurements: &[Vec<f64>]) -> Result<f64> {
    if measurements.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: measurements.len(),
        });
    }
    let mut means = Vec::with_capacity(measurements.len());
    let mut noise_vars = Vec::with_capacity(measurements.len());
    for row in measurements {
        if row.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: row.len(),
            });
        }
        let n = row.len() as f64;
        let mean = row.iter().sum::<f64>() / n;
        let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        means.push(mean);
        noise_vars.push(var);
    }
    let m = means.len() as f64;
    let grand = means.iter().sum::<f64>() / m;
    let signal_var = means.iter().map(|x| (x - grand) * (x - grand)).sum::<f64>() / (m - 1.0);
    let noise_var = noise_vars.iter().sum::<f64>() / m;
    if noise_var == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(enob_from_snr_db(10.0 * (signal_var / noise_var).log10()))
}

/// Shannon entropy per sample of the 2^bits-level uniform-width histogram
/// over the sample range.
pub fn entropy_rate(samples: &[f64], bits: u32) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(1..=24).contains(&bits) {
        return Err(Error::InvalidParameter(format!(
            "entropy_rate bits must be in 1..=24, got {bits}"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample);
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(0.0);
    }
    let levels = 1usize << bits;
    let mut counts = vec![0u64; levels];
    let scale = levels as f64 / (hi - lo);
    for &v in samples {
        let idx = (((v - lo) * scale) as usize).min(levels - 1);
        counts[idx] += 1;
    }
    Ok(entropy_bits(&counts))
}

/// Disagreement rate by bit position (big endian) between two code
/// sequences; used for the error-by-bit-location profile.
pub fn bit_error_by_position(a: &[u16], b: &[u16], bits: u32) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rates = vec![0.0; bits as usize];
    for (x, y) in a.iter().zip(b) {
        let d = x ^ y;
        for (pos, rate) in rates.iter_mut().enumerate() {
            if (d >> (bits - 1 - pos as u32)) & 1 != 0 {
                *rate += 1.0;
            }
        }
    }
    for r in &mut rates {
        *r /= a.len() as f64;
    }
    Ok(rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn fhd_basics() {
        let x = Bits::from_slice(&[0, 0, 0, 0]);
        let y = Bits::from_slice(&[0, 1, 0, 1]);
        let not_x = Bits::from_slice(&[1, 1, 1, 1]);
        assert_eq!(fhd(&x, &x).unwrap(), 0.0);
        assert_eq!(fhd(&x, &not_x).unwrap(), 1.0);
        assert_eq!(fhd(&x, &y).unwrap(), 0.5);
        assert!(fhd(&x, &Bits::zeros(5)).is_err());
    }

    #[test]
    fn fhd_distribution_degenerate_and_random() {
        let reference = Bits::zeros(255);
        let same = vec![reference.clone(); 5];
        let stats = fhd_distribution(&same, &reference, FhdLabel::Same).unwrap();
        assert_eq!(stats.mean, 0.0);
        assert_eq!(stats.std, 0.0);
        assert!(stats.n_eff.is_none());

        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let reference = Bits::random(255, &mut rng);
        let responses: Vec<Bits> = (0..4000).map(|_| Bits::random(255, &mut rng)).collect();
        let stats = fhd_distribution(&responses, &reference, FhdLabel::Different).unwrap();
        assert!((stats.mean - 0.5).abs() < 0.01, "mean {}", stats.mean);
        let want_std = (0.25f64 / 255.0).sqrt(); // 0.0313
        assert!(
            (stats.std - want_std).abs() < 0.003,
            "std {} vs {want_std}",
            stats.std
        );
        let (n_eff, _) = fit_binomial(&stats).unwrap();
        assert!((n_eff - 255.0).abs() < 25.0, "n_eff {n_eff}");
    }

    #[test]
    fn fit_binomial_arithmetic() {
        let mk = |mean: f64, std: f64| FhdStats {
            samples: Vec::new(),
            mean,
            std,
            n_eff: Some(mean * (1.0 - mean) / (std * std)),
            label: FhdLabel::Same,
        };
        let (n, p) = fit_binomial(&mk(0.5, 0.05)).unwrap();
        assert!((n - 100.0).abs() < 1e-9);
        assert_eq!(p, 0.5);
        let (n, _) = fit_binomial(&mk(0.5, 0.03125)).unwrap();
        assert!((n - 256.0).abs() < 1e-9);

        let degenerate = FhdStats::from_samples(vec![0.5, 0.5, 0.5], FhdLabel::Same).unwrap();
        assert!(matches!(fit_binomial(&degenerate), Err(Error::ZeroVariance)));
    }

    #[test]
    fn binomial_tail_frozen_values() {
        // Reference values from independent direct summation (SciPy).
        let cases = [
            (47usize, 0.07, 3.730334647462707e-10),
            (26, 0.07, 0.02153698626657513),
            (9, 0.07, 0.986019692180272),
            (9, 0.04, 0.569837646201711),
            (26, 0.04, 5.120811925605253e-06),
        ];
        for (t, p, want) in cases {
            let got = binomial_sf(255, t, p).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-9,
                "sf(255,{t},{p}) = {got}, want {want}"
            );
        }
        // Clone-side success probability: complement of the tail.
        let sf = binomial_sf(255, 47, 0.483).unwrap();
        assert!(sf > 1.0 - 1e-12);
    }

    #[test]
    fn binomial_tail_edges_and_monotonicity() {
        assert_eq!(binomial_sf(255, 47, 0.0).unwrap(), 0.0);
        assert_eq!(binomial_sf(255, 47, 1.0).unwrap(), 1.0);
        assert_eq!(binomial_sf(255, 255, 0.9).unwrap(), 0.0);
        assert!(binomial_sf(255, 10, 1.5).is_err());

        let mut last = 1.0;
        for t in [0usize, 9, 26, 47, 63, 254] {
            let v = binomial_sf(255, t, 0.07).unwrap();
            assert!(v <= last + 1e-15, "not monotone in t");
            last = v;
        }
        let mut last = 0.0;
        for p in [0.01, 0.05, 0.07, 0.2, 0.5, 0.9] {
            let v = binomial_sf(255, 47, p).unwrap();
            assert!(v >= last - 1e-12, "not monotone in p");
            last = v;
        }
    }

    #[test]
    fn block_error_prob_uses_mean_and_t() {
        let stats = FhdStats {
            samples: Vec::new(),
            mean: 0.07,
            std: 0.02,
            n_eff: Some(0.07 * 0.93 / 0.0004),
            label: FhdLabel::Same,
        };
        let code = BchCode::with_correction(47).unwrap();
        let v = block_error_prob(&stats, &code).unwrap();
        assert!(((v - 3.730334647462707e-10) / v).abs() < 1e-9);
    }

    #[test]
    fn predict_message_ber_arithmetic() {
        assert_eq!(predict_message_ber(0.0, 0.0), 0.0);
        let v = predict_message_ber(0.1, 0.2);
        assert!((v - 0.14).abs() < 1e-12);
    }

    #[test]
    fn enob_formula_and_synthetic_recovery() {
        assert!((enob_from_snr_db(60.2) - 9.71).abs() < 0.01);

        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let sigma = 2.85e-4;
        let make = |sigma: f64, rng: &mut ChaCha12Rng| -> Vec<Vec<f64>> {
            (0..4000)
                .map(|_| {
                    let signal: f64 = rng.gen();
                    (0..50)
                        .map(|_| {
                            signal + sigma * crate::math::inv_phi(rng.gen_range(1e-15..1.0))
                        })
                        .collect()
                })
                .collect()
        };
        let e1 = enob(&make(sigma, &mut rng)).unwrap();
        assert!((e1 - 9.64).abs() < 0.2, "synthetic ENOB {e1}");

        let e2 = enob(&make(2.0 * sigma, &mut rng)).unwrap();
        assert!(
            ((e1 - e2) - 1.0).abs() < 0.1,
            "doubling noise dropped ENOB by {}",
            e1 - e2
        );
    }

    #[test]
    fn enob_zero_noise_sentinel() {
        let rows = vec![vec![0.25, 0.25], vec![0.5, 0.5], vec![0.75, 0.75]];
        assert_eq!(enob(&rows).unwrap(), f64::INFINITY);
        assert!(enob(&[vec![0.1, 0.2]]).is_err());
    }

    #[test]
    fn entropy_rate_known_distributions() {
        // Exact uniform over 2^10 levels.
        let samples: Vec<f64> = (0..4096).map(|i| (i % 1024) as f64 + 0.5).collect();
        let h = entropy_rate(&samples, 10).unwrap();
        assert!((h - 10.0).abs() < 1e-9, "uniform 10-bit entropy {h}");

        let two: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 0.0 } else { 1.0 }).collect();
        assert!((entropy_rate(&two, 1).unwrap() - 1.0).abs() < 1e-12);

        assert!(entropy_rate(&[], 4).is_err());
        assert_eq!(entropy_rate(&[0.5; 10], 4).unwrap(), 0.0);
    }

    #[test]
    fn bit_error_profile_counts_positions() {
        // XORs are [101, 001, 001, 001]: MSB differs once, LSB always.
        let a = vec![0b100u16, 0b000, 0b100, 0b000];
        let b = vec![0b001u16, 0b001, 0b101, 0b001];
        let rates = bit_error_by_position(&a, &b, 3).unwrap();
        assert_eq!(rates, vec![0.25, 0.0, 1.0]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(32))]
        #[test]
        fn prop_fhd_symmetric(seed in 0u64..1000, len in 1usize..400) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let a = Bits::random(len, &mut rng);
            let b = Bits::random(len, &mut rng);
            proptest::prop_assert_eq!(fhd(&a, &b).unwrap(), fhd(&b, &a).unwrap());
        }
    }
}
