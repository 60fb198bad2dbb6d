//! Deterministic stochastic surrogate for a silicon photonic micro-cavity PUF.
//!
//! A device maps (challenge pattern, detection channel) to a noiseless base
//! energy in (0,1) plus additive per-shot Gaussian measurement noise. The
//! base is built from two keyed standard-normal variates:
//!
//! ```text
//! base = Phi( sqrt(1 - rho^2) * z_device + rho * z_design )
//! ```
//!
//! `z_design` is keyed by the design seed (shared by clones), `z_device` by
//! the device seed (unique per physical instance), so the shared-component
//! variance between two clones is exactly rho^2 and the marginal law of the
//! base is uniform on (0,1). Everything is a pure function of the explicit
//! seeds, so sweeps can parallelize freely and replay bit-identically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::math::{hash_words, phi, splitmix64, std_normal_from_hash};

/// Number of spectral-amplitude features per challenge.
pub const PATTERN_BITS: usize = 128;

/// Domain separators for the keyed PRF.
const DOMAIN_DESIGN: u64 = 0x6465_7369_676e_0001;
const DOMAIN_DEVICE: u64 = 0x6465_7669_6365_0002;
const DOMAIN_NOISE: u64 = 0x6e6f_6973_6500_0003;

#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct ChallengePattern {
    bits: Bits,
}

impl ChallengePattern {
    pub fn new(bits: Bits) -> Result<Self> {
        if bits.len() != PATTERN_BITS {
            return Err(Error::LengthMismatch {
                expected: PATTERN_BITS,
                actual: bits.len(),
            });
        }
        Ok(ChallengePattern { bits })
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    /// 32 hex characters, most significant nibble first.
    pub fn to_hex(&self) -> String {
        self.bits.to_hex()
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        if s.trim().len() != PATTERN_BITS / 4 {
            return Err(Error::format(
                "challenge pattern",
                format!("expected 32 hex characters, got {:?}", s.trim()),
            ));
        }
        ChallengePattern::new(Bits::from_hex(s, PATTERN_BITS)?)
    }

    fn words(&self) -> [u64; 2] {
        let w = self.bits.to_words();
        [w[0], w[1]]
    }
}

/// One measured pulse energy, as written to analog dump files.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalogSample {
    pub value: f64,
    pub pattern_index: usize,
    pub channel: u32,
    pub shot_index: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviceModel {
    design_seed: u64,
    device_seed: u64,
    clone_correlation: f64,
    noise_sigma: f64,
    channels: u32,
}

impl DeviceModel {
    pub fn new(
        design_seed: u64,
        device_seed: u64,
        clone_correlation: f64,
        noise_sigma: f64,
        channels: u32,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&clone_correlation) {
            return Err(Error::InvalidParameter(format!(
                "clone correlation must be in [0,1), got {clone_correlation}"
            )));
        }
        if !noise_sigma.is_finite() || noise_sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be finite and >= 0, got {noise_sigma}"
            )));
        }
        if channels < 1 {
            return Err(Error::InvalidParameter("channels must be >= 1".into()));
        }
        Ok(DeviceModel {
            design_seed,
            device_seed,
            clone_correlation,
            noise_sigma,
            channels,
        })
    }

    pub fn design_seed(&self) -> u64 {
        self.design_seed
    }

    pub fn device_seed(&self) -> u64 {
        self.device_seed
    }

    pub fn clone_correlation(&self) -> f64 {
        self.clone_correlation
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn channels(&self) -> u32 {
        self.channels
    }

    /// Same design, different physical instance.
    pub fn is_clone_of(&self, other: &DeviceModel) -> bool {
        self.design_seed == other.design_seed && self.device_seed != other.device_seed
    }

    /// A clone of this device: identical design, fresh instance seed,
    /// same operating parameters.
    pub fn make_clone(&self, device_seed: u64) -> Result<DeviceModel> {
        if device_seed == self.device_seed {
            return Err(Error::InvalidParameter(
                "clone must use a different device seed".into(),
            ));
        }
        DeviceModel::new(
            self.design_seed,
            device_seed,
            self.clone_correlation,
            self.noise_sigma,
            self.channels,
        )
    }

    /// Noise-free response component in (0,1); uniform marginally.
    pub fn base(&self, pattern: &ChallengePattern, channel: u32) -> Result<f64> {
        if channel >= self.channels {
            return Err(Error::ChannelOutOfRange {
                channel,
                channels: self.channels,
            });
        }
        let [p0, p1] = pattern.words();
        let z_design = std_normal_from_hash(hash_words(&[
            DOMAIN_DESIGN,
            self.design_seed,
            p0,
            p1,
            channel as u64,
        ]));
        let z_device = std_normal_from_hash(hash_words(&[
            DOMAIN_DEVICE,
            self.design_seed,
            self.device_seed,
            p0,
            p1,
            channel as u64,
        ]));
        let rho = self.clone_correlation;
        Ok(phi((1.0 - rho * rho).sqrt() * z_device + rho * z_design))
    }

    fn noise_prefix(&self, pattern: &ChallengePattern, channel: u32) -> u64 {
        let [p0, p1] = pattern.words();
        hash_words(&[
            DOMAIN_NOISE,
            self.design_seed,
            self.device_seed,
            p0,
            p1,
            channel as u64,
        ])
    }

    /// One analog pulse-energy measurement: base plus zero-mean Gaussian
    /// noise keyed by `shot_seed`. Pure in all arguments.
    pub fn respond_analog(
        &self,
        pattern: &ChallengePattern,
        channel: u32,
        shot_seed: u64,
    ) -> Result<f64> {
        let base = self.base(pattern, channel)?;
        Ok(base + self.noise(self.noise_prefix(pattern, channel), shot_seed))
    }

    #[inline]
    fn noise(&self, prefix: u64, shot_seed: u64) -> f64 {
        if self.noise_sigma == 0.0 {
            return 0.0;
        }
        self.noise_sigma * std_normal_from_hash(splitmix64(prefix ^ shot_seed))
    }

    /// Arithmetic mean of `repetitions` independent shots, with per-shot
    /// seeds derived from `seed` by [`derive_shot_seed`].
    pub fn respond_averaged(
        &self,
        pattern: &ChallengePattern,
        channel: u32,
        repetitions: u32,
        seed: u64,
    ) -> Result<f64> {
        if repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be >= 1".into()));
        }
        let base = self.base(pattern, channel)?;
        if self.noise_sigma == 0.0 {
            return Ok(base);
        }
        let prefix = self.noise_prefix(pattern, channel);
        let mut acc = 0.0;
        for rep in 0..repetitions {
            acc += base + self.noise(prefix, derive_shot_seed(seed, rep));
        }
        Ok(acc / repetitions as f64)
    }
}

/// Per-repetition shot seed used by [`DeviceModel::respond_averaged`].
pub fn derive_shot_seed(seed: u64, rep: u32) -> u64 {
    hash_words(&[seed, rep as u64])
}

/// Deterministic pseudorandom challenge list; same seed, same list.
pub fn gen_challenges(count: usize, seed: u64) -> Vec<ChallengePattern> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut bits = Bits::zeros(PATTERN_BITS);
            for i in 0..PATTERN_BITS {
                bits.set(i, rng.gen_range(0..2u8));
            }
            ChallengePattern { bits }
        })
        .collect()
}

// --- device spec files (key=value text) ---

impl DeviceModel {
    pub fn to_spec_string(&self) -> String {
        format!(
            "design_seed={}\ndevice_seed={}\nrho={}\nnoise_sigma={}\nchannels={}\n",
            self.design_seed, self.device_seed, self.clone_correlation, self.noise_sigma, self.channels
        )
    }

    pub fn from_spec_str(text: &str) -> Result<Self> {
        let mut design_seed = None;
        let mut device_seed = None;
        let mut rho = None;
        let mut noise_sigma = None;
        let mut channels = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::format("device spec", format!("line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: String| Error::format("device spec", format!("{key}: {e}"));
            match key {
                "design_seed" => design_seed = Some(value.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                "device_seed" => device_seed = Some(value.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                "rho" => rho = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "noise_sigma" => noise_sigma = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "channels" => channels = Some(value.parse::<u32>().map_err(|e| bad(e.to_string()))?),
                other => {
                    return Err(Error::format(
                        "device spec",
                        format!("unknown key {other:?}"),
                    ))
                }
            }
        }
        let missing = |k: &str| Error::format("device spec", format!("missing key {k}"));
        DeviceModel::new(
            design_seed.ok_or_else(|| missing("design_seed"))?,
            device_seed.ok_or_else(|| missing("device_seed"))?,
            rho.ok_or_else(|| missing("rho"))?,
            noise_sigma.ok_or_else(|| missing("noise_sigma"))?,
            channels.ok_or_else(|| missing("channels"))?,
        )
    }
}
