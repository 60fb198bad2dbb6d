//! Run-level composition of simulator and post-processing, plus the noise and
//! clone-correlation calibration searches.
//!
//! A "run" interrogates a device with a whole challenge list on one channel
//! and converts the analog sequence to bits against that run's own empirical
//! quantizer, the way a real acquisition calibrates on its own challenge set.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::hash_words;
use crate::postproc::{binarize, BinaryResponse, PostprocConfig, Quantizer};
use crate::puf_sim::{AnalogSample, ChallengePattern, DeviceModel};

/// Detection channels on a default device.
pub const DEFAULT_CHANNELS: u32 = 31;
/// Shots averaged per pattern when enrolling dictionary material.
pub const DEFAULT_REPETITIONS: u32 = 460;
/// The protocol always queries channel 0; dictionary files carry no channel
/// field, so this is fixed by convention.
pub const PROTOCOL_CHANNEL: u32 = 0;

/// Default intra-device FHD operating point for calibrated simulations.
/// Kept low enough that a t=47 block decode practically never fails under
/// the bursty error process produced by adjacent-XOR whitening.
pub const DEFAULT_SAME_FHD_TARGET: f64 = 0.035;

/// Per-shot noise sigma hitting [`DEFAULT_SAME_FHD_TARGET`] with the default
/// post-processing config (value produced by [`calibrate_noise`]).
pub const DEFAULT_NOISE_SIGMA: f64 = 5.602e-3;

/// Clone correlation hitting a mean clone FHD of 0.483 with the default
/// config (value produced by [`calibrate_clone_correlation`]).
pub const DEFAULT_CLONE_RHO: f64 = 0.660;

/// Mean clone-response FHD the default rho is calibrated to.
pub const DEFAULT_CLONE_FHD_TARGET: f64 = 0.483;

/// One single-shot sweep over the challenge list. All patterns share the
/// sweep's shot seed; per-pattern noise is decorrelated by the device's
/// keyed noise function.
pub fn analog_sweep_single(
    device: &DeviceModel,
    patterns: &[ChallengePattern],
    channel: u32,
    shot_seed: u64,
) -> Result<Vec<f64>> {
    patterns
        .par_iter()
        .map(|p| device.respond_analog(p, channel, shot_seed))
        .collect()
}

/// One averaged sweep: every pattern's response is the mean of `repetitions`
/// shots.
pub fn analog_sweep_averaged(
    device: &DeviceModel,
    patterns: &[ChallengePattern],
    channel: u32,
    repetitions: u32,
    seed: u64,
) -> Result<Vec<f64>> {
    patterns
        .par_iter()
        .map(|p| device.respond_averaged(p, channel, repetitions, seed))
        .collect()
}

/// Build the run's own quantizer from its samples and binarize them with it.
pub fn binarize_run(config: &PostprocConfig, samples: &[f64]) -> Result<BinaryResponse> {
    config.validate()?;
    let quantizer = Quantizer::build(samples, config.resample_bits)?;
    binarize(config, samples, &quantizer)
}

/// Single-shot binary response for a challenge list.
pub fn single_shot_response(
    device: &DeviceModel,
    patterns: &[ChallengePattern],
    channel: u32,
    config: &PostprocConfig,
    shot_seed: u64,
) -> Result<BinaryResponse> {
    binarize_run(config, &analog_sweep_single(device, patterns, channel, shot_seed)?)
}

/// Averaged binary response for a challenge list (averaging happens in the
/// analog domain, before conversion).
pub fn averaged_response(
    device: &DeviceModel,
    patterns: &[ChallengePattern],
    channel: u32,
    repetitions: u32,
    config: &PostprocConfig,
    seed: u64,
) -> Result<BinaryResponse> {
    binarize_run(
        config,
        &analog_sweep_averaged(device, patterns, channel, repetitions, seed)?,
    )
}

/// Mean FHD between fresh single-shot responses and the device's averaged
/// response, over `shots` sweeps.
#[allow(clippy::too_many_arguments)]
pub fn measure_same_fhd(
    device: &DeviceModel,
    patterns: &[ChallengePattern],
    channel: u32,
    repetitions: u32,
    config: &PostprocConfig,
    shots: u32,
    seed: u64,
) -> Result<f64> {
    let reference = averaged_response(device, patterns, channel, repetitions, config, seed)?;
    let mut acc = 0.0;
    for shot in 0..shots {
        let shot_seed = hash_words(&[seed, 0x73686f74, shot as u64]);
        let single = single_shot_response(device, patterns, channel, config, shot_seed)?;
        acc += reference.bits.hamming(&single.bits) as f64 / reference.bits.len() as f64;
    }
    Ok(acc / shots as f64)
}

/// Mean FHD between single shots of a clone and the original device's
/// averaged response.
#[allow(clippy::too_many_arguments)]
pub fn measure_clone_fhd(
    device: &DeviceModel,
    clone: &DeviceModel,
    patterns: &[ChallengePattern],
    channel: u32,
    repetitions: u32,
    config: &PostprocConfig,
    shots: u32,
    seed: u64,
) -> Result<f64> {
    let reference = averaged_response(device, patterns, channel, repetitions, config, seed)?;
    let mut acc = 0.0;
    for shot in 0..shots {
        let shot_seed = hash_words(&[seed, 0x636c6f6e65, shot as u64]);
        let single = single_shot_response(clone, patterns, channel, config, shot_seed)?;
        acc += reference.bits.hamming(&single.bits) as f64 / reference.bits.len() as f64;
    }
    Ok(acc / shots as f64)
}

/// How many challenges and shots the calibration searches measure with.
const CALIBRATION_PATTERNS: usize = 4096;
const CALIBRATION_SHOTS: u32 = 3;

/// The same-FHD measurement the noise calibration bisects on: a fresh
/// device keyed by `device_pair_seed` at the trial sigma.
pub fn measure_calibration_fhd(
    sigma: f64,
    config: &PostprocConfig,
    repetitions: u32,
    device_pair_seed: u64,
    shots: u32,
) -> Result<f64> {
    let patterns = crate::puf_sim::gen_challenges(
        CALIBRATION_PATTERNS,
        hash_words(&[device_pair_seed, 0x70617473]),
    );
    let device = DeviceModel::new(
        hash_words(&[device_pair_seed, 1]),
        hash_words(&[device_pair_seed, 2]),
        0.0,
        sigma,
        1,
    )?;
    measure_same_fhd(
        &device,
        &patterns,
        0,
        repetitions,
        config,
        shots,
        device_pair_seed,
    )
}

/// Bisection search for the per-shot noise sigma whose measured mean
/// same-device FHD lands within +/-0.005 of `target`. Relies on FHD being
/// monotone in sigma.
pub fn calibrate_noise(
    target_same_fhd: f64,
    config: &PostprocConfig,
    repetitions: u32,
    device_pair_seed: u64,
) -> Result<f64> {
    if !(0.0..0.5).contains(&target_same_fhd) || target_same_fhd == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "target same-device FHD must be in (0, 0.5), got {target_same_fhd}"
        )));
    }
    let measure = |sigma: f64| -> Result<f64> {
        measure_calibration_fhd(sigma, config, repetitions, device_pair_seed, CALIBRATION_SHOTS)
    };

    let (mut lo, mut hi) = (1e-6, 0.5);
    if measure(lo)? > target_same_fhd {
        return Err(Error::CalibrationFailed(format!(
            "target {target_same_fhd} below reachable range"
        )));
    }
    if measure(hi)? < target_same_fhd {
        return Err(Error::CalibrationFailed(format!(
            "target {target_same_fhd} above reachable range"
        )));
    }
    for _ in 0..30 {
        let mid = (lo * hi).sqrt();
        if measure(mid)? < target_same_fhd {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma = (lo * hi).sqrt();
    let achieved = measure(sigma)?;
    if (achieved - target_same_fhd).abs() > 0.005 {
        return Err(Error::CalibrationFailed(format!(
            "converged to sigma {sigma} with FHD {achieved}, target {target_same_fhd}"
        )));
    }
    Ok(sigma)
}

/// Bisection search for the clone correlation whose measured mean clone FHD
/// lands within +/-0.005 of `target` (clone FHD decreases as rho grows).
pub fn calibrate_clone_correlation(
    target_clone_fhd: f64,
    config: &PostprocConfig,
    repetitions: u32,
    noise_sigma: f64,
    seed: u64,
) -> Result<f64> {
    if !(0.0..=0.5).contains(&target_clone_fhd) {
        return Err(Error::InvalidParameter(format!(
            "target clone FHD must be in (0, 0.5], got {target_clone_fhd}"
        )));
    }
    let patterns =
        crate::puf_sim::gen_challenges(CALIBRATION_PATTERNS, hash_words(&[seed, 0x70617473]));
    let measure = |rho: f64| -> Result<f64> {
        let device = DeviceModel::new(hash_words(&[seed, 1]), hash_words(&[seed, 2]), rho, noise_sigma, 1)?;
        let clone = device.make_clone(hash_words(&[seed, 3]))?;
        measure_clone_fhd(
            &device,
            &clone,
            &patterns,
            0,
            repetitions,
            config,
            CALIBRATION_SHOTS,
            seed,
        )
    };

    let (mut lo, mut hi) = (0.0, 0.99);
    if measure(hi)? > target_clone_fhd {
        return Err(Error::CalibrationFailed(format!(
            "target clone FHD {target_clone_fhd} below reachable range"
        )));
    }
    for _ in 0..25 {
        let mid = 0.5 * (lo + hi);
        if measure(mid)? > target_clone_fhd {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    let achieved = measure(rho)?;
    if (achieved - target_clone_fhd).abs() > 0.005 {
        return Err(Error::CalibrationFailed(format!(
            "converged to rho {rho} with clone FHD {achieved}, target {target_clone_fhd}"
        )));
    }
    Ok(rho)
}

/// Raw analog measurements for dump files: every (pattern, channel, shot)
/// triple, shot seeds derived from `seed`.
pub fn analog_dump(
    device: &DeviceModel,
    patterns: &[ChallengePattern],
    channels: u32,
    shots: u64,
    seed: u64,
) -> Result<Vec<AnalogSample>> {
    let mut out = Vec::with_capacity(patterns.len() * channels as usize * shots as usize);
    for (pi, p) in patterns.iter().enumerate() {
        for channel in 0..channels {
            for shot in 0..shots {
                let value = device.respond_analog(p, channel, hash_words(&[seed, shot]))?;
                out.push(AnalogSample {
                    value,
                    pattern_index: pi,
                    channel,
                    shot_index: shot,
                });
            }
        }
    }
    Ok(out)
}
