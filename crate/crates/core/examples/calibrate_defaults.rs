//! Derives the pinned operating-point constants: per-shot noise sigma for
//! the default intra-device FHD target and the clone correlation for the
//! clone-FHD target. Run when the post-processing defaults change.

use pufpad_core::analysis::{block_error_prob_fitted, fit_binomial, FhdLabel};
use pufpad_core::bch::BchCode;
use pufpad_core::pipeline::{
    calibrate_clone_correlation, calibrate_noise, measure_calibration_fhd, DEFAULT_REPETITIONS,
    DEFAULT_SAME_FHD_TARGET,
};
use pufpad_core::postproc::PostprocConfig;
use pufpad_core::sweep::{collect_block_fhd_stats, SweepConfig};

fn main() {
    let cfg = PostprocConfig::default();
    let reps = DEFAULT_REPETITIONS;

    for target in [DEFAULT_SAME_FHD_TARGET, 0.07] {
        let sigma = calibrate_noise(target, &cfg, reps, 0xCA11B).unwrap();
        let check = measure_calibration_fhd(sigma, &cfg, reps, 0xCA11B, 8).unwrap();
        println!("same-FHD target {target}: sigma = {sigma:.6e} (recheck FHD {check:.4})");

        let sweep_cfg = SweepConfig {
            noise_sigma: sigma,
            ..SweepConfig::default()
        };
        let stats = collect_block_fhd_stats(&sweep_cfg, FhdLabel::Same, 8, 0xABCD).unwrap();
        let (n_eff, p) = fit_binomial(&stats).unwrap();
        println!("  block FHD: mean {p:.4} std {:.5} N_eff {n_eff:.1}", stats.std);
        for t in [9usize, 26, 47, 63] {
            let code = BchCode::with_correction(t).unwrap();
            let pr = block_error_prob_fitted(&stats, &code).unwrap();
            println!("  fitted block error at t={t}: {pr:.3e}");
        }
    }

    let sigma = calibrate_noise(DEFAULT_SAME_FHD_TARGET, &cfg, reps, 0xCA11B).unwrap();
    let rho = calibrate_clone_correlation(0.483, &cfg, reps, sigma, 0xC10E).unwrap();
    println!("clone-FHD target 0.483: rho = {rho:.6}");
}
