//! `analyze` subcommands and BCH utilities.

use anyhow::{Context as _, Result};
use clap::{Args, Subcommand};
use std::io::Write;
use std::path::PathBuf;

use pufpad_core::analysis::{self, ctw, FhdLabel};
use pufpad_core::bch;
use pufpad_core::pipeline::{
    analog_sweep_single, DEFAULT_CLONE_RHO, DEFAULT_NOISE_SIGMA, DEFAULT_REPETITIONS,
    PROTOCOL_CHANNEL,
};
use pufpad_core::postproc::Whitening;
use pufpad_core::protocol::load_challenges;
use pufpad_core::puf_sim::derive_shot_seed;
use pufpad_core::sweep::{collect_block_fhd_stats, pipeline_key_material, SweepConfig};

use crate::config::{result_line, Context};
use crate::crypto::postproc_from;
use crate::device::load_device;

#[derive(Subcommand)]
pub enum AnalyzeCmd {
    /// Same / different / clone FHD distributions of the simulated pipeline.
    Fhd(FhdArgs),
    /// Entropy rate of raw analog samples vs resampling depth.
    Entropy(EntropyArgs),
    /// CTW compression rate of pipeline key material.
    Ctw(CtwArgs),
    /// Effective number of bits from repeated measurements.
    Enob(EnobArgs),
}

#[derive(Args)]
pub struct FhdArgs {
    /// Single-shot sweeps per distribution.
    #[arg(long, default_value_t = 4)]
    sweeps: u32,
    #[arg(long)]
    patterns: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    repetitions: Option<u32>,
    #[arg(long)]
    resample_bits: Option<u32>,
    #[arg(long)]
    msb_keep: Option<u32>,
    #[arg(long)]
    whitening: Option<Whitening>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct EntropyArgs {
    #[arg(long)]
    device: PathBuf,
    #[arg(long)]
    challenges: PathBuf,
    /// Resampling depths to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,6,8,10,12")]
    b_list: Vec<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct CtwArgs {
    /// Key-material blocks to compress.
    #[arg(long, default_value_t = 8)]
    blocks: usize,
    /// Bits per block.
    #[arg(long, default_value_t = 100_000)]
    block_bits: usize,
    /// Context depth.
    #[arg(long, default_value_t = ctw::DEFAULT_DEPTH)]
    depth: usize,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct EnobArgs {
    #[arg(long)]
    device: PathBuf,
    #[arg(long)]
    challenges: PathBuf,
    /// Repeated shots per challenge.
    #[arg(long, default_value_t = 64)]
    repetitions: u32,
}

#[allow(clippy::too_many_arguments)]
fn sweep_cfg_from(
    ctx: &Context,
    patterns: Option<usize>,
    noise_sigma: Option<f64>,
    rho: Option<f64>,
    repetitions: Option<u32>,
    resample_bits: Option<u32>,
    msb_keep: Option<u32>,
    whitening: Option<Whitening>,
) -> Result<SweepConfig> {
    let dft = SweepConfig::default();
    Ok(SweepConfig {
        postproc: postproc_from(ctx, resample_bits, msb_keep, whitening)?,
        repetitions: ctx.or_default(repetitions, "repetitions", DEFAULT_REPETITIONS)?,
        noise_sigma: ctx.or_default(noise_sigma, "noise_sigma", DEFAULT_NOISE_SIGMA)?,
        clone_rho: ctx.or_default(rho, "rho", DEFAULT_CLONE_RHO)?,
        patterns_per_dictionary: ctx.or_default(patterns, "patterns", dft.patterns_per_dictionary)?,
        message_bits: dft.message_bits,
    })
}

pub fn run_analyze(cmd: AnalyzeCmd, ctx: &Context) -> Result<()> {
    match cmd {
        AnalyzeCmd::Fhd(args) => {
            let cfg = sweep_cfg_from(
                ctx,
                args.patterns,
                args.noise_sigma,
                args.rho,
                args.repetitions,
                args.resample_bits,
                args.msb_keep,
                args.whitening,
            )?;
            let out = ctx.out_path(&args.out);
            let mut f = std::io::BufWriter::new(std::fs::File::create(&out)?);
            writeln!(f, "label,mean,std,n_eff")?;
            let mut fields = vec![("fhd_stats", out.display().to_string())];
            for label in [FhdLabel::Same, FhdLabel::Different, FhdLabel::Clone] {
                let stats = collect_block_fhd_stats(&cfg, label, args.sweeps, ctx.seed)?;
                let n_eff = stats.n_eff.map(|v| format!("{v:.3}")).unwrap_or_default();
                writeln!(f, "{label},{:.6},{:.6},{n_eff}", stats.mean, stats.std)?;
                fields.push((
                    match label {
                        FhdLabel::Same => "same_mean",
                        FhdLabel::Different => "different_mean",
                        FhdLabel::Clone => "clone_mean",
                    },
                    format!("{:.4}", stats.mean),
                ));
            }
            f.flush()?;
            result_line(&fields);
            Ok(())
        }
        AnalyzeCmd::Entropy(args) => {
            let device = load_device(&args.device)?;
            let patterns = load_challenges(&args.challenges)?;
            let samples = analog_sweep_single(
                &device,
                &patterns,
                PROTOCOL_CHANNEL,
                derive_shot_seed(ctx.seed, 0),
            )?;
            let out = ctx.out_path(&args.out);
            let mut f = std::io::BufWriter::new(std::fs::File::create(&out)?);
            writeln!(f, "B,bits_per_sample")?;
            let mut last = 0.0;
            for &b in &args.b_list {
                let h = analysis::entropy_rate(&samples, b)?;
                writeln!(f, "{b},{h:.4}")?;
                last = h;
            }
            f.flush()?;
            result_line(&[
                ("entropy", out.display().to_string()),
                ("max_bits_per_sample", format!("{last:.4}")),
            ]);
            Ok(())
        }
        AnalyzeCmd::Ctw(args) => {
            anyhow::ensure!(args.blocks >= 1 && args.block_bits > args.depth, "empty CTW input");
            let cfg = SweepConfig {
                noise_sigma: ctx
                    .or_default(args.noise_sigma, "noise_sigma", DEFAULT_NOISE_SIGMA)?,
                ..SweepConfig::default()
            };
            let code = bch::BchCode::with_correction(47)?;
            let material =
                pipeline_key_material(&cfg, &code, args.blocks * args.block_bits, ctx.seed)?;
            let out = ctx.out_path(&args.out);
            let mut f = std::io::BufWriter::new(std::fs::File::create(&out)?);
            writeln!(f, "block_index,rate")?;
            let mut mean = 0.0;
            for i in 0..args.blocks {
                let chunk = material.slice(i * args.block_bits, (i + 1) * args.block_bits);
                let rate = ctw::compression_rate(&chunk, args.depth)?;
                writeln!(f, "{i},{rate:.6}")?;
                mean += rate;
            }
            mean /= args.blocks as f64;
            f.flush()?;
            result_line(&[
                ("ctw", out.display().to_string()),
                ("blocks", args.blocks.to_string()),
                ("mean_rate", format!("{mean:.6}")),
            ]);
            Ok(())
        }
        AnalyzeCmd::Enob(args) => {
            let device = load_device(&args.device)?;
            let patterns = load_challenges(&args.challenges)?;
            anyhow::ensure!(args.repetitions >= 2, "need at least 2 repetitions");
            let mut rows = Vec::with_capacity(patterns.len());
            for p in &patterns {
                let mut row = Vec::with_capacity(args.repetitions as usize);
                for rep in 0..args.repetitions {
                    row.push(device.respond_analog(
                        p,
                        PROTOCOL_CHANNEL,
                        derive_shot_seed(ctx.seed, rep),
                    )?);
                }
                rows.push(row);
            }
            let enob = analysis::enob(&rows)?;
            result_line(&[
                ("enob", format!("{enob:.3}")),
                ("challenges", patterns.len().to_string()),
                ("repetitions", args.repetitions.to_string()),
            ]);
            Ok(())
        }
    }
}

#[derive(Subcommand)]
pub enum BchCmd {
    /// Print the (k, t, rate) table of length-255 codes as CSV.
    Rates(RatesArgs),
}

#[derive(Args)]
pub struct RatesArgs {
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run_bch(cmd: BchCmd, ctx: &Context) -> Result<()> {
    match cmd {
        BchCmd::Rates(args) => {
            let mut text = String::from("k,t,rate\n");
            for (k, t) in bch::rate_table() {
                text.push_str(&format!("{k},{t},{:.6}\n", k as f64 / 255.0));
            }
            match &args.out {
                Some(path) => {
                    let out = ctx.out_path(path);
                    std::fs::write(&out, &text)
                        .with_context(|| format!("writing {}", out.display()))?;
                    result_line(&[("rates", out.display().to_string())]);
                }
                None => {
                    print!("{text}");
                    result_line(&[("rates", "stdout".to_string())]);
                }
            }
            Ok(())
        }
    }
}
