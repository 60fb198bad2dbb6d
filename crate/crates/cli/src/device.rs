//! `device` and `challenges` subcommands.

use anyhow::{Context as _, Result};
use clap::{Args, Subcommand};
use std::io::Write;
use std::path::PathBuf;

use pufpad_core::pipeline::{analog_dump, DEFAULT_CHANNELS, DEFAULT_CLONE_RHO, DEFAULT_NOISE_SIGMA};
use pufpad_core::protocol::{load_challenges, save_challenges};
use pufpad_core::puf_sim::{gen_challenges, DeviceModel};

use crate::config::{result_line, Context};

#[derive(Subcommand)]
pub enum DeviceCmd {
    /// Write a device spec file.
    Create(CreateArgs),
    /// Record raw analog samples to CSV.
    Dump(DumpArgs),
    /// Convert one sweep over a challenge list into a binary response file.
    Respond(RespondArgs),
}

#[derive(Args)]
pub struct CreateArgs {
    #[arg(long)]
    design_seed: u64,
    #[arg(long)]
    device_seed: u64,
    /// Clone correlation in [0,1); defaults to the calibrated value.
    #[arg(long)]
    rho: Option<f64>,
    /// Per-shot noise sigma; defaults to the calibrated value.
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    channels: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct DumpArgs {
    /// Device spec file.
    #[arg(long)]
    device: PathBuf,
    /// Challenge file (one 32-hex pattern per line).
    #[arg(long)]
    challenges: PathBuf,
    /// Channels to record (defaults to all on the device).
    #[arg(long)]
    channels: Option<u32>,
    /// Shots per (pattern, channel).
    #[arg(long, default_value_t = 1)]
    shots: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct RespondArgs {
    #[arg(long)]
    device: PathBuf,
    #[arg(long)]
    challenges: PathBuf,
    /// Average this many shots per pattern before conversion (single shot
    /// when omitted).
    #[arg(long)]
    averaged: Option<u32>,
    #[arg(long)]
    resample_bits: Option<u32>,
    #[arg(long)]
    msb_keep: Option<u32>,
    #[arg(long)]
    whitening: Option<pufpad_core::postproc::Whitening>,
    #[arg(long)]
    out: PathBuf,
}

pub fn run_device(cmd: DeviceCmd, ctx: &Context) -> Result<()> {
    match cmd {
        DeviceCmd::Create(args) => {
            let rho = ctx.or_default(args.rho, "rho", DEFAULT_CLONE_RHO)?;
            let sigma = ctx.or_default(args.noise_sigma, "noise_sigma", DEFAULT_NOISE_SIGMA)?;
            let channels = ctx.or_default(args.channels, "channels", DEFAULT_CHANNELS)?;
            let device = DeviceModel::new(args.design_seed, args.device_seed, rho, sigma, channels)?;
            let out = ctx.out_path(&args.out);
            std::fs::write(&out, device.to_spec_string())
                .with_context(|| format!("writing {}", out.display()))?;
            result_line(&[
                ("device", out.display().to_string()),
                ("design_seed", args.design_seed.to_string()),
                ("device_seed", args.device_seed.to_string()),
            ]);
            Ok(())
        }
        DeviceCmd::Dump(args) => {
            let device = load_device(&args.device)?;
            let patterns = load_challenges(&args.challenges)?;
            let channels = args.channels.unwrap_or_else(|| device.channels());
            let samples = analog_dump(&device, &patterns, channels, args.shots, ctx.seed)?;
            let out = ctx.out_path(&args.out);
            let mut f = std::io::BufWriter::new(
                std::fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?,
            );
            writeln!(f, "pattern_index,channel,shot,value")?;
            for s in &samples {
                writeln!(f, "{},{},{},{}", s.pattern_index, s.channel, s.shot_index, s.value)?;
            }
            f.flush()?;
            result_line(&[
                ("dump", out.display().to_string()),
                ("samples", samples.len().to_string()),
            ]);
            Ok(())
        }
        DeviceCmd::Respond(args) => {
            let device = load_device(&args.device)?;
            let patterns = load_challenges(&args.challenges)?;
            let config = crate::crypto::postproc_from(
                ctx,
                args.resample_bits,
                args.msb_keep,
                args.whitening,
            )?;
            let response = match args.averaged {
                Some(reps) => pufpad_core::pipeline::averaged_response(
                    &device,
                    &patterns,
                    pufpad_core::pipeline::PROTOCOL_CHANNEL,
                    reps,
                    &config,
                    ctx.seed,
                )?,
                None => pufpad_core::pipeline::single_shot_response(
                    &device,
                    &patterns,
                    pufpad_core::pipeline::PROTOCOL_CHANNEL,
                    &config,
                    ctx.seed,
                )?,
            };
            let out = ctx.out_path(&args.out);
            std::fs::write(&out, response.to_text())
                .with_context(|| format!("writing {}", out.display()))?;
            result_line(&[
                ("response", out.display().to_string()),
                ("bits", response.bits.len().to_string()),
                ("msb", response.bits_per_sample.to_string()),
            ]);
            Ok(())
        }
    }
}

#[derive(Subcommand)]
pub enum ChallengesCmd {
    /// Generate a deterministic pseudorandom challenge file.
    Gen(GenArgs),
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn run_challenges(cmd: ChallengesCmd, ctx: &Context) -> Result<()> {
    match cmd {
        ChallengesCmd::Gen(args) => {
            anyhow::ensure!(args.count >= 1, "count must be >= 1");
            let patterns = gen_challenges(args.count, ctx.seed);
            let out = ctx.out_path(&args.out);
            save_challenges(&out, &patterns)?;
            result_line(&[
                ("challenges", out.display().to_string()),
                ("count", patterns.len().to_string()),
            ]);
            Ok(())
        }
    }
}

pub fn load_device(path: &std::path::Path) -> Result<DeviceModel> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(DeviceModel::from_spec_str(&text)?)
}
