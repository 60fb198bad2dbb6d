//! `ber-sweep`: Monte-Carlo message BER against the binomial prediction
//! across BCH code rates.

use anyhow::Result;
use clap::Args;
use std::io::Write;
use std::path::PathBuf;

use pufpad_core::pipeline::{DEFAULT_CLONE_RHO, DEFAULT_NOISE_SIGMA, DEFAULT_REPETITIONS};
use pufpad_core::postproc::Whitening;
use pufpad_core::sweep::{ber_sweep, SweepConfig};

use crate::config::{result_line, Context};
use crate::crypto::postproc_from;

#[derive(Args)]
pub struct BerSweepArgs {
    /// Comma-separated BCH correction capabilities.
    #[arg(long, value_delimiter = ',', default_value = "9,26,47,63")]
    t_list: Vec<usize>,
    /// Independent device pairs per code rate.
    #[arg(long, default_value_t = 4)]
    pairs: u64,
    /// Messages exchanged per pair (each over a fresh dictionary).
    #[arg(long, default_value_t = 1)]
    messages_per_pair: u64,
    /// Challenge patterns per dictionary.
    #[arg(long)]
    patterns: Option<usize>,
    /// Message length in bits.
    #[arg(long)]
    message_bits: Option<usize>,
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

pub fn run_ber_sweep(args: BerSweepArgs, ctx: &Context) -> Result<()> {
    let dft = SweepConfig::default();
    let cfg = SweepConfig {
        postproc: postproc_from(ctx, args.resample_bits, args.msb_keep, args.whitening)?,
        repetitions: ctx.or_default(args.repetitions, "repetitions", DEFAULT_REPETITIONS)?,
        noise_sigma: ctx.or_default(args.noise_sigma, "noise_sigma", DEFAULT_NOISE_SIGMA)?,
        clone_rho: ctx.or_default(args.rho, "rho", DEFAULT_CLONE_RHO)?,
        patterns_per_dictionary: ctx.or_default(
            args.patterns,
            "patterns",
            dft.patterns_per_dictionary,
        )?,
        message_bits: ctx.or_default(args.message_bits, "message_bits", dft.message_bits)?,
    };
    anyhow::ensure!(!args.t_list.is_empty(), "t-list must not be empty");
    anyhow::ensure!(args.pairs >= 1 && args.messages_per_pair >= 1, "need at least one run");

    let rows = ber_sweep(&args.t_list, args.pairs, args.messages_per_pair, &cfg, ctx.seed)?;

    let out = ctx.out_path(&args.out);
    let mut f = std::io::BufWriter::new(std::fs::File::create(&out)?);
    writeln!(f, "code_rate,t,predicted_ber,simulated_ber,trials,error_events")?;
    for r in &rows {
        writeln!(
            f,
            "{:.6},{},{:e},{:e},{},{}",
            r.code_rate, r.t, r.predicted_ber, r.simulated_ber, r.message_bits, r.corrupted_blocks
        )?;
    }
    f.flush()?;

    let mut fields = vec![("sweep", out.display().to_string())];
    for r in &rows {
        fields.push(("t", r.t.to_string()));
        fields.push(("predicted_ber", format!("{:e}", r.predicted_ber)));
        fields.push(("simulated_ber", format!("{:e}", r.simulated_ber)));
    }
    result_line(&fields);
    Ok(())
}
