//! `pufpad` — device simulation, dictionary setup, one-time-pad
//! encrypt/decrypt, and the statistics harness, all driven by explicit seeds
//! so every run replays bit-identically.

mod analyze;
mod config;
mod crypto;
mod device;
mod sweep_cmd;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use pufpad_core::Error as CoreError;

/// Exit codes: 0 success, 2 bad usage (clap), 3 malformed input file,
/// 4 I/O failure, 5 key space exhausted, 6 validation or calibration error.
#[derive(Parser)]
#[command(
    name = "pufpad",
    version,
    about = "Simulated photonic-PUF one-time-pad toolkit",
    long_about = "Simulated photonic-PUF one-time-pad toolkit.\n\n\
        Exit codes:\n  \
        0  success\n  \
        2  command-line usage error\n  \
        3  malformed input file\n  \
        4  I/O failure\n  \
        5  key space exhausted\n  \
        6  validation or calibration error\n\n\
        Every stochastic command takes --seed; identical invocations produce\n\
        byte-identical outputs. The final stdout line of each command is\n\
        machine-parseable: RESULT key=value ..."
)]
struct Cli {
    /// Master seed for all randomness in the command.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Directory for outputs given as bare file names.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// key=value defaults file (CLI flags win over file entries).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create or interrogate simulated devices.
    #[command(subcommand)]
    Device(device::DeviceCmd),
    /// Generate challenge pattern files.
    #[command(subcommand)]
    Challenges(device::ChallengesCmd),
    /// Build the public dictionary for a device pair.
    #[command(subcommand)]
    Dict(crypto::DictCmd),
    /// Encrypt a message file, consuming dictionary blocks.
    Encrypt(crypto::EncryptArgs),
    /// Decrypt a ciphertext file.
    Decrypt(crypto::DecryptArgs),
    /// BER vs code rate: Monte-Carlo plus binomial prediction.
    BerSweep(sweep_cmd::BerSweepArgs),
    /// Statistical analyses of the simulated pipeline.
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCmd),
    /// BCH code utilities.
    #[command(subcommand)]
    Bch(analyze::BchCmd),
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(core) = err.downcast_ref::<CoreError>() {
        return match core {
            CoreError::Format { .. } => 3,
            CoreError::Io(_) => 4,
            CoreError::KeySpaceExhausted { .. } => 5,
            _ => 6,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 4;
    }
    6
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = match config::Context::new(cli.seed, cli.out_dir, cli.config.as_deref()) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let result = match cli.command {
        Command::Device(cmd) => device::run_device(cmd, &ctx),
        Command::Challenges(cmd) => device::run_challenges(cmd, &ctx),
        Command::Dict(cmd) => crypto::run_dict(cmd, &ctx),
        Command::Encrypt(args) => crypto::run_encrypt(args, &ctx),
        Command::Decrypt(args) => crypto::run_decrypt(args, &ctx),
        Command::BerSweep(args) => sweep_cmd::run_ber_sweep(args, &ctx),
        Command::Analyze(cmd) => analyze::run_analyze(cmd, &ctx),
        Command::Bch(cmd) => analyze::run_bch(cmd, &ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
