//! `dict setup`, `encrypt`, and `decrypt`.

use anyhow::{Context as _, Result};
use clap::{Args, Subcommand};
use std::path::PathBuf;

use pufpad_core::bch::BchCode;
use pufpad_core::bits::Bits;
use pufpad_core::pipeline::DEFAULT_REPETITIONS;
use pufpad_core::postproc::{PostprocConfig, Whitening};
use pufpad_core::protocol::{
    self, load_challenges, Ciphertext, Dictionary, SetupConfig,
};

use crate::config::{result_line, Context};
use crate::device::load_device;

#[derive(Subcommand)]
pub enum DictCmd {
    /// Enroll a device pair into a public dictionary file.
    Setup(SetupArgs),
}

#[derive(Args)]
pub struct SetupArgs {
    #[arg(long)]
    device_a: PathBuf,
    #[arg(long)]
    device_b: PathBuf,
    #[arg(long)]
    challenges: PathBuf,
    /// BCH correction capability (rounds up to the nearest table entry).
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    resample_bits: Option<u32>,
    #[arg(long)]
    msb_keep: Option<u32>,
    /// cyclic-adjacent-xor or none.
    #[arg(long)]
    whitening: Option<Whitening>,
    /// Shots averaged per pattern during enrollment.
    #[arg(long)]
    repetitions: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

pub fn postproc_from(
    ctx: &Context,
    resample_bits: Option<u32>,
    msb_keep: Option<u32>,
    whitening: Option<Whitening>,
) -> Result<PostprocConfig> {
    let dft = PostprocConfig::default();
    let cfg = PostprocConfig {
        resample_bits: ctx.or_default(resample_bits, "resample_bits", dft.resample_bits)?,
        msb_keep: ctx.or_default(msb_keep, "msb_keep", dft.msb_keep)?,
        whitening: ctx.or_default(whitening, "whitening", dft.whitening)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn run_dict(cmd: DictCmd, ctx: &Context) -> Result<()> {
    match cmd {
        DictCmd::Setup(args) => {
            let device_a = load_device(&args.device_a)?;
            let device_b = load_device(&args.device_b)?;
            let patterns = load_challenges(&args.challenges)?;
            let t = ctx.or_default(args.t, "t", 47)?;
            let code = BchCode::with_correction(t)?;
            let setup = SetupConfig {
                postproc: postproc_from(ctx, args.resample_bits, args.msb_keep, args.whitening)?,
                repetitions: ctx.or_default(args.repetitions, "repetitions", DEFAULT_REPETITIONS)?,
            };
            let mut dict =
                protocol::dictionary_setup(&device_a, &device_b, &patterns, &code, &setup, ctx.seed)?;
            let out = ctx.out_path(&args.out);
            if let Some(stem) = out.file_stem().and_then(|s| s.to_str()) {
                dict.challenges_ref = format!("{stem}.challenges.hex");
            }
            dict.save(&out)?;
            result_line(&[
                ("dictionary", out.display().to_string()),
                ("blocks", dict.blocks.len().to_string()),
                ("code_k", code.k().to_string()),
                ("code_t", code.t().to_string()),
                ("pad_bits", (dict.blocks.len() * protocol::PAD_BITS_PER_BLOCK).to_string()),
            ]);
            Ok(())
        }
    }
}

#[derive(Args)]
pub struct EncryptArgs {
    /// Alice's device spec.
    #[arg(long)]
    device: PathBuf,
    /// Dictionary file; its used-flags are updated in place.
    #[arg(long)]
    dict: PathBuf,
    /// Message file (arbitrary bytes).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct DecryptArgs {
    /// Bob's device spec.
    #[arg(long)]
    device: PathBuf,
    #[arg(long)]
    dict: PathBuf,
    /// Ciphertext file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Reference plaintext; when given, the summary line reports the
    /// measured bit error rate against it.
    #[arg(long)]
    expect: Option<PathBuf>,
}

pub fn run_encrypt(args: EncryptArgs, ctx: &Context) -> Result<()> {
    let device = load_device(&args.device)?;
    let mut dict = Dictionary::load(&args.dict)?;
    let code = BchCode::with_correction(dict.code_t)?;
    let payload =
        std::fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let message = Bits::from_bytes(&payload, payload.len() * 8);

    let (ct, stats) = protocol::encrypt_detailed(&device, &mut dict, &code, &message, ctx.seed)?;
    dict.save(&args.dict)?; // persist consumed blocks
    let out = ctx.out_path(&args.out);
    std::fs::write(&out, ct.to_text()).with_context(|| format!("writing {}", out.display()))?;
    result_line(&[
        ("ciphertext", out.display().to_string()),
        ("message_bits", ct.message_bits.to_string()),
        ("blocks_consumed", stats.blocks.len().to_string()),
        ("first_block", ct.first_block.to_string()),
        ("reconstruction_failures", stats.failed_blocks().to_string()),
        ("blocks_left", dict.unused_blocks().to_string()),
    ]);
    Ok(())
}

pub fn run_decrypt(args: DecryptArgs, ctx: &Context) -> Result<()> {
    let device = load_device(&args.device)?;
    let dict = Dictionary::load(&args.dict)?;
    let code = BchCode::with_correction(dict.code_t)?;
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let ct = Ciphertext::from_text(&text)?;

    let (message, stats) = protocol::decrypt_detailed(&device, &dict, &code, &ct, ctx.seed)?;
    let out = ctx.out_path(&args.out);
    std::fs::write(&out, message.to_bytes())
        .with_context(|| format!("writing {}", out.display()))?;
    let mut fields = vec![
        ("message", out.display().to_string()),
        ("message_bits", message.len().to_string()),
        ("blocks_read", stats.blocks.len().to_string()),
        ("reconstruction_failures", stats.failed_blocks().to_string()),
    ];
    if let Some(expect) = &args.expect {
        let reference = std::fs::read(expect)
            .with_context(|| format!("reading {}", expect.display()))?;
        let reference = Bits::from_bytes(&reference, (reference.len() * 8).min(message.len()));
        let errors = reference.hamming(&message.slice(0, reference.len()));
        let ber = errors as f64 / reference.len().max(1) as f64;
        fields.push(("ber", format!("{ber:.6}")));
    }
    result_line(&fields);
    Ok(())
}
