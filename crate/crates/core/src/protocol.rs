//! Two-party one-time-pad communication over a public dictionary.
//!
//! Setup enrolls both devices' averaged responses, splits them into 255-bit
//! blocks, and stores per-block helper data plus the shared key
//! `k_ij = R_i ⊕ R_j`. Encryption takes a fresh single-shot sweep from
//! Alice's device, reproduces `R_i` per block, and XORs 256-bit pad chunks
//! into the message; decryption mirrors it with Bob's device and bridges via
//! `k_ij`. A block whose reconstruction fails still emits a pad — the hash
//! of the raw single-shot response — so a corrupted block scrambles its
//! chunk instead of aborting the message.
//!
//! The protocol always queries channel 0: dictionary files carry no channel
//! field, so the channel is fixed by convention.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::bch::BchCode;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::fuzzy::{self, HelperData, KEY_BITS, SKETCH_BITS};
use crate::math::hash_words;
use crate::pipeline::{analog_sweep_averaged, binarize_run, single_shot_response, PROTOCOL_CHANNEL};
use crate::postproc::PostprocConfig;
use crate::puf_sim::{ChallengePattern, DeviceModel};

/// Pad bits drawn from each block: one SHA-256 output.
pub const PAD_BITS_PER_BLOCK: usize = KEY_BITS;

/// Blocks needed to cover a message: exact ceiling division.
pub fn key_blocks_needed(message_bits: usize) -> usize {
    message_bits.div_ceil(PAD_BITS_PER_BLOCK)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockRecord {
    pub index: usize,
    pub helper_a: HelperData,
    pub helper_b: HelperData,
    /// k_ij = R_i xor R_j, 256 bits, public.
    pub shared_key: Bits,
    pub used: bool,
}

#[derive(Clone, Debug)]
pub struct Dictionary {
    pub code_k: usize,
    pub code_t: usize,
    pub postproc: PostprocConfig,
    /// Sidecar file name holding the challenge list, one hex pattern per line.
    pub challenges_ref: String,
    pub challenges: Vec<ChallengePattern>,
    pub blocks: Vec<BlockRecord>,
}

#[derive(Clone, Copy, Debug)]
pub struct SetupConfig {
    pub postproc: PostprocConfig,
    /// Shots averaged per pattern for the enrolled reference responses.
    pub repetitions: u32,
}

impl Default for SetupConfig {
    fn default() -> Self {
        SetupConfig {
            postproc: PostprocConfig::default(),
            repetitions: crate::pipeline::DEFAULT_REPETITIONS,
        }
    }
}

/// Per-block outcome of a pad recovery, for instrumentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockOutcome {
    pub index: usize,
    /// Whether the secure-sketch reconstruction succeeded.
    pub reconstructed: bool,
}

#[derive(Clone, Debug, Default)]
pub struct EndpointStats {
    pub blocks: Vec<BlockOutcome>,
}

impl EndpointStats {
    pub fn reconstructed_blocks(&self) -> usize {
        self.blocks.iter().filter(|b| b.reconstructed).count()
    }

    pub fn failed_blocks(&self) -> usize {
        self.blocks.len() - self.reconstructed_blocks()
    }
}

/// Build the public dictionary for a device pair over a shared challenge
/// list. Averaged responses are binarized, concatenated, and split into
/// 255-bit blocks; trailing bits short of a block are discarded.
pub fn dictionary_setup(
    device_a: &DeviceModel,
    device_b: &DeviceModel,
    patterns: &[ChallengePattern],
    code: &BchCode,
    config: &SetupConfig,
    master_seed: u64,
) -> Result<Dictionary> {
    config.postproc.validate()?;
    let bits_per_device = patterns.len() * config.postproc.msb_keep as usize;
    let block_count = bits_per_device / SKETCH_BITS;
    if block_count == 0 {
        return Err(Error::TooFewSamples {
            needed: SKETCH_BITS.div_ceil(config.postproc.msb_keep as usize),
            got: patterns.len(),
        });
    }

    let avg_a = binarize_run(
        &config.postproc,
        &analog_sweep_averaged(
            device_a,
            patterns,
            PROTOCOL_CHANNEL,
            config.repetitions,
            hash_words(&[master_seed, 1]),
        )?,
    )?;
    let avg_b = binarize_run(
        &config.postproc,
        &analog_sweep_averaged(
            device_b,
            patterns,
            PROTOCOL_CHANNEL,
            config.repetitions,
            hash_words(&[master_seed, 2]),
        )?,
    )?;

    let blocks = (0..block_count)
        .into_par_iter()
        .map(|i| -> Result<BlockRecord> {
            let w_a = avg_a.bits.slice(i * SKETCH_BITS, (i + 1) * SKETCH_BITS);
            let w_b = avg_b.bits.slice(i * SKETCH_BITS, (i + 1) * SKETCH_BITS);
            let (key_a, helper_a) = fuzzy::gen(&w_a, code, hash_words(&[master_seed, 3, i as u64]))?;
            let (key_b, helper_b) = fuzzy::gen(&w_b, code, hash_words(&[master_seed, 4, i as u64]))?;
            Ok(BlockRecord {
                index: i,
                helper_a,
                helper_b,
                shared_key: key_a.bits().xor(key_b.bits()),
                used: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Dictionary {
        code_k: code.k(),
        code_t: code.t(),
        postproc: config.postproc,
        challenges_ref: "challenges.hex".to_string(),
        challenges: patterns.to_vec(),
        blocks,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub message_bits: usize,
    pub first_block: usize,
    pub payload: Bits,
}

impl Dictionary {
    pub fn unused_blocks(&self) -> usize {
        self.blocks.iter().filter(|b| !b.used).count()
    }

    fn validate_code(&self, code: &BchCode) -> Result<()> {
        if code.k() != self.code_k || code.t() != self.code_t {
            return Err(Error::InvalidParameter(format!(
                "dictionary was built for a (255,{},t={}) code, got (255,{},t={})",
                self.code_k,
                self.code_t,
                code.k(),
                code.t()
            )));
        }
        Ok(())
    }

    /// Index of the first unused block, validating that `needed` consecutive
    /// unused blocks follow it.
    fn claimable_run(&self, needed: usize) -> Result<usize> {
        let first = self
            .blocks
            .iter()
            .position(|b| !b.used)
            .unwrap_or(self.blocks.len());
        let available = self.unused_blocks();
        if first + needed > self.blocks.len() || available < needed {
            return Err(Error::KeySpaceExhausted {
                needed,
                available: self.blocks.len().saturating_sub(first).min(available),
            });
        }
        for b in &self.blocks[first..first + needed] {
            if b.used {
                return Err(Error::BlockAlreadyUsed(b.index));
            }
        }
        Ok(first)
    }
}

/// Recover the per-block pad with a device's helper data from its slice of
/// the single-shot response. On reconstruction failure the pad is the hash
/// of the raw response, which is uncorrelated with the enrolled key.
fn recover_pad(
    w_single: &Bits,
    helper: &HelperData,
    code: &BchCode,
) -> Result<(Bits, bool)> {
    match fuzzy::rep(w_single, helper, code) {
        Ok(key) => Ok((key.into_bits(), true)),
        Err(Error::ReconstructionFailed) => {
            Ok((fuzzy::extract(w_single, &helper.mask)?.into_bits(), false))
        }
        Err(e) => Err(e),
    }
}

/// Encrypt `message` with fresh single-shot pads from `device_a`, consuming
/// the next unused blocks in index order.
pub fn encrypt(
    device_a: &DeviceModel,
    dictionary: &mut Dictionary,
    code: &BchCode,
    message: &Bits,
    shot_seed: u64,
) -> Result<Ciphertext> {
    let (ciphertext, _) = encrypt_detailed(device_a, dictionary, code, message, shot_seed)?;
    Ok(ciphertext)
}

/// [`encrypt`] plus per-block reconstruction outcomes.
pub fn encrypt_detailed(
    device_a: &DeviceModel,
    dictionary: &mut Dictionary,
    code: &BchCode,
    message: &Bits,
    shot_seed: u64,
) -> Result<(Ciphertext, EndpointStats)> {
    dictionary.validate_code(code)?;
    let needed = key_blocks_needed(message.len());
    let first = dictionary.claimable_run(needed)?;
    if needed == 0 {
        return Ok((
            Ciphertext {
                message_bits: 0,
                first_block: first,
                payload: Bits::zeros(0),
            },
            EndpointStats::default(),
        ));
    }

    let response = single_shot_response(
        device_a,
        &dictionary.challenges,
        PROTOCOL_CHANNEL,
        &dictionary.postproc,
        shot_seed,
    )?;

    let mut stats = EndpointStats::default();
    let mut pad_stream = Bits::zeros(0);
    for block in &mut dictionary.blocks[first..first + needed] {
        let w = response
            .bits
            .slice(block.index * SKETCH_BITS, (block.index + 1) * SKETCH_BITS);
        let (pad, reconstructed) = recover_pad(&w, &block.helper_a, code)?;
        stats.blocks.push(BlockOutcome {
            index: block.index,
            reconstructed,
        });
        pad_stream.extend(&pad);
        block.used = true;
    }

    let payload: Bits = (0..message.len())
        .map(|i| message.get(i) ^ pad_stream.get(i))
        .collect();
    Ok((
        Ciphertext {
            message_bits: message.len(),
            first_block: first,
            payload,
        },
        stats,
    ))
}

/// Decrypt with `device_b`'s own single-shot sweep, bridging to Alice's key
/// through the stored shared keys.
pub fn decrypt(
    device_b: &DeviceModel,
    dictionary: &Dictionary,
    code: &BchCode,
    ciphertext: &Ciphertext,
    shot_seed: u64,
) -> Result<Bits> {
    let (message, _) = decrypt_detailed(device_b, dictionary, code, ciphertext, shot_seed)?;
    Ok(message)
}

/// [`decrypt`] plus per-block reconstruction outcomes.
pub fn decrypt_detailed(
    device_b: &DeviceModel,
    dictionary: &Dictionary,
    code: &BchCode,
    ciphertext: &Ciphertext,
    shot_seed: u64,
) -> Result<(Bits, EndpointStats)> {
    dictionary.validate_code(code)?;
    if ciphertext.payload.len() != ciphertext.message_bits {
        return Err(Error::LengthMismatch {
            expected: ciphertext.message_bits,
            actual: ciphertext.payload.len(),
        });
    }
    let needed = key_blocks_needed(ciphertext.message_bits);
    if needed == 0 {
        return Ok((Bits::zeros(0), EndpointStats::default()));
    }
    let last = ciphertext.first_block + needed - 1;
    if last >= dictionary.blocks.len() {
        return Err(Error::UnknownBlockIndex(last));
    }

    let response = single_shot_response(
        device_b,
        &dictionary.challenges,
        PROTOCOL_CHANNEL,
        &dictionary.postproc,
        shot_seed,
    )?;

    let mut stats = EndpointStats::default();
    let mut pad_stream = Bits::zeros(0);
    for block in &dictionary.blocks[ciphertext.first_block..=last] {
        let w = response
            .bits
            .slice(block.index * SKETCH_BITS, (block.index + 1) * SKETCH_BITS);
        let (key_b, reconstructed) = recover_pad(&w, &block.helper_b, code)?;
        stats.blocks.push(BlockOutcome {
            index: block.index,
            reconstructed,
        });
        // R''_i = k_ij xor R'_j
        pad_stream.extend(&block.shared_key.xor(&key_b));
    }

    let message: Bits = (0..ciphertext.message_bits)
        .map(|i| ciphertext.payload.get(i) ^ pad_stream.get(i))
        .collect();
    Ok((message, stats))
}

// --- serialization ---

#[derive(Serialize, Deserialize)]
struct HelperDto {
    s_hex: String,
    x_hex: String,
}

#[derive(Serialize, Deserialize)]
struct BlockDto {
    index: usize,
    #[serde(rename = "helper_A")]
    helper_a: HelperDto,
    #[serde(rename = "helper_B")]
    helper_b: HelperDto,
    k_ij_hex: String,
    used: bool,
}

#[derive(Serialize, Deserialize)]
struct CodeDto {
    k: usize,
    t: usize,
}

#[derive(Serialize, Deserialize)]
struct DictionaryDto {
    version: u32,
    code: CodeDto,
    postproc: PostprocConfig,
    challenges: String,
    blocks: Vec<BlockDto>,
}

const DICTIONARY_VERSION: u32 = 1;

impl From<&HelperData> for HelperDto {
    fn from(h: &HelperData) -> Self {
        HelperDto {
            s_hex: h.sketch.to_hex(),
            x_hex: h.mask.to_hex(),
        }
    }
}

impl HelperDto {
    fn parse(&self) -> Result<HelperData> {
        Ok(HelperData {
            sketch: Bits::from_hex(&self.s_hex, SKETCH_BITS)?,
            mask: Bits::from_hex(&self.x_hex, KEY_BITS)?,
        })
    }
}

impl Dictionary {
    pub fn to_json(&self) -> String {
        let dto = DictionaryDto {
            version: DICTIONARY_VERSION,
            code: CodeDto {
                k: self.code_k,
                t: self.code_t,
            },
            postproc: self.postproc,
            challenges: self.challenges_ref.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockDto {
                    index: b.index,
                    helper_a: (&b.helper_a).into(),
                    helper_b: (&b.helper_b).into(),
                    k_ij_hex: b.shared_key.to_hex(),
                    used: b.used,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dto).expect("dictionary serialization cannot fail")
    }

    pub fn from_json(text: &str, challenges: Vec<ChallengePattern>) -> Result<Self> {
        let dto: DictionaryDto = serde_json::from_str(text)
            .map_err(|e| Error::format("dictionary", e.to_string()))?;
        if dto.version != DICTIONARY_VERSION {
            return Err(Error::format(
                "dictionary",
                format!("unsupported version {}", dto.version),
            ));
        }
        dto.postproc.validate()?;
        let mut blocks = Vec::with_capacity(dto.blocks.len());
        for (i, b) in dto.blocks.iter().enumerate() {
            if b.index != i {
                return Err(Error::format(
                    "dictionary",
                    format!("block {i} carries index {}", b.index),
                ));
            }
            blocks.push(BlockRecord {
                index: b.index,
                helper_a: b.helper_a.parse()?,
                helper_b: b.helper_b.parse()?,
                shared_key: Bits::from_hex(&b.k_ij_hex, KEY_BITS)?,
                used: b.used,
            });
        }
        let expected_blocks =
            challenges.len() * dto.postproc.msb_keep as usize / SKETCH_BITS;
        if blocks.len() != expected_blocks {
            return Err(Error::format(
                "dictionary",
                format!(
                    "{} blocks inconsistent with {} challenges",
                    blocks.len(),
                    challenges.len()
                ),
            ));
        }
        Ok(Dictionary {
            code_k: dto.code.k,
            code_t: dto.code.t,
            postproc: dto.postproc,
            challenges_ref: dto.challenges,
            challenges,
            blocks,
        })
    }

    /// Write the dictionary JSON and its challenge sidecar next to it.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        let sidecar = path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&self.challenges_ref);
        let mut text = String::with_capacity(self.challenges.len() * 33);
        for p in &self.challenges {
            text.push_str(&p.to_hex());
            text.push('\n');
        }
        std::fs::write(sidecar, text)?;
        Ok(())
    }

    /// Load a dictionary and its challenge sidecar (resolved relative to the
    /// dictionary file).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let dto: DictionaryDto = serde_json::from_str(&text)
            .map_err(|e| Error::format("dictionary", e.to_string()))?;
        let sidecar = path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&dto.challenges);
        let challenges = load_challenges(&sidecar)?;
        Dictionary::from_json(&text, challenges)
    }
}

/// Read a challenge file: one 32-hex-character pattern per line.
pub fn load_challenges(path: &Path) -> Result<Vec<ChallengePattern>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(ChallengePattern::from_hex)
        .collect()
}

/// Write a challenge file in the format [`load_challenges`] reads.
pub fn save_challenges(path: &Path, patterns: &[ChallengePattern]) -> Result<()> {
    let mut text = String::with_capacity(patterns.len() * 33);
    for p in patterns {
        text.push_str(&p.to_hex());
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

impl Ciphertext {
    /// Two-line text form: `bits=<n> first_block=<i>` then hex payload.
    pub fn to_text(&self) -> String {
        format!(
            "bits={} first_block={}\n{}\n",
            self.message_bits,
            self.first_block,
            self.payload.to_hex()
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format("ciphertext", "missing header"))?;
        let mut bits = None;
        let mut first = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("bits", v)) => {
                    bits = Some(v.parse::<usize>().map_err(|e| {
                        Error::format("ciphertext", format!("bits: {e}"))
                    })?)
                }
                Some(("first_block", v)) => {
                    first = Some(v.parse::<usize>().map_err(|e| {
                        Error::format("ciphertext", format!("first_block: {e}"))
                    })?)
                }
                _ => return Err(Error::format("ciphertext", format!("bad field {field:?}"))),
            }
        }
        let message_bits = bits.ok_or_else(|| Error::format("ciphertext", "missing bits="))?;
        let first_block =
            first.ok_or_else(|| Error::format("ciphertext", "missing first_block="))?;
        let payload = if message_bits == 0 {
            Bits::zeros(0)
        } else {
            Bits::from_hex(
                lines
                    .next()
                    .ok_or_else(|| Error::format("ciphertext", "missing payload"))?,
                message_bits,
            )?
        };
        Ok(Ciphertext {
            message_bits,
            first_block,
            payload,
        })
    }
}
