//! Monte-Carlo harnesses: calibrated device pairs, end-to-end message
//! experiments, clone attacks, and the BER-vs-code-rate sweep with its
//! binomial prediction.

use rayon::prelude::*;

use crate::analysis::{block_error_prob_fitted, predict_message_ber, FhdLabel, FhdStats};
use crate::bch::BchCode;
use crate::bits::Bits;
use crate::error::Result;
use crate::fuzzy::SKETCH_BITS;
use crate::math::hash_words;
use crate::pipeline::{
    averaged_response, single_shot_response, DEFAULT_CLONE_RHO, DEFAULT_NOISE_SIGMA,
    DEFAULT_REPETITIONS, PROTOCOL_CHANNEL,
};
use crate::postproc::PostprocConfig;
use crate::protocol::{
    decrypt_detailed, dictionary_setup, encrypt_detailed, SetupConfig, PAD_BITS_PER_BLOCK,
};
use crate::puf_sim::{gen_challenges, DeviceModel};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Clone, Copy, Debug)]
pub struct SweepConfig {
    pub postproc: PostprocConfig,
    pub repetitions: u32,
    pub noise_sigma: f64,
    pub clone_rho: f64,
    pub patterns_per_dictionary: usize,
    pub message_bits: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            postproc: PostprocConfig::default(),
            repetitions: DEFAULT_REPETITIONS,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            clone_rho: DEFAULT_CLONE_RHO,
            patterns_per_dictionary: 8550,
            message_bits: 25_575,
        }
    }
}

/// Who answers Bob's side during decryption.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decryptor {
    Legitimate,
    CloneOfB,
}

/// A fresh device pair for a sweep task, with the configured operating point.
pub fn make_pair(cfg: &SweepConfig, pair_seed: u64) -> Result<(DeviceModel, DeviceModel)> {
    let a = DeviceModel::new(
        hash_words(&[pair_seed, 0xA]),
        hash_words(&[pair_seed, 0xA1]),
        cfg.clone_rho,
        cfg.noise_sigma,
        1,
    )?;
    let b = DeviceModel::new(
        hash_words(&[pair_seed, 0xB]),
        hash_words(&[pair_seed, 0xB1]),
        cfg.clone_rho,
        cfg.noise_sigma,
        1,
    )?;
    Ok((a, b))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct MessageOutcome {
    pub message_bits: u64,
    pub bit_errors: u64,
    pub blocks: u64,
    /// Blocks whose recovered chunk contained at least one bit error.
    pub corrupted_blocks: u64,
    /// Sketch reconstruction failures on each side.
    pub alice_failed_blocks: u64,
    pub bob_failed_blocks: u64,
    /// Blocks the decryptor reconstructed exactly.
    pub bob_recovered_blocks: u64,
}

impl MessageOutcome {
    pub fn accumulate(&mut self, other: &MessageOutcome) {
        self.message_bits += other.message_bits;
        self.bit_errors += other.bit_errors;
        self.blocks += other.blocks;
        self.corrupted_blocks += other.corrupted_blocks;
        self.alice_failed_blocks += other.alice_failed_blocks;
        self.bob_failed_blocks += other.bob_failed_blocks;
        self.bob_recovered_blocks += other.bob_recovered_blocks;
    }

    pub fn ber(&self) -> f64 {
        if self.message_bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.message_bits as f64
        }
    }
}

/// One full message exchange over a fresh dictionary: setup, encrypt with
/// Alice's device, decrypt with Bob's (or with a clone of Bob's).
pub fn run_message(
    cfg: &SweepConfig,
    code: &BchCode,
    pair_seed: u64,
    message_index: u64,
    decryptor: Decryptor,
) -> Result<MessageOutcome> {
    let (device_a, device_b) = make_pair(cfg, pair_seed)?;
    let patterns = gen_challenges(
        cfg.patterns_per_dictionary,
        hash_words(&[pair_seed, 0xC4A7, message_index]),
    );
    let setup = SetupConfig {
        postproc: cfg.postproc,
        repetitions: cfg.repetitions,
    };
    let mut dict = dictionary_setup(
        &device_a,
        &device_b,
        &patterns,
        code,
        &setup,
        hash_words(&[pair_seed, 0xD1C7, message_index]),
    )?;

    let capacity = dict.blocks.len() * PAD_BITS_PER_BLOCK;
    let message_bits = cfg.message_bits.min(capacity);
    let mut rng = ChaCha12Rng::seed_from_u64(hash_words(&[pair_seed, 0x4E55, message_index]));
    let message = Bits::random(message_bits, &mut rng);

    let (ct, alice_stats) = encrypt_detailed(
        &device_a,
        &mut dict,
        code,
        &message,
        hash_words(&[pair_seed, 0xE7C, message_index]),
    )?;

    let bob = match decryptor {
        Decryptor::Legitimate => device_b.clone(),
        Decryptor::CloneOfB => device_b.make_clone(hash_words(&[pair_seed, 0xC10E]))?,
    };
    let (recovered, bob_stats) = decrypt_detailed(
        &bob,
        &dict,
        code,
        &ct,
        hash_words(&[pair_seed, 0xDEC, message_index]),
    )?;

    let mut outcome = MessageOutcome {
        message_bits: message_bits as u64,
        bit_errors: recovered.hamming(&message) as u64,
        blocks: alice_stats.blocks.len() as u64,
        alice_failed_blocks: alice_stats.failed_blocks() as u64,
        bob_failed_blocks: bob_stats.failed_blocks() as u64,
        bob_recovered_blocks: bob_stats.reconstructed_blocks() as u64,
        ..Default::default()
    };
    for chunk_start in (0..message_bits).step_by(PAD_BITS_PER_BLOCK) {
        let chunk_end = (chunk_start + PAD_BITS_PER_BLOCK).min(message_bits);
        let differs = (chunk_start..chunk_end).any(|i| message.get(i) != recovered.get(i));
        if differs {
            outcome.corrupted_blocks += 1;
        }
    }
    Ok(outcome)
}

/// Run `messages_per_pair` messages over each of `pairs` device pairs in
/// parallel and aggregate.
pub fn run_messages(
    cfg: &SweepConfig,
    code: &BchCode,
    pairs: u64,
    messages_per_pair: u64,
    decryptor: Decryptor,
    seed: u64,
) -> Result<MessageOutcome> {
    let tasks: Vec<(u64, u64)> = (0..pairs)
        .flat_map(|p| (0..messages_per_pair).map(move |m| (p, m)))
        .collect();
    let outcomes: Vec<MessageOutcome> = tasks
        .par_iter()
        .map(|&(p, m)| run_message(cfg, code, hash_words(&[seed, p]), m, decryptor))
        .collect::<Result<_>>()?;
    let mut total = MessageOutcome::default();
    for o in &outcomes {
        total.accumulate(o);
    }
    Ok(total)
}

/// Per-block FHD distribution of single-shot responses against the enrolled
/// averaged response, the statistic the binomial prediction is fitted to.
pub fn collect_block_fhd_stats(
    cfg: &SweepConfig,
    label: FhdLabel,
    sweeps: u32,
    seed: u64,
) -> Result<FhdStats> {
    let (device, _) = make_pair(cfg, hash_words(&[seed, 0xF1]))?;
    let reader: DeviceModel = match label {
        FhdLabel::Same => device.clone(),
        FhdLabel::Clone => device.make_clone(hash_words(&[seed, 0xF2]))?,
        FhdLabel::Different => DeviceModel::new(
            hash_words(&[seed, 0xF3]),
            hash_words(&[seed, 0xF4]),
            cfg.clone_rho,
            cfg.noise_sigma,
            1,
        )?,
    };
    let patterns = gen_challenges(cfg.patterns_per_dictionary, hash_words(&[seed, 0xF5]));
    let reference = averaged_response(
        &device,
        &patterns,
        PROTOCOL_CHANNEL,
        cfg.repetitions,
        &cfg.postproc,
        hash_words(&[seed, 0xF6]),
    )?;
    let block_count = reference.bits.len() / SKETCH_BITS;
    let mut blocks_ref = Vec::with_capacity(block_count);
    for i in 0..block_count {
        blocks_ref.push(reference.bits.slice(i * SKETCH_BITS, (i + 1) * SKETCH_BITS));
    }

    let mut responses = Vec::with_capacity(block_count * sweeps as usize);
    let mut references = Vec::with_capacity(block_count * sweeps as usize);
    for s in 0..sweeps {
        let single = single_shot_response(
            &reader,
            &patterns,
            PROTOCOL_CHANNEL,
            &cfg.postproc,
            hash_words(&[seed, 0xF7, s as u64]),
        )?;
        for (i, reference_block) in blocks_ref.iter().enumerate() {
            responses.push(single.bits.slice(i * SKETCH_BITS, (i + 1) * SKETCH_BITS));
            references.push(reference_block.clone());
        }
    }
    let samples: Vec<f64> = responses
        .iter()
        .zip(&references)
        .map(|(r, reference)| r.hamming(reference) as f64 / SKETCH_BITS as f64)
        .collect();
    FhdStats::from_samples(samples, label)
}

/// Extractor outputs concatenated across freshly enrolled blocks until
/// `bits_needed` bits of key material exist; the corpus CTW incompressibility
/// checks run on.
pub fn pipeline_key_material(
    cfg: &SweepConfig,
    code: &BchCode,
    bits_needed: usize,
    seed: u64,
) -> Result<Bits> {
    let mut material = Bits::zeros(0);
    let mut round = 0u64;
    while material.len() < bits_needed {
        let (device, _) = make_pair(cfg, hash_words(&[seed, 0x6B65, round]))?;
        let patterns = gen_challenges(
            cfg.patterns_per_dictionary,
            hash_words(&[seed, 0x6B66, round]),
        );
        let avg = averaged_response(
            &device,
            &patterns,
            PROTOCOL_CHANNEL,
            cfg.repetitions,
            &cfg.postproc,
            hash_words(&[seed, 0x6B67, round]),
        )?;
        let blocks = avg.bits.len() / SKETCH_BITS;
        for i in 0..blocks {
            if material.len() >= bits_needed {
                break;
            }
            let w = avg.bits.slice(i * SKETCH_BITS, (i + 1) * SKETCH_BITS);
            let (key, _helper) =
                crate::fuzzy::gen(&w, code, hash_words(&[seed, 0x6B68, round, i as u64]))?;
            material.extend(key.bits());
        }
        round += 1;
    }
    Ok(material.slice(0, bits_needed))
}

#[derive(Clone, Debug)]
pub struct BerRow {
    pub t: usize,
    pub code_rate: f64,
    pub predicted_ber: f64,
    pub simulated_ber: f64,
    pub message_bits: u64,
    pub bit_errors: u64,
    pub corrupted_blocks: u64,
}

/// BER vs code rate: for each correction capability, predict the message BER
/// from the fitted per-block FHD binomial and measure it by Monte-Carlo.
pub fn ber_sweep(
    ts: &[usize],
    pairs: u64,
    messages_per_pair: u64,
    cfg: &SweepConfig,
    seed: u64,
) -> Result<Vec<BerRow>> {
    // Both endpoints are statistically identical, so one fitted distribution
    // serves both factors of the block-corruption probability.
    let stats = collect_block_fhd_stats(cfg, FhdLabel::Same, 4, hash_words(&[seed, 0x57A7]))?;
    let mut rows = Vec::with_capacity(ts.len());
    for (ti, &t) in ts.iter().enumerate() {
        let code = BchCode::with_correction(t)?;
        let pr_endpoint = block_error_prob_fitted(&stats, &code)?;
        let predicted = predict_message_ber(pr_endpoint, pr_endpoint);
        let outcome = run_messages(
            cfg,
            &code,
            pairs,
            messages_per_pair,
            Decryptor::Legitimate,
            hash_words(&[seed, ti as u64]),
        )?;
        rows.push(BerRow {
            t: code.t(),
            code_rate: code.rate(),
            predicted_ber: predicted,
            simulated_ber: outcome.ber(),
            message_bits: outcome.message_bits,
            bit_errors: outcome.bit_errors,
            corrupted_blocks: outcome.corrupted_blocks,
        });
    }
    Ok(rows)
}

/// Re-derive the FHD distribution used for prediction; exposed for the
/// analysis CLI and acceptance checks.
pub fn fhd_distribution_of_label(
    cfg: &SweepConfig,
    label: FhdLabel,
    sweeps: u32,
    seed: u64,
) -> Result<FhdStats> {
    collect_block_fhd_stats(cfg, label, sweeps, seed)
}

/// Monobit balance of the shared keys in a freshly built dictionary.
pub fn shared_key_ones_fraction(cfg: &SweepConfig, code: &BchCode, seed: u64) -> Result<f64> {
    let (a, b) = make_pair(cfg, hash_words(&[seed, 1]))?;
    let patterns = gen_challenges(cfg.patterns_per_dictionary, hash_words(&[seed, 2]));
    let setup = SetupConfig {
        postproc: cfg.postproc,
        repetitions: cfg.repetitions,
    };
    let dict = dictionary_setup(&a, &b, &patterns, code, &setup, hash_words(&[seed, 3]))?;
    let (ones, total) = dict.blocks.iter().fold((0usize, 0usize), |(o, t), blk| {
        (o + blk.shared_key.count_ones(), t + blk.shared_key.len())
    });
    Ok(ones as f64 / total as f64)
}
