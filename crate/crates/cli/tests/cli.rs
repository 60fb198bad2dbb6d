//! End-to-end tests of the `pufpad` binary: file formats, exit codes,
//! reproducibility, and the no-secret-persistence guarantee.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use pufpad_core::bch::BchCode;
use pufpad_core::bits::Bits;
use pufpad_core::math::hash_words;
use pufpad_core::pipeline::single_shot_response;
use pufpad_core::postproc::PostprocConfig;
use pufpad_core::protocol::load_challenges;
use pufpad_core::puf_sim::DeviceModel;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pufpad"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawning pufpad")
}

fn run_ok(dir: &Path, args: &[&str]) -> String {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "pufpad {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn result_field<'a>(stdout: &'a str, key: &str) -> &'a str {
    let line = stdout
        .lines()
        .rev()
        .find(|l| l.starts_with("RESULT "))
        .expect("missing RESULT line");
    line.split_whitespace()
        .find_map(|f| f.strip_prefix(&format!("{key}=")[..]))
        .unwrap_or_else(|| panic!("missing {key} in {line}"))
}

/// Small fast fixture: 855 patterns, 8-bit resampling, 8-shot averaging.
fn setup_pair(dir: &Path, t: &str) {
    run_ok(dir, &["challenges", "gen", "--count", "855", "--seed", "5", "--out", "ch.hex"]);
    run_ok(
        dir,
        &["device", "create", "--design-seed", "1", "--device-seed", "11", "--out", "alice.spec"],
    );
    run_ok(
        dir,
        &["device", "create", "--design-seed", "2", "--device-seed", "22", "--out", "bob.spec"],
    );
    run_ok(
        dir,
        &[
            "dict", "setup", "--device-a", "alice.spec", "--device-b", "bob.spec",
            "--challenges", "ch.hex", "--t", t, "--resample-bits", "8",
            "--repetitions", "8", "--seed", "7", "--out", "dict.json",
        ],
    );
}

fn temp_dir(tag: &str) -> tempfile::TempDir {
    tempfile::Builder::new().prefix(tag).tempdir().unwrap()
}

#[test]
fn encrypt_decrypt_round_trip_and_reproducibility() {
    let run = |tag: &str| -> (PathBuf, tempfile::TempDir) {
        let dir = temp_dir(tag);
        setup_pair(dir.path(), "47");
        std::fs::write(dir.path().join("msg.bin"), [0x5au8; 200]).unwrap();
        run_ok(
            dir.path(),
            &[
                "encrypt", "--device", "alice.spec", "--dict", "dict.json",
                "--input", "msg.bin", "--out", "ct.txt", "--seed", "9",
            ],
        );
        run_ok(
            dir.path(),
            &[
                "decrypt", "--device", "bob.spec", "--dict", "dict.json",
                "--input", "ct.txt", "--out", "recovered.bin", "--seed", "10",
            ],
        );
        (dir.path().to_path_buf(), dir)
    };

    let (p1, _d1) = run('a'.to_string().as_str());
    let (p2, _d2) = run('b'.to_string().as_str());

    let msg = std::fs::read(p1.join("msg.bin")).unwrap();
    let rec = std::fs::read(p1.join("recovered.bin")).unwrap();
    assert_eq!(msg, rec, "calibrated round trip must be exact");

    // Identical seeds and inputs: byte-identical artifacts.
    for name in ["dict.json", "ct.txt", "recovered.bin", "ch.hex"] {
        let a = std::fs::read(p1.join(name)).unwrap();
        let b = std::fs::read(p2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    // Challenge file format: one 32-hex-char pattern per line.
    let ch = std::fs::read_to_string(p1.join("ch.hex")).unwrap();
    assert_eq!(ch.lines().count(), 855);
    assert!(ch
        .lines()
        .all(|l| l.len() == 32 && l.chars().all(|c| c.is_ascii_hexdigit())));

    // Ciphertext header format.
    let ct = std::fs::read_to_string(p1.join("ct.txt")).unwrap();
    assert!(ct.starts_with("bits=1600 first_block=0\n"), "header: {}", &ct[..40]);
}

#[test]
fn clone_device_scrambles_decryption() {
    let dir = temp_dir("clone");
    setup_pair(dir.path(), "47");
    std::fs::write(dir.path().join("msg.bin"), [0u8; 200]).unwrap();
    run_ok(
        dir.path(),
        &[
            "encrypt", "--device", "alice.spec", "--dict", "dict.json",
            "--input", "msg.bin", "--out", "ct.txt", "--seed", "9",
        ],
    );
    // A clone of Bob: same design seed, different device seed.
    run_ok(
        dir.path(),
        &["device", "create", "--design-seed", "2", "--device-seed", "23", "--out", "clone.spec"],
    );
    let out = run_ok(
        dir.path(),
        &[
            "decrypt", "--device", "clone.spec", "--dict", "dict.json",
            "--input", "ct.txt", "--out", "stolen.bin", "--seed", "10",
            "--expect", "msg.bin",
        ],
    );
    let failures: usize = result_field(&out, "reconstruction_failures").parse().unwrap();
    let blocks: usize = result_field(&out, "blocks_read").parse().unwrap();
    assert_eq!(failures, blocks, "clone must fail every block");

    let reported: f64 = result_field(&out, "ber").parse().unwrap();
    assert!((0.45..=0.52).contains(&reported), "clone BER {reported}");

    let msg = std::fs::read(dir.path().join("msg.bin")).unwrap();
    let stolen = std::fs::read(dir.path().join("stolen.bin")).unwrap();
    let errors: u32 = msg
        .iter()
        .zip(&stolen)
        .map(|(a, b)| (a ^ b).count_ones())
        .sum();
    let ber = errors as f64 / (msg.len() * 8) as f64;
    assert!((ber - reported).abs() < 1e-9, "summary BER {reported} vs measured {ber}");
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = temp_dir("exit");
    setup_pair(dir.path(), "47");
    std::fs::write(dir.path().join("msg.bin"), [0u8; 200]).unwrap();

    // 4: missing input file.
    let out = run_in(
        dir.path(),
        &["encrypt", "--device", "alice.spec", "--dict", "dict.json", "--input", "nope.bin", "--out", "x"],
    );
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));

    // 3: malformed dictionary.
    std::fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    let out = run_in(
        dir.path(),
        &["encrypt", "--device", "alice.spec", "--dict", "bad.json", "--input", "msg.bin", "--out", "x"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    // 5: key space exhausted. 100-byte messages consume 4 of the 10 blocks
    // each, so the third encryption cannot be served.
    std::fs::write(dir.path().join("small.bin"), [1u8; 100]).unwrap();
    run_ok(
        dir.path(),
        &["encrypt", "--device", "alice.spec", "--dict", "dict.json", "--input", "small.bin", "--out", "ct1"],
    );
    run_ok(
        dir.path(),
        &["encrypt", "--device", "alice.spec", "--dict", "dict.json", "--input", "small.bin", "--out", "ct2"],
    );
    let out = run_in(
        dir.path(),
        &["encrypt", "--device", "alice.spec", "--dict", "dict.json", "--input", "small.bin", "--out", "ct3"],
    );
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));

    // 6: validation error (rho out of range).
    let out = run_in(
        dir.path(),
        &["device", "create", "--design-seed", "1", "--device-seed", "2", "--rho", "1.5", "--out", "d"],
    );
    assert_eq!(out.status.code(), Some(6), "{}", String::from_utf8_lossy(&out.stderr));

    // 2: clap usage error.
    let out = run_in(dir.path(), &["encrypt", "--nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn no_secret_material_in_emitted_files() {
    let dir = temp_dir("secrets");
    setup_pair(dir.path(), "9"); // k=187: sketch words are long enough to grep for
    std::fs::write(dir.path().join("msg.bin"), [0xabu8; 100]).unwrap();
    run_ok(
        dir.path(),
        &[
            "encrypt", "--device", "alice.spec", "--dict", "dict.json",
            "--input", "msg.bin", "--out", "ct.txt", "--seed", "9",
        ],
    );

    // Reconstruct the secrets with the library: the per-block random words
    // drawn during setup (seed 7) and Alice's single-shot response from
    // encryption (seed 9).
    let code = BchCode::with_correction(9).unwrap();
    let patterns = load_challenges(&dir.path().join("ch.hex")).unwrap();
    let device =
        DeviceModel::from_spec_str(&std::fs::read_to_string(dir.path().join("alice.spec")).unwrap())
            .unwrap();
    let postproc = PostprocConfig {
        resample_bits: 8,
        ..PostprocConfig::default()
    };
    let response = single_shot_response(&device, &patterns, 0, &postproc, 9).unwrap();

    let mut secrets: Vec<String> = vec![response.bits.to_hex()];
    for block in 0..(patterns.len() * 3 / 255) {
        let mut rng = ChaCha12Rng::seed_from_u64(hash_words(&[7, 3, block as u64]));
        secrets.push(Bits::random(code.k(), &mut rng).to_hex());
        let w = response.bits.slice(block * 255, (block + 1) * 255);
        secrets.push(w.to_hex());
    }

    for name in ["dict.json", "ct.txt", "dict.challenges.hex"] {
        let content = std::fs::read_to_string(dir.path().join(name)).unwrap();
        for (i, secret) in secrets.iter().enumerate() {
            assert!(
                !content.contains(secret),
                "secret {i} leaked into {name}"
            );
        }
    }
}

#[test]
fn analysis_outputs_have_documented_schemas() {
    let dir = temp_dir("analyze");
    setup_pair(dir.path(), "47");

    let out = run_ok(
        dir.path(),
        &[
            "ber-sweep", "--t-list", "9,63", "--pairs", "1", "--patterns", "855",
            "--resample-bits", "8", "--repetitions", "8", "--message-bits", "2048",
            "--out", "ber_sweep.csv",
        ],
    );
    assert!(out.contains("RESULT"));
    let csv = std::fs::read_to_string(dir.path().join("ber_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "code_rate,t,predicted_ber,simulated_ber,trials,error_events"
    );
    assert_eq!(lines.count(), 2);

    // Same invocation, byte-identical CSV.
    run_ok(
        dir.path(),
        &[
            "ber-sweep", "--t-list", "9,63", "--pairs", "1", "--patterns", "855",
            "--resample-bits", "8", "--repetitions", "8", "--message-bits", "2048",
            "--out", "ber_sweep2.csv",
        ],
    );
    assert_eq!(
        std::fs::read(dir.path().join("ber_sweep.csv")).unwrap(),
        std::fs::read(dir.path().join("ber_sweep2.csv")).unwrap()
    );

    run_ok(
        dir.path(),
        &[
            "analyze", "fhd", "--sweeps", "2", "--patterns", "855", "--resample-bits", "8",
            "--repetitions", "8", "--out", "fhd_stats.csv",
        ],
    );
    let csv = std::fs::read_to_string(dir.path().join("fhd_stats.csv")).unwrap();
    assert!(csv.starts_with("label,mean,std,n_eff\nsame,"));
    assert!(csv.contains("\ndifferent,"));
    assert!(csv.contains("\nclone,"));

    run_ok(
        dir.path(),
        &["analyze", "entropy", "--device", "alice.spec", "--challenges", "ch.hex",
          "--b-list", "1,4,8", "--out", "entropy.csv"],
    );
    let csv = std::fs::read_to_string(dir.path().join("entropy.csv")).unwrap();
    assert!(csv.starts_with("B,bits_per_sample\n1,"));
    assert_eq!(csv.lines().count(), 4);

    run_ok(
        dir.path(),
        &["analyze", "ctw", "--blocks", "2", "--block-bits", "20000", "--out", "ctw.csv"],
    );
    let csv = std::fs::read_to_string(dir.path().join("ctw.csv")).unwrap();
    assert!(csv.starts_with("block_index,rate\n0,"));

    let out = run_ok(
        dir.path(),
        &["analyze", "enob", "--device", "alice.spec", "--challenges", "ch.hex", "--repetitions", "16"],
    );
    let enob: f64 = result_field(&out, "enob").parse().unwrap();
    assert!(enob > 1.0 && enob < 16.0, "implausible ENOB {enob}");

    let out = run_ok(
        dir.path(),
        &["device", "dump", "--device", "alice.spec", "--challenges", "ch.hex",
          "--channels", "2", "--shots", "2", "--out", "dump.csv"],
    );
    assert_eq!(result_field(&out, "samples"), "3420");
    let csv = std::fs::read_to_string(dir.path().join("dump.csv")).unwrap();
    assert!(csv.starts_with("pattern_index,channel,shot,value\n0,0,0,"));

    let rates = run_ok(dir.path(), &["bch", "rates"]);
    assert!(rates.starts_with("k,t,rate\n247,1,"));
    assert!(rates.contains("\n29,47,"));
    assert!(rates.contains("\n9,63,"));

    run_ok(
        dir.path(),
        &["device", "respond", "--device", "alice.spec", "--challenges", "ch.hex",
          "--resample-bits", "8", "--out", "resp.txt"],
    );
    let resp = std::fs::read_to_string(dir.path().join("resp.txt")).unwrap();
    assert!(resp.starts_with("bits=2565 msb=3\n"), "header: {}", &resp[..24]);
    let payload = resp.lines().nth(1).unwrap();
    assert_eq!(payload.len(), 2565usize.div_ceil(8) * 2);
    assert!(payload.chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = temp_dir("config");
    std::fs::write(
        dir.path().join("run.conf"),
        "seed=5\nresample_bits=8\nrepetitions=8\nt=9\n",
    )
    .unwrap();
    run_ok(dir.path(), &["challenges", "gen", "--count", "855", "--config", "run.conf", "--out", "ch.hex"]);
    // Same generation with an explicit matching seed.
    run_ok(dir.path(), &["challenges", "gen", "--count", "855", "--seed", "5", "--out", "ch2.hex"]);
    assert_eq!(
        std::fs::read(dir.path().join("ch.hex")).unwrap(),
        std::fs::read(dir.path().join("ch2.hex")).unwrap()
    );

    run_ok(
        dir.path(),
        &["device", "create", "--design-seed", "1", "--device-seed", "11", "--out", "a.spec"],
    );
    run_ok(
        dir.path(),
        &["device", "create", "--design-seed", "2", "--device-seed", "22", "--out", "b.spec"],
    );
    let out = run_ok(
        dir.path(),
        &["dict", "setup", "--device-a", "a.spec", "--device-b", "b.spec",
          "--challenges", "ch.hex", "--config", "run.conf", "--out", "dict.json"],
    );
    assert_eq!(result_field(&out, "code_t"), "9");

    // --out-dir routes bare file names.
    std::fs::create_dir(dir.path().join("sub")).unwrap();
    run_ok(
        dir.path(),
        &["challenges", "gen", "--count", "16", "--seed", "1", "--out-dir", "sub", "--out", "c.hex"],
    );
    assert!(dir.path().join("sub/c.hex").exists());
}
