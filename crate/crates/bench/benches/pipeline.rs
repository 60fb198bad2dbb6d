//! Hot-path benchmarks: BCH encode/decode across rates, the analog
//! simulator, the binarization chain, the fuzzy extractor, and CTW.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use pufpad_core::analysis::ctw;
use pufpad_core::bch::BchCode;
use pufpad_core::bits::Bits;
use pufpad_core::fuzzy;
use pufpad_core::pipeline::binarize_run;
use pufpad_core::postproc::PostprocConfig;
use pufpad_core::puf_sim::{gen_challenges, DeviceModel};

fn flip_random(word: &Bits, count: usize, rng: &mut ChaCha12Rng) -> Bits {
    let mut out = word.clone();
    for _ in 0..count {
        let i = rng.gen_range(0..word.len());
        out.flip(i);
    }
    out
}

fn bench_bch(c: &mut Criterion) {
    let mut group = c.benchmark_group("bch");
    for t in [9usize, 47] {
        let code = BchCode::with_correction(t).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let message = Bits::random(code.k(), &mut rng);
        let codeword = code.encode(&message).unwrap();
        let noisy = flip_random(&codeword, t / 2, &mut rng);

        group.bench_with_input(BenchmarkId::new("encode", t), &t, |b, _| {
            b.iter(|| code.encode(black_box(&message)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("decode", t), &t, |b, _| {
            b.iter(|| code.decode(black_box(&noisy)).unwrap())
        });
    }
    group.finish();
}

fn bench_simulator(c: &mut Criterion) {
    let device = DeviceModel::new(1, 2, 0.66, 5.6e-3, 31).unwrap();
    let patterns = gen_challenges(256, 3);

    let mut group = c.benchmark_group("simulator");
    group.throughput(Throughput::Elements(patterns.len() as u64));
    group.bench_function("respond_analog_sweep", |b| {
        b.iter(|| {
            patterns
                .iter()
                .map(|p| device.respond_analog(black_box(p), 0, 7).unwrap())
                .sum::<f64>()
        })
    });
    group.bench_function("respond_averaged_64", |b| {
        b.iter(|| {
            patterns
                .iter()
                .map(|p| device.respond_averaged(black_box(p), 0, 64, 7).unwrap())
                .sum::<f64>()
        })
    });
    group.finish();
}

fn bench_postproc(c: &mut Criterion) {
    let device = DeviceModel::new(1, 2, 0.0, 5.6e-3, 1).unwrap();
    let patterns = gen_challenges(8550, 4);
    let samples: Vec<f64> = patterns
        .iter()
        .map(|p| device.respond_analog(p, 0, 9).unwrap())
        .collect();
    let cfg = PostprocConfig::default();

    let mut group = c.benchmark_group("postproc");
    group.throughput(Throughput::Elements(samples.len() as u64));
    group.bench_function("binarize_run_8550", |b| {
        b.iter(|| binarize_run(&cfg, black_box(&samples)).unwrap())
    });
    group.finish();
}

fn bench_fuzzy(c: &mut Criterion) {
    let code = BchCode::with_correction(47).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let w = Bits::random(255, &mut rng);
    let (_, helper) = fuzzy::gen(&w, &code, 11).unwrap();
    let noisy = flip_random(&w, 20, &mut rng);

    c.bench_function("fuzzy/rep_20_errors", |b| {
        b.iter(|| fuzzy::rep(black_box(&noisy), &helper, &code).unwrap())
    });
}

fn bench_ctw(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    let bits = Bits::random(100_000, &mut rng);
    let mut group = c.benchmark_group("ctw");
    group.throughput(Throughput::Elements(bits.len() as u64));
    group.bench_function("rate_1e5_depth6", |b| {
        b.iter(|| ctw::compression_rate(black_box(&bits), 6).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_bch,
    bench_simulator,
    bench_postproc,
    bench_fuzzy,
    bench_ctw
);
criterion_main!(benches);
