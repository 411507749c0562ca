use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use dilab_core::channel::apply_channel;
use dilab_core::estimation::{estimate_type1, estimate_type2};
use dilab_core::geometry::generate_saturated_packing;
use dilab_core::rng::stream;
use dilab_core::{
    build_codebook, delta_n, ChannelModel, Codebook, CodebookParams, DecoderRule, FadingFamily, FadingSpec, Flavor,
    PackingConfig, Schedule, TrialPlan,
};

fn codebook(n: usize) -> Codebook {
    build_codebook(&CodebookParams {
        n,
        power: 1.0,
        b: 0.0,
        schedule: Schedule::Achievability,
        seed: 1,
        patience: 200,
        max_codewords: 64,
    })
    .unwrap()
}

fn model(flavor: Flavor) -> ChannelModel {
    let fading = FadingSpec::new(FadingFamily::UniformInterval { low: 0.5, high: 1.5 }).unwrap();
    ChannelModel::new(flavor, 0.01, fading, true, 1.0).unwrap()
}

fn bench_packing(c: &mut Criterion) {
    let mut group = c.benchmark_group("packing");
    group.sample_size(10);
    for n in [2usize, 3] {
        group.bench_with_input(BenchmarkId::new("saturated", n), &n, |b, &n| {
            b.iter(|| {
                generate_saturated_packing(&PackingConfig {
                    n,
                    r0: 1.0,
                    r1: 10.0,
                    seed: 7,
                    saturation_patience: 10_000,
                    max_codewords: 100_000,
                })
                .unwrap()
            })
        });
    }
    group.bench_function("codebook_n64", |b| b.iter(|| codebook(black_box(64))));
    group.finish();
}

fn bench_identify(c: &mut Criterion) {
    let mut group = c.benchmark_group("identify");
    for n in [64usize, 1024] {
        let cb = codebook(n);
        let model = model(Flavor::Fast);
        let delta = delta_n(model.fading.gamma(), cb.epsilon).unwrap();
        let rule = DecoderRule::new(&cb, model.noise_variance, delta, model.flavor).unwrap();
        let mut rng = stream(3, "bench");
        let realization = model.realize(n, &mut rng, &mut stream(4, "bench")).unwrap();
        let y = apply_channel(&model, cb.encode(1).unwrap(), &realization).unwrap();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| rule.identify(black_box(&y), 1, &realization.gains).unwrap())
        });
    }
    group.finish();
}

fn bench_estimation(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimation");
    group.sample_size(10);
    let cb = codebook(64);
    let plan = TrialPlan::new(10_000, 5);
    for flavor in [Flavor::Fast, Flavor::Slow] {
        let model = model(flavor);
        let delta = delta_n(model.fading.gamma(), cb.epsilon).unwrap();
        group.throughput(Throughput::Elements(plan.trials));
        group.bench_function(BenchmarkId::new("type1", flavor.as_str()), |b| {
            b.iter(|| estimate_type1(&cb, &model, 1, delta, &plan).unwrap())
        });
        group.bench_function(BenchmarkId::new("type2", flavor.as_str()), |b| {
            b.iter(|| estimate_type2(&cb, &model, 1, 2, delta, &plan).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_packing, bench_identify, bench_estimation);
criterion_main!(benches);
