use blockfade::outage::{estimate_outage, OutageConfig};
use blockfade::rotation::full_diversity_margin;
use blockfade::{Constellation, Exec, FadingSpec, InputModel, Labeling, Rotation, Scheme};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn outage(c: &mut Criterion) {
    let qpsk = Constellation::qam(2, Labeling::Gray).unwrap();
    let rotated = InputModel::Discrete(Scheme::parse(qpsk, "2xcyclotomic2", 4).unwrap());
    let fading = FadingSpec::new(4, 1.0).unwrap();
    let mut group = c.benchmark_group("outage");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let gauss = OutageConfig::new(fading, 2.0, 200_000, 1).with_exec(exec);
        group.bench_with_input(BenchmarkId::new("gaussian", format!("{exec:?}")), &gauss, |b, cfg| {
            b.iter(|| estimate_outage(&InputModel::Gaussian, cfg, 15.0).unwrap())
        });
        let disc = OutageConfig::new(fading, 1.0, 2_000, 1).with_exec(exec);
        group.bench_with_input(BenchmarkId::new("qpsk-2xcyclotomic2", format!("{exec:?}")), &disc, |b, cfg| {
            b.iter(|| estimate_outage(&rotated, cfg, 10.0).unwrap())
        });
    }
    group.finish();
}

fn margin(c: &mut Criterion) {
    let qam16 = Constellation::qam(4, Labeling::Gray).unwrap();
    let rot = Rotation::cyclotomic2();
    let mut group = c.benchmark_group("full-diversity-scan");
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_function(format!("cyclotomic2-qam16/{exec:?}"), |b| {
            b.iter(|| full_diversity_margin(&rot, &qam16, u128::MAX, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, outage, margin);
criterion_main!(benches);
