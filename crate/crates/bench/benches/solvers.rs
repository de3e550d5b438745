use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holdergrad::problems::{LogSumExp, PowerNorm, Quadratic, Region};
use holdergrad::smoothness::{estimate_holder_modulus, estimate_strong_convexity};
use holdergrad::{run_adasga, run_sga, AdaConfig, GammaPolicy, SgaConfig, StepPolicy, StopRule};
use std::hint::black_box;

fn sga(c: &mut Criterion) {
    let mut g = c.benchmark_group("sga");
    let quad = Quadratic::diagonal(&[1.0, 10.0], vec![0.0, 0.0]).unwrap();
    let cfg = SgaConfig::new(1.0, 10.0, StepPolicy::Constant { alpha: 0.1 }, StopRule::new(1e-10, 5000));
    g.bench_function("quadratic", |b| b.iter(|| run_sga(&quad, black_box(&[1.0, 1.0]), &cfg).unwrap()));

    let pn = PowerNorm::new(0.5, 2).unwrap();
    let cfg = SgaConfig::new(0.5, 2f64.sqrt(), StepPolicy::Constant { alpha: 0.3 }, StopRule::new(1e-10, 5000));
    g.bench_function("power_norm", |b| b.iter(|| run_sga(&pn, black_box(&[0.6, -0.4]), &cfg).unwrap()));
    g.finish();
}

fn adasga(c: &mut Criterion) {
    let mut g = c.benchmark_group("adasga");
    let lse = LogSumExp::symmetric_2d();
    for (label, gamma) in [("const", GammaPolicy::Constant { value: 1.0 }), ("bb1", GammaPolicy::Bb1), ("bb2", GammaPolicy::Bb2)] {
        let cfg = AdaConfig { gamma, stop: StopRule::new(1e-10, 5000), ..AdaConfig::default() };
        g.bench_with_input(BenchmarkId::new("log_sum_exp", label), &cfg, |b, cfg| {
            b.iter(|| run_adasga(&lse, black_box(&[1.5, -1.0]), cfg).unwrap())
        });
    }
    g.finish();
}

fn estimators(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimators");
    g.sample_size(10);
    let lse = LogSumExp::symmetric_2d();
    let region = Region::ball(2, 2.0).unwrap();
    for n in [1_000usize, 10_000] {
        g.bench_with_input(BenchmarkId::new("holder_modulus", n), &n, |b, &n| {
            b.iter(|| estimate_holder_modulus(&lse, &region, 1.0, n, 3).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("strong_convexity", n), &n, |b, &n| {
            b.iter(|| estimate_strong_convexity(&lse, &region, n, 3).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sga, adasga, estimators);
criterion_main!(benches);
