use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use levykb_bench::presets;
use levykb_core::bounds::{kernel_conv, Shape};
use levykb_core::report::lin_space;
use levykb_core::{rho, sample_increments, Fourier, SamplerConfig};

fn exponent(c: &mut Criterion) {
    let xi = lin_space(1.0, 1e4, 1000);
    let mut g = c.benchmark_group("psi_1000");
    for (name, m) in presets() {
        g.bench_function(name, |b| b.iter(|| xi.iter().map(|&x| m.psi(x).unwrap().re).sum::<f64>()));
    }
    g.finish();
}

fn scale(c: &mut Criterion) {
    let mut g = c.benchmark_group("rho");
    for (name, m) in presets() {
        g.bench_function(name, |b| b.iter(|| rho(&m, black_box(1e-3)).unwrap().value));
    }
    g.finish();
}

fn density(c: &mut Criterion) {
    let mut g = c.benchmark_group("density_4001");
    g.sample_size(10);
    for (name, m) in presets().into_iter().take(2) {
        let r = rho(&m, 0.01).unwrap().value;
        let xs = lin_space(-50.0 / r, 50.0 / r, 4001);
        g.bench_function(name, |b| {
            b.iter(|| {
                // fresh transform so the ψ cache does not carry over
                let f = Fourier::new(&m).unwrap();
                f.density(0.01, &xs, 0).unwrap().values[2000]
            })
        });
    }
    g.finish();
}

fn convolution(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernel_conv");
    for half in [500usize, 4000] {
        let series: Vec<f64> = (0..=2 * half).map(|i| (-((i as f64 - half as f64) / 50.0).powi(2)).exp()).collect();
        let shape = Shape::Upper { b1: 0.2, b2: 0.05 };
        g.bench_with_input(BenchmarkId::from_parameter(half), &series, |b, s| b.iter(|| kernel_conv(s, half, half, shape, 0.01)));
    }
    g.finish();
}

fn sampler(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_10k");
    g.sample_size(10);
    for (name, m) in presets() {
        g.bench_function(name, |b| b.iter(|| sample_increments(&m, 0.01, &SamplerConfig::new(10_000, 7)).unwrap().values.len()));
    }
    g.finish();
}

criterion_group!(benches, exponent, scale, density, convolution, sampler);
criterion_main!(benches);
