use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ggbm_core::fbm::generate_fbm;
use ggbm_core::green::{potential, GreenDensity, RadialPotentialSpec, TestFunction};
use ggbm_core::montecarlo::{PathIntegrator, TimeGridSpec};
use ggbm_core::randvar::sample_y_beta_n;
use ggbm_core::specfun::{m_wright, mittag_leffler};
use ggbm_core::{GridSpec, ModelParams, SeedSpec};

fn specfun(c: &mut Criterion) {
    let mut g = c.benchmark_group("specfun");
    for z in [-0.5, -5.0, -50.0] {
        g.bench_with_input(BenchmarkId::new("mittag_leffler", z), &z, |b, &z| {
            b.iter(|| mittag_leffler(black_box(0.6), black_box(z)).unwrap())
        });
    }
    for tau in [0.5, 3.0, 12.0] {
        g.bench_with_input(BenchmarkId::new("m_wright", tau), &tau, |b, &tau| {
            b.iter(|| m_wright(black_box(0.7), black_box(tau)).unwrap())
        });
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sampling");
    g.bench_function("y_beta_10k", |b| {
        b.iter(|| sample_y_beta_n(0.5, 10_000, SeedSpec::new(1, 0)).unwrap())
    });
    for n in [256usize, 4096] {
        let grid = GridSpec::new(1.0, n).unwrap();
        g.bench_with_input(BenchmarkId::new("fbm_circulant", n), &grid, |b, &grid| {
            b.iter(|| generate_fbm(0.75, grid, 2, SeedSpec::new(1, 0)).unwrap())
        });
    }
    g.finish();
}

fn perpetual(c: &mut Criterion) {
    let p = ModelParams::new(0.5, 1.5, 3).unwrap();
    let f = TestFunction::unit_gaussian(3);
    let integ = PathIntegrator::new(p, 50.0, TimeGridSpec::default()).unwrap();
    let mut i = 0;
    c.bench_function("perpetual_path_t50", |b| {
        b.iter(|| {
            i += 1;
            let mut st = SeedSpec::new(42, i).stream();
            integ.trapezoid(&integ.integrand_values(&f, &[0.0; 3], &mut st))
        })
    });
    let gd = GreenDensity::new(p).unwrap();
    c.bench_function("potential_gaussian_d3", |b| {
        b.iter(|| potential(&gd, &f, black_box(&[0.4, 0.0, 0.0]), &RadialPotentialSpec::default()).unwrap())
    });
}

criterion_group!(benches, specfun, sampling, perpetual);
criterion_main!(benches);
