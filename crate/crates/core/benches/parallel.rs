//! Sequential vs parallel execution of the data-parallel kernels.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use renyi_core::block::BlockModel;
use renyi_core::burg::{self, AutocovSpec, GaussianInnovations};
use renyi_core::density::{CostFn, CostSpec, GridSpec, Support};
use renyi_core::maxent;
use renyi_core::stationarize;
use renyi_core::suite;
use renyi_core::typicality::{self, TypicalSpec};
use renyi_core::ExecPolicy;

const POLICIES: [(&str, ExecPolicy); 2] = [("sequential", ExecPolicy::Sequential), ("parallel", ExecPolicy::Parallel)];

fn typical_mass(c: &mut Criterion) {
    let (f, cost) = suite::two_cell_reference().unwrap();
    let spec = TypicalSpec::new(f, 12, 0.2, cost).unwrap();
    let mut g = c.benchmark_group("typical_mass");
    for (name, policy) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, 20_000), &policy, |b, &p| {
            b.iter(|| typicality::typical_mass(black_box(&spec), 20_000, 1, p).unwrap())
        });
    }
    g.finish();
}

fn window_entropy(c: &mut Criterion) {
    let law = suite::stationarization_block().unwrap().dense_law(1 << 10).unwrap();
    let mut g = c.benchmark_group("exact_window_entropy");
    g.sample_size(10);
    for (name, policy) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, 16), &policy, |b, &p| {
            b.iter(|| stationarize::exact_window_entropy(black_box(&law), 16, 2.0, p).unwrap())
        });
    }
    g.finish();
}

fn ar_ensemble(c: &mut Criterion) {
    let model = burg::levinson_durbin(&AutocovSpec::new(vec![1.0, 0.6, 0.2]).unwrap()).unwrap();
    let innov = GaussianInnovations { sigma2: model.sigma2 };
    let mut g = c.benchmark_group("simulate_ar");
    for (name, policy) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, 10_000), &policy, |b, &p| {
            b.iter(|| burg::simulate_ar(black_box(&model), &innov, 50, 10_000, 1, p).unwrap())
        });
    }
    g.finish();
}

fn hstar(c: &mut Criterion) {
    let cost = quadratic_cost();
    let gammas: Vec<f64> = (1..=20).map(|i| 0.1 * i as f64).collect();
    let mut g = c.benchmark_group("hstar_curve");
    for (name, policy) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, gammas.len()), &policy, |b, &p| {
            b.iter(|| maxent::hstar_curve(black_box(&cost), &gammas, p).unwrap())
        });
    }
    g.finish();
}

fn quadratic_cost() -> CostSpec {
    let grid = GridSpec::new(-12.0, 12.0, 1 << 12).unwrap();
    CostSpec::new(CostFn::Quadratic, Support::Line, grid, 1.0).unwrap()
}

criterion_group!(benches, typical_mass, window_entropy, ar_ensemble, hstar);
criterion_main!(benches);
