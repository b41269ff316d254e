use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nlslab_core::evolution::{FlatSolver, HarmonicSolver};
use nlslab_core::random::{ensemble, sample};
use nlslab_core::spectral::coherent_state;
use nlslab_core::{BasisTable, CoefficientLaw, Complex64, GridState, SampleStream, SolverConfig};

fn basis_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("basis_build");
    for n in [64usize, 128, 256] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| BasisTable::build(n, 2 * n).unwrap())
        });
    }
    g.finish();
}

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("transform_round_trip");
    for n in [64usize, 128, 256] {
        let basis = BasisTable::build(n, 2 * n).unwrap();
        let u = sample(&CoefficientLaw::Mu0, n, SampleStream::new(1, 0)).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| basis.analyze(&basis.synthesize(black_box(&u)).unwrap()).unwrap())
        });
    }
    g.finish();
}

fn harmonic_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("harmonic_100_steps");
    for n in [64usize, 128] {
        let solver = HarmonicSolver::new(n, SolverConfig::default()).unwrap();
        let u0 = solver.embed(&coherent_state(Complex64::new(0.5, 0.0), 1.0, n)).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let mut u = u0.clone();
                solver.advance(&mut u, 0.0, 0.1).unwrap();
                u
            })
        });
    }
    g.finish();
}

fn flat_step(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let solver = FlatSolver::new(cfg.clone()).unwrap();
    let u0 = GridState::from_fn(cfg.box_grid, |y| Complex64::new((-0.5 * y * y).exp(), 0.0));
    c.bench_function("flat_100_steps_4096", |b| b.iter(|| solver.solve(black_box(&u0), 0.0, 0.1).unwrap()));
}

fn sampling(c: &mut Criterion) {
    c.bench_function("sample_1000_mu0_64", |b| {
        b.iter(|| ensemble(SampleStream::new(3, 0), 1000, |s| sample(&CoefficientLaw::Mu0, 64, s).unwrap()))
    });
}

criterion_group!(benches, basis_build, transforms, harmonic_step, flat_step, sampling);
criterion_main!(benches);
