//! Parallel vs sequential scan evaluation, plus the two hot kernels
//! (steady-state solve, lineshape fit) on their own.
//!
//! Run with the default features to compare the rayon path against the
//! sequential fallback; with `--no-default-features` both scan benches
//! exercise the sequential path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use darkres::dynamics::{scan_spectrum, scan_spectrum_sequential, steady_state, ScanGrid};
use darkres::lineshape;
use darkres::pulses::{PulseShape, PulseTrainSpec};
use darkres::species::{AtomSpec, BufferGasSpec, CellGeometry, ExperimentConditions};
use darkres::spectrum::ScanDomain;
use std::hint::black_box;

fn setup() -> (
    PulseTrainSpec,
    AtomSpec,
    BufferGasSpec,
    ExperimentConditions,
) {
    let atom = AtomSpec::rb87();
    let pulse = PulseTrainSpec::new(525.7e6, 15e-12, PulseShape::Gaussian, 2e-4, 2e-4, 13).unwrap();
    let gas = BufferGasSpec::builtin("xe")
        .unwrap()
        .with_sigma2(1.1e-18)
        .unwrap()
        .with_shift_coeff(-885.0);
    let cell = CellGeometry::new(0.05, 0.01).unwrap();
    let cond = ExperimentConditions::new(5330.0, 294.0, 50e-6, cell).unwrap();
    (pulse, atom, gas, cond)
}

fn bench_scan(c: &mut Criterion) {
    let (pulse, atom, gas, cond) = setup();
    let mut group = c.benchmark_group("scan");
    for points in [64usize, 256, 1024] {
        let grid = ScanGrid::centered(10e3, points, ScanDomain::PulseRep);
        group.bench_with_input(
            BenchmarkId::new("sequential", points),
            &points,
            |b, _| {
                b.iter(|| {
                    scan_spectrum_sequential(
                        black_box(&pulse),
                        &atom,
                        &gas,
                        &cond,
                        &grid,
                        None,
                    )
                    .unwrap()
                })
            },
        );
        group.bench_with_input(BenchmarkId::new("parallel", points), &points, |b, _| {
            b.iter(|| {
                scan_spectrum(black_box(&pulse), &atom, &gas, &cond, &grid, None).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_steady_state(c: &mut Criterion) {
    let (pulse, atom, _, _) = setup();
    c.bench_function("steady_state_solve", |b| {
        b.iter(|| steady_state(black_box(&pulse), &atom, 5.4e4, 300.0).unwrap())
    });
}

fn bench_fit(c: &mut Criterion) {
    let (pulse, atom, gas, cond) = setup();
    let grid = ScanGrid::centered(10e3, 201, ScanDomain::PulseRep);
    let spec = scan_spectrum_sequential(&pulse, &atom, &gas, &cond, &grid, None).unwrap();
    c.bench_function("lorentzian_fit_201pts", |b| {
        b.iter(|| lineshape::fit(black_box(&spec), None).unwrap())
    });
}

criterion_group!(benches, bench_scan, bench_steady_state, bench_fit);
criterion_main!(benches);
