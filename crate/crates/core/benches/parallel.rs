use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qfd_core::evolve::{gaussian_packet, propagate, GaussianPacketSpec, GridSpec, PropagateOptions};
use qfd_core::kernel::{double_well_kernel, KernelParams};
use qfd_core::madelung::{decompose, MadelungOptions};
use qfd_core::oracle::AnalyticGaussian;
use qfd_core::potential::{DoubleWell, PotentialModel};
use qfd_core::trajectories::{integrate_trajectories, TrajectoryOptions};
use qfd_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn propagation(c: &mut Criterion) {
    let v = PotentialModel::double_well(DoubleWell::TUNNELING).unwrap();
    let grid = GridSpec::new(-8.0, 8.0, 256).unwrap();
    let psi0 = gaussian_packet(&GaussianPacketSpec::TUNNELING, grid).unwrap();
    let params = KernelParams::default();
    let mut group = c.benchmark_group("propagate_double_well_256");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &execution, |b, &execution| {
            let opts = PropagateOptions { execution, ..PropagateOptions::default() };
            b.iter(|| {
                propagate(|x, y, t| double_well_kernel(&v, x, y, t, &params).map(|e| e.value), black_box(&psi0), 0.3, grid, opts)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn trajectories(c: &mut Criterion) {
    let g = AnalyticGaussian::normalized(1.0, 1.0, 1.0, 0.7, -1.0, 0.0);
    let grid = GridSpec::new(-8.0, 8.0, 1024).unwrap();
    let o = MadelungOptions::new(1.0, 1.0);
    let fields: Vec<_> = (0..=200).map(|k| decompose(&g.sample(grid, 2.0 * k as f64 / 200.0).unwrap(), &o)).collect();
    let seeds: Vec<f64> = (0..1000).map(|i| -2.5 + 3.0 * i as f64 / 999.0).collect();
    let mut group = c.benchmark_group("trajectories_1000_seeds");
    for (name, execution) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &execution, |b, &execution| {
            let opts = TrajectoryOptions { execution, ..TrajectoryOptions::default() };
            b.iter(|| integrate_trajectories(black_box(&fields), &seeds, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, propagation, trajectories);
criterion_main!(benches);
