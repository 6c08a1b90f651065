use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qheat::evolution::RunSettings;
use qheat::flywheel::{self, FlywheelParams};
use qheat::models::{EngineParams, LoadWindow, ModelKind};
use qheat::parallel::Execution;
use qheat::sweep::{self, Spacing, SweepAxis};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn engine_sweep(c: &mut Criterion) {
    let axis = SweepAxis::new("g_over_p", 0.1, 5.0, 8, Spacing::Log).unwrap();
    let mut group = c.benchmark_group("engine_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                sweep::run_sweep(
                    ModelKind::TwoQubitLocal,
                    &EngineParams::default(),
                    &axis,
                    LoadWindow::default(),
                    &RunSettings::default(),
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn flywheel_walk(c: &mut Criterion) {
    let params = FlywheelParams::from_chi_p0(2.0, 0.6, 0.1, 500).unwrap();
    let mut group = c.benchmark_group("flywheel_monte_carlo");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| flywheel::monte_carlo_walk(&params, 20_000, 1, &[500], exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, engine_sweep, flywheel_walk);
criterion_main!(benches);
