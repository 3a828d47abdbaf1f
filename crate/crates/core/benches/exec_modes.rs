use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use degiorgi_iss::backstepping::{solve_kernel_with, Coefficient, ReactionDiffusionParams};
use degiorgi_iss::harness::{sweep, RawConfig};
use degiorgi_iss::inequalities::{run_property_suite, SuiteSettings};
use degiorgi_iss::{make_grid, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

const SWEEP_BASE: &str = "\
mu = 1
nu = 1
initial.family = bump
disturbance.family = ramped_cosine
disturbance.amplitude = 0.1
forcing.family = separable
forcing.amplitude = 0.05
n_nodes = 101
dt = 1e-4
t_end = 0.5
";

fn kernel(c: &mut Criterion) {
    let params = ReactionDiffusionParams::new(1.0, Coefficient::constant(-10.0), 1.0).unwrap();
    let mut group = c.benchmark_group("kernel_solve");
    group.sample_size(10);
    for n in [101, 201] {
        let grid = make_grid(n).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &grid, |b, g| {
                b.iter(|| solve_kernel_with(&params, *g, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn inequality_suite(c: &mut Criterion) {
    let settings = SuiteSettings {
        seeds: 64,
        ..SuiteSettings::default()
    };
    let mut group = c.benchmark_group("inequality_suite");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| run_property_suite(black_box(&settings), exec).unwrap()));
    }
    group.finish();
}

fn parameter_sweep(c: &mut Criterion) {
    let raw = RawConfig::parse(SWEEP_BASE).unwrap();
    let values: Vec<String> = ["0.25", "0.5", "0.75", "1", "1.5", "2", "3", "4"].iter().map(|s| s.to_string()).collect();
    let mut group = c.benchmark_group("nu_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| sweep(&raw, "nu", black_box(&values), exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, kernel, inequality_suite, parameter_sweep);
criterion_main!(benches);
