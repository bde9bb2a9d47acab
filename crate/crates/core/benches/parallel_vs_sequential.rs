use apdisc::certify::energy_check_with;
use apdisc::grid::disc_eval_with;
use apdisc::par::Execution;
use apdisc::rng::{stream, Purpose};
use apdisc::solver::SolveConfig;
use apdisc::sweep::run_sweep;
use apdisc::{GridShape, PartialColoring};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn random_coloring(dims: &[usize]) -> PartialColoring {
    let shape = GridShape::new(dims.to_vec()).unwrap();
    let mut r = stream(1, 0, Purpose::Instances);
    let values = (0..shape.cells()).map(|_| if r.gen_bool(0.5) { 1 } else { -1 }).collect();
    PartialColoring::from_values(shape, values).unwrap()
}

fn disc_scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("disc_eval");
    g.sample_size(10);
    for dims in [vec![2048], vec![48, 48], vec![12, 12, 12]] {
        let chi = random_coloring(&dims);
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, chi.shape()), &chi, |b, chi| {
                b.iter(|| disc_eval_with(chi, exec, |_| true).value)
            });
        }
    }
    g.finish();
}

fn energy(c: &mut Criterion) {
    let mut g = c.benchmark_group("energy");
    g.sample_size(10);
    for (dims, l, d_box) in [(vec![32, 32], 4u64, vec![3u64, 3]), (vec![8, 8, 8], 4, vec![1, 1, 2])] {
        let chi = random_coloring(&dims);
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, chi.shape()), &chi, |b, chi| {
                b.iter(|| energy_check_with(chi, l, &d_box, exec).unwrap().lhs)
            });
        }
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    let shapes: Vec<GridShape> = [vec![256], vec![16, 16]].into_iter().map(|d| GridShape::new(d).unwrap()).collect();
    for (name, exec) in MODES {
        let config = SolveConfig { execution: exec, ..SolveConfig::calibrated() };
        g.bench_function(name, |b| b.iter(|| run_sweep(&shapes, &[0, 1], &config, false).unwrap().len()));
    }
    g.finish();
}

criterion_group!(benches, disc_scan, energy, sweep);
criterion_main!(benches);
