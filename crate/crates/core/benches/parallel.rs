//! Parallel versus single-worker timings of the two data-parallel kernels:
//! Ulam matrix assembly (one task per branch and cell) and batched dual-norm
//! evaluation (one task per density, as in the Lasota-Yorke sampler).
//!
//! Without the `parallel` feature both variants run the same sequential code.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fracbv::holder_space::{dual_norm, GridFunction};
use fracbv::map_model::{cusp, gauss, Weight};
use fracbv::par;
use fracbv::transfer::{ulam_matrix, UlamOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ulam_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("ulam_assembly");
    group.sample_size(10);
    for (map, n) in [(cusp(0.75).unwrap(), 512), (gauss(), 256)] {
        let weight = Weight::perron_frobenius_for(&map).unwrap();
        let options = UlamOptions { truncation: 200, ..Default::default() };
        let build = || ulam_matrix(black_box(&map), &weight, n, &options).unwrap();
        group.bench_function(BenchmarkId::new("parallel", map.name()), |b| b.iter(build));
        group.bench_function(BenchmarkId::new("sequential", map.name()), |b| {
            b.iter(|| par::run_sequential(build))
        });
    }
    group.finish();
}

fn batched_dual_norms(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let densities: Vec<GridFunction<f64>> = (0..32)
        .map(|_| GridFunction::new((0..128).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap())
        .collect();
    let evaluate = || par::map_slice(black_box(&densities), |h| dual_norm(h, 0.5, 1e-8).unwrap());
    let mut group = c.benchmark_group("dual_norm_batch");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(evaluate));
    group.bench_function("sequential", |b| b.iter(|| par::run_sequential(evaluate)));
    group.finish();
}

criterion_group!(benches, ulam_assembly, batched_dual_norms);
criterion_main!(benches);
