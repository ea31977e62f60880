use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fahm::channel::{circular_gaussian, PortGrid, RayleighSampler};
use fahm::linalg::{hermitian_inverse, ComplexMatrix};
use fahm::receiver::{geport_select, EliminationRule, GeportMode, UserLinkProblem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn problem(n1: usize, users: usize, seed: u64) -> UserLinkProblem {
    let grid = PortGrid::plane(n1, n1, 3.0, 3.0).unwrap();
    let sampler = RayleighSampler::new(&grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = sampler.sample(users, &mut rng);
    UserLinkProblem::from_channel(&h, 0, 10.0).unwrap()
}

fn random_pd(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(n, n, |_, _| circular_gaussian(&mut rng));
    &g * g.adjoint() + ComplexMatrix::identity(n, n)
}

fn geport(c: &mut Criterion) {
    let mut group = c.benchmark_group("geport");
    group.sample_size(10);
    for (n1, users, target) in [(6, 8, 8), (10, 20, 30)] {
        let p = problem(n1, users, 1);
        let id = format!("N{}_P{}", n1 * n1, target);
        for mode in [GeportMode::Fast, GeportMode::Naive] {
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), &id), &p, |b, p| {
                b.iter(|| geport_select(black_box(p), target, mode, EliminationRule::Contribution).unwrap())
            });
        }
    }
    group.finish();
}

fn inverse(c: &mut Criterion) {
    let mut group = c.benchmark_group("inverse");
    for n in [32, 128] {
        let b = random_pd(n, 2);
        group.bench_with_input(BenchmarkId::new("hermitian_inverse", n), &b, |bench, b| {
            bench.iter(|| hermitian_inverse(black_box(b)).unwrap())
        });
        let state = hermitian_inverse(&b).unwrap();
        group.bench_with_input(BenchmarkId::new("downdate", n), &state, |bench, s| {
            bench.iter(|| {
                let mut s = s.clone();
                s.downdate_position(black_box(n / 2)).unwrap();
                s
            })
        });
    }
    group.finish();
}

criterion_group!(benches, geport, inverse);
criterion_main!(benches);
