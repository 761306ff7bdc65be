use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use crystalflow::bregman::{bregman_iteration, BregmanState};
use crystalflow::mesh::Discretization;
use crystalflow::{Anisotropy, Grid, Operators, Redistancer};
use crystalflow_bench::{box_field, wavy_field, wavy_vectors};

const CASES: [(usize, usize); 3] = [(2, 64), (2, 256), (3, 32)];

fn gauss_seidel(c: &mut Criterion) {
    let mut group = c.benchmark_group("gauss_seidel");
    for (dim, m) in CASES {
        let grid = Grid::new(dim, m).unwrap();
        let ops = Operators::new(grid, Discretization::Fdm).unwrap();
        let rhs = wavy_field(grid);
        let mut v = rhs.values().to_vec();
        group.bench_function(BenchmarkId::from_parameter(format!("{dim}d-M{m}")), |b| {
            b.iter(|| ops.gauss_seidel(&mut v, rhs.values(), 1e4, 1250.0))
        });
    }
    group.finish();
}

fn bregman(c: &mut Criterion) {
    let mut group = c.benchmark_group("bregman_iteration");
    for (dim, m) in CASES {
        let grid = Grid::new(dim, m).unwrap();
        for disc in [Discretization::Fdm, Discretization::Fem] {
            let ops = Operators::new(grid, disc).unwrap();
            let u = box_field(grid, 0.3);
            let sigma = Anisotropy::cubic(dim);
            let mut state = BregmanState::new(&ops, 1e4, 1250.0, 1e-12).unwrap();
            state.v = u.clone();
            group.bench_function(BenchmarkId::new(disc.to_string(), format!("{dim}d-M{m}")), |b| {
                b.iter(|| bregman_iteration(&mut state, &u, &ops, &sigma).unwrap())
            });
        }
    }
    group.finish();
}

fn redistance(c: &mut Criterion) {
    let mut group = c.benchmark_group("redistance");
    group.sample_size(10);
    for (dim, m) in CASES {
        let grid = Grid::new(dim, m).unwrap();
        let v = box_field(grid, 0.3);
        for beta in [Anisotropy::isotropic(dim), Anisotropy::cubic(dim)] {
            let r = Redistancer::new(grid, beta.clone()).unwrap();
            group.bench_function(BenchmarkId::new(beta.to_string(), format!("{dim}d-M{m}")), |b| {
                b.iter(|| r.signdist(black_box(&v)))
            });
        }
    }
    group.finish();
}

fn projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("wulff_projection");
    let grid = Grid::new(3, 32).unwrap();
    let xs = wavy_vectors(grid);
    let mut out = vec![0.0; xs.len()];
    for sigma in [
        Anisotropy::isotropic(3),
        Anisotropy::cubic(3),
        Anisotropy::hexagonal_prism(),
        Anisotropy::cylindrical(Anisotropy::hexagon(), 0.5).unwrap(),
    ] {
        group.bench_function(BenchmarkId::from_parameter(sigma.to_string()), |b| {
            b.iter(|| {
                for (x, o) in xs.chunks_exact(3).zip(out.chunks_exact_mut(3)) {
                    sigma.project_into(x, 1e-2, o);
                }
            })
        });
    }
    group.finish();
}

criterion_group!(kernels, gauss_seidel, bregman, redistance, projection);
criterion_main!(kernels);
