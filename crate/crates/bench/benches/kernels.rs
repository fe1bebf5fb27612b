use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use degenlab_bench::{bumpy_field, gradients, params};
use degenlab_core::grid::{NewtonConfig, ScalarField};
use degenlab_core::maps::{flux_2d, flux_jacobian_2d};
use degenlab_core::seminorms::{besov_seminorm, gagliardo_seminorm, Region, SmoothnessOrder};
use degenlab_core::{GProfile, QuadratureConfig};

fn pointwise(c: &mut Criterion) {
    let prm = params(1e-3);
    let gs = gradients(1024);
    c.bench_function("flux_2d x1024", |b| {
        b.iter(|| {
            gs.iter()
                .map(|g| flux_2d(black_box(*g), &prm)[0])
                .sum::<f64>()
        })
    });
    c.bench_function("flux_jacobian_2d x1024", |b| {
        b.iter(|| {
            gs.iter()
                .map(|g| flux_jacobian_2d(black_box(*g), &prm)[0][0])
                .sum::<f64>()
        })
    });
    let profile = GProfile::tabulated(&prm, &QuadratureConfig::default()).unwrap();
    c.bench_function("v_map_2d tabulated x1024", |b| {
        b.iter(|| {
            gs.iter()
                .map(|g| profile.v_map_2d(black_box(*g)).unwrap()[0])
                .sum::<f64>()
        })
    });
    c.bench_function("g_profile tabulation", |b| {
        b.iter(|| GProfile::tabulated(black_box(&prm), &QuadratureConfig::default()).unwrap())
    });
}

fn timestep(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_timestep");
    group.sample_size(10);
    for cells in [16, 32, 48] {
        let u = bumpy_field(cells);
        let f = ScalarField::zeros(*u.grid());
        let prm = params(1e-3);
        let tau = 0.4 * 0.4 / cells as f64;
        group.bench_with_input(BenchmarkId::from_parameter(cells), &cells, |b, _| {
            b.iter(|| {
                degenlab_core::grid::solve_timestep(&u, &u, &f, &prm, tau, &NewtonConfig::default())
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn seminorms(c: &mut Criterion) {
    let mut group = c.benchmark_group("seminorms");
    group.sample_size(10);
    let order = SmoothnessOrder::new(0.5, 2.0, 2.0, 0.25).unwrap();
    for cells in [16, 32] {
        let u = bumpy_field(cells);
        group.bench_with_input(BenchmarkId::new("besov", cells), &u, |b, u| {
            b.iter(|| besov_seminorm(u, &order).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gagliardo", cells), &u, |b, u| {
            b.iter(|| gagliardo_seminorm(u, &Region::Square, &order).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pointwise, timestep, seminorms);
criterion_main!(benches);
