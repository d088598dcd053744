use std::hint::black_box;

use conelab_bench::asym_model;
use conelab_core::cone::{cone_j, ConeHarmonic, ConeSpace};
use conelab_core::dirichlet::solve_radial_mode;
use conelab_core::frequency::{frequency_curve, level_grid};
use conelab_core::numerics::log_grid;
use conelab_core::profiles::{
    sectional_components_doubly, DoublyWarpedMetric, NiParameters, WarpProfile,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn mode_solve(c: &mut Criterion) {
    let (m, _) = asym_model();
    c.bench_function("radial mode k=2 to 1e3", |b| {
        b.iter(|| solve_radial_mode(black_box(&m), 2, 1e3).unwrap())
    });
}

fn green(c: &mut Criterion) {
    c.bench_function("green radial construction", |b| b.iter(asym_model));
    let (_, g) = asym_model();
    c.bench_function("b inverse", |b| {
        b.iter(|| g.b_inverse(black_box(123.4)).unwrap())
    });
}

fn frequency(c: &mut Criterion) {
    let (m, g) = asym_model();
    let top = g.b_inverse(1e3).unwrap() * 1.01;
    let mode = solve_radial_mode(&m, 2, top).unwrap();
    let grid = level_grid(1.0, 1e3, 64).unwrap();
    c.bench_function("frequency curve 193 levels", |b| {
        b.iter(|| frequency_curve(&g, &mode, black_box(&grid)).unwrap())
    });
}

fn curvature(c: &mut Criterion) {
    let m = DoublyWarpedMetric::from_ni(&NiParameters::reference());
    let grid = log_grid(1e-3, 200.0, 1900).unwrap();
    c.bench_function("Ni curvature scan", |b| {
        b.iter(|| {
            grid.iter()
                .map(|&r| sectional_components_doubly(&m, r).unwrap().min())
                .fold(f64::INFINITY, f64::min)
        })
    });
    let ding = WarpProfile::ding();
    c.bench_function("Ding profile eval", |b| {
        b.iter(|| ding.value(black_box(0.2), 2))
    });
}

fn cone(c: &mut Criterion) {
    let cone = ConeSpace::over_sphere(4, 0.7, 8).unwrap();
    let h = ConeHarmonic::new(&cone, vec![(1.0, 1), (-0.5, 3), (2.0, 6)]).unwrap();
    c.bench_function("cone J closed form", |b| {
        b.iter(|| cone_j(&h, black_box(3.7)))
    });
}

criterion_group!(benches, mode_solve, green, frequency, curvature, cone);
criterion_main!(benches);
