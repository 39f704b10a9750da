use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use hpl_core::density::TimeHorizon;
use hpl_core::optimizer::{optimize_pointer_x, optimize_pointer_z};
use hpl_core::pointer_density::{figure_grid, GridKind, FIGURE_NODES};
use hpl_core::quality::{rational_x_d, rational_z_d};
use hpl_core::simulate::EndpointSampler;
use hpl_core::special::{integral_i, integral_j_quadrature};
use hpl_core::BlochVector;

fn integrals(c: &mut Criterion) {
    c.bench_function("integral_i closed form", |b| b.iter(|| integral_i(black_box(0.605))));
    c.bench_function("integral_j quadrature", |b| b.iter(|| integral_j_quadrature(black_box(0.605), 1e-12)));
}

fn quality(c: &mut Criterion) {
    c.bench_function("rational_x_d", |b| b.iter(|| rational_x_d(black_box(0.605), 1.0)));
    c.bench_function("rational_z_d", |b| b.iter(|| rational_z_d(black_box(2.701), 1.0)));
}

fn optimizer(c: &mut Criterion) {
    c.bench_function("optimize_pointer_x", |b| b.iter(|| optimize_pointer_x(black_box(1.0), 1e-10)));
    c.bench_function("optimize_pointer_z", |b| b.iter(|| optimize_pointer_z(black_box(1.0), 1e-10)));
}

fn densities(c: &mut Criterion) {
    let rho = BlochVector::PLUS_X;
    let h = TimeHorizon::infinite();
    c.bench_function("pointer_x figure grid", |b| {
        b.iter(|| figure_grid(GridKind::PointerX, black_box(&rho), &h, FIGURE_NODES))
    });
}

fn sampler(c: &mut Criterion) {
    let rho = BlochVector::new(0.5, 0.2, 0.6).unwrap();
    let h = TimeHorizon::finite(8.0).unwrap();
    c.bench_function("endpoint sampler setup", |b| b.iter(|| EndpointSampler::new(h, black_box(rho))));
    let s = EndpointSampler::new(h, rho);
    c.bench_function("endpoint sampler draw", |b| b.iter(|| s.sample(black_box(0.3141))));
}

criterion_group!(benches, integrals, quality, optimizer, densities, sampler);
criterion_main!(benches);
