use std::hint::black_box;
use std::sync::Arc;

use calabi_core::action::displacement_integral;
use calabi_core::{find_periodic_orbits, fixtures, parse_map, pt, ActionField, AreaMap, SearchParams};
use criterion::{criterion_group, criterion_main, Criterion};

const BUMPED: &str = "compose(twist(1, 0), bump_twist((0.5, 0.5), 0.3, 0.2*bump(r))) on annulus[0, 1]";

fn field(src: &str) -> ActionField {
    ActionField::standard(Arc::new(parse_map(src).unwrap())).unwrap()
}

fn quadrature(c: &mut Criterion) {
    let g = field(BUMPED);
    c.bench_function("calabi/bumped twist 1e-8", |b| b.iter(|| g.calabi(black_box(1e-8)).unwrap()));
    let m = parse_map(BUMPED).unwrap();
    c.bench_function("displacement/bumped twist 1e-8", |b| {
        b.iter(|| displacement_integral(&m, black_box(1e-8)).unwrap())
    });
}

fn orbit_search(c: &mut Criterion) {
    let g = field(BUMPED);
    let params = SearchParams { k_max: 3, grid: 12, m_range: None };
    c.bench_function("orbits/bumped twist k3 grid12", |b| b.iter(|| find_periodic_orbits(&g, &params).unwrap()));
}

fn flow(c: &mut Criterion) {
    let m = fixtures::load("flow_composite").unwrap().unwrap().map;
    let p = pt(0.55, 0.45);
    c.bench_function("flow/lift_jac", |b| b.iter(|| m.lift_jac(black_box(&p)).unwrap()));
    c.bench_function("flow/lift", |b| b.iter(|| m.lift(black_box(&p)).unwrap()));
}

criterion_group!(benches, quadrature, orbit_search, flow);
criterion_main!(benches);
