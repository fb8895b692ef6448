use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use vstop_core::dispersion::a_boundary;
use vstop_core::greens::{ghat_resolvent, TimeGrid};
use vstop_core::kinetics::{integrate_characteristics, ChargeField, ChargePath, CharOptions, ZeroField};
use vstop_core::response::{force_steadystate, ForceGrid};
use vstop_core::simulator::{BoxSpec, SimConfig, Simulator};
use vstop_core::{build_profile, ProfileSpec};

fn dispersion(c: &mut Criterion) {
    let p = build_profile(&ProfileSpec::bump(2.0)).unwrap();
    c.bench_function("a_boundary", |b| b.iter(|| a_boundary(&p, black_box(0.7))));
}

fn greens(c: &mut Criterion) {
    let p = build_profile(&ProfileSpec::gaussian(1.0)).unwrap();
    c.bench_function("ghat_resolvent_2000", |b| b.iter(|| ghat_resolvent(&p, black_box(1.3), TimeGrid::new(0.025, 2000)).unwrap()));
}

fn stopping(c: &mut Criterion) {
    let p = build_profile(&ProfileSpec::bump(2.0)).unwrap();
    let mut g = c.benchmark_group("stopping");
    g.sample_size(10);
    g.bench_function("steadystate_v12", |b| b.iter(|| force_steadystate(&p, black_box([12.0, 0.0, 0.0]), &ForceGrid::default(), 1e-3).unwrap()));
    g.finish();
}

fn characteristics(c: &mut Criterion) {
    let p = build_profile(&ProfileSpec::bump(2.0)).unwrap();
    let path = ChargePath::straight(12.0);
    let cf = ChargeField::new(&p, &ZeroField, &path);
    c.bench_function("characteristics_0_to_8", |b| {
        b.iter(|| integrate_characteristics(cf, 0.0, 8.0, black_box([60.0, 0.5, 0.0]), [0.3, -0.2, 0.1], CharOptions::default()).unwrap())
    });
}

fn simulator(c: &mut Criterion) {
    let p = build_profile(&ProfileSpec::bump(2.0)).unwrap();
    let cfg = SimConfig { n_markers: 40_000, box_spec: BoxSpec { n_grid: 32, ..Default::default() }, ..Default::default() };
    let mut sim = Simulator::new(&p, &cfg).unwrap();
    let mut g = c.benchmark_group("simulator");
    g.sample_size(20);
    g.bench_function("step_40k_markers", |b| b.iter(|| sim.step().unwrap()));
    g.finish();
}

criterion_group!(benches, dispersion, greens, stopping, characteristics, simulator);
criterion_main!(benches);
