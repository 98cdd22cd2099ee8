use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use mkdv_bench::perturbed_kink;
use mkdv_core::cauchy::{delta_at, ReflectionTable, TableConfig};
use mkdv_core::painleve::{airy_ai, solve_pii, PIIConfig};
use mkdv_core::sim::{Simulation, SimConfig};
use mkdv_core::spectral::{signature_grid, GridBounds};
use mkdv_core::{RaySlope, Scatterer, C64};

fn scattering(c: &mut Criterion) {
    let s = Scatterer::new(&perturbed_kink(4096));
    c.bench_function("jost_sample_z2", |b| b.iter(|| s.sample(black_box(2.0)).unwrap()));
    c.bench_function("a_upper_2i", |b| b.iter(|| s.a_upper(black_box(C64::new(0.0, 2.0))).unwrap()));
}

fn delta(c: &mut Criterion) {
    let s = Scatterer::new(&perturbed_kink(4096));
    let table = ReflectionTable::from_scatterer(&s, &TableConfig::default(), true).unwrap();
    c.bench_function("delta_1p1i", |b| b.iter(|| delta_at(black_box(C64::new(1.0, 1.0)), &table).unwrap()));
    c.bench_function("pv_at_one_o12", |b| b.iter(|| table.pv_at_one(black_box(12))));
}

fn painleve(c: &mut Criterion) {
    c.bench_function("airy_grid", |b| {
        b.iter(|| (-40..=40).map(|j| airy_ai(j as f64 * 0.25).unwrap().ai).sum::<f64>())
    });
    let mut g = c.benchmark_group("pii");
    g.sample_size(20);
    g.bench_function("solve_p05", |b| b.iter(|| solve_pii(black_box(&PIIConfig::with_p(0.5))).unwrap()));
    g.finish();
}

fn simulator(c: &mut Criterion) {
    let cfg = SimConfig { n: 4096, ..SimConfig::default() };
    let mut g = c.benchmark_group("sim");
    g.sample_size(10);
    g.bench_function("etdrk4_25_steps_n4096", |b| {
        b.iter_batched(
            || Simulation::new(&cfg, |x| x.tanh() + 0.3 * (-x * x).exp()).unwrap(),
            |mut s| {
                s.advance_to(25.0 * cfg.dt).unwrap();
                s.time()
            },
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

fn signature(c: &mut Criterion) {
    let xi = RaySlope::new(-6.5).unwrap();
    let bounds = GridBounds { u_min: -2.0, u_max: 2.0, v_min: -2.0, v_max: 2.0 };
    c.bench_function("signature_200x200", |b| b.iter(|| signature_grid(xi, bounds, (200, 200)).unwrap()));
}

criterion_group!(benches, scattering, delta, painleve, simulator, signature);
criterion_main!(benches);
