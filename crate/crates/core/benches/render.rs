use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use newton_cycles::family::{build_cycle, family_polynomial};
use newton_cycles::render::{render_basins_sequential, RenderSpec, Window};
use newton_cycles::sharpness::{degree_sweep, roots_of_unity_cycle};
use newton_cycles::Relaxation;

fn spec(side: usize) -> RenderSpec {
    let (cycle, params) = build_cycle(3, 5).unwrap();
    let p = family_polynomial(3, params.c, Complex64::new(1.0, 0.0)).unwrap();
    let pts = cycle.to_complex();
    RenderSpec::new(
        p,
        Relaxation::plain(),
        Window::square(Complex64::new(0.0, 0.0), 1.5),
        (side, side),
        Some(&pts),
    )
    .unwrap()
}

fn render(c: &mut Criterion) {
    let mut group = c.benchmark_group("render_basins");
    group.sample_size(10);
    for side in [64, 128, 256] {
        let s = spec(side);
        group.bench_with_input(BenchmarkId::new("sequential", side), &s, |b, s| {
            b.iter(|| render_basins_sequential(s))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", side), &s, |b, s| {
            b.iter(|| newton_cycles::render::render_basins_parallel(s))
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let omega = roots_of_unity_cycle(12).unwrap();
    c.bench_function("degree_sweep_12", |b| b.iter(|| degree_sweep(&omega, 12)));
}

criterion_group!(benches, render, sweep);
criterion_main!(benches);
