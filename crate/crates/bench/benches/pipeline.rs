//! Benchmarks covering the hot paths: event simulation, grid sampling,
//! exact counting, and the three estimators.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use crossings_core::crossing_count::{count_exact, count_polyline_grid};
use crossings_core::density_estimation::BandwidthMethod;
use crossings_core::estimators::{
    kr_nonstationary, kr_stationary, monte_carlo, KrConfig, SpeedProjection, TimeQuadrature,
};
use crossings_core::psp_sim::{
    sample_grid, simulate_dataset, simulate_event, telegraph1d, telegraph2d, GridTrajectory,
};
use crossings_core::rng::trajectory_rng;
use crossings_core::surfaces::{Level, PolylineSurface};

fn simulation(c: &mut Criterion) {
    let model = telegraph1d(1.0, 2.0).unwrap();
    c.bench_function("simulate_event telegraph H=50", |b| {
        let mut i = 0u32;
        b.iter(|| {
            i = i.wrapping_add(1);
            let mut rng = trajectory_rng(1, 0, i);
            black_box(simulate_event(&model, &mut rng, 50.0).unwrap())
        })
    });

    let mut rng = trajectory_rng(1, 0, 0);
    let traj = simulate_event(&model, &mut rng, 50.0).unwrap();
    c.bench_function("sample_grid 5001 points", |b| {
        b.iter(|| black_box(sample_grid(&traj, 5001).unwrap()))
    });

    let level = Level::new(0.5);
    c.bench_function("count_exact telegraph H=50", |b| {
        b.iter(|| black_box(count_exact(&traj, &level).unwrap()))
    });

    let planar = telegraph2d(1.0, 2.0).unwrap();
    let mut rng = trajectory_rng(2, 0, 0);
    let planar_traj = simulate_event(&planar, &mut rng, 20.0).unwrap();
    let planar_grid = sample_grid(&planar_traj, 2001).unwrap();
    let square = PolylineSurface::square(2.0).unwrap();
    c.bench_function("count_polyline_grid 2001 points", |b| {
        b.iter(|| black_box(count_polyline_grid(&planar_grid, &square)))
    });
}

fn estimators(c: &mut Criterion) {
    let model = telegraph1d(1.0, 2.0).unwrap();
    let dataset: Vec<GridTrajectory<1>> = simulate_dataset(&model, 50.0, 101, 100, 3, 0).unwrap();
    let level = Level::new(0.5);
    let sp = SpeedProjection::from_model(&model);
    let config = KrConfig {
        bandwidth: BandwidthMethod::Silverman1d,
        time_quadrature: TimeQuadrature::Rectangle,
        surface_step: 0.1,
    };

    c.bench_function("monte_carlo 100x101", |b| {
        b.iter(|| black_box(monte_carlo(&dataset, &level).unwrap()))
    });
    c.bench_function("kr_nonstationary 100x101", |b| {
        b.iter(|| black_box(kr_nonstationary(&dataset, &level, &sp, &config).unwrap()))
    });
    c.bench_function("kr_stationary 100x101", |b| {
        b.iter(|| black_box(kr_stationary(&dataset, &level, &sp, &config).unwrap()))
    });
}

criterion_group!(benches, simulation, estimators);
criterion_main!(benches);
