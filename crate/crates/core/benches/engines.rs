//! Parallel vs. sequential throughput of the two expensive kernels: the
//! analytic raster over a 600-cell scan plan and the Monte-Carlo noise
//! estimator. Both produce bit-identical results for either strategy, so
//! the comparison is purely about wall time.

use std::hint::black_box;

use cohmap_core::fixtures;
use cohmap_core::mc::monte_carlo_nrf_exec;
use cohmap_core::noise::{DetectionAssignment, PairDetection, Share, Sign, TwoModeSqueezedPair};
use cohmap_core::scan::{run_raster_exec, ChannelConfig};
use cohmap_core::Execution;
use criterion::{criterion_group, criterion_main, Criterion};

fn mc_scene() -> DetectionAssignment {
    DetectionAssignment::new(
        (0..3)
            .map(|i| PairDetection {
                pair: TwoModeSqueezedPair::new(1.5 + 0.3 * i as f64, 1.0, format!("p{i}"))
                    .unwrap(),
                probe: vec![
                    Share::new("A", 0.6, Sign::Plus),
                    Share::new("B", 0.4, Sign::Minus),
                ],
                conj: vec![
                    Share::new("C", 0.3, Sign::Plus),
                    Share::new("D", 0.7, Sign::Minus),
                ],
            })
            .collect(),
    )
}

fn execution_modes() -> Vec<(&'static str, Execution)> {
    let mut modes = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    modes.push(("parallel", Execution::Parallel));
    modes
}

fn bench_raster(c: &mut Criterion) {
    let layout = fixtures::three_area_layout();
    let plan = fixtures::raster_plan();
    let config = ChannelConfig::split();
    let mut group = c.benchmark_group("raster_600_cells");
    for (name, exec) in execution_modes() {
        group.bench_function(name, |b| {
            b.iter(|| {
                run_raster_exec(black_box(&layout), black_box(&plan), &config, exec).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_monte_carlo(c: &mut Criterion) {
    let scene = mc_scene();
    let mut group = c.benchmark_group("monte_carlo_200k_samples");
    group.sample_size(20);
    for (name, exec) in execution_modes() {
        group.bench_function(name, |b| {
            b.iter(|| monte_carlo_nrf_exec(black_box(&scene), 200_000, 7, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_raster, bench_monte_carlo);
criterion_main!(benches);
