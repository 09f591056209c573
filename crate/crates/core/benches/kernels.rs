//! Hot kernels on a one-thread pool versus the default pool.
//!
//! The one-thread pool runs the same code paths as the parallel build without
//! spreading work; `cargo bench --no-default-features` measures the plain
//! sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mstruct::descriptors::{two_point_cluster, two_point_correlation, ClusterVariant, Connectivity, Direction};
use mstruct::physics::{effective_diffusion, SolverParams};
use mstruct::quality::{ssim, SsimParams};
use mstruct::synth::{generate, FixtureSpec, FixtureVariant};
use mstruct::texture::{directional_features, GlcmParams};
use mstruct::{Axis, BoundaryMode, VolumeKind, VoxelVolume};

fn volume(n: usize) -> VoxelVolume {
    generate(&FixtureSpec::new(FixtureVariant::Bernoulli { p: 0.5 }, [n, n, n]), 7).unwrap()
}

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("1-thread", one), ("default", all)]
}

fn kernels(c: &mut Criterion) {
    let vol = volume(64);
    let r_max = 32;
    let pools = pools();

    let mut g = c.benchmark_group("s2_64");
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| two_point_correlation(&vol, 1, Direction::AxisAverage, r_max, BoundaryMode::Truncated)))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("c2_64");
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                pool.install(|| {
                    two_point_cluster(
                        &vol,
                        1,
                        Direction::AxisAverage,
                        r_max,
                        BoundaryMode::Truncated,
                        ClusterVariant::SameCluster,
                        Connectivity::Face6,
                    )
                })
            })
        });
    }
    g.finish();

    let glcm = GlcmParams::default_for(VolumeKind::Phase);
    let mut g = c.benchmark_group("glcm_64");
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| directional_features(&vol, Axis::Z, &glcm)))
        });
    }
    g.finish();

    let gray = vol.to_gray();
    let (a, other) = (gray.slice(Axis::Z, 0).unwrap(), gray.slice(Axis::Z, 1).unwrap());
    let params = SsimParams::default();
    let mut g = c.benchmark_group("ssim_slice_64");
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| pool.install(|| ssim(&a, &other, &params))));
    }
    g.finish();

    let solid = volume(32);
    let solver = SolverParams::default();
    let mut g = c.benchmark_group("diffusion_32");
    g.sample_size(10);
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| effective_diffusion(&solid, 1, Axis::Z, &solver)))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
