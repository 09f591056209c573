//! Results must not depend on the worker count.

use mstruct::descriptors::{lineal_path, local_porosity_cdf, two_point_cluster, ClusterVariant, Connectivity, Direction, PorosityParams};
use mstruct::descriptors::two_point_correlation;
use mstruct::physics::{effective_diffusion, physics_report, SolverParams};
use mstruct::quality::{volume_quality, SsimParams};
use mstruct::synth::{generate, FixtureSpec, FixtureVariant};
use mstruct::texture::{classify_volume, GlcmParams};
use mstruct::{Axis, BoundaryMode, VoxelVolume};

fn everything(a: &VoxelVolume, b: &VoxelVolume) -> String {
    let mut out = String::new();
    for boundary in [BoundaryMode::Truncated, BoundaryMode::Periodic] {
        for d in Direction::ALL {
            out += &format!("{:?}", two_point_correlation(a, 1, d, 10, boundary).unwrap().values);
            out += &format!("{:?}", lineal_path(a, 1, d, 10, boundary).unwrap().values);
            let c2 = two_point_cluster(a, 1, d, 10, boundary, ClusterVariant::SameCluster, Connectivity::Face6);
            out += &format!("{:?}", c2.unwrap().values);
        }
    }
    out += &format!("{:?}", local_porosity_cdf(a, 1, PorosityParams::default_for(a.dims())).unwrap());
    out += &format!("{:?}", classify_volume(a, &GlcmParams::default()).unwrap());
    out += &format!("{:?}", volume_quality(a, b, &SsimParams::default()).unwrap());
    out += &format!("{:?}", physics_report(a, BoundaryMode::Periodic).unwrap());
    for axis in Axis::ALL {
        out += &format!("{:?}", effective_diffusion(a, 1, axis, &SolverParams::default()).unwrap());
    }
    out
}

#[test]
fn one_and_many_threads_agree_bitwise() {
    let spec = FixtureSpec::new(FixtureVariant::Bernoulli { p: 0.55 }, [40, 36, 33]);
    let a = generate(&spec, 1).unwrap();
    let b = generate(&spec, 2).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| everything(&a, &b))
    };
    let single = run(1);
    assert_eq!(single, run(4));
    assert_eq!(single, run(7));
}
