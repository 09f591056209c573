//! Exhaustive enumeration oracles for the directional descriptors.
//!
//! The oracles walk every voxel with explicit coordinate arithmetic and label
//! clusters by breadth-first flood fill, sharing no code with the line-based
//! kernels or the union-find labeling they check.

use std::collections::VecDeque;

use mstruct::descriptors::{
    connected_components, lineal_path, local_porosity_cdf, two_point_cluster, two_point_correlation,
    ClusterVariant, ComponentMap, Connectivity, Direction, PorosityParams,
};
use mstruct::synth::{generate, FixtureSpec, FixtureVariant};
use mstruct::{Axis, BoundaryMode, VoxelVolume};
use proptest::prelude::*;

fn bernoulli(seed: u64, dims: [usize; 3], p: f64) -> VoxelVolume {
    generate(&FixtureSpec::new(FixtureVariant::Bernoulli { p }, dims), seed).unwrap()
}

fn partner(c: [usize; 3], axis: Axis, s: usize, dims: [usize; 3], boundary: BoundaryMode) -> Option<[usize; 3]> {
    let a = axis.index();
    let mut out = c;
    let moved = c[a] + s;
    out[a] = match boundary {
        BoundaryMode::Periodic => moved % dims[a],
        BoundaryMode::Truncated if moved < dims[a] => moved,
        BoundaryMode::Truncated => return None,
    };
    Some(out)
}

fn voxels(dims: [usize; 3]) -> impl Iterator<Item = [usize; 3]> {
    let [nx, ny, nz] = dims;
    (0..nz).flat_map(move |z| (0..ny).flat_map(move |y| (0..nx).map(move |x| [x, y, z])))
}

/// (hits, origins) per lag for a pair predicate.
fn enumerate_pairs(
    vol: &VoxelVolume,
    axis: Axis,
    r_max: usize,
    boundary: BoundaryMode,
    hit: impl Fn([usize; 3], [usize; 3]) -> bool,
) -> (Vec<u64>, Vec<u64>) {
    let dims = vol.dims();
    let mut hits = vec![0u64; r_max + 1];
    let mut origins = vec![0u64; r_max + 1];
    for r in 0..=r_max {
        for c in voxels(dims) {
            if let Some(q) = partner(c, axis, r, dims, boundary) {
                origins[r] += 1;
                hits[r] += u64::from(hit(c, q));
            }
        }
    }
    (hits, origins)
}

fn oracle_s2(vol: &VoxelVolume, phase: u8, axis: Axis, r_max: usize, b: BoundaryMode) -> (Vec<u64>, Vec<u64>) {
    enumerate_pairs(vol, axis, r_max, b, |p, q| vol.get(p[0], p[1], p[2]) == phase && vol.get(q[0], q[1], q[2]) == phase)
}

fn oracle_lineal(vol: &VoxelVolume, phase: u8, axis: Axis, r_max: usize, b: BoundaryMode) -> (Vec<u64>, Vec<u64>) {
    let dims = vol.dims();
    let mut hits = vec![0u64; r_max + 1];
    let mut origins = vec![0u64; r_max + 1];
    for r in 0..=r_max {
        for c in voxels(dims) {
            if partner(c, axis, r, dims, b).is_none() {
                continue;
            }
            origins[r] += 1;
            let all_in = (0..=r).all(|s| {
                let q = partner(c, axis, s, dims, b).unwrap();
                vol.get(q[0], q[1], q[2]) == phase
            });
            hits[r] += u64::from(all_in);
        }
    }
    (hits, origins)
}

/// Face-connected flood fill; returns a component id per voxel (or None).
fn flood_fill(vol: &VoxelVolume, phase: u8, b: BoundaryMode) -> Vec<Option<usize>> {
    let dims = vol.dims();
    let idx = |c: [usize; 3]| c[0] + dims[0] * (c[1] + dims[1] * c[2]);
    let mut label = vec![None; vol.len()];
    let mut next = 0;
    for start in voxels(dims) {
        if vol.get(start[0], start[1], start[2]) != phase || label[idx(start)].is_some() {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        label[idx(start)] = Some(next);
        while let Some(c) = queue.pop_front() {
            for a in 0..3 {
                for step in [-1i64, 1] {
                    let moved = c[a] as i64 + step;
                    let n = dims[a] as i64;
                    let m = match b {
                        BoundaryMode::Periodic => moved.rem_euclid(n),
                        BoundaryMode::Truncated if (0..n).contains(&moved) => moved,
                        BoundaryMode::Truncated => continue,
                    };
                    let mut q = c;
                    q[a] = m as usize;
                    if vol.get(q[0], q[1], q[2]) == phase && label[idx(q)].is_none() {
                        label[idx(q)] = Some(next);
                        queue.push_back(q);
                    }
                }
            }
        }
        next += 1;
    }
    label
}

fn oracle_cluster(vol: &VoxelVolume, phase: u8, axis: Axis, r_max: usize, b: BoundaryMode) -> (Vec<u64>, Vec<u64>) {
    let dims = vol.dims();
    let labels = flood_fill(vol, phase, b);
    let idx = |c: [usize; 3]| c[0] + dims[0] * (c[1] + dims[1] * c[2]);
    enumerate_pairs(vol, axis, r_max, b, |p, q| {
        labels[idx(p)].is_some() && labels[idx(p)] == labels[idx(q)]
    })
}

const BOUNDARIES: [BoundaryMode; 2] = [BoundaryMode::Truncated, BoundaryMode::Periodic];

fn r_max_for(b: BoundaryMode) -> usize {
    match b {
        BoundaryMode::Truncated => 7,
        BoundaryMode::Periodic => 8,
    }
}

#[test]
fn correlation_matches_enumeration() {
    for seed in 0..20 {
        let vol = bernoulli(seed, [8, 8, 8], 0.5);
        for b in BOUNDARIES {
            for axis in Axis::ALL {
                let p = two_point_correlation(&vol, 1, axis.into(), r_max_for(b), b).unwrap();
                let (hits, origins) = oracle_s2(&vol, 1, axis, r_max_for(b), b);
                assert_eq!(p.hits, hits, "seed {seed} {axis} {b}");
                assert_eq!(p.n_samples, origins);
            }
        }
    }
}

#[test]
fn lineal_path_matches_enumeration() {
    for seed in 0..20 {
        let vol = bernoulli(seed, [8, 8, 8], 0.6);
        for b in BOUNDARIES {
            for axis in Axis::ALL {
                let p = lineal_path(&vol, 1, axis.into(), r_max_for(b), b).unwrap();
                let (hits, origins) = oracle_lineal(&vol, 1, axis, r_max_for(b), b);
                assert_eq!(p.hits, hits, "seed {seed} {axis} {b}");
                assert_eq!(p.n_samples, origins);
            }
        }
    }
}

#[test]
fn same_cluster_matches_enumeration() {
    for seed in 0..20 {
        let vol = bernoulli(seed, [8, 8, 8], 0.3);
        for b in BOUNDARIES {
            for axis in Axis::ALL {
                let p = two_point_cluster(
                    &vol,
                    1,
                    axis.into(),
                    r_max_for(b),
                    b,
                    ClusterVariant::SameCluster,
                    Connectivity::Face6,
                )
                .unwrap();
                let (hits, origins) = oracle_cluster(&vol, 1, axis, r_max_for(b), b);
                assert_eq!(p.hits, hits, "seed {seed} {axis} {b}");
                assert_eq!(p.n_samples, origins);
            }
        }
    }
}

#[test]
fn union_find_partition_matches_flood_fill() {
    for seed in 0..20 {
        let vol = bernoulli(seed, [9, 7, 6], 0.35);
        for b in BOUNDARIES {
            let uf = connected_components(&vol, 1, Connectivity::Face6, b).unwrap();
            let ff = flood_fill(&vol, 1, b);
            let ff_count = ff.iter().flatten().max().map_or(0, |m| m + 1);
            assert_eq!(uf.count, ff_count);
            // same partition: the id maps are a bijection
            let mut map = vec![None; uf.count];
            for (u, f) in uf.labels.iter().zip(&ff) {
                match (u, f) {
                    (&ComponentMap::NONE, None) => {}
                    (&u, Some(f)) if u != ComponentMap::NONE => {
                        let slot = &mut map[u as usize];
                        assert_eq!(*slot.get_or_insert(*f), *f);
                    }
                    other => panic!("labeling disagrees: {other:?}"),
                }
            }
        }
    }
}

#[test]
fn literal_cluster_identity() {
    for seed in 0..20 {
        let vol = bernoulli(seed, [8, 8, 8], 0.5);
        let phi = vol.data().iter().filter(|&&v| v == 1).count() as f64 / vol.len() as f64;
        for d in Direction::ALL {
            let s2 = two_point_correlation(&vol, 1, d, 7, BoundaryMode::Truncated).unwrap();
            let c2 = two_point_cluster(&vol, 1, d, 7, BoundaryMode::Truncated, ClusterVariant::LiteralS8, Connectivity::Face6)
                .unwrap();
            for (c, s) in c2.values.iter().zip(&s2.values) {
                let back = c * (phi * phi);
                assert!((back - s).abs() <= f64::EPSILON * s.abs(), "{back} vs {s}");
            }
        }
    }
}

#[test]
fn descriptor_identities() {
    for seed in 0..20 {
        let vol = bernoulli(seed, [8, 8, 8], 0.5);
        let count = vol.data().iter().filter(|&&v| v == 1).count();
        let phi = count as f64 / vol.len() as f64;
        for b in BOUNDARIES {
            for d in Direction::ALL {
                let s2 = two_point_correlation(&vol, 1, d, r_max_for(b), b).unwrap();
                let l = lineal_path(&vol, 1, d, r_max_for(b), b).unwrap();
                let c2 = two_point_cluster(&vol, 1, d, r_max_for(b), b, ClusterVariant::SameCluster, Connectivity::Face6)
                    .unwrap();
                assert_eq!(s2.values[0], phi);
                assert_eq!(l.values[0], phi);
                for r in 0..=r_max_for(b) {
                    assert!(s2.values[r] <= phi);
                    assert!(l.values[r] <= s2.values[r]);
                    assert!(c2.values[r] <= s2.values[r]);
                    if r > 0 {
                        assert!(l.values[r] <= l.values[r - 1]);
                    }
                }
            }
        }
        for axis in Axis::ALL {
            let s2 = two_point_correlation(&vol, 1, axis.into(), 8, BoundaryMode::Periodic).unwrap();
            for r in 0..=8 {
                assert_eq!(s2.hits[r], s2.hits[8 - r], "seed {seed} {axis} r={r}");
            }
        }
    }
}

#[test]
fn porosity_cdf_matches_window_enumeration() {
    let vol = bernoulli(5, [9, 8, 7], 0.4);
    let params = PorosityParams { window: 3, stride: 2 };
    let cdf = local_porosity_cdf(&vol, 1, params).unwrap();
    let mut values = Vec::new();
    for z in (0..=7 - 3).step_by(2) {
        for y in (0..=8 - 3).step_by(2) {
            for x in (0..=9 - 3).step_by(2) {
                let mut c = 0;
                for dz in 0..3 {
                    for dy in 0..3 {
                        for dx in 0..3 {
                            c += u32::from(vol.get(x + dx, y + dy, z + dz) == 1);
                        }
                    }
                }
                values.push(c);
            }
        }
    }
    assert_eq!(cdf.n_windows, values.len());
    for p in &cdf.points {
        let le = values.iter().filter(|&&c| f64::from(c) / 27.0 <= p.porosity).count();
        assert_eq!(p.cumulative, le as f64 / values.len() as f64);
    }
    assert_eq!(cdf.points.last().unwrap().cumulative, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn profiles_are_probabilities(seed in any::<u64>(), p in 0.0f64..=1.0, nx in 1usize..7, ny in 1usize..7, nz in 1usize..7) {
        let vol = bernoulli(seed, [nx, ny, nz], p);
        let r_max = nx.min(ny).min(nz) - 1;
        for b in BOUNDARIES {
            let s2 = two_point_correlation(&vol, 1, Direction::AxisAverage, r_max, b).unwrap();
            let l = lineal_path(&vol, 1, Direction::AxisAverage, r_max, b).unwrap();
            for r in 0..=r_max {
                prop_assert!((0.0..=1.0).contains(&s2.values[r]));
                prop_assert!(l.values[r] <= s2.values[r] + 1e-15);
            }
        }
        let cdf = local_porosity_cdf(&vol, 1, PorosityParams::default_for(vol.dims())).unwrap();
        prop_assert_eq!(cdf.points.last().unwrap().cumulative, 1.0);
        prop_assert!(cdf.points.windows(2).all(|w| w[0].porosity < w[1].porosity && w[0].cumulative <= w[1].cumulative));
        prop_assert!(cdf.points.iter().all(|p| (0.0..=1.0).contains(&p.porosity)));
    }
}
