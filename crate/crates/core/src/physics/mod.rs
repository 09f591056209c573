//! Phase fractions, specific surface area, triple-phase-boundary density and
//! effective diffusivity of labeled volumes.

mod diffusion;
mod multigrid;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::volume::{Axis, BoundaryMode, VolumeKind, VoxelVolume};

pub use diffusion::{effective_diffusion, DiffusionResult, Preconditioner, SolverParams};

#[derive(Debug, Error, PartialEq)]
pub enum PhysicsError {
    #[error("NotPhase: physics metrics need a labeled (phase) volume")]
    NotPhase,
    #[error("BadPhase: phase {phase} is not below n_phases={n_phases}")]
    BadPhase { phase: u8, n_phases: u16 },
    #[error("SolverDiverged: relative residual {residual:e} after {iterations} iterations")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("BadParams: {0}")]
    BadParams(String),
}

fn n_phases(vol: &VoxelVolume) -> Result<u16, PhysicsError> {
    match (vol.kind(), vol.n_phases()) {
        (VolumeKind::Phase, Some(n)) => Ok(n),
        _ => Err(PhysicsError::NotPhase),
    }
}

fn check_phase(vol: &VoxelVolume, phase: u8) -> Result<(), PhysicsError> {
    let n = n_phases(vol)?;
    if u16::from(phase) >= n {
        return Err(PhysicsError::BadPhase { phase, n_phases: n });
    }
    Ok(())
}

/// Voxel count of each label, indexed by label.
pub fn phase_counts(vol: &VoxelVolume) -> Result<Vec<u64>, PhysicsError> {
    let n = n_phases(vol)?;
    let mut counts = vec![0u64; usize::from(n)];
    for &v in vol.data() {
        counts[usize::from(v)] += 1;
    }
    Ok(counts)
}

/// `V_i / V` for every phase.
pub fn phase_volume_fractions(vol: &VoxelVolume) -> Result<Vec<f64>, PhysicsError> {
    let total = vol.len() as f64;
    Ok(phase_counts(vol)?.into_iter().map(|c| c as f64 / total).collect())
}

/// Interface faces per phase: voxel faces where that phase meets any other label.
pub fn interface_face_counts(vol: &VoxelVolume, boundary: BoundaryMode) -> Result<Vec<u64>, PhysicsError> {
    let n = usize::from(n_phases(vol)?);
    let data = vol.data();
    let mut counts = vec![0u64; n];
    for axis in Axis::ALL {
        let layout = vol.lines(axis);
        let partials = crate::par::map_range(layout.count.div_ceil(256), |b| {
            let mut acc = vec![0u64; n];
            for k in b * 256..((b + 1) * 256).min(layout.count) {
                let mut tally = |p: u8, q: u8| {
                    if p != q {
                        acc[usize::from(p)] += 1;
                        acc[usize::from(q)] += 1;
                    }
                };
                for t in 1..layout.len {
                    tally(data[layout.at(k, t - 1)], data[layout.at(k, t)]);
                }
                if boundary == BoundaryMode::Periodic && layout.len > 1 {
                    tally(data[layout.at(k, layout.len - 1)], data[layout.at(k, 0)]);
                }
            }
            acc
        });
        for p in partials {
            for (c, v) in counts.iter_mut().zip(p) {
                *c += v;
            }
        }
    }
    Ok(counts)
}

/// Interface area of `phase` per unit volume, by counting voxel faces.
pub fn specific_surface_area(vol: &VoxelVolume, phase: u8, boundary: BoundaryMode) -> Result<f64, PhysicsError> {
    check_phase(vol, phase)?;
    let faces = interface_face_counts(vol, boundary)?[usize::from(phase)];
    Ok(faces as f64 / (vol.len() as f64 * vol.voxel_size()))
}

/// Lattice edges (shared by four voxels) where at least three distinct labels meet.
pub fn tpb_edge_count(vol: &VoxelVolume, boundary: BoundaryMode) -> Result<u64, PhysicsError> {
    n_phases(vol)?;
    let dims = vol.dims();
    let data = vol.data();
    let mut total = 0u64;
    for axis in Axis::ALL {
        let a = axis.index();
        let (u, w) = match axis {
            Axis::X => (1, 2),
            Axis::Y => (0, 2),
            Axis::Z => (0, 1),
        };
        let (nu, nw) = (dims[u], dims[w]);
        let (eu, ew) = match boundary {
            BoundaryMode::Truncated => (nu.saturating_sub(1), nw.saturating_sub(1)),
            BoundaryMode::Periodic => (nu, nw),
        };
        let per_layer = crate::par::map_range(dims[a], |t| {
            let mut count = 0u64;
            let at = |cu: usize, cw: usize| {
                let mut c = [0usize; 3];
                c[a] = t;
                c[u] = cu % nu;
                c[w] = cw % nw;
                data[vol.index(c[0], c[1], c[2])]
            };
            for cw in 0..ew {
                for cu in 0..eu {
                    let labels = [at(cu, cw), at(cu + 1, cw), at(cu, cw + 1), at(cu + 1, cw + 1)];
                    if distinct(labels) >= 3 {
                        count += 1;
                    }
                }
            }
            count
        });
        total += per_layer.into_iter().sum::<u64>();
    }
    Ok(total)
}

fn distinct(labels: [u8; 4]) -> usize {
    let mut n = 0;
    for i in 0..4 {
        if !labels[..i].contains(&labels[i]) {
            n += 1;
        }
    }
    n
}

/// Triple-phase-boundary length per unit volume.
pub fn tpb_density(vol: &VoxelVolume, boundary: BoundaryMode) -> Result<f64, PhysicsError> {
    let edges = tpb_edge_count(vol, boundary)?;
    let a = vol.voxel_size();
    Ok(edges as f64 / (vol.len() as f64 * a * a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsReport {
    pub phase_fractions: Vec<f64>,
    /// Specific surface area per phase, 1/length.
    pub ssa: Vec<f64>,
    /// TPB length per unit volume, 1/length^2.
    pub tpb_density: f64,
    pub boundary: BoundaryMode,
}

pub fn physics_report(vol: &VoxelVolume, boundary: BoundaryMode) -> Result<PhysicsReport, PhysicsError> {
    let phase_fractions = phase_volume_fractions(vol)?;
    let faces = interface_face_counts(vol, boundary)?;
    let scale = vol.len() as f64 * vol.voxel_size();
    Ok(PhysicsReport {
        phase_fractions,
        ssa: faces.into_iter().map(|f| f as f64 / scale).collect(),
        tpb_density: tpb_density(vol, boundary)?,
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_with(dims: [usize; 3], fill: impl Fn(usize, usize, usize) -> u8, n_phases: u16) -> VoxelVolume {
        let mut data = Vec::new();
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(fill(x, y, z));
                }
            }
        }
        VoxelVolume::new_phase(dims, data, n_phases).unwrap()
    }

    #[test]
    fn fractions() {
        let v = cube_with([4, 4, 4], |_, _, z| u8::from(z < 2), 2);
        assert_eq!(phase_volume_fractions(&v).unwrap(), vec![0.5, 0.5]);
        let one = cube_with([4, 4, 4], |x, y, z| u8::from((x, y, z) == (1, 2, 3)), 2);
        assert_eq!(phase_volume_fractions(&one).unwrap()[1], 1.0 / 64.0);
        let gray = VoxelVolume::new_gray([1, 1, 1], vec![3]).unwrap();
        assert_eq!(phase_volume_fractions(&gray), Err(PhysicsError::NotPhase));
    }

    #[test]
    fn single_voxel_surface() {
        let v = cube_with([4, 4, 4], |x, y, z| u8::from((x, y, z) == (1, 1, 1)), 2);
        for b in [BoundaryMode::Truncated, BoundaryMode::Periodic] {
            assert_eq!(specific_surface_area(&v, 1, b).unwrap(), 6.0 / 64.0);
        }
        let half = v.clone().with_voxel_size(0.5).unwrap();
        assert_eq!(specific_surface_area(&half, 1, BoundaryMode::Truncated).unwrap(), 6.0 * 0.25 / (64.0 * 0.125));
    }

    #[test]
    fn centered_cube_surface() {
        let inside = |c: usize| (1..3).contains(&c);
        let v = cube_with([4, 4, 4], |x, y, z| u8::from(inside(x) && inside(y) && inside(z)), 2);
        assert_eq!(specific_surface_area(&v, 1, BoundaryMode::Truncated).unwrap(), 24.0 / 64.0);
        assert_eq!(specific_surface_area(&v, 0, BoundaryMode::Truncated).unwrap(), 24.0 / 64.0);
    }

    #[test]
    fn full_volume_has_no_surface() {
        let v = cube_with([3, 3, 3], |_, _, _| 1, 2);
        assert_eq!(specific_surface_area(&v, 1, BoundaryMode::Periodic).unwrap(), 0.0);
    }

    #[test]
    fn periodic_counts_wrapped_faces() {
        let v = cube_with([4, 1, 1], |x, _, _| u8::from(x == 0), 2);
        assert_eq!(interface_face_counts(&v, BoundaryMode::Truncated).unwrap(), vec![1, 1]);
        assert_eq!(interface_face_counts(&v, BoundaryMode::Periodic).unwrap(), vec![2, 2]);
    }

    #[test]
    fn tpb_single_edge() {
        // bottom layer all 0; top layer 0 1 / 2 0
        let top = [0u8, 1, 2, 0];
        let v = cube_with([2, 2, 2], |x, y, z| if z == 0 { 0 } else { top[x + 2 * y] }, 3);
        assert_eq!(tpb_edge_count(&v, BoundaryMode::Truncated).unwrap(), 1);
        assert_eq!(tpb_density(&v, BoundaryMode::Truncated).unwrap(), 1.0 / 8.0);
    }

    #[test]
    fn tpb_needs_three_labels() {
        let two = cube_with([3, 3, 3], |x, y, z| ((x + y + z) % 2) as u8, 2);
        assert_eq!(tpb_density(&two, BoundaryMode::Periodic).unwrap(), 0.0);
        let one = cube_with([3, 3, 3], |_, _, _| 0, 1);
        assert_eq!(tpb_density(&one, BoundaryMode::Truncated).unwrap(), 0.0);
    }

    #[test]
    fn distinct_labels() {
        assert_eq!(distinct([0, 0, 1, 2]), 3);
        assert_eq!(distinct([5, 5, 5, 5]), 1);
        assert_eq!(distinct([0, 1, 2, 3]), 4);
    }
}
