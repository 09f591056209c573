//! Statistical microstructure descriptors.
//!
//! All directional descriptors sample exhaustively along the three lattice
//! axes. An origin voxel `x` and the voxel `x + r*e` form an ordered pair for
//! lag `r`; every voxel of the volume (any phase) is a candidate origin, so
//! `S2(0)` equals the phase fraction. With [`BoundaryMode::Periodic`] every
//! voxel is a valid origin for every lag and coordinates wrap; with
//! [`BoundaryMode::Truncated`] only origins whose partner stays inside the
//! volume count. Hit counts are kept as integers next to the normalized values.

mod components;
mod correlation;
mod lineal;
mod porosity;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::volume::{Axis, BoundaryMode, VolumeKind, VoxelVolume};

pub use components::{connected_components, ComponentMap, Connectivity};
pub use correlation::{two_point_cluster, two_point_correlation, ClusterVariant};
pub use lineal::lineal_path;
pub use porosity::{local_porosity_cdf, CdfPoint, PorosityCdf, PorosityParams};

#[derive(Debug, Error, PartialEq)]
pub enum DescriptorError {
    #[error("NotPhase: descriptors need a labeled (phase) volume")]
    NotPhase,
    #[error("BadPhase: phase {phase} is not below n_phases={n_phases}")]
    BadPhase { phase: u8, n_phases: u16 },
    #[error("LagTooLarge: r_max={r_max} along {axis} (length {len}, {boundary})")]
    LagTooLarge { r_max: usize, axis: Axis, len: usize, boundary: BoundaryMode },
    #[error("EmptyPhase: phase {0} has no voxels")]
    EmptyPhase(u8),
    #[error("WindowTooLarge: window {window} does not fit dims {dims:?}")]
    WindowTooLarge { window: usize, dims: [usize; 3] },
    #[error("BadStride: window and stride must be at least 1")]
    BadStride,
    #[error("MixedShapes: {0}")]
    MixedShapes(String),
}

/// Sampling direction of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    X,
    Y,
    Z,
    /// Unweighted mean of the three axis profiles.
    #[serde(rename = "avg")]
    AxisAverage,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::X, Direction::Y, Direction::Z, Direction::AxisAverage];

    pub fn axis(self) -> Option<Axis> {
        match self {
            Direction::X => Some(Axis::X),
            Direction::Y => Some(Axis::Y),
            Direction::Z => Some(Axis::Z),
            Direction::AxisAverage => None,
        }
    }

    pub fn axes(self) -> Vec<Axis> {
        match self.axis() {
            Some(a) => vec![a],
            None => Axis::ALL.to_vec(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::X => "x",
            Direction::Y => "y",
            Direction::Z => "z",
            Direction::AxisAverage => "avg",
        }
    }
}

impl From<Axis> for Direction {
    fn from(a: Axis) -> Self {
        match a {
            Axis::X => Direction::X,
            Axis::Y => Direction::Y,
            Axis::Z => Direction::Z,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Direction::X),
            "y" => Ok(Direction::Y),
            "z" => Ok(Direction::Z),
            "avg" | "average" => Ok(Direction::AxisAverage),
            other => Err(format!("unknown direction '{other}'")),
        }
    }
}

/// A descriptor curve indexed by lag `r = 0..=r_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub phase: u8,
    pub direction: Direction,
    pub r_max: usize,
    pub boundary: BoundaryMode,
    pub values: Vec<f64>,
    /// Qualifying origins per lag (summed over axes for averaged profiles).
    pub hits: Vec<u64>,
    /// Valid origins per lag (summed over axes for averaged profiles).
    pub n_samples: Vec<u64>,
}

impl RadialProfile {
    fn from_counts(
        phase: u8,
        axis: Axis,
        boundary: BoundaryMode,
        hits: Vec<u64>,
        n_samples: Vec<u64>,
    ) -> Self {
        let values = hits.iter().zip(&n_samples).map(|(&h, &n)| h as f64 / n as f64).collect();
        RadialProfile {
            phase,
            direction: axis.into(),
            r_max: hits.len() - 1,
            boundary,
            values,
            hits,
            n_samples,
        }
    }
}

/// Per-lag unweighted mean of profiles sharing phase, `r_max` and boundary.
pub fn average_profiles(profiles: &[RadialProfile]) -> Result<RadialProfile, DescriptorError> {
    let first = profiles
        .first()
        .ok_or_else(|| DescriptorError::MixedShapes("no profiles to average".into()))?;
    for p in &profiles[1..] {
        if p.phase != first.phase || p.r_max != first.r_max || p.boundary != first.boundary {
            return Err(DescriptorError::MixedShapes(format!(
                "phase/r_max/boundary ({}, {}, {}) vs ({}, {}, {})",
                first.phase, first.r_max, first.boundary, p.phase, p.r_max, p.boundary
            )));
        }
    }
    let k = profiles.len() as f64;
    let len = first.r_max + 1;
    let values = (0..len)
        .map(|r| profiles.iter().map(|p| p.values[r]).sum::<f64>() / k)
        .collect();
    let sum_u64 = |f: fn(&RadialProfile) -> &Vec<u64>| -> Vec<u64> {
        (0..len).map(|r| profiles.iter().map(|p| f(p)[r]).sum()).collect()
    };
    Ok(RadialProfile {
        phase: first.phase,
        direction: Direction::AxisAverage,
        r_max: first.r_max,
        boundary: first.boundary,
        values,
        hits: sum_u64(|p| &p.hits),
        n_samples: sum_u64(|p| &p.n_samples),
    })
}

/// Fraction of voxels carrying `phase`.
pub fn phase_fraction(vol: &VoxelVolume, phase: u8) -> Result<f64, DescriptorError> {
    check_phase(vol, phase)?;
    let count = vol.data().iter().filter(|&&v| v == phase).count();
    Ok(count as f64 / vol.len() as f64)
}

pub(crate) fn check_phase(vol: &VoxelVolume, phase: u8) -> Result<(), DescriptorError> {
    if vol.kind() != VolumeKind::Phase {
        return Err(DescriptorError::NotPhase);
    }
    let n_phases = vol.n_phases().unwrap_or(0);
    if u16::from(phase) >= n_phases {
        return Err(DescriptorError::BadPhase { phase, n_phases });
    }
    Ok(())
}

pub(crate) fn check_lag(
    vol: &VoxelVolume,
    axes: &[Axis],
    r_max: usize,
    boundary: BoundaryMode,
) -> Result<(), DescriptorError> {
    for &axis in axes {
        let len = vol.axis_len(axis);
        let ok = match boundary {
            BoundaryMode::Truncated => r_max < len,
            BoundaryMode::Periodic => r_max <= len,
        };
        if !ok {
            return Err(DescriptorError::LagTooLarge { r_max, axis, len, boundary });
        }
    }
    Ok(())
}

/// Valid origins per line for each lag.
pub(crate) fn origins_per_line(len: usize, r_max: usize, boundary: BoundaryMode) -> Vec<u64> {
    (0..=r_max)
        .map(|r| match boundary {
            BoundaryMode::Periodic => len as u64,
            BoundaryMode::Truncated => (len - r) as u64,
        })
        .collect()
}

/// Lines handled per parallel task.
pub(crate) const LINE_BLOCK: usize = 64;

/// Runs `per_line(line_index, acc)` over all lines along `axis`, accumulating
/// into per-task integer vectors of length `width`, then sums them.
pub(crate) fn accumulate_lines<F>(vol: &VoxelVolume, axis: Axis, width: usize, per_line: F) -> Vec<u64>
where
    F: Fn(usize, &mut [u64]) + Sync + Send,
{
    let layout = vol.lines(axis);
    let blocks = layout.count.div_ceil(LINE_BLOCK);
    let partials = crate::par::map_range(blocks, |b| {
        let mut acc = vec![0u64; width];
        for k in b * LINE_BLOCK..((b + 1) * LINE_BLOCK).min(layout.count) {
            per_line(k, &mut acc);
        }
        acc
    });
    let mut total = vec![0u64; width];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}

/// Computes one profile per requested axis and averages when needed.
pub(crate) fn per_direction<F>(direction: Direction, f: F) -> Result<RadialProfile, DescriptorError>
where
    F: Fn(Axis) -> Result<RadialProfile, DescriptorError>,
{
    match direction.axis() {
        Some(axis) => f(axis),
        None => {
            let profiles = Axis::ALL.iter().map(|&a| f(a)).collect::<Result<Vec<_>, _>>()?;
            average_profiles(&profiles)
        }
    }
}
