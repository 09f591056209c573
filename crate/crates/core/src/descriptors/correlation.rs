//! Two-point correlation and two-point cluster functions.

use serde::{Deserialize, Serialize};

use super::{
    accumulate_lines, check_lag, check_phase, connected_components, origins_per_line, per_direction,
    phase_fraction, ComponentMap, Connectivity, DescriptorError, Direction, RadialProfile,
};
use crate::volume::{Axis, BoundaryMode, VoxelVolume};

/// Which definition of the cluster function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterVariant {
    /// `S2(r) / phi^2`: the two-point correlation normalized by the squared
    /// phase fraction.
    LiteralS8,
    /// Probability that both ends of the lag lie in the same connected
    /// component of the phase.
    #[default]
    SameCluster,
}

impl std::str::FromStr for ClusterVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "literal" | "literal_s8" | "literals8" => Ok(ClusterVariant::LiteralS8),
            "same_cluster" | "samecluster" | "cluster" => Ok(ClusterVariant::SameCluster),
            other => Err(format!("unknown cluster variant '{other}'")),
        }
    }
}

/// Counts lag pairs along one axis whose endpoints satisfy `pair(a, b)`,
/// where `a`, `b` are flat indices.
fn count_pairs<F>(vol: &VoxelVolume, axis: Axis, r_max: usize, boundary: BoundaryMode, pair: F) -> RadialCounts
where
    F: Fn(usize, usize) -> bool + Sync + Send,
{
    let layout = vol.lines(axis);
    let n = layout.len;
    let hits = accumulate_lines(vol, axis, r_max + 1, |k, acc| {
        let idx: Vec<usize> = (0..n).map(|t| layout.at(k, t)).collect();
        for (r, slot) in acc.iter_mut().enumerate() {
            let origins = match boundary {
                BoundaryMode::Periodic => n,
                BoundaryMode::Truncated => n - r,
            };
            let mut h = 0u64;
            for t in 0..origins {
                let u = t + r;
                let u = if u >= n { u - n } else { u };
                h += u64::from(pair(idx[t], idx[u]));
            }
            *slot += h;
        }
    });
    let per_line = origins_per_line(n, r_max, boundary);
    let n_samples = per_line.iter().map(|&o| o * layout.count as u64).collect();
    RadialCounts { hits, n_samples }
}

struct RadialCounts {
    hits: Vec<u64>,
    n_samples: Vec<u64>,
}

/// `S2(r)`: probability that an origin and the voxel `r` steps along the
/// direction both carry `phase`.
pub fn two_point_correlation(
    vol: &VoxelVolume,
    phase: u8,
    direction: Direction,
    r_max: usize,
    boundary: BoundaryMode,
) -> Result<RadialProfile, DescriptorError> {
    check_phase(vol, phase)?;
    check_lag(vol, &direction.axes(), r_max, boundary)?;
    let data = vol.data();
    per_direction(direction, |axis| {
        let c = count_pairs(vol, axis, r_max, boundary, |a, b| data[a] == phase && data[b] == phase);
        Ok(RadialProfile::from_counts(phase, axis, boundary, c.hits, c.n_samples))
    })
}

/// `C2(r)` in either of its two readings; see [`ClusterVariant`].
/// Components for [`ClusterVariant::SameCluster`] use the same boundary mode
/// as the lags.
pub fn two_point_cluster(
    vol: &VoxelVolume,
    phase: u8,
    direction: Direction,
    r_max: usize,
    boundary: BoundaryMode,
    variant: ClusterVariant,
    connectivity: Connectivity,
) -> Result<RadialProfile, DescriptorError> {
    check_phase(vol, phase)?;
    check_lag(vol, &direction.axes(), r_max, boundary)?;
    match variant {
        ClusterVariant::LiteralS8 => {
            let phi = phase_fraction(vol, phase)?;
            if phi == 0.0 {
                return Err(DescriptorError::EmptyPhase(phase));
            }
            let phi2 = phi * phi;
            let mut profile = two_point_correlation(vol, phase, direction, r_max, boundary)?;
            for v in profile.values.iter_mut() {
                *v /= phi2;
            }
            Ok(profile)
        }
        ClusterVariant::SameCluster => {
            let map = connected_components(vol, phase, connectivity, boundary)?;
            let labels = &map.labels;
            per_direction(direction, |axis| {
                let c = count_pairs(vol, axis, r_max, boundary, |a, b| {
                    labels[a] != ComponentMap::NONE && labels[a] == labels[b]
                });
                Ok(RadialProfile::from_counts(phase, axis, boundary, c.hits, c.n_samples))
            })
        }
    }
}
