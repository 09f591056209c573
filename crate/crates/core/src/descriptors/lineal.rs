//! Lineal path function.

use super::{
    accumulate_lines, check_lag, check_phase, origins_per_line, per_direction, DescriptorError, Direction,
    RadialProfile,
};
use crate::volume::{BoundaryMode, VoxelVolume};

/// `L(r)`: probability that the `r + 1` voxels `x, x+e, ..., x+r*e` all carry
/// `phase`.
pub fn lineal_path(
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
        let layout = vol.lines(axis);
        let n = layout.len;
        let cap = r_max + 1;
        // histogram of forward run lengths (capped), bucket `cap` = long runs
        let hist = accumulate_lines(vol, axis, cap + 1, |k, acc| {
            let inside: Vec<bool> = (0..n).map(|t| data[layout.at(k, t)] == phase).collect();
            for run in forward_runs(&inside, boundary, cap) {
                acc[run] += 1;
            }
        });
        let mut hits = vec![0u64; cap];
        let mut tail = hist[cap];
        for r in (0..cap).rev() {
            // origins whose run covers r + 1 voxels
            hits[r] = tail;
            tail += hist[r];
        }
        let n_samples = origins_per_line(n, r_max, boundary)
            .into_iter()
            .map(|o| o * layout.count as u64)
            .collect();
        Ok(RadialProfile::from_counts(phase, axis, boundary, hits, n_samples))
    })
}

/// Length of the in-phase run starting at each position, capped at `cap`.
fn forward_runs(inside: &[bool], boundary: BoundaryMode, cap: usize) -> Vec<usize> {
    let n = inside.len();
    let mut runs = vec![0usize; n];
    match boundary {
        BoundaryMode::Truncated => {
            let mut next = 0usize;
            for t in (0..n).rev() {
                next = if inside[t] { (next + 1).min(cap) } else { 0 };
                runs[t] = next;
            }
        }
        BoundaryMode::Periodic => {
            if inside.iter().all(|&b| b) {
                runs.fill(cap);
                return runs;
            }
            // two backward sweeps settle runs that wrap past the end
            let mut next = 0usize;
            for s in (0..2 * n).rev() {
                let t = s % n;
                next = if inside[t] { (next + 1).min(cap) } else { 0 };
                runs[t] = next;
            }
        }
    }
    runs
}
