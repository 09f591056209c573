//! Local porosity distribution from a cubic sliding window.

use serde::{Deserialize, Serialize};

use super::{check_phase, DescriptorError};
use crate::volume::VoxelVolume;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PorosityParams {
    /// Cubic window edge in voxels.
    pub window: usize,
    /// Step between window corners along each axis.
    pub stride: usize,
}

impl PorosityParams {
    /// Non-overlapping windows a quarter of the smallest dimension wide.
    pub fn default_for(dims: [usize; 3]) -> Self {
        let window = (dims.iter().copied().min().unwrap_or(1) / 4).max(1);
        PorosityParams { window, stride: window }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub porosity: f64,
    /// Fraction of windows with local porosity at most `porosity`.
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PorosityCdf {
    pub phase: u8,
    pub window: usize,
    pub stride: usize,
    pub n_windows: usize,
    /// One point per distinct local porosity, ascending.
    pub points: Vec<CdfPoint>,
}

/// Summed-volume table with a zero border: `at(x, y, z)` is the count of
/// phase voxels in `[0, x) x [0, y) x [0, z)`.
struct PrefixCounts {
    sx: usize,
    sy: usize,
    table: Vec<u32>,
}

impl PrefixCounts {
    fn new(vol: &VoxelVolume, phase: u8) -> Self {
        let [nx, ny, nz] = vol.dims();
        let (sx, sy) = (nx + 1, ny + 1);
        let mut table = vec![0u32; sx * sy * (nz + 1)];
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    let v = u32::from(vol.get(x, y, z) == phase);
                    let at = |x: usize, y: usize, z: usize| x + sx * (y + sy * z);
                    table[at(x + 1, y + 1, z + 1)] = v
                        + table[at(x, y + 1, z + 1)]
                        + table[at(x + 1, y, z + 1)]
                        + table[at(x + 1, y + 1, z)]
                        - table[at(x, y, z + 1)]
                        - table[at(x, y + 1, z)]
                        - table[at(x + 1, y, z)]
                        + table[at(x, y, z)];
                }
            }
        }
        PrefixCounts { sx, sy, table }
    }

    fn at(&self, x: usize, y: usize, z: usize) -> i64 {
        i64::from(self.table[x + self.sx * (y + self.sy * z)])
    }

    fn cube(&self, x: usize, y: usize, z: usize, w: usize) -> u64 {
        let (x1, y1, z1) = (x + w, y + w, z + w);
        let s = self.at(x1, y1, z1) - self.at(x, y1, z1) - self.at(x1, y, z1) - self.at(x1, y1, z)
            + self.at(x, y, z1)
            + self.at(x, y1, z)
            + self.at(x1, y, z)
            - self.at(x, y, z);
        s as u64
    }
}

pub fn local_porosity_cdf(
    vol: &VoxelVolume,
    phase: u8,
    params: PorosityParams,
) -> Result<PorosityCdf, DescriptorError> {
    check_phase(vol, phase)?;
    let PorosityParams { window, stride } = params;
    if window == 0 || stride == 0 {
        return Err(DescriptorError::BadStride);
    }
    let dims = vol.dims();
    if dims.iter().any(|&d| window > d) {
        return Err(DescriptorError::WindowTooLarge { window, dims });
    }
    let corners = |d: usize| (d - window) / stride + 1;
    let [cx, cy, cz] = [corners(dims[0]), corners(dims[1]), corners(dims[2])];
    let table = PrefixCounts::new(vol, phase);
    let total = cx * cy * cz;
    let mut counts = crate::par::map_range(total, |i| {
        let (ix, iy, iz) = (i % cx, (i / cx) % cy, i / (cx * cy));
        table.cube(ix * stride, iy * stride, iz * stride, window)
    });
    counts.sort_unstable();

    let cells = (window * window * window) as f64;
    let mut points: Vec<CdfPoint> = Vec::new();
    let mut i = 0;
    while i < counts.len() {
        let c = counts[i];
        let mut j = i;
        while j < counts.len() && counts[j] == c {
            j += 1;
        }
        points.push(CdfPoint { porosity: c as f64 / cells, cumulative: j as f64 / total as f64 });
        i = j;
    }
    Ok(PorosityCdf { phase, window, stride, n_windows: total, points })
}
