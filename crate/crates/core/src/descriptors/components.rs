//! Connected-component labeling of one phase with union-find.

use serde::{Deserialize, Serialize};

use super::{check_phase, DescriptorError};
use crate::volume::{BoundaryMode, VoxelVolume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    /// Voxels sharing a face.
    #[default]
    Face6,
    /// Voxels sharing a face, edge or corner.
    Full26,
}

impl Connectivity {
    /// Half of the neighbourhood; the other half is covered by symmetry.
    fn forward_offsets(self) -> Vec<[isize; 3]> {
        match self {
            Connectivity::Face6 => vec![[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            Connectivity::Full26 => {
                let mut out = Vec::with_capacity(13);
                for dz in -1isize..=1 {
                    for dy in -1isize..=1 {
                        for dx in -1isize..=1 {
                            let key = (dz, dy, dx);
                            if key > (0, 0, 0) {
                                out.push([dx, dy, dz]);
                            }
                        }
                    }
                }
                out
            }
        }
    }
}

impl std::str::FromStr for Connectivity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "face6" | "6" => Ok(Connectivity::Face6),
            "full26" | "26" => Ok(Connectivity::Full26),
            other => Err(format!("unknown connectivity '{other}'")),
        }
    }
}

/// Component ids per voxel. Ids are dense, assigned in raster order of each
/// component's first voxel; voxels outside the phase hold [`ComponentMap::NONE`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentMap {
    pub labels: Vec<u32>,
    pub count: usize,
}

impl ComponentMap {
    pub const NONE: u32 = u32::MAX;

    /// Voxel count of every component.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.count];
        for &l in &self.labels {
            if l != Self::NONE {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut a: u32) -> u32 {
        while self.parent[a as usize] != a {
            let grand = self.parent[self.parent[a as usize] as usize];
            self.parent[a as usize] = grand;
            a = grand;
        }
        a
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index wins so roots are stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

pub fn connected_components(
    vol: &VoxelVolume,
    phase: u8,
    connectivity: Connectivity,
    boundary: BoundaryMode,
) -> Result<ComponentMap, DescriptorError> {
    check_phase(vol, phase)?;
    let dims = vol.dims();
    let data = vol.data();
    let n = data.len();
    assert!(n < u32::MAX as usize, "volume too large for 32-bit component ids");
    let offsets = connectivity.forward_offsets();
    let mut set = DisjointSet::new(n);

    for (idx, &v) in data.iter().enumerate() {
        if v != phase {
            continue;
        }
        let c = vol.coords(idx);
        'offsets: for off in &offsets {
            let mut nc = [0usize; 3];
            for k in 0..3 {
                match boundary.step(c[k], off[k], dims[k]) {
                    Some(m) => nc[k] = m,
                    None => continue 'offsets,
                }
            }
            let j = vol.index(nc[0], nc[1], nc[2]);
            if data[j] == phase {
                set.union(idx as u32, j as u32);
            }
        }
    }

    let mut labels = vec![ComponentMap::NONE; n];
    let mut root_label = vec![ComponentMap::NONE; n];
    let mut count = 0usize;
    for idx in 0..n {
        if data[idx] != phase {
            continue;
        }
        let root = set.find(idx as u32) as usize;
        if root_label[root] == ComponentMap::NONE {
            root_label[root] = count as u32;
            count += 1;
        }
        labels[idx] = root_label[root];
    }
    Ok(ComponentMap { labels, count })
}
