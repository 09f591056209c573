//! Deterministic two-phase fixture volumes.
//!
//! Random variants draw from the 8-round ChaCha stream as implemented by
//! `rand_chacha` 0.3, seeded with `ChaCha8Rng::seed_from_u64`.
//! Uniform reals are the top 53 bits of `next_u64` scaled by 2^-53, and
//! integer ranges use rejection sampling on `next_u64`, so any
//! implementation of the same stream reproduces the fixtures exactly.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::volume::{Axis, VolumeError, VolumeKind, VoxelVolume};

/// Identifier of the fixture generator stream; bumped if draws ever change.
pub const GENERATOR_ID: &str = "chacha8-seed_from_u64/v1";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("BadSpec: {0}")]
    BadSpec(String),
    #[error("NotBinary: complement needs a two-phase labeled volume")]
    NotBinary,
    #[error(transparent)]
    Volume(#[from] VolumeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum FixtureVariant {
    /// Each voxel is phase 1 with probability `p`.
    Bernoulli { p: f64 },
    /// Layers `k` along `axis` get label `floor(k / slab_thickness) mod 2`.
    Laminate { axis: Axis, slab_thickness: usize },
    /// `round(fraction * cross_section)` full-length phase-1 columns along `axis`.
    Channels { axis: Axis, fraction: f64 },
    /// Voxels within `radius` of `center` (voxel coordinates) are phase 1.
    Sphere { center: [f64; 3], radius: f64 },
    /// The lower half (coordinate < len/2) along `axis` is phase 1.
    HalfSplit { axis: Axis },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    #[serde(flatten)]
    pub variant: FixtureVariant,
    pub dims: [usize; 3],
}

impl FixtureSpec {
    pub fn new(variant: FixtureVariant, dims: [usize; 3]) -> Self {
        Self { variant, dims }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::BadSpec(m));
        if self.dims.contains(&0) {
            return bad(format!("dims must be positive, got {:?}", self.dims));
        }
        match self.variant {
            FixtureVariant::Bernoulli { p } if !(0.0..=1.0).contains(&p) => {
                bad(format!("p must be in [0,1], got {p}"))
            }
            FixtureVariant::Laminate { slab_thickness: 0, .. } => bad("slab_thickness must be >= 1".into()),
            FixtureVariant::Channels { fraction, .. } if !(0.0..=1.0).contains(&fraction) => {
                bad(format!("fraction must be in [0,1], got {fraction}"))
            }
            FixtureVariant::Sphere { radius, center } if !(radius >= 0.0) || center.iter().any(|c| !c.is_finite()) => {
                bad(format!("sphere needs radius >= 0 and a finite center, got {radius} at {center:?}"))
            }
            _ => Ok(()),
        }
    }
}

struct Stream(ChaCha8Rng);

impl Stream {
    fn new(seed: u64) -> Self {
        Stream(ChaCha8Rng::seed_from_u64(seed))
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`, `n > 0`.
    fn below(&mut self, n: u64) -> u64 {
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.0.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }
}

pub fn generate(spec: &FixtureSpec, seed: u64) -> Result<VoxelVolume, SynthError> {
    spec.validate()?;
    let dims = spec.dims;
    let [nx, ny, nz] = dims;
    let n = nx * ny * nz;
    let mut data = vec![0u8; n];
    let coord = |idx: usize| [idx % nx, (idx / nx) % ny, idx / (nx * ny)];

    match spec.variant {
        FixtureVariant::Bernoulli { p } => {
            let mut rng = Stream::new(seed);
            for v in data.iter_mut() {
                *v = u8::from(rng.unit() < p);
            }
        }
        FixtureVariant::Laminate { axis, slab_thickness } => {
            for (idx, v) in data.iter_mut().enumerate() {
                let k = coord(idx)[axis.index()];
                *v = ((k / slab_thickness) % 2) as u8;
            }
        }
        FixtureVariant::Channels { axis, fraction } => {
            let (u, w) = match axis {
                Axis::X => (1, 2),
                Axis::Y => (0, 2),
                Axis::Z => (0, 1),
            };
            let cross = dims[u] * dims[w];
            let count = (fraction * cross as f64).round() as usize;
            let mut cells: Vec<usize> = (0..cross).collect();
            let mut rng = Stream::new(seed);
            // Partial Fisher-Yates: the first `count` cells become channels.
            for i in 0..count.min(cross.saturating_sub(1)) {
                let j = i + rng.below((cross - i) as u64) as usize;
                cells.swap(i, j);
            }
            let mut chosen = vec![false; cross];
            for &c in &cells[..count] {
                chosen[c] = true;
            }
            for (idx, v) in data.iter_mut().enumerate() {
                let c = coord(idx);
                *v = u8::from(chosen[c[u] + dims[u] * c[w]]);
            }
        }
        FixtureVariant::Sphere { center, radius } => {
            let r2 = radius * radius;
            for (idx, v) in data.iter_mut().enumerate() {
                let c = coord(idx);
                let d2: f64 = (0..3).map(|k| (c[k] as f64 - center[k]).powi(2)).sum();
                *v = u8::from(d2 <= r2);
            }
        }
        FixtureVariant::HalfSplit { axis } => {
            let half = dims[axis.index()] / 2;
            for (idx, v) in data.iter_mut().enumerate() {
                *v = u8::from(coord(idx)[axis.index()] < half);
            }
        }
    }
    Ok(VoxelVolume::new_phase(dims, data, 2)?)
}

/// Swaps labels 0 and 1 of a two-phase volume.
pub fn complement(vol: &VoxelVolume) -> Result<VoxelVolume, SynthError> {
    if vol.kind() != VolumeKind::Phase || vol.n_phases() != Some(2) {
        return Err(SynthError::NotBinary);
    }
    let data = vol.data().iter().map(|&v| 1 - v).collect();
    Ok(VoxelVolume::new_phase(vol.dims(), data, 2)?.with_voxel_size(vol.voxel_size())?)
}
