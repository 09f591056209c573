//! Voxel volumes, the MVX1 file format, slicing and boundary arithmetic.
//!
//! An MVX1 file is the five magic bytes `MVX1\n`, one ASCII header line of
//! space-separated `key=value` tokens terminated by `\n`, then the raw payload
//! of `nx*ny*nz` unsigned bytes in x-fastest order:
//!
//! ```text
//! MVX1
//! dims=64,64,32 kind=phase n_phases=3 voxel_size=0.5
//! <payload>
//! ```
//!
//! `kind` is `phase` or `gray`; gray volumes carry `n_phases=0`. The writer
//! always emits the keys in the order above and formats `voxel_size` with the
//! shortest representation that parses back to the same `f64`, so a
//! save/load/save cycle is byte-identical.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAGIC: &[u8; 5] = b"MVX1\n";

const MAX_HEADER_LEN: usize = 4096;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("BadMagic: file does not start with MVX1 magic bytes")]
    BadMagic,
    #[error("HeaderParse: {0}")]
    HeaderParse(String),
    #[error("PayloadSizeMismatch: header declares {expected} voxels but payload has {actual} bytes")]
    PayloadSizeMismatch { expected: usize, actual: usize },
    #[error("LabelOutOfRange: voxel value {value} is not below n_phases={n_phases}")]
    LabelOutOfRange { value: u8, n_phases: u16 },
    #[error("IoFailure: {0}")]
    Io(#[from] std::io::Error),
    #[error("IndexOutOfRange: layer {index} along {axis} (length {len})")]
    IndexOutOfRange { axis: Axis, index: usize, len: usize },
    #[error("InvalidVolume: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(format!("unknown axis '{other}'")),
        }
    }
}

/// How lags and adjacency behave at the volume faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Opposite faces are contiguous; coordinates wrap.
    Periodic,
    /// Nothing exists outside the volume.
    #[default]
    Truncated,
}

impl BoundaryMode {
    /// Moves `coord` by `delta` on an axis of length `len`.
    #[inline]
    pub fn step(self, coord: usize, delta: isize, len: usize) -> Option<usize> {
        let moved = coord as isize + delta;
        match self {
            BoundaryMode::Periodic => Some(moved.rem_euclid(len as isize) as usize),
            BoundaryMode::Truncated => {
                if moved < 0 || moved >= len as isize {
                    None
                } else {
                    Some(moved as usize)
                }
            }
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Truncated => "truncated",
        })
    }
}

impl std::str::FromStr for BoundaryMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" => Ok(BoundaryMode::Periodic),
            "truncated" => Ok(BoundaryMode::Truncated),
            other => Err(format!("unknown boundary mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeKind {
    Phase,
    Gray,
}

/// Memory layout of the 1-D lines running along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineLayout {
    pub axis: Axis,
    /// Number of lines.
    pub count: usize,
    /// Voxels per line.
    pub len: usize,
    /// Flat-index distance between consecutive voxels on a line.
    pub stride: usize,
    dims: [usize; 3],
}

impl LineLayout {
    /// Flat index of the first voxel of line `k`.
    #[inline]
    pub fn start(&self, k: usize) -> usize {
        let [nx, ny, _] = self.dims;
        match self.axis {
            Axis::X => k * nx,
            Axis::Y => (k % nx) + nx * ny * (k / nx),
            Axis::Z => k,
        }
    }

    /// Flat index of position `t` on line `k`.
    #[inline]
    pub fn at(&self, k: usize, t: usize) -> usize {
        self.start(k) + t * self.stride
    }
}

/// A 3D grid of 8-bit phase labels or gray values, stored x-fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoxelVolume {
    dims: [usize; 3],
    data: Vec<u8>,
    kind: VolumeKind,
    n_phases: u16,
    voxel_size: f64,
}

impl VoxelVolume {
    /// Labeled volume whose values must all be below `n_phases`.
    pub fn new_phase(dims: [usize; 3], data: Vec<u8>, n_phases: u16) -> Result<Self, VolumeError> {
        if n_phases == 0 || n_phases > 256 {
            return Err(VolumeError::Invalid(format!(
                "n_phases must be in 1..=256, got {n_phases}"
            )));
        }
        let vol = Self::checked(dims, data, VolumeKind::Phase, n_phases)?;
        vol.check_labels()?;
        Ok(vol)
    }

    pub fn new_gray(dims: [usize; 3], data: Vec<u8>) -> Result<Self, VolumeError> {
        Self::checked(dims, data, VolumeKind::Gray, 0)
    }

    fn checked(
        dims: [usize; 3],
        data: Vec<u8>,
        kind: VolumeKind,
        n_phases: u16,
    ) -> Result<Self, VolumeError> {
        if dims.contains(&0) {
            return Err(VolumeError::Invalid(format!("dims must be positive, got {dims:?}")));
        }
        let expected = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| VolumeError::Invalid("dims overflow".into()))?;
        if data.len() != expected {
            return Err(VolumeError::PayloadSizeMismatch { expected, actual: data.len() });
        }
        Ok(Self { dims, data, kind, n_phases, voxel_size: 1.0 })
    }

    fn check_labels(&self) -> Result<(), VolumeError> {
        if self.kind == VolumeKind::Phase && self.n_phases < 256 {
            if let Some(&value) = self.data.iter().find(|&&v| u16::from(v) >= self.n_phases) {
                return Err(VolumeError::LabelOutOfRange { value, n_phases: self.n_phases });
            }
        }
        Ok(())
    }

    pub fn with_voxel_size(mut self, voxel_size: f64) -> Result<Self, VolumeError> {
        if !(voxel_size.is_finite() && voxel_size > 0.0) {
            return Err(VolumeError::Invalid(format!(
                "voxel_size must be finite and positive, got {voxel_size}"
            )));
        }
        self.voxel_size = voxel_size;
        Ok(self)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn kind(&self) -> VolumeKind {
        self.kind
    }

    /// Phase count for labeled volumes, `None` for gray volumes.
    pub fn n_phases(&self) -> Option<u16> {
        match self.kind {
            VolumeKind::Phase => Some(self.n_phases),
            VolumeKind::Gray => None,
        }
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn axis_len(&self, axis: Axis) -> usize {
        self.dims[axis.index()]
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> u8 {
        self.data[self.index(x, y, z)]
    }

    pub fn lines(&self, axis: Axis) -> LineLayout {
        let [nx, ny, nz] = self.dims;
        let (len, stride) = match axis {
            Axis::X => (nx, 1),
            Axis::Y => (ny, nx),
            Axis::Z => (nz, nx * ny),
        };
        LineLayout { axis, count: self.len() / len, len, stride, dims: self.dims }
    }

    /// Flat index of the face neighbour of `idx` one step along `axis`.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: Axis, delta: isize, boundary: BoundaryMode) -> Option<usize> {
        let mut c = self.coords(idx);
        let a = axis.index();
        c[a] = boundary.step(c[a], delta, self.dims[a])?;
        Some(self.index(c[0], c[1], c[2]))
    }

    /// Gray rendering of the volume. Phase labels map to
    /// `label * floor(255 / (n_phases - 1))`; gray volumes are returned as is.
    pub fn to_gray(&self) -> VoxelVolume {
        match self.kind {
            VolumeKind::Gray => self.clone(),
            VolumeKind::Phase => {
                let scale = if self.n_phases > 1 { 255 / (self.n_phases - 1) } else { 0 };
                let data = self.data.iter().map(|&v| (u16::from(v) * scale) as u8).collect();
                VoxelVolume {
                    dims: self.dims,
                    data,
                    kind: VolumeKind::Gray,
                    n_phases: 0,
                    voxel_size: self.voxel_size,
                }
            }
        }
    }

    /// Extracts one orthogonal layer. Z slices are `nx` wide and `ny` tall,
    /// Y slices `nx` by `nz`, X slices `ny` by `nz`; rows are stored in order.
    pub fn slice(&self, axis: Axis, index: usize) -> Result<SliceImage, VolumeError> {
        let len = self.axis_len(axis);
        if index >= len {
            return Err(VolumeError::IndexOutOfRange { axis, index, len });
        }
        let [nx, ny, nz] = self.dims;
        let (width, height) = match axis {
            Axis::Z => (nx, ny),
            Axis::Y => (nx, nz),
            Axis::X => (ny, nz),
        };
        let mut data = Vec::with_capacity(width * height);
        match axis {
            Axis::Z => {
                let base = nx * ny * index;
                data.extend_from_slice(&self.data[base..base + nx * ny]);
            }
            Axis::Y => {
                for z in 0..nz {
                    let base = self.index(0, index, z);
                    data.extend_from_slice(&self.data[base..base + nx]);
                }
            }
            Axis::X => {
                for z in 0..nz {
                    for y in 0..ny {
                        data.push(self.get(index, y, z));
                    }
                }
            }
        }
        Ok(SliceImage { width, height, data, axis: Some(axis), index })
    }

    /// All slices along `axis`, in layer order.
    pub fn slices(&self, axis: Axis) -> impl Iterator<Item = SliceImage> + '_ {
        (0..self.axis_len(axis)).map(move |i| self.slice(axis, i).expect("index in range"))
    }

    /// Writes the header line (without magic) used by [`save_volume`].
    fn header_line(&self) -> String {
        let [nx, ny, nz] = self.dims;
        let kind = match self.kind {
            VolumeKind::Phase => "phase",
            VolumeKind::Gray => "gray",
        };
        format!(
            "dims={nx},{ny},{nz} kind={kind} n_phases={} voxel_size={}\n",
            self.n_phases, self.voxel_size
        )
    }

    /// Serializes to the MVX1 byte layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = self.header_line();
        let mut out = Vec::with_capacity(MAGIC.len() + header.len() + self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&self.data);
        out
    }

    /// Parses the MVX1 byte layout.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, VolumeError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(VolumeError::BadMagic);
        }
        let rest = &bytes[MAGIC.len()..];
        let nl = rest
            .iter()
            .take(MAX_HEADER_LEN)
            .position(|&b| b == b'\n')
            .ok_or_else(|| VolumeError::HeaderParse("missing header terminator".into()))?;
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| VolumeError::HeaderParse("header is not valid UTF-8".into()))?;
        let header = Header::parse(line)?;
        let payload = rest[nl + 1..].to_vec();

        let expected = header.dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        let expected = expected.ok_or_else(|| VolumeError::HeaderParse("dims overflow".into()))?;
        if payload.len() != expected {
            return Err(VolumeError::PayloadSizeMismatch { expected, actual: payload.len() });
        }
        let vol = match header.kind {
            VolumeKind::Phase => Self::new_phase(header.dims, payload, header.n_phases)?,
            VolumeKind::Gray => {
                if header.n_phases != 0 {
                    return Err(VolumeError::HeaderParse("gray volumes must declare n_phases=0".into()));
                }
                Self::new_gray(header.dims, payload)?
            }
        };
        vol.with_voxel_size(header.voxel_size)
            .map_err(|e| VolumeError::HeaderParse(e.to_string()))
    }
}

struct Header {
    dims: [usize; 3],
    kind: VolumeKind,
    n_phases: u16,
    voxel_size: f64,
}

impl Header {
    fn parse(line: &str) -> Result<Self, VolumeError> {
        let bad = |msg: String| VolumeError::HeaderParse(msg);
        let (mut dims, mut kind, mut n_phases, mut voxel_size) = (None, None, None, None);
        for token in line.split(' ') {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| bad(format!("token '{token}' is not key=value")))?;
            let dup = |k: &str| bad(format!("duplicate key '{k}'"));
            match key {
                "dims" => {
                    let parts: Vec<usize> = value
                        .split(',')
                        .map(|p| p.parse::<usize>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad(format!("bad dims '{value}'")))?;
                    let d: [usize; 3] = parts
                        .try_into()
                        .map_err(|_| bad(format!("dims needs three values, got '{value}'")))?;
                    if d.contains(&0) {
                        return Err(bad(format!("dims must be positive, got '{value}'")));
                    }
                    if dims.replace(d).is_some() {
                        return Err(dup(key));
                    }
                }
                "kind" => {
                    let k = match value {
                        "phase" => VolumeKind::Phase,
                        "gray" => VolumeKind::Gray,
                        _ => return Err(bad(format!("unknown kind '{value}'"))),
                    };
                    if kind.replace(k).is_some() {
                        return Err(dup(key));
                    }
                }
                "n_phases" => {
                    let n = value
                        .parse::<u16>()
                        .map_err(|_| bad(format!("bad n_phases '{value}'")))?;
                    if n_phases.replace(n).is_some() {
                        return Err(dup(key));
                    }
                }
                "voxel_size" => {
                    let a = value
                        .parse::<f64>()
                        .ok()
                        .filter(|a| a.is_finite() && *a > 0.0)
                        .ok_or_else(|| bad(format!("bad voxel_size '{value}'")))?;
                    if voxel_size.replace(a).is_some() {
                        return Err(dup(key));
                    }
                }
                _ => return Err(bad(format!("unknown header key '{key}'"))),
            }
        }
        let missing = |k: &str| bad(format!("missing header key '{k}'"));
        Ok(Header {
            dims: dims.ok_or_else(|| missing("dims"))?,
            kind: kind.ok_or_else(|| missing("kind"))?,
            n_phases: n_phases.ok_or_else(|| missing("n_phases"))?,
            voxel_size: voxel_size.ok_or_else(|| missing("voxel_size"))?,
        })
    }
}

pub fn load_volume(path: impl AsRef<Path>) -> Result<VoxelVolume, VolumeError> {
    let bytes = fs::read(path)?;
    VoxelVolume::from_bytes(&bytes)
}

pub fn save_volume(vol: &VoxelVolume, path: impl AsRef<Path>) -> Result<(), VolumeError> {
    let mut file = fs::File::create(path)?;
    file.write_all(&vol.to_bytes())?;
    file.flush()?;
    Ok(())
}

/// A 2D layer cut from a volume, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
    /// Axis the slice was cut across, if it came from a volume.
    pub axis: Option<Axis>,
    pub index: usize,
}

impl SliceImage {
    /// Free-standing image not tied to a volume.
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, VolumeError> {
        if data.len() != width * height {
            return Err(VolumeError::PayloadSizeMismatch { expected: width * height, actual: data.len() });
        }
        Ok(Self { width, height, data, axis: None, index: 0 })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self { width, height, data: vec![value; width * height], axis: None, index: 0 }
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.data[row * self.width + col]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(dims: [usize; 3]) -> VoxelVolume {
        let n = dims.iter().product::<usize>();
        VoxelVolume::new_gray(dims, (0..n).map(|i| (i % 251) as u8).collect()).unwrap()
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.mvx");
        let vol = VoxelVolume::new_phase([4, 4, 4], (0..64).map(|i| (i % 2) as u8).collect(), 2).unwrap();
        save_volume(&vol, &path).unwrap();
        let back = load_volume(&path).unwrap();
        assert_eq!(back, vol);
        assert_eq!(back.dims(), [4, 4, 4]);
    }

    #[test]
    fn voxel_size_survives_round_trip() {
        let vol = ramp([3, 2, 2]).with_voxel_size(0.5).unwrap();
        let bytes = vol.to_bytes();
        let header = std::str::from_utf8(&bytes[5..bytes.len() - 12]).unwrap();
        assert!(header.contains("voxel_size=0.5"), "{header}");
        assert_eq!(VoxelVolume::from_bytes(&bytes).unwrap().voxel_size(), 0.5);
        let odd = ramp([2, 2, 2]).with_voxel_size(0.1 + 0.2).unwrap();
        assert_eq!(VoxelVolume::from_bytes(&odd.to_bytes()).unwrap(), odd);
    }

    #[test]
    fn exact_header_layout() {
        let vol = VoxelVolume::new_phase([2, 1, 1], vec![0, 1], 2).unwrap();
        assert_eq!(vol.to_bytes(), b"MVX1\ndims=2,1,1 kind=phase n_phases=2 voxel_size=1\n\x00\x01");
        let g = VoxelVolume::new_gray([1, 1, 1], vec![200]).unwrap();
        assert_eq!(g.to_bytes(), b"MVX1\ndims=1,1,1 kind=gray n_phases=0 voxel_size=1\n\xc8");
    }

    #[test]
    fn short_payload_is_rejected() {
        let mut bytes = b"MVX1\ndims=4,4,4 kind=phase n_phases=2 voxel_size=1\n".to_vec();
        bytes.extend(std::iter::repeat_n(0u8, 60));
        match VoxelVolume::from_bytes(&bytes) {
            Err(VolumeError::PayloadSizeMismatch { expected: 64, actual: 60 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn label_out_of_range() {
        let mut bytes = b"MVX1\ndims=4,4,4 kind=phase n_phases=2 voxel_size=1\n".to_vec();
        let mut payload = vec![0u8; 64];
        payload[17] = 3;
        bytes.extend(payload);
        assert!(matches!(
            VoxelVolume::from_bytes(&bytes),
            Err(VolumeError::LabelOutOfRange { value: 3, n_phases: 2 })
        ));
    }

    #[test]
    fn header_errors() {
        assert!(matches!(VoxelVolume::from_bytes(b"MVX2\n"), Err(VolumeError::BadMagic)));
        assert!(matches!(VoxelVolume::from_bytes(b"MV"), Err(VolumeError::BadMagic)));
        for bad in [
            "dims=4,4 kind=phase n_phases=2 voxel_size=1",
            "dims=4,4,4 kind=phase n_phases=2",
            "dims=4,4,4 kind=solid n_phases=2 voxel_size=1",
            "dims=4,4,4 kind=phase n_phases=2 voxel_size=-1",
            "dims=4,4,4 kind=phase n_phases=2 voxel_size=1 extra=3",
            "dims=4,4,4 kind=phase kind=phase n_phases=2 voxel_size=1",
            "dims=0,4,4 kind=phase n_phases=2 voxel_size=1",
            "dims=4,4,4  kind=phase n_phases=2 voxel_size=1",
        ] {
            let mut bytes = MAGIC.to_vec();
            bytes.extend_from_slice(bad.as_bytes());
            bytes.push(b'\n');
            assert!(
                matches!(VoxelVolume::from_bytes(&bytes), Err(VolumeError::HeaderParse(_))),
                "accepted '{bad}'"
            );
        }
        assert!(matches!(
            VoxelVolume::from_bytes(b"MVX1\ndims=1,1,1 kind=gray"),
            Err(VolumeError::HeaderParse(_))
        ));
    }

    #[test]
    fn unwritable_path_is_io_failure() {
        let vol = ramp([2, 2, 2]);
        let err = save_volume(&vol, "/nonexistent-dir/for/sure/v.mvx").unwrap_err();
        assert!(matches!(err, VolumeError::Io(_)));
    }

    #[test]
    fn slice_orientation() {
        let vol = ramp([4, 3, 2]);
        let z = vol.slice(Axis::Z, 1).unwrap();
        assert_eq!((z.width, z.height), (4, 3));
        assert_eq!(z.get(2, 1), vol.get(2, 1, 1));
        let y = vol.slice(Axis::Y, 2).unwrap();
        assert_eq!((y.width, y.height), (4, 2));
        assert_eq!(y.get(3, 1), vol.get(3, 2, 1));
        let x = vol.slice(Axis::X, 3).unwrap();
        assert_eq!((x.width, x.height), (3, 2));
        assert_eq!(x.get(1, 1), vol.get(3, 1, 1));
        assert!(matches!(
            vol.slice(Axis::Z, 2),
            Err(VolumeError::IndexOutOfRange { index: 2, len: 2, .. })
        ));
    }

    #[test]
    fn line_layout_visits_every_voxel_once() {
        let vol = ramp([3, 4, 5]);
        for axis in Axis::ALL {
            let layout = vol.lines(axis);
            let mut seen = vec![0u8; vol.len()];
            for k in 0..layout.count {
                for t in 0..layout.len {
                    let idx = layout.at(k, t);
                    seen[idx] += 1;
                    let c = vol.coords(idx);
                    assert_eq!(c[axis.index()], t);
                }
            }
            assert!(seen.iter().all(|&s| s == 1), "{axis}");
        }
    }

    #[test]
    fn gray_mapping_spreads_labels() {
        let v = VoxelVolume::new_phase([3, 1, 1], vec![0, 1, 2], 3).unwrap();
        assert_eq!(v.to_gray().data(), &[0, 127, 254]);
        let b = VoxelVolume::new_phase([2, 1, 1], vec![0, 1], 2).unwrap();
        assert_eq!(b.to_gray().data(), &[0, 255]);
    }

    #[test]
    fn boundary_steps() {
        assert_eq!(BoundaryMode::Periodic.step(0, -1, 4), Some(3));
        assert_eq!(BoundaryMode::Periodic.step(3, 5, 4), Some(0));
        assert_eq!(BoundaryMode::Truncated.step(0, -1, 4), None);
        assert_eq!(BoundaryMode::Truncated.step(2, 1, 4), Some(3));
        assert_eq!(BoundaryMode::Truncated.step(3, 1, 4), None);
    }
}
