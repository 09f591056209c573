//! Quantitative characterization of 3D material microstructures.
//!
//! The crate reads labeled or gray voxel volumes ([`volume`]) and computes
//! statistical descriptors ([`descriptors`]), GLCM texture anisotropy
//! ([`texture`]), slice-wise image similarity ([`quality`]), transport and
//! interface metrics ([`physics`]), and standalone loss formulas
//! ([`losses`]). [`synth`] builds deterministic fixtures for testing.
//!
//! Inner loops run on rayon when the default `parallel` feature is enabled.
//! All reductions merge in a fixed order, so results are identical with or
//! without the feature and for any thread count.

// `!(x > 0.0)` is the NaN-rejecting form on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod descriptors;
pub mod losses;
pub mod par;
pub mod physics;
pub mod quality;
pub mod serde_inf;
pub mod synth;
pub mod texture;
pub mod volume;

pub use volume::{load_volume, save_volume, Axis, BoundaryMode, SliceImage, VolumeError, VolumeKind, VoxelVolume};
