//! Report configuration: a TOML file plus command-line overrides.
//!
//! ```toml
//! reference = "real.mvx"
//! generated = "fake.mvx"
//! output_dir = "out"
//!
//! [descriptors]
//! kinds = ["s2", "c2", "l", "porosity"]
//! phases = [1]
//! boundary = "periodic"
//!
//! [physics]
//! diffusion_axes = ["z"]
//! ```

use std::path::{Path, PathBuf};

use mstruct::descriptors::{ClusterVariant, Connectivity, Direction, PorosityParams};
use mstruct::physics::{Preconditioner, SolverParams};
use mstruct::quality::SsimParams;
use mstruct::texture::{GlcmAngle, GlcmParams};
use mstruct::{Axis, BoundaryMode, VolumeKind, VoxelVolume};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorKind {
    S2,
    C2,
    L,
    Porosity,
}

impl DescriptorKind {
    pub const ALL: [DescriptorKind; 4] = [DescriptorKind::S2, DescriptorKind::C2, DescriptorKind::L, DescriptorKind::Porosity];

    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::S2 => "s2",
            DescriptorKind::C2 => "c2",
            DescriptorKind::L => "l",
            DescriptorKind::Porosity => "porosity",
        }
    }
}

impl std::str::FromStr for DescriptorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DescriptorKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown descriptor '{s}' (expected s2, c2, l or porosity)"))
    }
}

/// `enabled = None` means "on for labeled volumes, off for gray ones".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescriptorConfig {
    pub enabled: Option<bool>,
    pub kinds: Vec<DescriptorKind>,
    /// `None` = every phase label.
    pub phases: Option<Vec<u8>>,
    pub directions: Vec<Direction>,
    /// `None` = half the shortest axis sampled by each direction.
    pub r_max: Option<usize>,
    pub boundary: BoundaryMode,
    pub cluster_variant: ClusterVariant,
    pub connectivity: Connectivity,
    /// `None` = a quarter of the shortest dimension, non-overlapping.
    pub porosity_window: Option<usize>,
    pub porosity_stride: Option<usize>,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        DescriptorConfig {
            enabled: None,
            kinds: DescriptorKind::ALL.to_vec(),
            phases: None,
            directions: Direction::ALL.to_vec(),
            r_max: None,
            boundary: BoundaryMode::Truncated,
            cluster_variant: ClusterVariant::SameCluster,
            connectivity: Connectivity::Face6,
            porosity_window: None,
            porosity_stride: None,
        }
    }
}

impl DescriptorConfig {
    pub fn r_max_for(&self, vol: &VoxelVolume, direction: Direction) -> usize {
        self.r_max.unwrap_or_else(|| {
            let shortest = direction.axes().into_iter().map(|a| vol.axis_len(a)).min().unwrap_or(1);
            shortest / 2
        })
    }

    pub fn porosity_params(&self, dims: [usize; 3]) -> PorosityParams {
        let base = PorosityParams::default_for(dims);
        let window = self.porosity_window.unwrap_or(base.window);
        PorosityParams { window, stride: self.porosity_stride.unwrap_or(window) }
    }
}

/// GLCM settings; unset fields fall back to the defaults for the volume kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextureConfig {
    pub enabled: bool,
    pub levels: Option<u16>,
    pub distance: Option<usize>,
    pub angles: Option<Vec<GlcmAngle>>,
    pub symmetric: Option<bool>,
}

impl Default for TextureConfig {
    fn default() -> Self {
        TextureConfig { enabled: true, levels: None, distance: None, angles: None, symmetric: None }
    }
}

impl TextureConfig {
    pub fn params(&self, kind: VolumeKind) -> GlcmParams {
        let base = GlcmParams::default_for(kind);
        GlcmParams {
            levels: self.levels.unwrap_or(base.levels),
            distance: self.distance.unwrap_or(base.distance),
            angles: self.angles.clone().unwrap_or(base.angles),
            symmetric: self.symmetric.unwrap_or(base.symmetric),
            normalized: true,
        }
    }
}

/// Slice comparison; only runs when a generated volume is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsimConfig {
    pub enabled: bool,
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        let p = SsimParams::default();
        SsimConfig { enabled: true, window: p.window, k1: p.k1, k2: p.k2, dynamic_range: p.dynamic_range }
    }
}

impl SsimConfig {
    pub fn params(&self) -> SsimParams {
        SsimParams { window: self.window, k1: self.k1, k2: self.k2, dynamic_range: self.dynamic_range }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub enabled: Option<bool>,
    pub boundary: BoundaryMode,
    pub diffusion: bool,
    /// `None` = every phase label.
    pub diffusion_phases: Option<Vec<u8>>,
    pub diffusion_axes: Vec<Axis>,
    pub tolerance: f64,
    pub max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        let s = SolverParams::default();
        PhysicsConfig {
            enabled: None,
            boundary: BoundaryMode::Truncated,
            diffusion: true,
            diffusion_phases: None,
            diffusion_axes: Axis::ALL.to_vec(),
            tolerance: s.tolerance,
            max_iterations: s.max_iterations,
            preconditioner: s.preconditioner,
        }
    }
}

impl PhysicsConfig {
    pub fn solver(&self) -> SolverParams {
        SolverParams { tolerance: self.tolerance, max_iterations: self.max_iterations, preconditioner: self.preconditioner }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub reference: PathBuf,
    #[serde(default)]
    pub generated: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub descriptors: DescriptorConfig,
    #[serde(default)]
    pub texture: TextureConfig,
    #[serde(default)]
    pub ssim: SsimConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("report")
}

impl ReportConfig {
    pub fn new(reference: impl Into<PathBuf>) -> Self {
        ReportConfig {
            reference: reference.into(),
            generated: None,
            output_dir: default_output_dir(),
            descriptors: DescriptorConfig::default(),
            texture: TextureConfig::default(),
            ssim: SsimConfig::default(),
            physics: PhysicsConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("ConfigParse: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("ConfigParse: cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks that do not need the volumes.
    pub fn validate(&self) -> Result<(), CliError> {
        let comparing = self.generated.is_some() && self.ssim.enabled;
        let any = self.descriptors.enabled != Some(false)
            || self.texture.enabled
            || comparing
            || self.physics.enabled != Some(false);
        if !any {
            return Err(CliError::config("ConfigInvalid: every analysis is disabled"));
        }
        if self.generated.as_deref() == Some(self.reference.as_path()) {
            return Err(CliError::config("ConfigInvalid: reference and generated paths are the same file"));
        }
        if self.descriptors.enabled != Some(false) {
            if self.descriptors.kinds.is_empty() {
                return Err(CliError::config("ConfigInvalid: descriptors.kinds is empty"));
            }
            if self.descriptors.directions.is_empty() {
                return Err(CliError::config("ConfigInvalid: descriptors.directions is empty"));
            }
        }
        if self.texture.enabled {
            self.texture.params(VolumeKind::Phase).validate()?;
        }
        if comparing {
            self.ssim.params().validate()?;
        }
        if !(self.physics.tolerance > 0.0) {
            return Err(CliError::config(format!("ConfigInvalid: physics.tolerance must be positive, got {}", self.physics.tolerance)));
        }
        Ok(())
    }
}
