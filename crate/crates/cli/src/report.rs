use std::path::{Path, PathBuf};

use mstruct::descriptors::{
    average_profiles, lineal_path, local_porosity_cdf, two_point_cluster, two_point_correlation, ClusterVariant, Direction,
    PorosityCdf, RadialProfile,
};
use mstruct::physics::{effective_diffusion, physics_report, phase_volume_fractions, DiffusionResult, PhysicsReport};
use mstruct::quality::{volume_quality, QualityReport};
use mstruct::texture::{classify_volume, AnisotropyReport, GlcmParams};
use mstruct::{load_volume, VolumeKind, VoxelVolume};
use serde::{Deserialize, Serialize};

use crate::config::{DescriptorConfig, DescriptorKind, PhysicsConfig, ReportConfig, TextureConfig};
use crate::error::CliError;
use crate::output;

/// Bumped whenever the layout of `report.json` changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeInfo {
    pub path: PathBuf,
    pub dims: [usize; 3],
    pub kind: VolumeKind,
    pub n_phases: Option<u16>,
    pub voxel_size: f64,
    /// Labeled volumes only.
    pub phase_fractions: Option<Vec<f64>>,
}

impl VolumeInfo {
    pub fn of(path: &Path, vol: &VoxelVolume) -> Self {
        VolumeInfo {
            path: path.to_path_buf(),
            dims: vol.dims(),
            kind: vol.kind(),
            n_phases: vol.n_phases(),
            voxel_size: vol.voxel_size(),
            phase_fractions: phase_volume_fractions(vol).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub descriptor: DescriptorKind,
    pub profile: RadialProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorResults {
    pub profiles: Vec<ProfileEntry>,
    pub porosity: Vec<PorosityCdf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextureResults {
    pub params: GlcmParams,
    pub anisotropy: AnisotropyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsResults {
    pub report: PhysicsReport,
    pub diffusion: Vec<DiffusionResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeAnalysis {
    pub volume: VolumeInfo,
    pub descriptors: Option<DescriptorResults>,
    pub texture: Option<TextureResults>,
    pub physics: Option<PhysicsResults>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub config: ReportConfig,
    pub reference: VolumeAnalysis,
    pub generated: Option<VolumeAnalysis>,
    /// Slice-wise comparison of generated against reference.
    pub quality: Option<QualityReport>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn phases_of(vol: &VoxelVolume, chosen: &Option<Vec<u8>>) -> Vec<u8> {
    match chosen {
        Some(p) => p.clone(),
        None => (0..vol.n_phases().unwrap_or(0)).map(|p| p as u8).collect(),
    }
}

fn auto_enabled(flag: Option<bool>, vol: &VoxelVolume) -> bool {
    flag.unwrap_or(vol.kind() == VolumeKind::Phase)
}

pub fn run_descriptors(vol: &VoxelVolume, cfg: &DescriptorConfig) -> Result<DescriptorResults, CliError> {
    let mut profiles = Vec::new();
    let mut porosity = Vec::new();
    for phase in phases_of(vol, &cfg.phases) {
        for &kind in &cfg.kinds {
            if kind == DescriptorKind::Porosity {
                porosity.push(local_porosity_cdf(vol, phase, cfg.porosity_params(vol.dims()))?);
                continue;
            }
            let start = profiles.len();
            for &d in &cfg.directions {
                let r_max = cfg.r_max_for(vol, d);
                let reusable = kind != DescriptorKind::C2 || cfg.cluster_variant == ClusterVariant::SameCluster;
                if d == Direction::AxisAverage && reusable {
                    // Same counts as a direct run, so reuse the axis profiles.
                    let axes: Vec<RadialProfile> = [Direction::X, Direction::Y, Direction::Z]
                        .iter()
                        .filter_map(|&a| {
                            profiles[start..]
                                .iter()
                                .map(|e: &ProfileEntry| &e.profile)
                                .find(|p| p.direction == a && p.r_max == r_max)
                                .cloned()
                        })
                        .collect();
                    if axes.len() == 3 {
                        profiles.push(ProfileEntry { descriptor: kind, profile: average_profiles(&axes)? });
                        continue;
                    }
                }
                let profile = match kind {
                    DescriptorKind::S2 => two_point_correlation(vol, phase, d, r_max, cfg.boundary)?,
                    DescriptorKind::L => lineal_path(vol, phase, d, r_max, cfg.boundary)?,
                    DescriptorKind::C2 => {
                        two_point_cluster(vol, phase, d, r_max, cfg.boundary, cfg.cluster_variant, cfg.connectivity)?
                    }
                    DescriptorKind::Porosity => unreachable!(),
                };
                profiles.push(ProfileEntry { descriptor: kind, profile });
            }
        }
    }
    Ok(DescriptorResults { profiles, porosity })
}

pub fn run_texture(vol: &VoxelVolume, cfg: &TextureConfig) -> Result<TextureResults, CliError> {
    let params = cfg.params(vol.kind());
    let anisotropy = classify_volume(vol, &params)?;
    Ok(TextureResults { params, anisotropy })
}

pub fn run_physics(vol: &VoxelVolume, cfg: &PhysicsConfig) -> Result<PhysicsResults, CliError> {
    let report = physics_report(vol, cfg.boundary)?;
    let mut diffusion = Vec::new();
    if cfg.diffusion {
        let solver = cfg.solver();
        for phase in phases_of(vol, &cfg.diffusion_phases) {
            for &axis in &cfg.diffusion_axes {
                diffusion.push(effective_diffusion(vol, phase, axis, &solver)?);
            }
        }
    }
    Ok(PhysicsResults { report, diffusion })
}

fn analyze(path: &Path, vol: &VoxelVolume, cfg: &ReportConfig) -> Result<VolumeAnalysis, CliError> {
    let descriptors = if auto_enabled(cfg.descriptors.enabled, vol) {
        Some(run_descriptors(vol, &cfg.descriptors)?)
    } else {
        None
    };
    let texture = if cfg.texture.enabled { Some(run_texture(vol, &cfg.texture)?) } else { None };
    let physics = if auto_enabled(cfg.physics.enabled, vol) { Some(run_physics(vol, &cfg.physics)?) } else { None };
    Ok(VolumeAnalysis { volume: VolumeInfo::of(path, vol), descriptors, texture, physics })
}

/// Writes the CSV tables of one volume into `dir`.
pub fn write_analysis(dir: &Path, a: &VolumeAnalysis) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    if let Some(d) = &a.descriptors {
        for e in &d.profiles {
            files.push(output::write_profile(dir, e.descriptor, &e.profile)?);
        }
        for c in &d.porosity {
            files.push(output::write_porosity(dir, c)?);
        }
    }
    if let Some(t) = &a.texture {
        files.extend(output::write_texture(dir, &t.anisotropy)?);
    }
    if let Some(p) = &a.physics {
        files.extend(output::write_physics(dir, p)?);
    }
    Ok(files)
}

/// Loads the volumes, runs every enabled analysis and writes `report.json`
/// plus CSV tables into `output_dir` (tables of the generated volume go to
/// `output_dir/generated`).
pub fn run_report(config: &ReportConfig) -> Result<EvaluationReport, CliError> {
    config.validate()?;
    let reference = load_volume(&config.reference)?;
    let generated = match &config.generated {
        Some(p) => Some((p.as_path(), load_volume(p)?)),
        None => None,
    };

    let quality = match &generated {
        Some((_, g)) if config.ssim.enabled => Some(volume_quality(&reference, g, &config.ssim.params())?),
        _ => None,
    };
    let ref_analysis = analyze(&config.reference, &reference, config)?;
    let gen_analysis = generated.as_ref().map(|(p, g)| analyze(p, g, config)).transpose()?;

    let report = EvaluationReport {
        schema_version: SCHEMA_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        reference: ref_analysis,
        generated: gen_analysis,
        quality,
    };

    let out = &config.output_dir;
    write_analysis(out, &report.reference)?;
    if let Some(g) = &report.generated {
        write_analysis(&out.join("generated"), g)?;
    }
    if let Some(q) = &report.quality {
        output::write_quality(out, q)?;
    }
    std::fs::write(out.join("report.json"), report.to_json())?;
    Ok(report)
}
