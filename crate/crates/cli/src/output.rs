//! CSV tables. Every file has a header row; numbers use the shortest text
//! that parses back to the same `f64`, and infinities are written as `inf`.

use std::path::{Path, PathBuf};

use mstruct::descriptors::{PorosityCdf, RadialProfile};
use mstruct::quality::QualityReport;
use mstruct::serde_inf::format_f64;
use mstruct::texture::{AnisotropyReport, Verdict};

use crate::config::DescriptorKind;
use crate::error::CliError;
use crate::report::PhysicsResults;

fn num(v: f64) -> String {
    format_f64(v)
}

fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf, CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

pub fn profile_file_name(kind: DescriptorKind, profile: &RadialProfile) -> String {
    format!("{}_phase{}_{}.csv", kind.name(), profile.phase, profile.direction.name())
}

/// Columns `r,value,n_samples`.
pub fn write_profile(dir: &Path, kind: DescriptorKind, profile: &RadialProfile) -> Result<PathBuf, CliError> {
    let rows = profile
        .values
        .iter()
        .zip(&profile.n_samples)
        .enumerate()
        .map(|(r, (&v, &n))| vec![r.to_string(), num(v), n.to_string()]);
    write_table(&dir.join(profile_file_name(kind, profile)), &["r", "value", "n_samples"], rows)
}

/// Columns `porosity,cumulative`.
pub fn write_porosity(dir: &Path, cdf: &PorosityCdf) -> Result<PathBuf, CliError> {
    let rows = cdf.points.iter().map(|p| vec![num(p.porosity), num(p.cumulative)]);
    write_table(&dir.join(format!("porosity_cdf_phase{}.csv", cdf.phase)), &["porosity", "cumulative"], rows)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Isotropy => "Isotropy",
        Verdict::Anisotropy => "Anisotropy",
    }
}

/// `texture.csv` with one row per slicing direction, and `anisotropy.csv`
/// with the per-feature spreads, the index and the verdict.
pub fn write_texture(dir: &Path, report: &AnisotropyReport) -> Result<Vec<PathBuf>, CliError> {
    let rows = report.per_axis().map(|(axis, f)| {
        let mut row = vec![axis.name().to_ascii_uppercase()];
        row.extend(f.as_array().map(num));
        row
    });
    let texture = write_table(
        &dir.join("texture.csv"),
        &["Direction", "Contrast", "Homogeneity", "Energy", "Entropy"],
        rows,
    )?;
    let s = &report.sigmas;
    let summary = vec![
        num(s.contrast),
        num(s.homogeneity),
        num(s.energy),
        num(s.entropy),
        num(report.ai),
        num(report.log10_ai),
        verdict_name(report.verdict).to_string(),
    ];
    let anisotropy = write_table(
        &dir.join("anisotropy.csv"),
        &["sigma_contrast", "sigma_homogeneity", "sigma_energy", "sigma_entropy", "ai", "log10_ai", "verdict"],
        [summary],
    )?;
    Ok(vec![texture, anisotropy])
}

/// Per-axis rows then an `overall` row.
pub fn write_quality(dir: &Path, q: &QualityReport) -> Result<PathBuf, CliError> {
    let mut rows: Vec<Vec<String>> = q
        .per_axis
        .iter()
        .map(|a| vec![a.axis.name().to_string(), a.n_slices.to_string(), num(a.mean_ssim), num(a.mean_psnr)])
        .collect();
    rows.push(vec!["overall".into(), q.n_slices.to_string(), num(q.mean_ssim), num(q.mean_psnr)]);
    write_table(&dir.join("quality.csv"), &["axis", "n_slices", "mean_ssim", "mean_psnr"], rows)
}

/// `physics.csv` (per phase), `tpb.csv` (one row) and, when diffusion ran,
/// `diffusion.csv` (per phase and axis; empty tortuosity = no spanning path).
pub fn write_physics(dir: &Path, p: &PhysicsResults) -> Result<Vec<PathBuf>, CliError> {
    let r = &p.report;
    let rows = r
        .phase_fractions
        .iter()
        .zip(&r.ssa)
        .enumerate()
        .map(|(i, (&f, &s))| vec![i.to_string(), num(f), num(s)]);
    let mut out = vec![write_table(&dir.join("physics.csv"), &["phase", "volume_fraction", "ssa"], rows)?];
    out.push(write_table(
        &dir.join("tpb.csv"),
        &["boundary", "tpb_density"],
        [vec![r.boundary.to_string(), num(r.tpb_density)]],
    )?);
    if !p.diffusion.is_empty() {
        let rows = p.diffusion.iter().map(|d| {
            vec![
                d.phase.to_string(),
                d.axis.name().to_string(),
                d.percolates.to_string(),
                num(d.phase_fraction),
                num(d.d_eff_ratio),
                d.tortuosity.map(num).unwrap_or_default(),
                d.iterations.to_string(),
                num(d.residual),
            ]
        });
        out.push(write_table(
            &dir.join("diffusion.csv"),
            &["phase", "axis", "percolates", "phase_fraction", "d_eff_ratio", "tortuosity", "iterations", "residual"],
            rows,
        )?);
    }
    Ok(out)
}
