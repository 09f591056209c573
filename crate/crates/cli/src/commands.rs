use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mstruct::descriptors::{ClusterVariant, Connectivity, Direction};
use mstruct::losses::{
    gan_objective, js_divergence, kl_divergence, l1_loss, l2_loss, total_loss, wgan_objective, DiscreteDistribution,
    LossWeights, ScoreBatch, WganConvention,
};
use mstruct::physics::Preconditioner;
use mstruct::quality::volume_quality;
use mstruct::serde_inf::format_f64;
use mstruct::synth::{generate, FixtureSpec, FixtureVariant};
use mstruct::texture::GlcmAngle;
use mstruct::{load_volume, save_volume, Axis, BoundaryMode};
use serde_json::{json, Value};

use crate::config::{DescriptorConfig, DescriptorKind, PhysicsConfig, ReportConfig, SsimConfig, TextureConfig};
use crate::error::CliError;
use crate::output;
use crate::report::{run_descriptors, run_physics, run_report, run_texture, VolumeInfo};

#[derive(Debug, Parser)]
#[command(name = "mstruct", version, about = "Microstructure descriptors, texture anisotropy, image quality and transport metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print dimensions, kind, phase count and phase fractions of a volume.
    Info { volume: PathBuf },
    /// Write a deterministic fixture volume.
    Synth(SynthArgs),
    /// Radial profiles (S2, C2, L) and the local porosity CDF as CSV files.
    Descriptors(DescriptorArgs),
    /// Per-axis GLCM features and the anisotropy verdict.
    Texture(TextureArgs),
    /// Slice-wise SSIM and PSNR of a generated volume against a reference.
    Compare(CompareArgs),
    /// Phase fractions, surface areas, TPB density and effective diffusivity.
    Physics(PhysicsArgs),
    /// Evaluate loss and divergence formulas on score files.
    Losses {
        #[command(subcommand)]
        command: LossCommand,
    },
    /// Run a configured set of analyses and write report.json plus CSV tables.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantName {
    Bernoulli,
    Laminate,
    Channels,
    Sphere,
    HalfSplit,
}

fn parse_triple<T: std::str::FromStr>(s: &str) -> Result<[T; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got '{s}'"));
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| format!("cannot parse '{p}'"))?);
    }
    out.try_into().map_err(|_| unreachable!())
}

fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    parse_triple(s)
}

fn parse_center(s: &str) -> Result<[f64; 3], String> {
    parse_triple(s)
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub variant: VariantName,
    /// nx,ny,nz
    #[arg(long, value_parser = parse_dims)]
    pub dims: [usize; 3],
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Phase-1 probability (bernoulli).
    #[arg(long)]
    pub p: Option<f64>,
    /// Layering, channel or split axis.
    #[arg(long, default_value = "z")]
    pub axis: Axis,
    #[arg(long)]
    pub slab_thickness: Option<usize>,
    /// Channel area fraction (channels).
    #[arg(long)]
    pub fraction: Option<f64>,
    /// cx,cy,cz in voxel coordinates (sphere; default: volume center).
    #[arg(long, value_parser = parse_center)]
    pub center: Option<[f64; 3]>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub voxel_size: f64,
    #[arg(short, long, default_value = "fixture.mvx")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DescriptorArgs {
    pub volume: PathBuf,
    #[arg(short, long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Any of s2, c2, l, porosity (default: all).
    #[arg(long, value_delimiter = ',')]
    pub kind: Vec<DescriptorKind>,
    /// Phase labels (default: all).
    #[arg(long, value_delimiter = ',')]
    pub phase: Vec<u8>,
    /// Any of x, y, z, avg (default: all).
    #[arg(long, value_delimiter = ',')]
    pub direction: Vec<Direction>,
    #[arg(long)]
    pub r_max: Option<usize>,
    #[arg(long, default_value = "truncated")]
    pub boundary: BoundaryMode,
    #[arg(long, default_value = "same_cluster")]
    pub cluster_variant: ClusterVariant,
    #[arg(long, default_value = "face6")]
    pub connectivity: Connectivity,
    /// Porosity window edge.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GlcmArgs {
    /// Gray levels after quantization (default: 256 labeled, 32 gray).
    #[arg(long)]
    pub levels: Option<u16>,
    #[arg(long)]
    pub distance: Option<usize>,
    /// Any of 0, 45, 90, 135 (default: all).
    #[arg(long, value_delimiter = ',')]
    pub angles: Vec<GlcmAngle>,
    /// Count each pixel pair in one order only.
    #[arg(long)]
    pub asymmetric: bool,
}

impl GlcmArgs {
    fn config(&self) -> TextureConfig {
        TextureConfig {
            enabled: true,
            levels: self.levels,
            distance: self.distance,
            angles: (!self.angles.is_empty()).then(|| self.angles.clone()),
            symmetric: self.asymmetric.then_some(false),
        }
    }
}

#[derive(Debug, Args)]
pub struct TextureArgs {
    pub volume: PathBuf,
    #[command(flatten)]
    pub glcm: GlcmArgs,
    /// Also write texture.csv and anisotropy.csv here.
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SsimArgs {
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub k2: Option<f64>,
    #[arg(long)]
    pub dynamic_range: Option<f64>,
}

impl SsimArgs {
    fn apply(&self, mut c: SsimConfig) -> SsimConfig {
        c.window = self.window.unwrap_or(c.window);
        c.k1 = self.k1.unwrap_or(c.k1);
        c.k2 = self.k2.unwrap_or(c.k2);
        c.dynamic_range = self.dynamic_range.unwrap_or(c.dynamic_range);
        c
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub reference: PathBuf,
    pub generated: PathBuf,
    #[command(flatten)]
    pub ssim: SsimArgs,
    /// Also write quality.csv here.
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// none, diagonal or multigrid (default).
    #[arg(long)]
    pub preconditioner: Option<Preconditioner>,
}

#[derive(Debug, Args)]
pub struct PhysicsArgs {
    pub volume: PathBuf,
    #[arg(long, default_value = "truncated")]
    pub boundary: BoundaryMode,
    /// Phases to run diffusion for (default: all).
    #[arg(long, value_delimiter = ',')]
    pub phase: Vec<u8>,
    /// Transport axes (default: all).
    #[arg(long, value_delimiter = ',')]
    pub axis: Vec<Axis>,
    #[arg(long)]
    pub no_diffusion: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also write physics.csv, tpb.csv and diffusion.csv here.
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LossCommand {
    /// Print the requested losses as JSON. Every input file holds one number per line.
    Eval(LossArgs),
}

#[derive(Debug, Args)]
pub struct LossArgs {
    /// Critic scores on real samples.
    #[arg(long, requires = "fake")]
    pub real: Option<PathBuf>,
    /// Critic scores on generated samples.
    #[arg(long, requires = "real")]
    pub fake: Option<PathBuf>,
    #[arg(long, default_value = "standard")]
    pub convention: WganConvention,
    /// Also evaluate the original GAN objective (scores must be probabilities).
    #[arg(long, requires = "real")]
    pub gan: bool,
    /// Distribution P for KL and JS.
    #[arg(long, requires = "q")]
    pub p: Option<PathBuf>,
    #[arg(long, requires = "p")]
    pub q: Option<PathBuf>,
    /// Reference values for L1 and L2.
    #[arg(long, requires = "g")]
    pub y: Option<PathBuf>,
    /// Generated values for L1 and L2.
    #[arg(long, requires = "y")]
    pub g: Option<PathBuf>,
    /// Weight of the Wasserstein term in the total loss.
    #[arg(long, requires_all = ["lambda_r", "real", "y"])]
    pub lambda_w: Option<f64>,
    /// Weight of the L1 term in the total loss.
    #[arg(long, requires = "lambda_w")]
    pub lambda_r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// TOML configuration file.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub generated: Option<PathBuf>,
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
    /// Boundary mode for descriptors and surface metrics.
    #[arg(long)]
    pub boundary: Option<BoundaryMode>,
    #[arg(long)]
    pub r_max: Option<usize>,
    #[arg(long)]
    pub no_descriptors: bool,
    #[arg(long)]
    pub no_texture: bool,
    #[arg(long)]
    pub no_ssim: bool,
    #[arg(long)]
    pub no_physics: bool,
    #[arg(long)]
    pub no_diffusion: bool,
}

impl ReportArgs {
    /// Config file (if any) with flag overrides applied.
    pub fn resolve(&self) -> Result<ReportConfig, CliError> {
        let mut c = match (&self.config, &self.reference) {
            (Some(path), _) => ReportConfig::load(path)?,
            (None, Some(r)) => ReportConfig::new(r),
            (None, None) => return Err(CliError::config("ConfigInvalid: report needs --config or --reference")),
        };
        if let Some(r) = &self.reference {
            c.reference = r.clone();
        }
        if let Some(g) = &self.generated {
            c.generated = Some(g.clone());
        }
        if let Some(o) = &self.output_dir {
            c.output_dir = o.clone();
        }
        if let Some(b) = self.boundary {
            c.descriptors.boundary = b;
            c.physics.boundary = b;
        }
        if self.r_max.is_some() {
            c.descriptors.r_max = self.r_max;
        }
        if self.no_descriptors {
            c.descriptors.enabled = Some(false);
        }
        if self.no_texture {
            c.texture.enabled = false;
        }
        if self.no_ssim {
            c.ssim.enabled = false;
        }
        if self.no_physics {
            c.physics.enabled = Some(false);
        }
        if self.no_diffusion {
            c.physics.diffusion = false;
        }
        Ok(c)
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Input(format!("IoFailure: {e}"))
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Info { volume } => info(&volume, out),
        Command::Synth(a) => synth(&a, out),
        Command::Descriptors(a) => descriptors(&a, out),
        Command::Texture(a) => texture(&a, out),
        Command::Compare(a) => compare(&a, out),
        Command::Physics(a) => physics(&a, out),
        Command::Losses { command: LossCommand::Eval(a) } => losses(&a, out),
        Command::Report(a) => {
            let config = a.resolve()?;
            run_report(&config)?;
            writeln!(out, "{}", config.output_dir.join("report.json").display()).map_err(io_err)
        }
    }
}

fn info(path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let vol = load_volume(path)?;
    let i = VolumeInfo::of(path, &vol);
    let [nx, ny, nz] = i.dims;
    let mut text = format!("dims: {nx} {ny} {nz}\nkind: {:?}\n", i.kind).to_lowercase();
    if let Some(n) = i.n_phases {
        text += &format!("n_phases: {n}\n");
    }
    text += &format!("voxel_size: {}\n", i.voxel_size);
    for (p, f) in i.phase_fractions.iter().flatten().enumerate() {
        text += &format!("phase {p}: {f}\n");
    }
    out.write_all(text.as_bytes()).map_err(io_err)
}

fn synth(a: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Config(format!("{:?} needs --{flag}", a.variant)));
    let variant = match a.variant {
        VariantName::Bernoulli => FixtureVariant::Bernoulli { p: need(a.p, "p")? },
        VariantName::Laminate => FixtureVariant::Laminate {
            axis: a.axis,
            slab_thickness: a.slab_thickness.ok_or_else(|| CliError::config("Laminate needs --slab-thickness"))?,
        },
        VariantName::Channels => FixtureVariant::Channels { axis: a.axis, fraction: need(a.fraction, "fraction")? },
        VariantName::Sphere => FixtureVariant::Sphere {
            center: a.center.unwrap_or(a.dims.map(|n| (n as f64 - 1.0) / 2.0)),
            radius: need(a.radius, "radius")?,
        },
        VariantName::HalfSplit => FixtureVariant::HalfSplit { axis: a.axis },
    };
    let vol = generate(&FixtureSpec::new(variant, a.dims), a.seed)?
        .with_voxel_size(a.voxel_size)
        .map_err(CliError::config)?;
    save_volume(&vol, &a.output)?;
    writeln!(out, "{}", a.output.display()).map_err(io_err)
}

fn descriptors(a: &DescriptorArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let defaults = DescriptorConfig::default();
    let cfg = DescriptorConfig {
        enabled: Some(true),
        kinds: if a.kind.is_empty() { defaults.kinds } else { a.kind.clone() },
        phases: (!a.phase.is_empty()).then(|| a.phase.clone()),
        directions: if a.direction.is_empty() { defaults.directions } else { a.direction.clone() },
        r_max: a.r_max,
        boundary: a.boundary,
        cluster_variant: a.cluster_variant,
        connectivity: a.connectivity,
        porosity_window: a.window,
        porosity_stride: a.stride,
    };
    let vol = load_volume(&a.volume)?;
    let results = run_descriptors(&vol, &cfg)?;
    std::fs::create_dir_all(&a.output_dir)?;
    for e in &results.profiles {
        let path = output::write_profile(&a.output_dir, e.descriptor, &e.profile)?;
        writeln!(out, "{}", path.display()).map_err(io_err)?;
    }
    for c in &results.porosity {
        let path = output::write_porosity(&a.output_dir, c)?;
        writeln!(out, "{}", path.display()).map_err(io_err)?;
    }
    Ok(())
}

fn texture(a: &TextureArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let vol = load_volume(&a.volume)?;
    let cfg = a.glcm.config();
    cfg.params(vol.kind()).validate()?;
    let t = run_texture(&vol, &cfg)?;
    let r = &t.anisotropy;
    let mut text = String::from("Direction,Contrast,Homogeneity,Energy,Entropy\n");
    for (axis, f) in r.per_axis() {
        let [c, h, e, s] = f.as_array().map(format_f64);
        text += &format!("{},{c},{h},{e},{s}\n", axis.name().to_ascii_uppercase());
    }
    text += &format!("AI: {}\nlog10(AI): {}\nverdict: {:?}\n", format_f64(r.ai), format_f64(r.log10_ai), r.verdict);
    out.write_all(text.as_bytes()).map_err(io_err)?;
    if let Some(dir) = &a.output_dir {
        std::fs::create_dir_all(dir)?;
        output::write_texture(dir, r)?;
    }
    Ok(())
}

fn compare(a: &CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let reference = load_volume(&a.reference)?;
    let generated = load_volume(&a.generated)?;
    let q = volume_quality(&reference, &generated, &a.ssim.apply(SsimConfig::default()).params())?;
    let mut text = String::from("axis,n_slices,mean_ssim,mean_psnr\n");
    for p in &q.per_axis {
        text += &format!("{},{},{},{}\n", p.axis.name(), p.n_slices, format_f64(p.mean_ssim), format_f64(p.mean_psnr));
    }
    text += &format!("overall,{},{},{}\n", q.n_slices, format_f64(q.mean_ssim), format_f64(q.mean_psnr));
    out.write_all(text.as_bytes()).map_err(io_err)?;
    if let Some(dir) = &a.output_dir {
        std::fs::create_dir_all(dir)?;
        output::write_quality(dir, &q)?;
    }
    Ok(())
}

fn physics(a: &PhysicsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let defaults = PhysicsConfig::default();
    let cfg = PhysicsConfig {
        enabled: Some(true),
        boundary: a.boundary,
        diffusion: !a.no_diffusion,
        diffusion_phases: (!a.phase.is_empty()).then(|| a.phase.clone()),
        diffusion_axes: if a.axis.is_empty() { defaults.diffusion_axes } else { a.axis.clone() },
        tolerance: a.solver.tolerance.unwrap_or(defaults.tolerance),
        max_iterations: a.solver.max_iterations,
        preconditioner: a.solver.preconditioner.unwrap_or(defaults.preconditioner),
    };
    let vol = load_volume(&a.volume)?;
    let results = run_physics(&vol, &cfg)?;
    let text = serde_json::to_string_pretty(&results).expect("results serialize");
    writeln!(out, "{text}").map_err(io_err)?;
    if let Some(dir) = &a.output_dir {
        std::fs::create_dir_all(dir)?;
        output::write_physics(dir, &results)?;
    }
    Ok(())
}

/// One number per non-blank line.
pub fn read_numbers(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("IoFailure: cannot read {}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("BatchParse: {}:{}: '{}' is not a number", path.display(), i + 1, l.trim())))
        })
        .collect()
}

fn jnum(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(format_f64(v))
    }
}

fn losses(a: &LossArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut result = serde_json::Map::new();
    let mut wasserstein = None;
    if let (Some(real), Some(fake)) = (&a.real, &a.fake) {
        let real = ScoreBatch::new(read_numbers(real)?)?;
        let fake = ScoreBatch::new(read_numbers(fake)?)?;
        let w = wgan_objective(&real, &fake, a.convention)?;
        wasserstein = Some(w);
        result.insert("wgan".into(), json!({ "convention": a.convention, "value": jnum(w) }));
        if a.gan {
            result.insert("gan".into(), jnum(gan_objective(&real, &fake)?));
        }
    }
    if let (Some(p), Some(q)) = (&a.p, &a.q) {
        let p = DiscreteDistribution::new(read_numbers(p)?)?;
        let q = DiscreteDistribution::new(read_numbers(q)?)?;
        result.insert("kl".into(), jnum(kl_divergence(&p, &q)?));
        result.insert("js".into(), jnum(js_divergence(&p, &q)?));
    }
    let mut regularization = None;
    if let (Some(y), Some(g)) = (&a.y, &a.g) {
        let (y, g) = (read_numbers(y)?, read_numbers(g)?);
        let l1 = l1_loss(&y, &g)?;
        regularization = Some(l1);
        result.insert("l1".into(), jnum(l1));
        result.insert("l2".into(), jnum(l2_loss(&y, &g)?));
    }
    if let (Some(lambda_w), Some(lambda_r), Some(w), Some(r)) = (a.lambda_w, a.lambda_r, wasserstein, regularization) {
        result.insert("total".into(), jnum(total_loss(w, r, LossWeights { lambda_w, lambda_r })?));
    }
    if result.is_empty() {
        return Err(CliError::config("losses eval needs --real/--fake, --p/--q or --y/--g"));
    }
    let text = serde_json::to_string_pretty(&Value::Object(result)).expect("json");
    writeln!(out, "{text}").map_err(io_err)
}
