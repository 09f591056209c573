//! Gray-level co-occurrence texture features and the anisotropy index.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::volume::{Axis, SliceImage, VolumeKind, VoxelVolume};

/// `log10(AI)` above this value classifies a volume as anisotropic.
pub const LOG10_AI_THRESHOLD: f64 = 2.0;

const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TextureError {
    #[error("NoValidPairs: a {width}x{height} image has no pixel pairs at offset {offset:?}")]
    NoValidPairs { width: usize, height: usize, offset: (isize, isize) },
    #[error("NotNormalized: matrix sums to {0}")]
    NotNormalized(f64),
    #[error("NonFinite: {0}")]
    NonFinite(&'static str),
    #[error("BadParams: {0}")]
    BadParams(String),
}

/// Pixel-pair direction, measured counter-clockwise from the +column axis
/// with rows growing downward (45 degrees points up and to the right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GlcmAngle {
    #[serde(rename = "0")]
    Deg0,
    #[serde(rename = "45")]
    Deg45,
    #[serde(rename = "90")]
    Deg90,
    #[serde(rename = "135")]
    Deg135,
}

impl GlcmAngle {
    pub const ALL: [GlcmAngle; 4] = [GlcmAngle::Deg0, GlcmAngle::Deg45, GlcmAngle::Deg90, GlcmAngle::Deg135];

    /// `(d_col, d_row)` for a pair at `distance`.
    pub fn offset(self, distance: usize) -> (isize, isize) {
        let d = distance as isize;
        match self {
            GlcmAngle::Deg0 => (d, 0),
            GlcmAngle::Deg45 => (d, -d),
            GlcmAngle::Deg90 => (0, -d),
            GlcmAngle::Deg135 => (-d, -d),
        }
    }
}

impl std::str::FromStr for GlcmAngle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(GlcmAngle::Deg0),
            "45" => Ok(GlcmAngle::Deg45),
            "90" => Ok(GlcmAngle::Deg90),
            "135" => Ok(GlcmAngle::Deg135),
            other => Err(format!("unsupported GLCM angle '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlcmParams {
    pub levels: u16,
    pub distance: usize,
    pub angles: Vec<GlcmAngle>,
    pub symmetric: bool,
    pub normalized: bool,
}

impl Default for GlcmParams {
    fn default() -> Self {
        GlcmParams {
            levels: 256,
            distance: 1,
            angles: GlcmAngle::ALL.to_vec(),
            symmetric: true,
            normalized: true,
        }
    }
}

impl GlcmParams {
    /// Defaults by input kind: labeled volumes keep all 256 levels of their
    /// gray mapping, natural gray images are quantized to 32.
    pub fn default_for(kind: VolumeKind) -> Self {
        match kind {
            VolumeKind::Phase => GlcmParams::default(),
            VolumeKind::Gray => GlcmParams { levels: 32, ..GlcmParams::default() },
        }
    }

    pub fn validate(&self) -> Result<(), TextureError> {
        if !(2..=256).contains(&self.levels) {
            return Err(TextureError::BadParams(format!("levels must be in 2..=256, got {}", self.levels)));
        }
        if self.distance == 0 {
            return Err(TextureError::BadParams("distance must be >= 1".into()));
        }
        if self.angles.is_empty() {
            return Err(TextureError::BadParams("at least one angle is required".into()));
        }
        Ok(())
    }

    fn single(&self, angle: GlcmAngle) -> GlcmParams {
        GlcmParams { angles: vec![angle], normalized: true, ..self.clone() }
    }
}

/// Co-occurrence matrix, `levels x levels`, row `i` = reference gray level.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    pub levels: usize,
    pub matrix: Vec<f64>,
    pub params: GlcmParams,
}

impl Glcm {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.levels + j]
    }

    pub fn sum(&self) -> f64 {
        self.matrix.iter().sum()
    }
}

#[inline]
fn quantize(g: u8, levels: usize) -> usize {
    usize::from(g) * levels / 256
}

/// Co-occurrence counts pooled over every angle in `params`.
pub fn glcm(image: &SliceImage, params: &GlcmParams) -> Result<Glcm, TextureError> {
    params.validate()?;
    let levels = usize::from(params.levels);
    let (w, h) = (image.width as isize, image.height as isize);
    let mut counts = vec![0u64; levels * levels];
    let mut pairs = 0u64;
    for &angle in &params.angles {
        let (dc, dr) = angle.offset(params.distance);
        let cols = dc.max(0)..w + dc.min(0);
        let rows = dr.max(0)..h + dr.min(0);
        if cols.is_empty() || rows.is_empty() {
            return Err(TextureError::NoValidPairs { width: image.width, height: image.height, offset: (dc, dr) });
        }
        // reference pixel p, neighbour p + (dc, dr)
        for r in rows {
            for c in cols.clone() {
                let (rc, rr) = ((c - dc) as usize, (r - dr) as usize);
                let i = quantize(image.get(rc, rr), levels);
                let j = quantize(image.get(c as usize, r as usize), levels);
                counts[i * levels + j] += 1;
                pairs += 1;
            }
        }
    }
    if params.symmetric {
        for i in 0..levels {
            for j in (i + 1)..levels {
                let s = counts[i * levels + j] + counts[j * levels + i];
                counts[i * levels + j] = s;
                counts[j * levels + i] = s;
            }
            counts[i * levels + i] *= 2;
        }
        pairs *= 2;
    }
    let matrix = if params.normalized {
        let total = pairs as f64;
        counts.iter().map(|&c| c as f64 / total).collect()
    } else {
        counts.iter().map(|&c| c as f64).collect()
    };
    Ok(Glcm { levels, matrix, params: params.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub contrast: f64,
    pub homogeneity: f64,
    pub energy: f64,
    /// In bits.
    pub entropy: f64,
}

impl FeatureStats {
    pub fn as_array(&self) -> [f64; 4] {
        [self.contrast, self.homogeneity, self.energy, self.entropy]
    }

    fn from_array(a: [f64; 4]) -> Self {
        FeatureStats { contrast: a[0], homogeneity: a[1], energy: a[2], entropy: a[3] }
    }

    fn mean(items: &[FeatureStats]) -> FeatureStats {
        let mut acc = [0.0; 4];
        for f in items {
            for (a, v) in acc.iter_mut().zip(f.as_array()) {
                *a += v;
            }
        }
        let n = items.len() as f64;
        FeatureStats::from_array(acc.map(|a| a / n))
    }
}

/// Contrast, homogeneity, energy and entropy of a normalized matrix.
pub fn glcm_features(g: &Glcm) -> Result<FeatureStats, TextureError> {
    let total = g.sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(TextureError::NotNormalized(total));
    }
    let mut f = FeatureStats { contrast: 0.0, homogeneity: 0.0, energy: 0.0, entropy: 0.0 };
    for i in 0..g.levels {
        for j in 0..g.levels {
            let p = g.at(i, j);
            if p == 0.0 {
                continue;
            }
            let d = i as f64 - j as f64;
            f.contrast += p * d * d;
            f.homogeneity += p / (1.0 + d * d);
            f.energy += p * p;
            f.entropy -= p * p.log2();
        }
    }
    // -0.0 for a single-entry matrix
    f.entropy = f.entropy.max(0.0);
    Ok(f)
}

/// Per-slice features averaged over the angles of `params` (one matrix per angle).
pub fn slice_features(image: &SliceImage, params: &GlcmParams) -> Result<FeatureStats, TextureError> {
    params.validate()?;
    let per_angle = params
        .angles
        .iter()
        .map(|&a| glcm(image, &params.single(a)).and_then(|g| glcm_features(&g)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureStats::mean(&per_angle))
}

/// Mean slice features over every layer along `axis`. Labeled volumes are
/// mapped to gray first.
pub fn directional_features(vol: &VoxelVolume, axis: Axis, params: &GlcmParams) -> Result<FeatureStats, TextureError> {
    params.validate()?;
    let gray = vol.to_gray();
    let per_slice = crate::par::map_range(gray.axis_len(axis), |i| {
        let image = gray.slice(axis, i).expect("layer index in range");
        slice_features(&image, params)
    });
    let per_slice = per_slice.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureStats::mean(&per_slice))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Isotropy,
    Anisotropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureSigmas {
    pub contrast: f64,
    pub homogeneity: f64,
    pub energy: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnisotropyReport {
    pub x: FeatureStats,
    pub y: FeatureStats,
    pub z: FeatureStats,
    pub sigmas: FeatureSigmas,
    pub ai: f64,
    /// `-inf` when `ai` is zero.
    #[serde(with = "crate::serde_inf")]
    pub log10_ai: f64,
    pub verdict: Verdict,
}

impl AnisotropyReport {
    pub fn per_axis(&self) -> [(Axis, FeatureStats); 3] {
        [(Axis::X, self.x), (Axis::Y, self.y), (Axis::Z, self.z)]
    }
}

/// Sample standard deviation (divisor `n - 1`), via the pairwise-difference
/// form `sum_{i<j} (x_i - x_j)^2 / (n (n - 1))`, which is exactly zero for
/// equal inputs.
fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    let mut ss = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            ss += (values[i] - values[j]).powi(2);
        }
    }
    (ss / (n * (n - 1)) as f64).sqrt()
}

/// Root-sum-square of the per-feature standard deviations across X, Y and Z.
pub fn anisotropy_index(x: FeatureStats, y: FeatureStats, z: FeatureStats) -> Result<AnisotropyReport, TextureError> {
    let rows = [x.as_array(), y.as_array(), z.as_array()];
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(TextureError::NonFinite("feature statistics must be finite"));
    }
    let sigma = |k: usize| {
        let mut col = [rows[0][k], rows[1][k], rows[2][k]];
        // permutation-independent summation order
        col.sort_by(f64::total_cmp);
        sample_std(&col)
    };
    let sigmas = FeatureSigmas { contrast: sigma(0), homogeneity: sigma(1), energy: sigma(2), entropy: sigma(3) };
    let ai = (sigmas.contrast.powi(2) + sigmas.homogeneity.powi(2) + sigmas.energy.powi(2) + sigmas.entropy.powi(2))
        .sqrt();
    let log10_ai = ai.log10();
    let verdict = if log10_ai > LOG10_AI_THRESHOLD { Verdict::Anisotropy } else { Verdict::Isotropy };
    Ok(AnisotropyReport { x, y, z, sigmas, ai, log10_ai, verdict })
}

pub fn classify_volume(vol: &VoxelVolume, params: &GlcmParams) -> Result<AnisotropyReport, TextureError> {
    let x = directional_features(vol, Axis::X, params)?;
    let y = directional_features(vol, Axis::Y, params)?;
    let z = directional_features(vol, Axis::Z, params)?;
    anisotropy_index(x, y, z)
}
