//! MSE, PSNR, SSIM and the slice-averaged volume comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::volume::{Axis, SliceImage, VoxelVolume};

#[derive(Debug, Error, PartialEq)]
pub enum QualityError {
    #[error("DimMismatch: {0}")]
    DimMismatch(String),
    #[error("KindMismatch: reference is {reference:?}, generated is {generated:?}")]
    KindMismatch { reference: crate::volume::VolumeKind, generated: crate::volume::VolumeKind },
    #[error("ImageSmallerThanWindow: {width}x{height} image, window {window}")]
    ImageSmallerThanWindow { width: usize, height: usize, window: usize },
    #[error("BadParams: {0}")]
    BadParams(String),
}

/// SSIM constants: `C1 = (k1 * L)^2`, `C2 = (k2 * L)^2` with a uniform
/// square window slid with stride 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams { window: 7, k1: 0.01, k2: 0.03, dynamic_range: 255.0 }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<(), QualityError> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(QualityError::BadParams(format!("window must be odd and >= 3, got {}", self.window)));
        }
        let small = |k: f64| k > 0.0 && k < 1.0;
        if !small(self.k1) || !small(self.k2) {
            return Err(QualityError::BadParams(format!("k1, k2 must be in (0, 1), got {}, {}", self.k1, self.k2)));
        }
        if !(self.dynamic_range > 0.0 && self.dynamic_range.is_finite()) {
            return Err(QualityError::BadParams(format!("dynamic range must be positive, got {}", self.dynamic_range)));
        }
        Ok(())
    }
}

fn same_dims(a: &SliceImage, b: &SliceImage) -> Result<(), QualityError> {
    if a.width != b.width || a.height != b.height {
        return Err(QualityError::DimMismatch(format!(
            "{}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

/// Mean squared pixel difference.
pub fn mse(a: &SliceImage, b: &SliceImage) -> Result<f64, QualityError> {
    same_dims(a, b)?;
    let sum: u64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&p, &q)| {
            let d = i64::from(p) - i64::from(q);
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.data.len() as f64)
}

/// `10 log10(max_i^2 / MSE)`; identical images give `f64::INFINITY`.
pub fn psnr(a: &SliceImage, b: &SliceImage, max_i: f64) -> Result<f64, QualityError> {
    let m = mse(a, b)?;
    Ok(psnr_from_mse(m, max_i))
}

pub fn psnr_from_mse(mse: f64, max_i: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (max_i * max_i / mse).log10()
    }
}

/// Integral image of `f(a, b)` per pixel, `(w+1) x (h+1)`, zero border.
fn integral(w: usize, h: usize, f: impl Fn(usize) -> u64) -> Vec<u64> {
    let stride = w + 1;
    let mut t = vec![0u64; stride * (h + 1)];
    for r in 0..h {
        let mut row = 0u64;
        for c in 0..w {
            row += f(r * w + c);
            t[(r + 1) * stride + c + 1] = t[r * stride + c + 1] + row;
        }
    }
    t
}

/// Mean SSIM over every window position.
pub fn ssim(a: &SliceImage, b: &SliceImage, params: &SsimParams) -> Result<f64, QualityError> {
    same_dims(a, b)?;
    params.validate()?;
    let (w, h, k) = (a.width, a.height, params.window);
    if w < k || h < k {
        return Err(QualityError::ImageSmallerThanWindow { width: w, height: h, window: k });
    }
    let (pa, pb) = (&a.data, &b.data);
    let sa = integral(w, h, |i| u64::from(pa[i]));
    let sb = integral(w, h, |i| u64::from(pb[i]));
    let saa = integral(w, h, |i| u64::from(pa[i]) * u64::from(pa[i]));
    let sbb = integral(w, h, |i| u64::from(pb[i]) * u64::from(pb[i]));
    let sab = integral(w, h, |i| u64::from(pa[i]) * u64::from(pb[i]));
    let stride = w + 1;
    let boxsum = |t: &[u64], r: usize, c: usize| -> f64 {
        (t[(r + k) * stride + c + k] + t[r * stride + c] - t[r * stride + c + k] - t[(r + k) * stride + c]) as f64
    };
    let c1 = (params.k1 * params.dynamic_range).powi(2);
    let c2 = (params.k2 * params.dynamic_range).powi(2);
    let n = (k * k) as f64;
    let (nr, nc) = (h - k + 1, w - k + 1);
    let mut total = 0.0;
    for r in 0..nr {
        for c in 0..nc {
            let mu_a = boxsum(&sa, r, c) / n;
            let mu_b = boxsum(&sb, r, c) / n;
            let var_a = boxsum(&saa, r, c) / n - mu_a * mu_a;
            let var_b = boxsum(&sbb, r, c) / n - mu_b * mu_b;
            let cov = boxsum(&sab, r, c) / n - mu_a * mu_b;
            let num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            let den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
        }
    }
    Ok(total / (nr * nc) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisQuality {
    pub axis: Axis,
    pub n_slices: usize,
    pub mean_ssim: f64,
    #[serde(with = "crate::serde_inf")]
    pub mean_psnr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub per_axis: Vec<AxisQuality>,
    pub n_slices: usize,
    pub mean_ssim: f64,
    #[serde(with = "crate::serde_inf")]
    pub mean_psnr: f64,
}

/// Pairs reference and generated slices by layer index along X, Y and Z.
/// Labeled volumes are compared through their gray mapping.
pub fn volume_quality(
    reference: &VoxelVolume,
    generated: &VoxelVolume,
    params: &SsimParams,
) -> Result<QualityReport, QualityError> {
    if reference.dims() != generated.dims() {
        return Err(QualityError::DimMismatch(format!("{:?} vs {:?}", reference.dims(), generated.dims())));
    }
    if reference.kind() != generated.kind() {
        return Err(QualityError::KindMismatch { reference: reference.kind(), generated: generated.kind() });
    }
    params.validate()?;
    let (ra, ga) = (reference.to_gray(), generated.to_gray());
    let mut per_axis = Vec::with_capacity(3);
    for axis in Axis::ALL {
        let n = ra.axis_len(axis);
        let scores = crate::par::map_range(n, |i| {
            let a = ra.slice(axis, i).expect("layer in range");
            let b = ga.slice(axis, i).expect("layer in range");
            Ok::<_, QualityError>((ssim(&a, &b, params)?, psnr(&a, &b, params.dynamic_range)?))
        });
        let scores = scores.into_iter().collect::<Result<Vec<_>, _>>()?;
        let mean_ssim = scores.iter().map(|s| s.0).sum::<f64>() / n as f64;
        let mean_psnr = scores.iter().map(|s| s.1).sum::<f64>() / n as f64;
        per_axis.push(AxisQuality { axis, n_slices: n, mean_ssim, mean_psnr });
    }
    let n_slices: usize = per_axis.iter().map(|q| q.n_slices).sum();
    let weighted = |f: fn(&AxisQuality) -> f64| {
        per_axis.iter().map(|q| q.n_slices as f64 * f(q)).sum::<f64>() / n_slices as f64
    };
    Ok(QualityReport {
        mean_ssim: weighted(|q| q.mean_ssim),
        mean_psnr: weighted(|q| q.mean_psnr),
        per_axis,
        n_slices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_cases() {
        let a = SliceImage::filled(4, 4, 10);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&SliceImage::filled(3, 3, 0), &SliceImage::filled(3, 3, 255)).unwrap(), 65025.0);
        let mut b = a.clone();
        b.data[5] = 26;
        assert_eq!(mse(&a, &b).unwrap(), 16.0);
        assert!(matches!(mse(&a, &SliceImage::filled(4, 3, 0)), Err(QualityError::DimMismatch(_))));
    }

    #[test]
    fn psnr_cases() {
        let a = SliceImage::filled(4, 4, 10);
        assert_eq!(psnr(&a, &a, 255.0).unwrap(), f64::INFINITY);
        assert_eq!(psnr_from_mse(65025.0, 255.0), 0.0);
        let v = psnr_from_mse(16.0, 255.0);
        assert!((v - 10.0 * (65025.0f64 / 16.0).log10()).abs() < 1e-12);
        assert!((v - 36.09).abs() < 0.01, "{v}");
    }

    #[test]
    fn ssim_identity_and_constants() {
        let a = SliceImage::new(8, 9, (0..72).map(|i| (i * 37 % 256) as u8).collect()).unwrap();
        assert_eq!(ssim(&a, &a, &SsimParams::default()).unwrap(), 1.0);
        let zero = SliceImage::filled(7, 7, 0);
        let full = SliceImage::filled(7, 7, 255);
        let s = ssim(&zero, &full, &SsimParams::default()).unwrap();
        assert!((s - 6.5025 / 65031.5).abs() < 1e-15 * 1e4, "{s}");
    }

    #[test]
    fn ssim_small_image_and_params() {
        let a = SliceImage::filled(6, 9, 0);
        assert!(matches!(
            ssim(&a, &a, &SsimParams::default()),
            Err(QualityError::ImageSmallerThanWindow { window: 7, .. })
        ));
        for bad in [
            SsimParams { window: 4, ..SsimParams::default() },
            SsimParams { window: 1, ..SsimParams::default() },
            SsimParams { k1: 0.0, ..SsimParams::default() },
            SsimParams { dynamic_range: -1.0, ..SsimParams::default() },
        ] {
            assert!(matches!(ssim(&a, &a, &bad), Err(QualityError::BadParams(_))));
        }
    }

    #[test]
    fn identical_volumes() {
        let v = VoxelVolume::new_gray([8, 8, 8], (0..512).map(|i| (i % 256) as u8).collect()).unwrap();
        let q = volume_quality(&v, &v, &SsimParams::default()).unwrap();
        assert_eq!(q.mean_ssim, 1.0);
        assert_eq!(q.mean_psnr, f64::INFINITY);
        assert_eq!(q.n_slices, 24);
        assert!(q.per_axis.iter().all(|a| a.mean_ssim == 1.0 && a.mean_psnr.is_infinite()));
    }

    #[test]
    fn volume_mismatches() {
        let a = VoxelVolume::new_gray([4, 4, 4], vec![0; 64]).unwrap();
        let b = VoxelVolume::new_gray([4, 4, 5], vec![0; 80]).unwrap();
        assert!(matches!(volume_quality(&a, &b, &SsimParams::default()), Err(QualityError::DimMismatch(_))));
        let p = VoxelVolume::new_phase([4, 4, 4], vec![0; 64], 2).unwrap();
        assert!(matches!(volume_quality(&a, &p, &SsimParams::default()), Err(QualityError::KindMismatch { .. })));
    }
}
