//! Divergences and adversarial-training loss terms, evaluated on plain data.
//!
//! KL and JS use base-2 logarithms, so JS lies in `[0, 1]`. The GAN
//! objective uses natural logarithms. Expectations are batch means.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("SizeMismatch: {0} vs {1} entries")]
    SizeMismatch(usize, usize),
    #[error("NotDistribution: {0}")]
    NotDistribution(String),
    #[error("DomainViolation: {0}")]
    DomainViolation(String),
    #[error("EmptyBatch")]
    EmptyBatch,
    #[error("ShapeMismatch: {0} vs {1} elements")]
    ShapeMismatch(usize, usize),
    #[error("NonFinite: {0}")]
    NonFinite(&'static str),
    #[error("NegativeClip: clip constant {0} is negative")]
    NegativeClip(f64),
}

/// Probabilities over a finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, LossError> {
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(LossError::NotDistribution("entries must be finite and nonnegative".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(LossError::NotDistribution(format!("entries sum to {sum}")));
        }
        if !probs.iter().any(|&p| p > 0.0) {
            return Err(LossError::NotDistribution("no positive entry".into()));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn same_support(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<(), LossError> {
    if p.len() != q.len() {
        return Err(LossError::SizeMismatch(p.len(), q.len()));
    }
    Ok(())
}

fn kl_terms(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| {
            if pi == 0.0 {
                0.0
            } else if qi == 0.0 {
                f64::INFINITY
            } else {
                pi * (pi / qi).log2()
            }
        })
        .sum()
}

/// `KL(P || Q)` in bits; infinite when `P` has mass where `Q` has none.
pub fn kl_divergence(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64, LossError> {
    same_support(p, q)?;
    Ok(kl_terms(&p.probs, &q.probs))
}

/// Jensen-Shannon divergence in bits.
pub fn js_divergence(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64, LossError> {
    same_support(p, q)?;
    let m: Vec<f64> = p.probs.iter().zip(&q.probs).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok(0.5 * kl_terms(&p.probs, &m) + 0.5 * kl_terms(&q.probs, &m))
}

/// Critic or discriminator outputs for one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBatch {
    values: Vec<f64>,
}

impl ScoreBatch {
    pub fn new(values: Vec<f64>) -> Result<Self, LossError> {
        if values.is_empty() {
            return Err(LossError::EmptyBatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LossError::NonFinite("scores must be finite"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `mean(ln D(x)) + mean(ln(1 - D(G(z))))`.
pub fn gan_objective(real_d: &ScoreBatch, fake_d: &ScoreBatch) -> Result<f64, LossError> {
    if let Some(v) = real_d.values.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
        return Err(LossError::DomainViolation(format!("real score {v} outside (0, 1]")));
    }
    if let Some(v) = fake_d.values.iter().find(|&&v| !(0.0..1.0).contains(&v)) {
        return Err(LossError::DomainViolation(format!("fake score {v} outside [0, 1)")));
    }
    let real = real_d.values.iter().map(|v| v.ln()).sum::<f64>() / real_d.values.len() as f64;
    let fake = fake_d.values.iter().map(|v| (1.0 - v).ln()).sum::<f64>() / fake_d.values.len() as f64;
    Ok(real + fake)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WganConvention {
    /// `mean(real) - mean(fake)`.
    #[default]
    Standard,
    /// `mean(real) + mean(fake)`, the sign as printed in the source model's objective.
    LiteralEq6,
}

impl std::str::FromStr for WganConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(WganConvention::Standard),
            "literal" | "literal_eq6" | "literaleq6" => Ok(WganConvention::LiteralEq6),
            other => Err(format!("unknown convention '{other}'")),
        }
    }
}

pub fn wgan_objective(real_d: &ScoreBatch, fake_d: &ScoreBatch, convention: WganConvention) -> Result<f64, LossError> {
    if real_d.values.is_empty() || fake_d.values.is_empty() {
        return Err(LossError::EmptyBatch);
    }
    Ok(match convention {
        WganConvention::Standard => real_d.mean() - fake_d.mean(),
        WganConvention::LiteralEq6 => real_d.mean() + fake_d.mean(),
    })
}

/// `sum |y - g|`.
pub fn l1_loss(y: &[f64], g: &[f64]) -> Result<f64, LossError> {
    if y.len() != g.len() {
        return Err(LossError::ShapeMismatch(y.len(), g.len()));
    }
    Ok(y.iter().zip(g).map(|(a, b)| (a - b).abs()).sum())
}

/// `sum (y - g)^2`.
pub fn l2_loss(y: &[f64], g: &[f64]) -> Result<f64, LossError> {
    if y.len() != g.len() {
        return Err(LossError::ShapeMismatch(y.len(), g.len()));
    }
    Ok(y.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda_w: f64,
    pub lambda_r: f64,
}

/// `lambda_w * wasserstein + lambda_r * regularization`.
pub fn total_loss(wasserstein: f64, regularization: f64, weights: LossWeights) -> Result<f64, LossError> {
    if ![wasserstein, regularization, weights.lambda_w, weights.lambda_r].iter().all(|v| v.is_finite()) {
        return Err(LossError::NonFinite("loss terms and weights must be finite"));
    }
    Ok(weights.lambda_w * wasserstein + weights.lambda_r * regularization)
}

/// Clamps every value into `[-c, c]`.
pub fn weight_clip(values: &[f64], c: f64) -> Result<Vec<f64>, LossError> {
    if !(c >= 0.0) {
        return Err(LossError::NegativeClip(c));
    }
    Ok(values.iter().map(|v| v.clamp(-c, c)).collect())
}
