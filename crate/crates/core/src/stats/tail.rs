use serde::{Deserialize, Serialize};

use super::EmpiricalDistribution;
use crate::error::{invalid, Error, Result};

/// Which input dominates the tail of `ℛ*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailCase {
    /// `P(ℛ* > x) ~ prefactor · P(𝒩 > x)`.
    CountDominant,
    /// `P(ℛ* > x) ~ prefactor · P(𝒬 > x)`.
    PersonalizationDominant,
}

/// Moments entering the tail prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailInputs {
    /// `E[𝒩₀]`.
    pub mean_root_count: f64,
    /// `E[𝒞^α]`.
    pub weight_alpha_moment: f64,
    /// Tail ratio `P(𝒩₀ > x) / P(𝒩 > x)` (or the `𝒬` analogue) at infinity.
    pub kappa: f64,
    pub rho: f64,
    pub rho_alpha: f64,
    pub mean_personalization: f64,
    pub mean_weight: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPrediction {
    pub case: TailCase,
    pub alpha: f64,
    pub rho: f64,
    pub rho_alpha: f64,
    pub kappa: f64,
    pub prefactor: f64,
}

/// Asymptotic prefactor of `P(ℛ* > x)` relative to the dominant input tail.
///
/// Count-dominant: `(E[𝒩₀]E[𝒞^α] + κ(1-ρ_α)) (E[𝒬]E[𝒞])^α / ((1-ρ)^α (1-ρ_α))`.
/// Personalization-dominant: `(E[𝒩₀]E[𝒞^α] + κ(1-ρ_α)) / (1-ρ_α)`.
pub fn tail_constant(inputs: &TailInputs, case: TailCase) -> Result<TailPrediction> {
    let TailInputs {
        mean_root_count,
        weight_alpha_moment,
        kappa,
        rho,
        rho_alpha,
        mean_personalization,
        mean_weight,
        alpha,
    } = *inputs;
    if !(rho.max(rho_alpha) < 1.0) {
        return Err(Error::NotSubcritical { rho: rho.max(rho_alpha) });
    }
    if !(alpha > 0.0) || kappa < 0.0 || mean_root_count < 0.0 || weight_alpha_moment < 0.0 {
        return Err(invalid(format!("tail inputs out of range: {inputs:?}")));
    }
    let head = mean_root_count * weight_alpha_moment + kappa * (1.0 - rho_alpha);
    let prefactor = match case {
        TailCase::CountDominant => {
            head * (mean_personalization * mean_weight).powf(alpha) / ((1.0 - rho).powf(alpha) * (1.0 - rho_alpha))
        }
        TailCase::PersonalizationDominant => head / (1.0 - rho_alpha),
    };
    Ok(TailPrediction { case, alpha, rho, rho_alpha, kappa, prefactor })
}

/// Hill estimate of the tail index from the top `⌈top_fraction · m⌉` order
/// statistics.
pub fn tail_index_estimate(samples: &EmpiricalDistribution, top_fraction: f64) -> Result<f64> {
    if !(top_fraction > 0.0 && top_fraction <= 0.2) {
        return Err(invalid(format!("top fraction must lie in (0, 0.2], got {top_fraction}")));
    }
    let v = samples.sorted_values();
    let m = v.len();
    let k = (top_fraction * m as f64).ceil() as usize;
    if k < 10 || k >= m {
        return Err(Error::InsufficientData(format!("{k} upper order statistics out of {m}")));
    }
    let threshold = v[m - k - 1];
    if !(threshold > 0.0) {
        return Err(Error::InsufficientData("threshold order statistic is not positive".into()));
    }
    let lt = threshold.ln();
    let h = v[m - k..].iter().map(|x| x.ln() - lt).sum::<f64>() / k as f64;
    if !(h > 0.0) {
        return Err(Error::InsufficientData("upper order statistics are constant".into()));
    }
    Ok(1.0 / h)
}
