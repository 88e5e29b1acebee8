use serde::{Deserialize, Serialize};

use super::{DegreeModel, ExtendedBiDegreeSequence};
use crate::error::{invalid, Result};

/// Limit constants and exponents against which a sequence is checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionConstants {
    pub nu: [f64; 5],
    pub h: f64,
    pub c: f64,
    pub gamma: f64,
    pub kappa: f64,
}

impl AssumptionConstants {
    /// Constants satisfied by IID-algorithm output: `ν₁ = E𝒟`, `ν₂ = (E𝒟)²`,
    /// `ν₃ = E𝒟²`, `ν₄ = E𝒟^(2+κ)`, `ν₅ = E|ζ| P(𝒟 ≥ 1)`, `H = E|Q| + 1`.
    pub fn for_iid(model: &DegreeModel, kappa: f64, gamma: f64) -> Result<Self> {
        let out = model.out_degree_law();
        let p = model.params();
        let nu1 = out.mean();
        let nu =
            [nu1, nu1 * nu1, out.moment(2.0), out.moment(2.0 + kappa), p.damping_law.mean_abs() * out.prob_positive()];
        let constants = Self { nu, h: p.personalization_law.mean_abs() + 1.0, c: p.damping_bound(), gamma, kappa };
        constants.validate()?;
        Ok(constants)
    }

    fn validate(&self) -> Result<()> {
        if self.nu.iter().any(|v| !v.is_finite()) || !self.h.is_finite() {
            return Err(invalid("assumption constants must be finite"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(invalid(format!("gamma must lie in (0,1), got {}", self.gamma)));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(invalid(format!("kappa must lie in (0,1], got {}", self.kappa)));
        }
        Ok(())
    }
}

/// Outcome of evaluating the six regularity events on one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub nu: [f64; 5],
    pub mu: f64,
    pub lambda: f64,
    pub rho: f64,
    pub h: f64,
    pub gamma: f64,
    pub kappa: f64,
    /// Ω₁ … Ω₆.
    pub events: [bool; 6],
    pub overall: bool,
}

/// Evaluates Ω₁…Ω₆ literally. Report-only; never fails on a well-formed input.
pub fn check_assumption_events(seq: &ExtendedBiDegreeSequence, k: &AssumptionConstants) -> Result<AssumptionReport> {
    k.validate()?;
    let n = seq.len() as f64;
    let slack = n.powf(1.0 - k.gamma);
    let d = seq.out_degrees();
    let sum_d: f64 = d.iter().map(|&x| x as f64).sum();
    let sum_dn: f64 = d.iter().zip(seq.in_degrees()).map(|(&a, &b)| a as f64 * b as f64).sum();
    let sum_d2: f64 = d.iter().map(|&x| (x as f64).powi(2)).sum();
    let sum_d2k: f64 = d.iter().map(|&x| (x as f64).powf(2.0 + k.kappa)).sum();
    let sum_cd: f64 = d.iter().zip(seq.weights()).map(|(&x, c)| c.abs() * x as f64).sum();
    let sum_q: f64 = seq.personalization().iter().map(|q| q.abs()).sum();
    let within = |sum: f64, nu: f64| (sum - n * nu).abs() <= slack;
    let events = [
        within(sum_d, k.nu[0]),
        within(sum_dn, k.nu[1]),
        within(sum_d2, k.nu[2]),
        within(sum_d2k, k.nu[3]),
        within(sum_cd, k.nu[4]) && seq.max_weight_load() <= k.c,
        sum_q <= k.h * n,
    ];
    let mu = k.nu[1] / k.nu[0];
    Ok(AssumptionReport {
        nu: k.nu,
        mu,
        lambda: k.nu[2] / k.nu[0],
        rho: k.nu[4] * mu / k.nu[0],
        h: k.h,
        gamma: k.gamma,
        kappa: k.kappa,
        events,
        overall: events.iter().all(|&e| e),
    })
}
