//! Extended bi-degree sequences: generation by the IID algorithm and
//! verification of the regularity events the coupling relies on.

mod assumptions;
mod io;
pub mod laws;
pub mod zeta;

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use assumptions::{check_assumption_events, AssumptionConstants, AssumptionReport};
pub use io::{read_sequence_csv, write_sequence_csv, SequenceMeta};
pub use laws::{CountLaw, CountSampler, ScalarLaw};

use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;
use zeta::riemann_zeta;

/// Parameters of the zeta-plus-Poisson degree model.
///
/// In-degrees are `Zeta(alpha + 1) + Poisson(λ_in)` and out-degrees
/// `Zeta(beta + 1) + Poisson(λ_out)`, with the Poisson rates chosen so both
/// have mean `target_mean`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub target_mean: f64,
    pub damping_law: ScalarLaw,
    pub personalization_law: ScalarLaw,
    /// Slack exponent of the balance test; defaults to `kappa0 / 2`.
    #[serde(default)]
    pub delta0: Option<f64>,
}

impl DegreeModelParams {
    /// PageRank setting: `ζ ≡ c`, `Q ≡ 1 - c`.
    pub fn pagerank(alpha: f64, beta: f64, target_mean: f64, c: f64) -> Self {
        Self {
            alpha,
            beta,
            target_mean,
            damping_law: ScalarLaw::constant(c),
            personalization_law: ScalarLaw::constant(1.0 - c),
            delta0: None,
        }
    }

    /// `α = 1.5`, `β = 2.5`, mean 2, `c = 0.3`.
    pub fn reference_default() -> Self {
        Self::pagerank(1.5, 2.5, 2.0, 0.3)
    }

    pub fn kappa0(&self) -> f64 {
        (1.0 - 1.0 / self.alpha).min(0.5)
    }

    pub fn delta0(&self) -> f64 {
        self.delta0.unwrap_or_else(|| 0.5 * self.kappa0())
    }

    /// The bound `c` with `|ζ| ≤ c` almost surely.
    pub fn damping_bound(&self) -> f64 {
        self.damping_law.abs_bound()
    }

    /// `(λ_in, λ_out)`; may be negative for invalid parameters.
    pub fn poisson_rates(&self) -> Result<(f64, f64)> {
        let zin = riemann_zeta(self.alpha)? / riemann_zeta(self.alpha + 1.0)?;
        let zout = riemann_zeta(self.beta)? / riemann_zeta(self.beta + 1.0)?;
        Ok((self.target_mean - zin, self.target_mean - zout))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) || !self.alpha.is_finite() {
            return Err(invalid(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if !(self.beta > 2.0) || !self.beta.is_finite() {
            return Err(invalid(format!("beta must exceed 2, got {}", self.beta)));
        }
        if !(self.target_mean > 0.0) || !self.target_mean.is_finite() {
            return Err(invalid(format!("target mean must be positive, got {}", self.target_mean)));
        }
        let delta0 = self.delta0();
        if !(delta0 > 0.0 && delta0 < self.kappa0()) {
            return Err(invalid(format!("delta0 must lie in (0, {}), got {delta0}", self.kappa0())));
        }
        self.damping_law.validate()?;
        self.personalization_law.validate()?;
        let c = self.damping_bound();
        if !(c > 0.0 && c < 1.0) {
            return Err(invalid(format!("damping bound c must lie in (0, 1), got {c}")));
        }
        let (lin, lout) = self.poisson_rates()?;
        if lin < 0.0 || lout < 0.0 {
            return Err(invalid(format!(
                "target mean {} is below a zeta component mean (poisson rates {lin}, {lout})",
                self.target_mean
            )));
        }
        Ok(())
    }
}

/// Per-node `(N, D, C, Q)` with `Σ N = Σ D`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedBiDegreeSequence {
    in_degrees: Vec<u64>,
    out_degrees: Vec<u64>,
    weights: Vec<f64>,
    personalization: Vec<f64>,
    total_stubs: u64,
}

impl ExtendedBiDegreeSequence {
    pub fn new(
        in_degrees: Vec<u64>,
        out_degrees: Vec<u64>,
        weights: Vec<f64>,
        personalization: Vec<f64>,
    ) -> Result<Self> {
        let n = in_degrees.len();
        for len in [out_degrees.len(), weights.len(), personalization.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let in_stubs: u64 = in_degrees.iter().sum();
        let out_stubs: u64 = out_degrees.iter().sum();
        if in_stubs != out_stubs {
            return Err(Error::UnbalancedSequence { in_stubs, out_stubs });
        }
        if in_stubs > u32::MAX as u64 || n > u32::MAX as usize {
            return Err(invalid("sequence too large for 32-bit stub indexing"));
        }
        Ok(Self { in_degrees, out_degrees, weights, personalization, total_stubs: in_stubs })
    }

    /// PageRank attributes `C_i = c / D_i` (or `c` when dangling) and `Q_i = 1 - c`.
    pub fn pagerank(in_degrees: Vec<u64>, out_degrees: Vec<u64>, c: f64) -> Result<Self> {
        let weights = out_degrees.iter().map(|&d| weight_from_zeta(c, d, c)).collect();
        let n = in_degrees.len();
        Self::new(in_degrees, out_degrees, weights, vec![1.0 - c; n])
    }

    pub fn len(&self) -> usize {
        self.in_degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_degrees.is_empty()
    }

    pub fn total_stubs(&self) -> u64 {
        self.total_stubs
    }

    pub fn in_degrees(&self) -> &[u64] {
        &self.in_degrees
    }

    pub fn out_degrees(&self) -> &[u64] {
        &self.out_degrees
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn personalization(&self) -> &[f64] {
        &self.personalization
    }

    /// `max_i |C_i| D_i`, the row-sum norm of the weight matrix.
    pub fn max_weight_load(&self) -> f64 {
        self.weights.iter().zip(&self.out_degrees).map(|(c, &d)| c.abs() * d as f64).fold(0.0, f64::max)
    }

    /// Applies a node relabeling: node `i` of the result is node `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: perm.len() });
        }
        Self::new(
            perm.iter().map(|&p| self.in_degrees[p]).collect(),
            perm.iter().map(|&p| self.out_degrees[p]).collect(),
            perm.iter().map(|&p| self.weights[p]).collect(),
            perm.iter().map(|&p| self.personalization[p]).collect(),
        )
    }
}

/// Samplers for a validated [`DegreeModelParams`]. Building one tabulates the
/// zeta inverse CDFs, so construct once and share.
#[derive(Debug, Clone)]
pub struct DegreeModel {
    params: DegreeModelParams,
    in_law: CountSampler,
    out_law: CountSampler,
}

/// Output of [`DegreeModel::run_iid_algorithm`].
#[derive(Debug, Clone)]
pub struct IidOutcome {
    pub sequence: ExtendedBiDegreeSequence,
    /// Rounds of steps 2–4 drawn, including the accepted one.
    pub rounds: u64,
    /// Accepted imbalance `Σ𝒩 - Σ𝒟`.
    pub imbalance: i64,
}

impl DegreeModel {
    pub fn new(params: DegreeModelParams) -> Result<Self> {
        params.validate()?;
        let (lin, lout) = params.poisson_rates()?;
        let in_law = CountSampler::new(CountLaw::ZetaPoisson { exponent: params.alpha + 1.0, rate: lin })?;
        let out_law = CountSampler::new(CountLaw::ZetaPoisson { exponent: params.beta + 1.0, rate: lout })?;
        Ok(Self { params, in_law, out_law })
    }

    pub fn params(&self) -> &DegreeModelParams {
        &self.params
    }

    pub fn in_degree_law(&self) -> &CountSampler {
        &self.in_law
    }

    pub fn out_degree_law(&self) -> &CountSampler {
        &self.out_law
    }

    /// Raw i.i.d. pairs `(𝒩_i, 𝒟_i)`, in-degrees drawn first.
    pub fn sample_raw_degree_pairs(&self, n: usize, rng: &mut SimRng) -> (Vec<u64>, Vec<u64>) {
        let ins = (0..n).map(|_| self.in_law.sample(rng)).collect();
        let outs = (0..n).map(|_| self.out_law.sample(rng)).collect();
        (ins, outs)
    }

    /// Acceptance threshold `n^(1 - κ₀ + δ₀)` of step 4.
    pub fn balance_threshold(&self, n: usize) -> f64 {
        (n as f64).powf(1.0 - self.params.kappa0() + self.params.delta0())
    }

    pub fn run_iid_algorithm(&self, n: usize, rng: &mut SimRng) -> Result<IidOutcome> {
        if n == 0 {
            return Err(invalid("the IID algorithm needs n >= 1"));
        }
        let threshold = self.balance_threshold(n);
        let mut rounds = 0u64;
        let (mut ins, mut outs, delta) = loop {
            rounds += 1;
            let (ins, outs) = self.sample_raw_degree_pairs(n, rng);
            let delta = ins.iter().sum::<u64>() as i128 - outs.iter().sum::<u64>() as i128;
            if (delta.unsigned_abs() as f64) <= threshold {
                break (ins, outs, delta as i64);
            }
        };
        repair_imbalance(&mut ins, &mut outs, rng);
        let personalization: Vec<f64> = (0..n).map(|_| self.params.personalization_law.sample(rng)).collect();
        let c = self.params.damping_bound();
        let weights: Vec<f64> = outs
            .iter()
            .map(|&d| {
                let z = self.params.damping_law.sample(rng);
                weight_from_zeta(z, d, c)
            })
            .collect();
        let sequence = ExtendedBiDegreeSequence::new(ins, outs, weights, personalization)?;
        Ok(IidOutcome { sequence, rounds, imbalance: delta })
    }
}

/// Adds one stub to `|Δ|` distinct uniformly chosen nodes on the short side,
/// in-degrees when `Δ = Σ𝒩 - Σ𝒟 < 0`, out-degrees otherwise. Returns `Δ`.
pub fn repair_imbalance<R: Rng + ?Sized>(ins: &mut [u64], outs: &mut [u64], rng: &mut R) -> i64 {
    let delta = (ins.iter().sum::<u64>() as i128 - outs.iter().sum::<u64>() as i128) as i64;
    let chosen = floyd_sample(ins.len(), delta.unsigned_abs() as usize, rng);
    let target = if delta < 0 { ins } else { outs };
    for i in chosen {
        target[i] += 1;
    }
    delta
}

/// `C = ζ / D` when `D ≥ 1`, otherwise `c · sgn(ζ)`.
///
/// The quotient is nudged toward zero when rounding would make the
/// floating-point product `|C| D` exceed `|ζ|`, so `|C| D ≤ c` holds exactly.
pub fn weight_from_zeta(zeta: f64, out_degree: u64, c: f64) -> f64 {
    if out_degree >= 1 {
        let d = out_degree as f64;
        let mut w = zeta / d;
        while (w * d).abs() > zeta.abs() {
            w = if w > 0.0 { w.next_down() } else { w.next_up() };
        }
        w
    } else if zeta > 0.0 {
        c
    } else if zeta < 0.0 {
        -c
    } else {
        0.0
    }
}

/// Floyd's algorithm: `m` distinct indices from `0..n`, uniformly.
pub fn floyd_sample<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Vec<usize> {
    assert!(m <= n, "cannot choose {m} of {n} without replacement");
    let mut set = HashSet::with_capacity(m);
    let mut order = Vec::with_capacity(m);
    for j in (n - m)..n {
        let t = rng.random_range(0..=j);
        let pick = if set.contains(&t) { j } else { t };
        set.insert(pick);
        order.push(pick);
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn poisson_rates_match_series_oracle() {
        // Oracle: brute partial sums with integral tails.
        fn zeta(s: f64) -> f64 {
            let m = 1_000_000u64;
            (1..=m).rev().map(|k| (k as f64).powf(-s)).sum::<f64>() + (m as f64 + 0.5).powf(1.0 - s) / (s - 1.0)
        }
        let p = DegreeModelParams::reference_default();
        let (lin, lout) = p.poisson_rates().unwrap();
        assert!((lin - (2.0 - zeta(1.5) / zeta(2.5))).abs() < 1e-8);
        assert!((lout - (2.0 - zeta(2.5) / zeta(3.5))).abs() < 1e-8);
        assert!((lin - 0.0526).abs() < 5e-4, "{lin}");
        assert!((lout - 0.8094).abs() < 5e-4, "{lout}");
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(DegreeModel::new(DegreeModelParams::pagerank(1.0, 2.5, 2.0, 0.3)).is_err());
        assert!(DegreeModel::new(DegreeModelParams::pagerank(1.5, 2.0, 2.0, 0.3)).is_err());
        assert!(DegreeModel::new(DegreeModelParams::pagerank(1.5, 2.5, 1.0, 0.3)).is_err());
        assert!(DegreeModel::new(DegreeModelParams::pagerank(1.5, 2.5, 2.0, 1.0)).is_err());
        let mut p = DegreeModelParams::reference_default();
        p.delta0 = Some(0.5);
        assert!(p.validate().is_err());
    }

    #[test]
    fn kappa0_is_exact() {
        let p = DegreeModelParams::reference_default();
        assert_eq!(p.kappa0(), 1.0 - 1.0 / 1.5);
        assert_eq!(DegreeModelParams::pagerank(3.0, 2.5, 2.0, 0.3).kappa0(), 0.5);
    }

    #[test]
    fn zero_nodes_gives_empty_pairs() {
        let model = DegreeModel::new(DegreeModelParams::reference_default()).unwrap();
        let (a, b) = model.sample_raw_degree_pairs(0, &mut stream(1, 1, 0));
        assert!(a.is_empty() && b.is_empty());
        assert!(model.run_iid_algorithm(0, &mut stream(1, 1, 0)).is_err());
    }

    #[test]
    fn repair_touches_only_one_side() {
        let model = DegreeModel::new(DegreeModelParams::reference_default()).unwrap();
        for seed in 0..30 {
            // Replay the accepted raw draw to see exactly which entries moved.
            let mut rng = stream(seed, 1, 0);
            let out = model.run_iid_algorithm(500, &mut rng).unwrap();
            let mut replay = stream(seed, 1, 0);
            let mut raw = model.sample_raw_degree_pairs(500, &mut replay);
            for _ in 1..out.rounds {
                raw = model.sample_raw_degree_pairs(500, &mut replay);
            }
            let seq = &out.sequence;
            let in_changes: Vec<i64> =
                seq.in_degrees().iter().zip(&raw.0).map(|(a, b)| *a as i64 - *b as i64).collect();
            let out_changes: Vec<i64> =
                seq.out_degrees().iter().zip(&raw.1).map(|(a, b)| *a as i64 - *b as i64).collect();
            let m = out.imbalance.unsigned_abs() as i64;
            if out.imbalance >= 0 {
                assert!(in_changes.iter().all(|&d| d == 0));
                assert!(out_changes.iter().all(|&d| d == 0 || d == 1));
                assert_eq!(out_changes.iter().sum::<i64>(), m);
            } else {
                assert!(out_changes.iter().all(|&d| d == 0));
                assert!(in_changes.iter().all(|&d| d == 0 || d == 1));
                assert_eq!(in_changes.iter().sum::<i64>(), m);
            }
        }
    }

    #[test]
    fn positive_imbalance_bumps_out_degrees() {
        let mut ins = vec![2, 3, 1, 1, 0, 0];
        let mut outs = vec![1, 1, 1, 1, 0, 0];
        let delta = repair_imbalance(&mut ins, &mut outs, &mut stream(2, 1, 0));
        assert_eq!(delta, 3);
        assert_eq!(ins, vec![2, 3, 1, 1, 0, 0]);
        let bumped = outs.iter().zip([1, 1, 1, 1, 0, 0]).filter(|(a, b)| **a == b + 1).count();
        assert_eq!(bumped, 3);
        assert_eq!(outs.iter().sum::<u64>(), ins.iter().sum::<u64>());
    }

    #[test]
    fn dangling_weight_uses_sign() {
        assert_eq!(weight_from_zeta(-0.3, 0, 0.3), -0.3);
        assert_eq!(weight_from_zeta(0.2, 0, 0.3), 0.3);
        assert!((weight_from_zeta(0.3, 3, 0.3) - 0.1).abs() < 1e-16);
        for d in 1..2000u64 {
            for z in [0.3, -0.3, 0.15, 0.7] {
                let w = weight_from_zeta(z, d, 0.7);
                assert!(w.abs() * d as f64 <= z.abs(), "d = {d}, zeta = {z}");
                assert!((w - z / d as f64).abs() <= f64::EPSILON * (z / d as f64).abs());
            }
        }
    }

    #[test]
    fn floyd_is_distinct_and_uniform() {
        let mut rng = stream(9, 1, 0);
        let mut counts = [0u32; 10];
        let reps = 50_000;
        for _ in 0..reps {
            let s = floyd_sample(10, 3, &mut rng);
            let set: HashSet<_> = s.iter().collect();
            assert_eq!(set.len(), 3);
            for i in s {
                counts[i] += 1;
            }
        }
        let p = 0.3;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        for c in counts {
            assert!((c as f64 / reps as f64 - p).abs() < 4.0 * se);
        }
    }

    #[test]
    fn unbalanced_sequence_rejected() {
        let err = ExtendedBiDegreeSequence::new(vec![1, 0], vec![0, 0], vec![0.0; 2], vec![0.0; 2]).unwrap_err();
        assert!(matches!(err, Error::UnbalancedSequence { in_stubs: 1, out_stubs: 0 }));
    }
}
