use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;
use crate::seqgen::{CountSampler, DegreeModel, ExtendedBiDegreeSequence, ScalarLaw};

/// Index into `cumulative` (strictly increasing totals) chosen with
/// probability proportional to each increment.
fn pick_weighted(cumulative: &[u64], rng: &mut SimRng) -> usize {
    let total = *cumulative.last().expect("nonempty weights");
    let u = rng.random_range(0..total);
    cumulative.partition_point(|&c| c <= u)
}

fn prefix(weights: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut acc = 0u64;
    weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

/// Law of a node's `(𝒩, 𝒬)`.
#[derive(Debug, Clone)]
pub enum NodeLaw {
    /// `𝒩` and `𝒬` independent with the given marginals.
    Independent { count: CountSampler, personalization: ScalarLaw },
    /// Rows `(N_i, Q_i)` drawn uniformly, or proportionally to `bias` when set.
    Empirical { rows: Vec<(u64, f64)>, bias: Option<Vec<u64>> },
}

impl NodeLaw {
    pub fn sample(&self, rng: &mut SimRng) -> (u64, f64) {
        match self {
            NodeLaw::Independent { count, personalization } => {
                let n = count.sample(rng);
                (n, personalization.sample(rng))
            }
            NodeLaw::Empirical { rows, bias } => {
                let i = match bias {
                    Some(cum) => pick_weighted(cum, rng),
                    None => rng.random_range(0..rows.len()),
                };
                rows[i]
            }
        }
    }

    fn weighted_mean(&self, f: impl Fn(u64, f64) -> f64) -> f64 {
        match self {
            NodeLaw::Independent { .. } => unreachable!(),
            NodeLaw::Empirical { rows, bias } => match bias {
                Some(cum) => {
                    let total = *cum.last().unwrap() as f64;
                    let mut prev = 0;
                    rows.iter()
                        .zip(cum)
                        .map(|(&(n, q), &c)| {
                            let w = (c - prev) as f64;
                            prev = c;
                            w * f(n, q)
                        })
                        .sum::<f64>()
                        / total
                }
                None => rows.iter().map(|&(n, q)| f(n, q)).sum::<f64>() / rows.len() as f64,
            },
        }
    }

    /// `E[𝒩]`.
    pub fn mean_count(&self) -> f64 {
        match self {
            NodeLaw::Independent { count, .. } => count.mean(),
            _ => self.weighted_mean(|n, _| n as f64),
        }
    }

    /// `E[𝒬]`.
    pub fn mean_personalization(&self) -> f64 {
        match self {
            NodeLaw::Independent { personalization, .. } => personalization.mean(),
            _ => self.weighted_mean(|_, q| q),
        }
    }

    /// `E|𝒬|`.
    pub fn mean_abs_personalization(&self) -> f64 {
        match self {
            NodeLaw::Independent { personalization, .. } => personalization.mean_abs(),
            _ => self.weighted_mean(|_, q| q.abs()),
        }
    }

    pub fn describe(&self) -> serde_json::Value {
        match self {
            NodeLaw::Independent { count, personalization } => serde_json::json!({
                "kind": "independent",
                "count": count.law(),
                "personalization": personalization,
            }),
            NodeLaw::Empirical { rows, bias } => serde_json::json!({
                "kind": "empirical",
                "rows": rows.len(),
                "size_biased": bias.is_some(),
            }),
        }
    }
}

/// Law of an edge weight `𝒞`.
#[derive(Debug, Clone)]
pub enum WeightLaw {
    Scalar(ScalarLaw),
    /// `ζ / D̃` with `D̃` size-biased from the out-degree law.
    SizeBiasedRatio {
        out_degree: CountSampler,
        zeta: ScalarLaw,
    },
    /// Values drawn proportionally to `bias`.
    Empirical {
        values: Vec<f64>,
        bias: Vec<u64>,
    },
}

impl WeightLaw {
    pub fn sample(&self, rng: &mut SimRng) -> Result<f64> {
        match self {
            WeightLaw::Scalar(law) => Ok(law.sample(rng)),
            WeightLaw::SizeBiasedRatio { out_degree, zeta } => sample_limit_weight(out_degree, zeta, rng),
            WeightLaw::Empirical { values, bias } => Ok(values[pick_weighted(bias, rng)]),
        }
    }

    fn empirical_mean(values: &[f64], bias: &[u64], f: impl Fn(f64) -> f64) -> f64 {
        let total = *bias.last().unwrap() as f64;
        let mut prev = 0;
        values
            .iter()
            .zip(bias)
            .map(|(&v, &c)| {
                let w = (c - prev) as f64;
                prev = c;
                w * f(v)
            })
            .sum::<f64>()
            / total
    }

    /// `E[𝒞]`.
    pub fn mean(&self) -> f64 {
        match self {
            WeightLaw::Scalar(law) => law.mean(),
            WeightLaw::SizeBiasedRatio { out_degree, zeta } => zeta.mean() * out_degree.size_biased_inverse_moment(1.0),
            WeightLaw::Empirical { values, bias } => Self::empirical_mean(values, bias, |v| v),
        }
    }

    /// `E|𝒞|^p`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        match self {
            WeightLaw::Scalar(law) => match law {
                ScalarLaw::Constant { value } => value.abs().powf(p),
                ScalarLaw::Uniform { low, .. } if *low >= 0.0 => law.moment(p).unwrap_or(f64::NAN),
                ScalarLaw::Uniform { low, high } => {
                    // |U| for U uniform on [low, high] with low < 0 < high.
                    let (a, b) = (-low, *high);
                    (a.powf(p + 1.0) + b.powf(p + 1.0)) / ((p + 1.0) * (b + a))
                }
            },
            WeightLaw::SizeBiasedRatio { out_degree, zeta } => {
                let z = WeightLaw::Scalar(zeta.clone()).abs_moment(p);
                z * out_degree.size_biased_inverse_moment(p)
            }
            WeightLaw::Empirical { values, bias } => Self::empirical_mean(values, bias, |v| v.abs().powf(p)),
        }
    }

    pub fn mean_abs(&self) -> f64 {
        self.abs_moment(1.0)
    }

    /// Almost-sure bound on `|𝒞|`.
    pub fn bound(&self) -> f64 {
        match self {
            WeightLaw::Scalar(law) => law.abs_bound(),
            WeightLaw::SizeBiasedRatio { zeta, .. } => zeta.abs_bound(),
            WeightLaw::Empirical { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn describe(&self) -> serde_json::Value {
        match self {
            WeightLaw::Scalar(law) => serde_json::json!({ "kind": "scalar", "law": law }),
            WeightLaw::SizeBiasedRatio { out_degree, zeta } => serde_json::json!({
                "kind": "size_biased_ratio",
                "out_degree": out_degree.law(),
                "zeta": zeta,
            }),
            WeightLaw::Empirical { values, .. } => serde_json::json!({ "kind": "empirical", "values": values.len() }),
        }
    }
}

/// `𝒞 = ζ / D̃` with `D̃` drawn from the size-biased out-degree law and `ζ`
/// independent, so that `P(𝒞 ≤ x) = E[𝒟 1(ζ/𝒟 ≤ x)] / E[𝒟]`.
pub fn sample_limit_weight(out_degree: &CountSampler, zeta: &ScalarLaw, rng: &mut SimRng) -> Result<f64> {
    let d = out_degree.sample_size_biased(rng)?;
    Ok(zeta.sample(rng) / d as f64)
}

/// `(𝒩, 𝒬)` law and independent weight law of a weighted branching process.
#[derive(Debug, Clone)]
pub struct GenericBranchingVector {
    node: NodeLaw,
    weight: WeightLaw,
    rho_abs: f64,
}

impl GenericBranchingVector {
    pub fn new(node: NodeLaw, weight: WeightLaw) -> Self {
        let rho_abs = node.mean_count() * weight.mean_abs();
        Self { node, weight, rho_abs }
    }

    pub fn node(&self) -> &NodeLaw {
        &self.node
    }

    pub fn weight(&self) -> &WeightLaw {
        &self.weight
    }

    /// `ρ = E[𝒩] E[𝒞]`.
    pub fn rho(&self) -> f64 {
        self.node.mean_count() * self.weight.mean()
    }

    /// `E[𝒩] E|𝒞|`, the contraction factor of the mean absolute value.
    pub fn rho_abs(&self) -> f64 {
        self.rho_abs
    }

    /// `ρ_α = E[𝒩] E|𝒞|^α`.
    pub fn rho_alpha(&self, alpha: f64) -> f64 {
        self.node.mean_count() * self.weight.abs_moment(alpha)
    }

    pub fn ensure_subcritical(&self) -> Result<()> {
        let rho = self.rho_abs();
        if rho.is_finite() && rho < 1.0 {
            Ok(())
        } else {
            Err(Error::NotSubcritical { rho })
        }
    }

    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "node": self.node.describe(), "weight": self.weight.describe() })
    }
}

/// Root law `(𝒩₀, 𝒬₀)` together with the branching vector.
#[derive(Debug, Clone)]
pub struct LimitLaws {
    pub root: NodeLaw,
    pub branching: GenericBranchingVector,
}

impl LimitLaws {
    /// Limits of the IID algorithm: `𝒩₀ ≗ 𝒩`, `𝒬₀ ≗ 𝒬` and, since in- and
    /// out-degrees are independent, size-biasing leaves `(𝒩, 𝒬)` unchanged;
    /// the weight is `ζ / D̃`.
    pub fn iid(model: &DegreeModel) -> Self {
        let p = model.params();
        let node = NodeLaw::Independent {
            count: model.in_degree_law().clone(),
            personalization: p.personalization_law.clone(),
        };
        let weight =
            WeightLaw::SizeBiasedRatio { out_degree: model.out_degree_law().clone(), zeta: p.damping_law.clone() };
        Self { root: node.clone(), branching: GenericBranchingVector::new(node, weight) }
    }

    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "root": self.root.describe(), "branching": self.branching.describe() })
    }
}

/// A row of a sequence drawn with probability proportional to its out-degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchingRow {
    pub offspring: u64,
    pub personalization: f64,
    pub weight: f64,
}

/// The joint size-biased law of `(N, Q, C)` over the rows of a sequence, as
/// used by the thorny tree: weights keep their dependence on the row.
#[derive(Debug, Clone)]
pub struct JointEmpiricalLaw {
    rows: Vec<BranchingRow>,
    cumulative: Vec<u64>,
}

impl JointEmpiricalLaw {
    pub fn sample(&self, rng: &mut SimRng) -> BranchingRow {
        self.rows[pick_weighted(&self.cumulative, rng)]
    }

    /// Probability of each row index.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = *self.cumulative.last().unwrap() as f64;
        let mut prev = 0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = (c - prev) as f64 / total;
                prev = c;
                p
            })
            .collect()
    }
}

/// Both empirical laws of a sequence.
#[derive(Debug, Clone)]
pub struct EmpiricalLaws {
    /// Product form: size-biased `(N, Q)` paired with an independent
    /// size-biased weight.
    pub product: LimitLaws,
    pub joint: JointEmpiricalLaw,
}

/// Node-uniform law of `(N_i, Q_i)`; defined even without stubs.
pub fn empirical_root_law(seq: &ExtendedBiDegreeSequence) -> Result<NodeLaw> {
    if seq.is_empty() {
        return Err(invalid("empty sequence has no root law"));
    }
    let rows = seq.in_degrees().iter().copied().zip(seq.personalization().iter().copied()).collect();
    Ok(NodeLaw::Empirical { rows, bias: None })
}

/// Empirical root law (uniform over rows) and branching laws (rows drawn
/// proportionally to `D_i`; dangling rows never appear).
pub fn empirical_branching_laws(seq: &ExtendedBiDegreeSequence) -> Result<EmpiricalLaws> {
    let root = empirical_root_law(seq)?;
    if seq.total_stubs() == 0 {
        return Err(Error::NoStubs);
    }
    let keep: Vec<usize> = (0..seq.len()).filter(|&i| seq.out_degrees()[i] > 0).collect();
    let cumulative = prefix(keep.iter().map(|&i| seq.out_degrees()[i]));
    let rows: Vec<BranchingRow> = keep
        .iter()
        .map(|&i| BranchingRow {
            offspring: seq.in_degrees()[i],
            personalization: seq.personalization()[i],
            weight: seq.weights()[i],
        })
        .collect();
    let node = NodeLaw::Empirical {
        rows: rows.iter().map(|r| (r.offspring, r.personalization)).collect(),
        bias: Some(cumulative.clone()),
    };
    let weight = WeightLaw::Empirical { values: rows.iter().map(|r| r.weight).collect(), bias: cumulative.clone() };
    Ok(EmpiricalLaws {
        product: LimitLaws { root, branching: GenericBranchingVector::new(node, weight) },
        joint: JointEmpiricalLaw { rows, cumulative },
    })
}
