//! Weighted branching processes: the thorny-tree root rank, the endogenous
//! solution `ℛ` of the linear fixed-point equation and its root mixture `ℛ*`.

mod laws;

pub use laws::{
    empirical_branching_laws, empirical_root_law, sample_limit_weight, BranchingRow, EmpiricalLaws,
    GenericBranchingVector, JointEmpiricalLaw, LimitLaws, NodeLaw, WeightLaw,
};

use crate::dcm::ThornyTree;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Default number of generations simulated for `ℛ`.
pub const DEFAULT_GENERATIONS: usize = 10;
/// Cumulative nodes allowed in one sample before it is abandoned.
pub const DEFAULT_NODE_CAP: u64 = 100_000_000;

/// Root value of the depth-`k` recursion on a thorny tree: nodes in the
/// last generation take `r0`, others `Q̂ + Σ Ĉ_child · value(child)`.
pub fn tbt_root_rank(tree: &ThornyTree, r0: f64) -> f64 {
    let nodes = tree.nodes();
    let depth = tree.depth();
    let mut value = vec![0.0; nodes.len()];
    for i in (0..nodes.len()).rev() {
        let node = &nodes[i];
        value[i] = if node.generation as usize == depth {
            r0
        } else {
            node.personalization + tree.children(i).map(|c| nodes[c].weight * value[c]).sum::<f64>()
        };
    }
    value[0]
}

/// The same value as a weighted sum: `Σ_{gen k} Π̂ r0 + Σ_{gen < k} Π̂ Q̂`.
pub fn tbt_root_rank_closed_form(tree: &ThornyTree, r0: f64) -> f64 {
    let depth = tree.depth();
    tree.nodes().iter().map(|n| if n.generation as usize == depth { n.pi * r0 } else { n.pi * n.personalization }).sum()
}

/// Options for sampling `ℛ` and `ℛ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WbpOptions {
    pub generations: usize,
    /// Value given to nodes at the truncation depth.
    pub r_leaf: f64,
    pub node_cap: u64,
}

impl Default for WbpOptions {
    fn default() -> Self {
        Self { generations: DEFAULT_GENERATIONS, r_leaf: 0.0, node_cap: DEFAULT_NODE_CAP }
    }
}

struct Walker<'a> {
    gbv: &'a GenericBranchingVector,
    r_leaf: f64,
    cap: u64,
    visited: u64,
}

impl Walker<'_> {
    fn value(&mut self, remaining: usize, rng: &mut SimRng) -> Result<f64> {
        self.visited += 1;
        if self.visited > self.cap {
            return Err(Error::PopulationCap { cap: self.cap });
        }
        if remaining == 0 {
            return Ok(self.r_leaf);
        }
        let (count, q) = self.gbv.node().sample(rng);
        let mut total = q;
        for _ in 0..count {
            let c = self.gbv.weight().sample(rng)?;
            total += c * self.value(remaining - 1, rng)?;
        }
        Ok(total)
    }
}

/// One draw of the endogenous solution truncated at `generations`, built
/// depth-first without storing the tree.
pub fn sample_endogenous(gbv: &GenericBranchingVector, opts: &WbpOptions, rng: &mut SimRng) -> Result<f64> {
    gbv.ensure_subcritical()?;
    let mut walker = Walker { gbv, r_leaf: opts.r_leaf, cap: opts.node_cap, visited: 0 };
    walker.value(opts.generations, rng)
}

/// One draw of `ℛ* = Σ_{i ≤ 𝒩₀} 𝒞_i ℛ_i + 𝒬₀`, each `ℛ_i` truncated at
/// `generations - 1`. With zero generations the leaf value is returned.
pub fn sample_r_star(limits: &LimitLaws, opts: &WbpOptions, rng: &mut SimRng) -> Result<f64> {
    let gbv = &limits.branching;
    gbv.ensure_subcritical()?;
    if opts.generations == 0 {
        return Ok(opts.r_leaf);
    }
    let mut walker = Walker { gbv, r_leaf: opts.r_leaf, cap: opts.node_cap, visited: 1 };
    let (count, q) = limits.root.sample(rng);
    let mut total = q;
    for _ in 0..count {
        let c = gbv.weight().sample(rng)?;
        total += c * walker.value(opts.generations - 1, rng)?;
    }
    Ok(total)
}

/// Bound on `|E[truncated sample] - E[ℛ]|`:
/// `|r_leaf| ρ^k + E|𝒬| ρ^k / (1 - ρ)` with `ρ = E[𝒩] E|𝒞|`.
pub fn truncation_bound(gbv: &GenericBranchingVector, opts: &WbpOptions) -> f64 {
    let rho = gbv.rho_abs();
    let rk = rho.powi(opts.generations as i32);
    opts.r_leaf.abs() * rk + gbv.node().mean_abs_personalization() * rk / (1.0 - rho)
}

/// `E[ℛ] = E[𝒬] / (1 - ρ)`.
pub fn endogenous_mean(gbv: &GenericBranchingVector) -> f64 {
    gbv.node().mean_personalization() / (1.0 - gbv.rho())
}

/// `E[ℛ*] = E[𝒬₀] + E[𝒩₀] E[𝒞] E[ℛ]`.
pub fn r_star_mean(limits: &LimitLaws) -> f64 {
    limits.root.mean_personalization()
        + limits.root.mean_count() * limits.branching.weight().mean() * endogenous_mean(&limits.branching)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::seqgen::{CountLaw, CountSampler, DegreeModel, DegreeModelParams, ExtendedBiDegreeSequence, ScalarLaw};

    fn point(n: u64, q: f64) -> NodeLaw {
        NodeLaw::Independent {
            count: CountSampler::new(CountLaw::PointMass { value: n }).unwrap(),
            personalization: ScalarLaw::constant(q),
        }
    }

    #[test]
    fn limit_weight_of_point_masses() {
        let d = CountSampler::new(CountLaw::PointMass { value: 2 }).unwrap();
        let mut rng = stream(1, 4, 0);
        for _ in 0..100 {
            assert_eq!(sample_limit_weight(&d, &ScalarLaw::constant(0.3), &mut rng).unwrap(), 0.15);
        }
        let zero = CountSampler::new(CountLaw::PointMass { value: 0 }).unwrap();
        assert!(matches!(sample_limit_weight(&zero, &ScalarLaw::constant(0.3), &mut rng), Err(Error::NoStubs)));
    }

    #[test]
    fn limit_weight_size_biases_two_point_law() {
        let d = CountSampler::new(CountLaw::Finite { support: vec![1, 2], probs: vec![0.5, 0.5] }).unwrap();
        let mut rng = stream(2, 4, 0);
        let m = 200_000;
        let hits =
            (0..m).filter(|_| sample_limit_weight(&d, &ScalarLaw::constant(0.3), &mut rng).unwrap() == 0.3).count();
        let p = 1.0 / 3.0;
        let se = (p * (1.0 - p) / m as f64).sqrt();
        assert!((hits as f64 / m as f64 - p).abs() < 3.0 * se);
        let w = WeightLaw::SizeBiasedRatio { out_degree: d, zeta: ScalarLaw::constant(0.3) };
        assert!((w.mean() - (0.3 / 3.0 + 0.15 * 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn endogenous_trivial_cases() {
        let mut rng = stream(3, 4, 0);
        let dead = GenericBranchingVector::new(
            NodeLaw::Independent {
                count: CountSampler::new(CountLaw::PointMass { value: 0 }).unwrap(),
                personalization: ScalarLaw::Uniform { low: 0.0, high: 1.0 },
            },
            WeightLaw::Scalar(ScalarLaw::constant(0.3)),
        );
        let mut probe = stream(3, 4, 0);
        for _ in 0..10 {
            let expected = ScalarLaw::Uniform { low: 0.0, high: 1.0 }.sample(&mut probe);
            assert_eq!(sample_endogenous(&dead, &WbpOptions::default(), &mut rng).unwrap(), expected);
        }
        let zero_q = GenericBranchingVector::new(point(2, 0.0), WeightLaw::Scalar(ScalarLaw::constant(0.2)));
        assert_eq!(sample_endogenous(&zero_q, &WbpOptions::default(), &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn refuses_supercritical() {
        let gbv = GenericBranchingVector::new(point(4, 1.0), WeightLaw::Scalar(ScalarLaw::constant(0.3)));
        let mut rng = stream(4, 4, 0);
        assert!(matches!(sample_endogenous(&gbv, &WbpOptions::default(), &mut rng), Err(Error::NotSubcritical { .. })));
    }

    #[test]
    fn deterministic_tree_value() {
        // Binary tree with weight 0.2: value(k) = q + 0.4 value(k-1).
        let gbv = GenericBranchingVector::new(point(2, 1.0), WeightLaw::Scalar(ScalarLaw::constant(0.2)));
        let opts = WbpOptions { generations: 3, r_leaf: 5.0, node_cap: 1000 };
        let v = sample_endogenous(&gbv, &opts, &mut stream(5, 4, 0)).unwrap();
        let mut expect = 5.0;
        for _ in 0..3 {
            expect = 1.0 + 0.4 * expect;
        }
        assert!((v - expect).abs() < 1e-12);
        let capped = WbpOptions { node_cap: 5, ..opts };
        assert!(matches!(sample_endogenous(&gbv, &capped, &mut stream(5, 4, 0)), Err(Error::PopulationCap { cap: 5 })));
    }

    #[test]
    fn r_star_with_dead_root() {
        let limits = LimitLaws {
            root: point(0, 0.7),
            branching: GenericBranchingVector::new(point(1, 0.7), WeightLaw::Scalar(ScalarLaw::constant(0.3))),
        };
        assert_eq!(sample_r_star(&limits, &WbpOptions::default(), &mut stream(6, 4, 0)).unwrap(), 0.7);
    }

    #[test]
    fn r_star_mean_of_reference_limits() {
        let model = DegreeModel::new(DegreeModelParams::reference_default()).unwrap();
        let limits = LimitLaws::iid(&model);
        // Zeta out-degrees are at least one, so E[𝒞] = c / E[𝒟] and ρ = c.
        assert!((limits.branching.rho() - 0.3).abs() < 1e-12);
        assert!((r_star_mean(&limits) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_laws_size_bias_rows() {
        let seq = ExtendedBiDegreeSequence::pagerank(vec![1, 1, 2], vec![1, 3, 0], 0.3).unwrap();
        let laws = empirical_branching_laws(&seq).unwrap();
        assert_eq!(laws.joint.probabilities(), vec![0.25, 0.75]);
        let mut rng = stream(7, 4, 0);
        for _ in 0..1000 {
            let row = laws.joint.sample(&mut rng);
            assert_ne!(row.offspring, 2, "dangling row drawn");
        }
        let empty = ExtendedBiDegreeSequence::pagerank(vec![0, 0], vec![0, 0], 0.3).unwrap();
        assert!(empirical_root_law(&empty).is_ok());
        assert!(matches!(empirical_branching_laws(&empty), Err(Error::NoStubs)));
    }

    #[test]
    fn constant_rows_give_point_masses() {
        let seq = ExtendedBiDegreeSequence::pagerank(vec![2; 4], vec![2; 4], 0.3).unwrap();
        let laws = empirical_branching_laws(&seq).unwrap();
        let mut rng = stream(8, 4, 0);
        for _ in 0..100 {
            assert_eq!(laws.product.root.sample(&mut rng), (2, 0.7));
            assert_eq!(laws.product.branching.node().sample(&mut rng), (2, 0.7));
            assert_eq!(laws.product.branching.weight().sample(&mut rng).unwrap(), 0.15);
        }
    }
}
