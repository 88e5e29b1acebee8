use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::rng::{purpose, stream};
use crate::seqgen::{CountSampler, DegreeModel};
use crate::stats::{tail_constant, tail_index_estimate, EmpiricalDistribution, TailCase, TailInputs, TailPrediction};
use crate::wbp::{sample_r_star, GenericBranchingVector, LimitLaws, NodeLaw, WbpOptions};

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub master_seed: u64,
    pub samples: usize,
    pub aborted: usize,
    pub generations: usize,
    /// All samples equal: no tail to measure.
    pub degenerate: bool,
    pub top_fraction: f64,
    pub hill_index: Option<f64>,
    pub quantile: f64,
    /// The `quantile`-th order statistic of the `ℛ*` sample.
    pub threshold: f64,
    pub r_star_tail: f64,
    /// `P(𝒩 > threshold)` under the configured in-degree law.
    pub count_tail: f64,
    pub empirical_ratio: Option<f64>,
    pub inputs: TailInputs,
    pub prediction: Option<TailPrediction>,
}

/// The limit laws of the tail check, with the count law replaced if asked.
pub fn tail_limits(config: &ExperimentConfig) -> Result<(LimitLaws, CountSampler)> {
    let t = &config.tail;
    let model = DegreeModel::new(t.model.clone())?;
    let mut limits = LimitLaws::iid(&model);
    let count = match &t.count_law {
        Some(law) => CountSampler::new(law.clone())?,
        None => model.in_degree_law().clone(),
    };
    let node = NodeLaw::Independent { count: count.clone(), personalization: t.model.personalization_law.clone() };
    limits.root = node.clone();
    limits.branching = GenericBranchingVector::new(node, limits.branching.weight().clone());
    Ok((limits, count))
}

/// Draws `ℛ*` samples and compares their upper tail with the in-degree tail.
pub fn run_tailcheck(config: &ExperimentConfig) -> Result<TailReport> {
    config.validate_tail()?;
    let t = &config.tail;
    let (limits, count) = tail_limits(config)?;
    let alpha = t.model.alpha;
    let gbv = &limits.branching;
    let mean_count = limits.root.mean_count();
    let inputs = TailInputs {
        mean_root_count: mean_count,
        weight_alpha_moment: gbv.weight().abs_moment(alpha),
        kappa: 1.0,
        rho: gbv.rho(),
        rho_alpha: gbv.rho_alpha(alpha),
        mean_personalization: gbv.node().mean_personalization(),
        mean_weight: gbv.weight().mean(),
        alpha,
    };
    let prediction = tail_constant(&inputs, TailCase::CountDominant)?;
    let opts = WbpOptions { generations: t.generations, ..WbpOptions::default() };
    let draws: Vec<Result<f64>> = (0..t.samples)
        .into_par_iter()
        .map(|i| sample_r_star(&limits, &opts, &mut stream(config.master_seed, purpose::TAIL, i as u64)))
        .collect();
    let mut values = Vec::with_capacity(draws.len());
    let mut aborted = 0;
    for d in draws {
        match d {
            Ok(v) => values.push(v),
            Err(Error::PopulationCap { .. }) => aborted += 1,
            Err(e) => return Err(e),
        }
    }
    let dist = EmpiricalDistribution::new(values)?;
    if dist.len() < 2 {
        return Err(Error::InsufficientData("too few tail samples survived".into()));
    }
    let sorted = dist.sorted_values();
    let degenerate = sorted[0] == sorted[sorted.len() - 1];
    let hill_index = if degenerate { None } else { tail_index_estimate(&dist, t.top_fraction).ok() };
    let threshold = dist.quantile(t.quantile);
    let r_star_tail = 1.0 - dist.ecdf(threshold);
    let count_tail = if threshold < 0.0 {
        1.0
    } else {
        let table = count.cdf_table(threshold.floor() as u64);
        (1.0 - table.last().copied().unwrap_or(0.0)).max(0.0)
    };
    let empirical_ratio = (!degenerate && count_tail > 0.0).then(|| r_star_tail / count_tail);
    Ok(TailReport {
        master_seed: config.master_seed,
        samples: t.samples,
        aborted,
        generations: t.generations,
        degenerate,
        top_fraction: t.top_fraction,
        hill_index,
        quantile: t.quantile,
        threshold,
        r_star_tail,
        count_tail,
        empirical_ratio,
        inputs,
        prediction: (!degenerate).then_some(prediction),
    })
}
