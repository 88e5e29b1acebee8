use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::dcm::{build_coupled, build_graph, grow_tree, CouplingOptions, CouplingTime};
use crate::error::{Error, Result};
use crate::rank::{iterate_fixed, power_iteration};
use crate::rng::{purpose, stream};
use crate::seqgen::DegreeModel;
use crate::wbp::{sample_r_star, tbt_root_rank, LimitLaws, WbpOptions};

/// Names of the four sample batches, in output column order.
pub const BATCH_NAMES: [&str; 4] = ["R_inf", "R_kn", "R_hat", "R_star"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationFailure {
    pub batch: &'static str,
    pub replication: usize,
    pub message: String,
}

/// The four batches for one graph size. Failed replications hold `None`.
#[derive(Debug, Clone)]
pub struct SizeResult {
    pub n: usize,
    pub depth: usize,
    pub r_inf: Vec<Option<f64>>,
    pub r_kn: Vec<Option<f64>>,
    pub r_hat: Vec<Option<f64>>,
    pub r_star: Vec<Option<f64>>,
    pub taus: Vec<Option<CouplingTime>>,
    pub failures: Vec<ReplicationFailure>,
}

impl SizeResult {
    pub fn batches(&self) -> [&[Option<f64>]; 4] {
        [&self.r_inf, &self.r_kn, &self.r_hat, &self.r_star]
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub sizes: Vec<SizeResult>,
    /// Wall-clock time per stage; kept out of the deterministic outputs.
    pub timings: Vec<(String, Duration)>,
}

struct GraphSample {
    r_inf: f64,
    r_kn: f64,
    r_hat: f64,
    tau: Option<CouplingTime>,
}

fn stream_index(size_index: usize, replication: usize) -> u64 {
    ((size_index as u64) << 32) | replication as u64
}

fn fresh_graph_sample(
    config: &ExperimentConfig,
    model: &DegreeModel,
    n: usize,
    depth: usize,
    index: u64,
) -> Result<GraphSample> {
    let mut rng = stream(config.master_seed, purpose::SEQUENCE, index);
    let seq = Arc::new(model.run_iid_algorithm(n, &mut rng)?.sequence);
    let mut rng = stream(config.master_seed, purpose::COUPLING, index);
    let opts = CouplingOptions { max_generations: depth, tree_node_cap: config.tree_node_cap };
    let coupled = build_coupled(seq.clone(), &opts, &mut rng)?;
    let q = seq.personalization();
    let full = power_iteration(&coupled.graph, q, &config.ranking_config())?;
    let truncated = iterate_fixed(&coupled.graph, q, config.ranking.r0, depth)?;
    Ok(GraphSample {
        r_inf: full.values[coupled.root],
        r_kn: truncated[coupled.root],
        r_hat: tbt_root_rank(&coupled.tree, config.ranking.r0),
        tau: Some(coupled.tau),
    })
}

/// One sequence and graph per size; each replication ranks a uniformly
/// chosen node and grows its own tree from that node.
fn reused_graph_samples(
    config: &ExperimentConfig,
    model: &DegreeModel,
    n: usize,
    depth: usize,
    size_index: usize,
) -> Result<Vec<Result<GraphSample>>> {
    let shared = stream_index(size_index, u32::MAX as usize);
    let mut rng = stream(config.master_seed, purpose::SEQUENCE, shared);
    let seq = Arc::new(model.run_iid_algorithm(n, &mut rng)?.sequence);
    let mut rng = stream(config.master_seed, purpose::GRAPH, shared);
    let graph = build_graph(seq.clone(), &mut rng)?;
    let q = seq.personalization();
    let full = power_iteration(&graph, q, &config.ranking_config())?;
    let truncated = iterate_fixed(&graph, q, config.ranking.r0, depth)?;
    let opts = CouplingOptions { max_generations: depth, tree_node_cap: config.tree_node_cap };
    Ok((0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream(config.master_seed, purpose::COUPLING, stream_index(size_index, rep));
            let v = rng.random_range(0..n);
            let tree = grow_tree(&seq, v, &opts, &mut rng)?;
            Ok(GraphSample {
                r_inf: full.values[v],
                r_kn: truncated[v],
                r_hat: tbt_root_rank(&tree, config.ranking.r0),
                tau: None,
            })
        })
        .collect())
}

/// Draws the `ℛ*` batch for one size.
pub fn r_star_batch(
    limits: &LimitLaws,
    opts: &WbpOptions,
    master_seed: u64,
    size_index: usize,
    count: usize,
) -> Vec<Result<f64>> {
    (0..count)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream(master_seed, purpose::WBP, stream_index(size_index, rep));
            sample_r_star(limits, opts, &mut rng)
        })
        .collect()
}

/// Runs every size of the experiment; aborts if the failure budget is
/// exceeded for any size.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let model = DegreeModel::new(config.model.clone())?;
    let limits = LimitLaws::iid(&model);
    let wbp_opts = WbpOptions { generations: config.wbp_generations, ..WbpOptions::default() };
    let mut sizes = Vec::new();
    let mut timings = Vec::new();
    for (size_index, &n) in config.n_values.iter().enumerate() {
        let depth = config.tbt_depth_for(n);
        let started = Instant::now();
        let graph_samples: Vec<Result<GraphSample>> = if config.reuse_graph {
            reused_graph_samples(config, &model, n, depth, size_index)?
        } else {
            (0..config.replications)
                .into_par_iter()
                .map(|rep| fresh_graph_sample(config, &model, n, depth, stream_index(size_index, rep)))
                .collect()
        };
        timings.push((format!("graph samples n={n}"), started.elapsed()));
        let started = Instant::now();
        let stars = r_star_batch(&limits, &wbp_opts, config.master_seed, size_index, config.replications);
        timings.push((format!("r_star samples n={n}"), started.elapsed()));

        let mut result = SizeResult {
            n,
            depth,
            r_inf: Vec::new(),
            r_kn: Vec::new(),
            r_hat: Vec::new(),
            r_star: Vec::new(),
            taus: Vec::new(),
            failures: Vec::new(),
        };
        for (rep, s) in graph_samples.into_iter().enumerate() {
            match s {
                Ok(s) => {
                    result.r_inf.push(Some(s.r_inf));
                    result.r_kn.push(Some(s.r_kn));
                    result.r_hat.push(Some(s.r_hat));
                    result.taus.push(s.tau);
                }
                Err(e) => {
                    result.failures.push(ReplicationFailure {
                        batch: "graph",
                        replication: rep,
                        message: e.to_string(),
                    });
                    result.r_inf.push(None);
                    result.r_kn.push(None);
                    result.r_hat.push(None);
                    result.taus.push(None);
                }
            }
        }
        for (rep, s) in stars.into_iter().enumerate() {
            match s {
                Ok(v) => result.r_star.push(Some(v)),
                Err(e) => {
                    result.failures.push(ReplicationFailure {
                        batch: "R_star",
                        replication: rep,
                        message: e.to_string(),
                    });
                    result.r_star.push(None);
                }
            }
        }
        let allowed = (config.failure_budget * config.replications as f64).floor() as usize;
        let graph_failures = result.failures.iter().filter(|f| f.batch == "graph").count();
        let star_failures = result.failures.len() - graph_failures;
        if graph_failures.max(star_failures) > allowed {
            return Err(Error::FailureBudget(format!(
                "n = {n}: {} failed replications exceed the budget of {allowed}; first: {}",
                graph_failures.max(star_failures),
                result.failures[0].message
            )));
        }
        sizes.push(result);
    }
    Ok(ExperimentOutcome { sizes, timings })
}
