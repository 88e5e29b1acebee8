//! The command implementations behind the CLI verbs. Each validates its
//! inputs before creating the output directory and returns the files written.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;
use super::output::{timing_log, to_json_bytes, write_experiment, write_file};
use super::pipeline::run_experiment;
use super::tail::run_tailcheck;
use crate::dcm::{
    build_coupled, build_graph, read_edges_csv, tree_generation_sizes, write_edges_csv, write_tree_csv,
    CouplingOptions, CouplingTime, DirectedMultigraph,
};
use crate::error::{invalid, Error, Result};
use crate::fmt_f64;
use crate::rank::{power_iteration, residual_l1, write_rank_csv};
use crate::rng::{purpose, stream};
use crate::seqgen::{read_sequence_csv, write_sequence_csv, DegreeModel, ExtendedBiDegreeSequence, SequenceMeta};
use crate::wbp::{sample_endogenous, sample_r_star, truncation_bound, LimitLaws, WbpOptions};

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Parse(format!("input file {} does not exist", path.display())))
    }
}

fn load_sequence(path: &Path) -> Result<ExtendedBiDegreeSequence> {
    require_file(path)?;
    read_sequence_csv(path)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Writes all `(name, bytes)` pairs into `out`, creating it first.
fn emit(out: &Path, files: Vec<(&str, Vec<u8>)>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    files
        .into_iter()
        .map(|(name, bytes)| {
            let path = out.join(name);
            write_file(&path, &bytes)?;
            Ok(path)
        })
        .collect()
}

/// Generates one sequence of size `n` with the IID algorithm.
pub fn cmd_generate(config: &ExperimentConfig, n: usize, out: &Path) -> Result<Vec<PathBuf>> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let model = DegreeModel::new(config.model.clone())?;
    let outcome = model.run_iid_algorithm(n, &mut stream(config.master_seed, purpose::SEQUENCE, 0))?;
    let meta = SequenceMeta {
        n,
        total_stubs: outcome.sequence.total_stubs(),
        params: Some(config.model.clone()),
        master_seed: Some(config.master_seed),
        rounds: Some(outcome.rounds),
    };
    let csv = csv_bytes(|b| write_sequence_csv(&outcome.sequence, b))?;
    emit(out, vec![("sequence.csv", csv), ("sequence.json", to_json_bytes(&serde_json::to_value(&meta)?)?)])
}

/// Pairs the stubs of a stored sequence uniformly at random.
pub fn cmd_graph(config: &ExperimentConfig, sequence: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let seq = Arc::new(load_sequence(sequence)?);
    let graph = build_graph(seq, &mut stream(config.master_seed, purpose::GRAPH, 0))?;
    let csv = csv_bytes(|b| write_edges_csv(&graph, b))?;
    emit(out, vec![("edges.csv", csv)])
}

#[derive(Debug, Serialize)]
struct RankMeta {
    iterations: usize,
    certified_error_bound: f64,
    last_step_l2: f64,
    last_step_l1: f64,
    residual_l1: f64,
    residual_bound: f64,
}

/// Power iteration on a stored sequence and edge list.
pub fn cmd_rank(config: &ExperimentConfig, sequence: &Path, edges: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let ranking = config.ranking_config();
    ranking.validate()?;
    let seq = Arc::new(load_sequence(sequence)?);
    require_file(edges)?;
    let edge_list = read_edges_csv(File::open(edges)?)?;
    let graph = DirectedMultigraph::from_edges(seq.clone(), &edge_list)?;
    let started = Instant::now();
    let r = power_iteration(&graph, seq.personalization(), &ranking)?;
    let elapsed = started.elapsed();
    let c = ranking.damping_bound;
    let meta = RankMeta {
        iterations: r.iterations,
        certified_error_bound: r.certified_error_bound,
        last_step_l2: r.last_step_l2,
        last_step_l1: r.last_step_l1,
        residual_l1: residual_l1(&graph, &r.values, seq.personalization())?,
        residual_bound: ranking.tolerance * (seq.len() as f64).sqrt() * (1.0 + c) / (1.0 - c),
    };
    let csv = csv_bytes(|b| write_rank_csv(&r.values, b))?;
    emit(
        out,
        vec![
            ("rank.csv", csv),
            ("rank.json", to_json_bytes(&serde_json::to_value(&meta)?)?),
            ("timing.log", timing_log(&[("power iteration".into(), elapsed)]).into_bytes()),
        ],
    )
}

fn tau_json(tau: CouplingTime) -> serde_json::Value {
    match tau {
        CouplingTime::Broken(g) => json!({ "broken": true, "value": g }),
        CouplingTime::Intact { explored } => json!({ "broken": false, "value": tau.value(), "explored": explored }),
    }
}

/// Coupled graph and thorny tree of depth `depth` on a stored sequence.
pub fn cmd_couple(config: &ExperimentConfig, sequence: &Path, depth: usize, out: &Path) -> Result<Vec<PathBuf>> {
    let seq = Arc::new(load_sequence(sequence)?);
    let opts = CouplingOptions { max_generations: depth, tree_node_cap: config.tree_node_cap };
    let res = build_coupled(seq, &opts, &mut stream(config.master_seed, purpose::COUPLING, 0))?;
    let (z, v) = tree_generation_sizes(&res.tree);
    let meta = json!({
        "root": res.root,
        "depth": depth,
        "tau": tau_json(res.tau),
        "tree_nodes": res.tree.len(),
        "inbound_per_generation": z,
        "outbound_per_generation": v,
    });
    let edges = csv_bytes(|b| write_edges_csv(&res.graph, b))?;
    let tree = csv_bytes(|b| write_tree_csv(&res.tree, b))?;
    emit(out, vec![("edges.csv", edges), ("tree.csv", tree), ("coupling.json", to_json_bytes(&meta)?)])
}

/// Which weighted-branching quantity to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WbpKind {
    Endogenous,
    RStar,
}

/// Samples `ℛ` or `ℛ*` from the limit laws of the configured model.
pub fn cmd_wbp(
    config: &ExperimentConfig,
    kind: WbpKind,
    samples: usize,
    generations: usize,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    if samples == 0 {
        return Err(invalid("samples must be at least 1"));
    }
    let model = DegreeModel::new(config.model.clone())?;
    let limits = LimitLaws::iid(&model);
    limits.branching.ensure_subcritical()?;
    let opts = WbpOptions { generations, ..WbpOptions::default() };
    let draws: Vec<Result<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(config.master_seed, purpose::WBP, i as u64);
            match kind {
                WbpKind::Endogenous => sample_endogenous(&limits.branching, &opts, &mut rng),
                WbpKind::RStar => sample_r_star(&limits, &opts, &mut rng),
            }
        })
        .collect();
    let mut csv = String::from("value\n");
    let mut aborted = 0usize;
    for d in draws {
        match d {
            Ok(v) => {
                csv.push_str(&fmt_f64(v));
                csv.push('\n');
            }
            Err(Error::PopulationCap { .. }) => aborted += 1,
            Err(e) => return Err(e),
        }
    }
    let meta = json!({
        "kind": match kind { WbpKind::Endogenous => "endogenous", WbpKind::RStar => "r_star" },
        "law": limits.describe(),
        "generations": generations,
        "r_leaf": opts.r_leaf,
        "master_seed": config.master_seed,
        "samples": samples,
        "aborted": aborted,
        "rho": limits.branching.rho(),
        "truncation_bound": truncation_bound(&limits.branching, &opts),
    });
    emit(out, vec![("wbp_samples.csv", csv.into_bytes()), ("wbp.json", to_json_bytes(&meta)?)])
}

/// The full comparison experiment.
pub fn cmd_experiment(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let outcome = run_experiment(config)?;
    write_experiment(config, &outcome, out)
}

/// Tail check of `ℛ*` against the in-degree tail.
pub fn cmd_tailcheck(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let report = run_tailcheck(config)?;
    emit(out, vec![("tail_report.json", to_json_bytes(&serde_json::to_value(&report)?)?)])
}
