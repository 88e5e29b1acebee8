use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::pipeline::{ExperimentOutcome, SizeResult, BATCH_NAMES};
use crate::dcm::CouplingTime;
use crate::error::Result;
use crate::fmt_f64;
use crate::stats::{kr_distance, sorted_mse_with, EmpiricalDistribution};

/// Writes `bytes` to `path` through a temporary sibling and a rename, so an
/// interrupted run never leaves a truncated file under the final name.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.partial"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn to_json_bytes(value: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn present(batch: &[Option<f64>]) -> Vec<f64> {
    batch.iter().flatten().copied().collect()
}

fn summary(values: &[f64]) -> Value {
    if values.len() < 2 {
        return json!({ "count": values.len() });
    }
    let (mean, se) = crate::stats::mean_and_se(values);
    json!({ "count": values.len(), "mean": mean, "standard_error": se })
}

fn tau_summary(taus: &[Option<CouplingTime>], depth: usize) -> Value {
    let known: Vec<&CouplingTime> = taus.iter().flatten().collect();
    if known.is_empty() {
        return Value::Null;
    }
    let broken = known.iter().filter(|t| t.is_broken()).count();
    let within_depth = known.iter().filter(|t| !t.exceeds(depth as u32)).count();
    let mean = known.iter().map(|t| f64::from(t.value())).sum::<f64>() / known.len() as f64;
    json!({
        "count": known.len(),
        "broken": broken,
        "at_most_depth": within_depth,
        "mean_value": mean,
    })
}

/// Summary statistics for one size: batch means, pairwise KR distances and
/// the sorted MSE between the `R_inf` and `R_star` batches.
pub fn size_report(size: &SizeResult) -> Result<Value> {
    let batches: Vec<Vec<f64>> = size.batches().iter().map(|b| present(b)).collect();
    let dists: Vec<EmpiricalDistribution> =
        batches.iter().map(|b| EmpiricalDistribution::new(b.clone())).collect::<Result<_>>()?;
    let mut kr = serde_json::Map::new();
    for i in 0..4 {
        for j in i + 1..4 {
            if !dists[i].is_empty() && !dists[j].is_empty() {
                kr.insert(format!("{}~{}", BATCH_NAMES[i], BATCH_NAMES[j]), json!(kr_distance(&dists[i], &dists[j])?));
            }
        }
    }
    // Rank-paired statistics need equal counts: use the first common
    // number of successful replications of each batch.
    let m = batches[0].len().min(batches[3].len());
    let (mse, mse_unsquared) = if m >= 2 {
        let a = EmpiricalDistribution::new(batches[0][..m].to_vec())?;
        let b = EmpiricalDistribution::new(batches[3][..m].to_vec())?;
        (json!(sorted_mse_with(&a, &b, true)?), json!(sorted_mse_with(&a, &b, false)?))
    } else {
        (Value::Null, Value::Null)
    };
    let mut means = serde_json::Map::new();
    for (name, b) in BATCH_NAMES.iter().zip(&batches) {
        means.insert(name.to_string(), summary(b));
    }
    Ok(json!({
        "n": size.n,
        "depth": size.depth,
        "replications": size.r_inf.len(),
        "batches": means,
        "kr_distance": kr,
        "mse": mse,
        "mse_unsquared": mse_unsquared,
        "mse_pairs": m,
        "coupling_time": tau_summary(&size.taus, size.depth),
        "failures": size.failures,
    }))
}

pub fn experiment_report(config: &ExperimentConfig, outcome: &ExperimentOutcome) -> Result<Value> {
    let sizes = outcome.sizes.iter().map(size_report).collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "master_seed": config.master_seed,
        "config": config,
        "sizes": sizes,
    }))
}

/// `replication,R_inf,R_kn,R_hat,R_star`; failed entries are left empty.
pub fn batches_csv(size: &SizeResult) -> String {
    let mut out = String::from("replication,R_inf,R_kn,R_hat,R_star\n");
    let cell = |v: &Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for rep in 0..size.r_inf.len() {
        let _ = writeln!(
            out,
            "{rep},{},{},{},{}",
            cell(&size.r_inf[rep]),
            cell(&size.r_kn[rep]),
            cell(&size.r_hat[rep]),
            cell(&size.r_star[rep])
        );
    }
    out
}

/// ECDF of each batch evaluated on the merged sample values.
pub fn ecdf_csv(size: &SizeResult) -> Result<String> {
    let dists: Vec<EmpiricalDistribution> =
        size.batches().iter().map(|b| EmpiricalDistribution::new(present(b))).collect::<Result<_>>()?;
    let mut grid: Vec<f64> = dists.iter().flat_map(|d| d.sorted_values().iter().copied()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut out = format!("x,{}\n", BATCH_NAMES.map(|b| format!("F_{b}")).join(","));
    for x in grid {
        let row: Vec<String> = dists.iter().map(|d| fmt_f64(d.ecdf(x))).collect();
        let _ = writeln!(out, "{},{}", fmt_f64(x), row.join(","));
    }
    Ok(out)
}

/// Timing lines, kept in a separate log so the other outputs stay
/// byte-reproducible.
pub fn timing_log(timings: &[(String, std::time::Duration)]) -> String {
    timings.iter().map(|(stage, d)| format!("{stage}\t{:.3}s\n", d.as_secs_f64())).collect()
}

/// Writes batches, ECDF tables, the JSON report and the timing log.
pub fn write_experiment(config: &ExperimentConfig, outcome: &ExperimentOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let report = experiment_report(config, outcome)?;
    let mut files = Vec::new();
    for size in &outcome.sizes {
        let path = dir.join(format!("batches_n{}.csv", size.n));
        write_file(&path, batches_csv(size).as_bytes())?;
        files.push(path);
        let path = dir.join(format!("ecdf_n{}.csv", size.n));
        write_file(&path, ecdf_csv(size)?.as_bytes())?;
        files.push(path);
    }
    let path = dir.join("report.json");
    write_file(&path, &to_json_bytes(&report)?)?;
    files.push(path);
    let path = dir.join("timing.log");
    write_file(&path, timing_log(&outcome.timings).as_bytes())?;
    files.push(path);
    Ok(files)
}
