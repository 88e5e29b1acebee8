//! Generalized PageRank `R = R M + Q` on a configuration multigraph, where
//! `M[i][j] = s_ij C_i` and `s_ij` counts the edges from `i` to `j`.

use std::io::{BufWriter, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dcm::DirectedMultigraph;
use crate::error::{invalid, Error, Result};
use crate::fmt_f64;

/// Largest system `solve_exact` will factor densely.
pub const DENSE_GUARD: usize = 5000;

const PARALLEL_THRESHOLD: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingConfig {
    pub r0: f64,
    pub max_k: usize,
    /// L2 stopping threshold `ε₀` on successive iterates.
    pub tolerance: f64,
    /// The certified bound `c` on `max |C_i| D_i`.
    pub damping_bound: f64,
}

impl RankingConfig {
    pub fn new(damping_bound: f64) -> Self {
        Self { r0: 1.0, max_k: 200, tolerance: 1e-10, damping_bound }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping_bound > 0.0 && self.damping_bound < 1.0) {
            return Err(invalid(format!("damping bound must lie in (0, 1), got {}", self.damping_bound)));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_k < 1 {
            return Err(invalid("max_k must be at least 1"));
        }
        if !self.r0.is_finite() {
            return Err(invalid("r0 must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankVector {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// `(|r0| + Σ|Q_i| / (n (1 - c))) c^k`; zero for an exact solve.
    pub certified_error_bound: f64,
    /// Norms of the last iterate difference.
    pub last_step_l2: f64,
    pub last_step_l1: f64,
}

/// `y = x M`, i.e. `y_j = Σ_i s_ij C_i x_i`, in one pass over the edges.
pub fn apply_m_transpose(graph: &DirectedMultigraph, x: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; graph.node_count()];
    apply_into(graph, x, &mut y)?;
    Ok(y)
}

/// Writes `x M` into `y`. Each target sums its in-edges in stored order, so
/// the result does not depend on the number of threads.
fn apply_into(graph: &DirectedMultigraph, x: &[f64], y: &mut [f64]) -> Result<()> {
    let n = graph.node_count();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    let weights = graph.sequence().weights();
    let offsets = graph.in_offsets();
    let sources = graph.sources();
    let cell = |j: usize| -> f64 {
        sources[offsets[j]..offsets[j + 1]].iter().map(|&i| weights[i as usize] * x[i as usize]).sum()
    };
    if n >= PARALLEL_THRESHOLD {
        y.par_iter_mut().enumerate().for_each(|(j, yj)| *yj = cell(j));
    } else {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = cell(j);
        }
    }
    Ok(())
}

fn check_inputs(graph: &DirectedMultigraph, q: &[f64], c: f64) -> Result<()> {
    let n = graph.node_count();
    if q.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.len() });
    }
    let load = graph.sequence().max_weight_load();
    if load > c {
        return Err(Error::Certification { observed: load, bound: c });
    }
    Ok(())
}

/// `(|r0| + meanAbsQ / (1 - c)) c^k`.
pub fn error_bound(r0: f64, c: f64, mean_abs_q: f64, k: usize) -> f64 {
    (r0.abs() + mean_abs_q / (1.0 - c)) * c.powi(k as i32)
}

fn mean_abs(q: &[f64]) -> f64 {
    if q.is_empty() {
        0.0
    } else {
        q.iter().map(|v| v.abs()).sum::<f64>() / q.len() as f64
    }
}

/// Iterates `R(k) = R(k-1) M + Q` from `R(0) = r0·1` until the L2 step falls
/// below the tolerance or `max_k` steps were taken.
pub fn power_iteration(graph: &DirectedMultigraph, q: &[f64], config: &RankingConfig) -> Result<RankVector> {
    config.validate()?;
    check_inputs(graph, q, config.damping_bound)?;
    let n = graph.node_count();
    let mut current = vec![config.r0; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let (mut l2, mut l1) = (f64::INFINITY, f64::INFINITY);
    while iterations < config.max_k {
        apply_into(graph, &current, &mut next)?;
        let (mut s2, mut s1) = (0.0, 0.0);
        for ((nv, &qv), &cv) in next.iter_mut().zip(q).zip(&current) {
            *nv += qv;
            let d = *nv - cv;
            s2 += d * d;
            s1 += d.abs();
        }
        std::mem::swap(&mut current, &mut next);
        iterations += 1;
        l2 = s2.sqrt();
        l1 = s1;
        if l2 < config.tolerance {
            break;
        }
    }
    Ok(RankVector {
        values: current,
        iterations,
        certified_error_bound: error_bound(config.r0, config.damping_bound, mean_abs(q), iterations),
        last_step_l2: l2,
        last_step_l1: l1,
    })
}

/// Exactly `k` iterations from `r0·1`, with no stopping rule.
pub fn iterate_fixed(graph: &DirectedMultigraph, q: &[f64], r0: f64, k: usize) -> Result<Vec<f64>> {
    let n = graph.node_count();
    if q.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.len() });
    }
    let mut current = vec![r0; n];
    let mut next = vec![0.0; n];
    for _ in 0..k {
        apply_into(graph, &current, &mut next)?;
        for (nv, &qv) in next.iter_mut().zip(q) {
            *nv += qv;
        }
        std::mem::swap(&mut current, &mut next);
    }
    Ok(current)
}

/// `‖R M + Q - R‖₁`.
pub fn residual_l1(graph: &DirectedMultigraph, r: &[f64], q: &[f64]) -> Result<f64> {
    let y = apply_m_transpose(graph, r)?;
    if q.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: q.len() });
    }
    Ok(y.iter().zip(q).zip(r).map(|((a, b), c)| (a + b - c).abs()).sum())
}

/// Dense LU solve of `(I - Mᵀ) R = Q`, for small graphs.
pub fn solve_exact(graph: &DirectedMultigraph, q: &[f64]) -> Result<RankVector> {
    let n = graph.node_count();
    if n > DENSE_GUARD {
        return Err(Error::TooLarge { n, guard: DENSE_GUARD });
    }
    if q.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.len() });
    }
    let weights = graph.sequence().weights();
    let mut a = DMatrix::<f64>::identity(n, n);
    for (i, j) in graph.edges() {
        a[(j as usize, i as usize)] -= weights[i as usize];
    }
    let rhs = DVector::from_column_slice(q);
    let lu = a.clone().lu();
    let sol = lu.solve(&rhs).ok_or(Error::Singular)?;
    let resid = (&a * &sol - &rhs).amax();
    let qmax = rhs.amax();
    if !(resid <= 1e-10 * (1.0 + qmax)) {
        return Err(Error::Singular);
    }
    Ok(RankVector {
        values: sol.iter().copied().collect(),
        iterations: 0,
        certified_error_bound: 0.0,
        last_step_l2: 0.0,
        last_step_l1: 0.0,
    })
}

/// Writes `node_id,R`.
pub fn write_rank_csv<W: Write>(values: &[f64], out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "node_id,R")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(w, "{i},{}", fmt_f64(*v))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgen::ExtendedBiDegreeSequence;
    use std::sync::Arc;

    fn graph(ins: Vec<u64>, outs: Vec<u64>, edges: &[(u32, u32)]) -> DirectedMultigraph {
        let seq = Arc::new(ExtendedBiDegreeSequence::pagerank(ins, outs, 0.3).unwrap());
        DirectedMultigraph::from_edges(seq, edges).unwrap()
    }

    #[test]
    fn no_edges_gives_zero_and_q() {
        let g = graph(vec![0, 0], vec![0, 0], &[]);
        assert_eq!(apply_m_transpose(&g, &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        let r = power_iteration(&g, &[0.7, 0.5], &RankingConfig::new(0.3)).unwrap();
        assert_eq!(r.values, vec![0.7, 0.5]);
        assert_eq!(solve_exact(&g, &[0.7, 0.5]).unwrap().values, vec![0.7, 0.5]);
    }

    #[test]
    fn single_edge_and_parallel_edges() {
        let g = graph(vec![0, 1], vec![1, 0], &[(0, 1)]);
        assert_eq!(apply_m_transpose(&g, &[1.0, 0.0]).unwrap(), vec![0.0, 0.3]);
        let g = graph(vec![0, 2], vec![2, 0], &[(0, 1), (0, 1)]);
        let y = apply_m_transpose(&g, &[1.0, 0.0]).unwrap();
        assert_eq!(y[1], 2.0 * 0.15);
    }

    #[test]
    fn two_cycle_fixed_point() {
        let g = graph(vec![1, 1], vec![1, 1], &[(1, 0), (0, 1)]);
        let r = power_iteration(&g, &[0.7, 0.7], &RankingConfig::new(0.3)).unwrap();
        assert!(r.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let e = solve_exact(&g, &[0.7, 0.7]).unwrap();
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn three_node_example_matches_gaussian_elimination() {
        // Edges 2→1, 3→1, 3→2 (1-based); D = (0, 1, 2).
        let g = graph(vec![2, 1, 0], vec![0, 1, 2], &[(1, 0), (2, 0), (2, 1)]);
        let q = [0.7; 3];
        // Hand elimination: R3 = 0.7, R2 = 0.7 + 0.15·R3, R1 = 0.7 + 0.3·R2 + 0.15·R3.
        let r3 = 0.7;
        let r2 = 0.7 + 0.15 * r3;
        let r1 = 0.7 + 0.3 * r2 + 0.15 * r3;
        let p = power_iteration(&g, &q, &RankingConfig::new(0.3)).unwrap();
        for (a, b) in p.values.iter().zip([r1, r2, r3]) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn refuses_uncertified_weights() {
        let seq = Arc::new(ExtendedBiDegreeSequence::new(vec![1], vec![1], vec![0.5], vec![0.5]).unwrap());
        let g = DirectedMultigraph::from_edges(seq, &[(0, 0)]).unwrap();
        assert!(matches!(power_iteration(&g, &[0.5], &RankingConfig::new(0.3)), Err(Error::Certification { .. })));
    }

    #[test]
    fn error_bound_values() {
        assert_eq!(error_bound(1.0, 0.3, 0.7, 0), 1.0 + 0.7 / 0.7);
        assert!((error_bound(1.0, 0.3, 0.7, 9) - 2.0 * 0.3f64.powi(9)).abs() < 1e-18);
        assert!((error_bound(1.0, 0.3, 0.7, 9) - 3.93660e-5).abs() < 1e-9);
        for k in 0..30 {
            assert!(error_bound(1.0, 0.3, 0.7, k + 1) < error_bound(1.0, 0.3, 0.7, k));
        }
    }

    #[test]
    fn dense_guard() {
        let n = DENSE_GUARD + 1;
        let g = graph(vec![0; n], vec![0; n], &[]);
        assert!(matches!(solve_exact(&g, &vec![0.0; n]), Err(Error::TooLarge { .. })));
    }
}
