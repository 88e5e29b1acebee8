//! Directed configuration model simulation: degree-sequence generation,
//! stub pairing coupled with a thorny branching tree, generalized PageRank,
//! weighted branching process limits and the statistics that compare them.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dcm;
pub mod error;
pub mod experiment;
pub mod rank;
pub mod rng;
pub mod seqgen;
pub mod stats;
pub mod wbp;

pub use error::{Error, Result};

/// Shortest round-trip decimal representation of a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
