//! C ABI over the `dcmrank` library.
//!
//! Objects are exposed as opaque handles created by `*_new`/`*_generate`/
//! `*_build` functions and released with the matching `*_free`. Every fallible
//! function returns a [`DcmStatus`]; on failure the message is available from
//! [`dcm_last_error_message`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use dcmrank::dcm::{build_graph, DirectedMultigraph};
use dcmrank::rank::{power_iteration, RankingConfig};
use dcmrank::rng::{purpose, stream};
use dcmrank::seqgen::{DegreeModel, DegreeModelParams, ExtendedBiDegreeSequence};
use dcmrank::stats::{kr_distance, EmpiricalDistribution};
use dcmrank::wbp::{sample_r_star, LimitLaws, WbpOptions};
use dcmrank::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcmStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad parameters, malformed input or an index out of range.
    InvalidArgument = 2,
    /// The output buffer is shorter than the result.
    BufferTooSmall = 3,
    /// The computation failed (non-subcritical law, population cap, ...).
    Runtime = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// A validated degree model (in/out-degree laws and weight laws).
pub struct DcmModel {
    model: DegreeModel,
    limits: LimitLaws,
}

/// An extended bi-degree sequence.
pub struct DcmSequence(Arc<ExtendedBiDegreeSequence>);

/// A directed multigraph realizing a sequence.
pub struct DcmGraph(DirectedMultigraph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: DcmStatus, message: impl Into<String>) -> DcmStatus {
    set_error(message.into());
    status
}

fn from_error(e: Error) -> DcmStatus {
    let status = if e.is_input_error() { DcmStatus::InvalidArgument } else { DcmStatus::Runtime };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into [`DcmStatus::Panic`].
fn guard(f: impl FnOnce() -> DcmStatus) -> DcmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(DcmStatus::Panic, format!("panic: {msg}"))
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(DcmStatus::NullPointer, concat!("null pointer: ", stringify!($p)));
        })+
    };
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dcm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dcm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn model_handle(params: DegreeModelParams, out: *mut *mut DcmModel) -> DcmStatus {
    match DegreeModel::new(params) {
        Ok(model) => {
            let limits = LimitLaws::iid(&model);
            // SAFETY: `out` was checked to be non-null by the caller.
            unsafe { *out = Box::into_raw(Box::new(DcmModel { model, limits })) };
            DcmStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// PageRank model: zeta(`alpha`)+Poisson in-degrees, zeta(`beta`)+Poisson
/// out-degrees, both with mean `target_mean`, damping `c` and `Q = 1 - c`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dcm_model_new_pagerank(
    alpha: f64,
    beta: f64,
    target_mean: f64,
    c: f64,
    out: *mut *mut DcmModel,
) -> DcmStatus {
    guard(|| {
        non_null!(out);
        model_handle(DegreeModelParams::pagerank(alpha, beta, target_mean, c), out)
    })
}

/// Model from a JSON object with fields `alpha`, `beta`, `target_mean`,
/// `damping_law`, `personalization_law` and optionally `delta0`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dcm_model_from_json(json: *const c_char, out: *mut *mut DcmModel) -> DcmStatus {
    guard(|| {
        non_null!(json, out);
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(e) => return fail(DcmStatus::InvalidArgument, format!("model json is not UTF-8: {e}")),
        };
        match serde_json::from_str::<DegreeModelParams>(text) {
            Ok(params) => model_handle(params, out),
            Err(e) => fail(DcmStatus::InvalidArgument, format!("model json: {e}")),
        }
    })
}

/// # Safety
/// `model` must be null or a handle from a model constructor, freed once.
#[no_mangle]
pub unsafe extern "C" fn dcm_model_free(model: *mut DcmModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Runs the IID algorithm for `n` nodes with the given master seed.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dcm_sequence_generate(
    model: *const DcmModel,
    n: usize,
    seed: u64,
    out: *mut *mut DcmSequence,
) -> DcmStatus {
    guard(|| {
        non_null!(model, out);
        let model = unsafe { &*model };
        if n == 0 {
            return fail(DcmStatus::InvalidArgument, "n must be at least 1");
        }
        match model.model.run_iid_algorithm(n, &mut stream(seed, purpose::SEQUENCE, 0)) {
            Ok(outcome) => {
                unsafe { *out = Box::into_raw(Box::new(DcmSequence(Arc::new(outcome.sequence)))) };
                DcmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Sequence from caller-provided columns of length `n`.
///
/// # Safety
/// Each array must hold `n` elements; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dcm_sequence_from_arrays(
    in_degrees: *const u64,
    out_degrees: *const u64,
    weights: *const f64,
    personalization: *const f64,
    n: usize,
    out: *mut *mut DcmSequence,
) -> DcmStatus {
    guard(|| {
        non_null!(in_degrees, out_degrees, weights, personalization, out);
        let (ins, outs, ws, qs) = unsafe {
            (
                std::slice::from_raw_parts(in_degrees, n).to_vec(),
                std::slice::from_raw_parts(out_degrees, n).to_vec(),
                std::slice::from_raw_parts(weights, n).to_vec(),
                std::slice::from_raw_parts(personalization, n).to_vec(),
            )
        };
        match ExtendedBiDegreeSequence::new(ins, outs, ws, qs) {
            Ok(seq) => {
                unsafe { *out = Box::into_raw(Box::new(DcmSequence(Arc::new(seq)))) };
                DcmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcm_sequence_len(seq: *const DcmSequence) -> usize {
    if seq.is_null() {
        return 0;
    }
    unsafe { &*seq }.0.len()
}

/// Total number of stubs on each side, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcm_sequence_total_stubs(seq: *const DcmSequence) -> u64 {
    if seq.is_null() {
        return 0;
    }
    unsafe { &*seq }.0.total_stubs()
}

/// Reads row `i`: in-degree, out-degree, weight and personalization. Any of
/// the output pointers may be null to skip that field.
///
/// # Safety
/// `seq` must be a live handle; non-null outputs must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dcm_sequence_get_row(
    seq: *const DcmSequence,
    i: usize,
    in_degree: *mut u64,
    out_degree: *mut u64,
    weight: *mut f64,
    personalization: *mut f64,
) -> DcmStatus {
    guard(|| {
        non_null!(seq);
        let s = &unsafe { &*seq }.0;
        if i >= s.len() {
            return fail(DcmStatus::InvalidArgument, format!("row {i} out of range for {} nodes", s.len()));
        }
        unsafe {
            if !in_degree.is_null() {
                *in_degree = s.in_degrees()[i];
            }
            if !out_degree.is_null() {
                *out_degree = s.out_degrees()[i];
            }
            if !weight.is_null() {
                *weight = s.weights()[i];
            }
            if !personalization.is_null() {
                *personalization = s.personalization()[i];
            }
        }
        DcmStatus::Ok
    })
}

/// # Safety
/// `seq` must be null or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn dcm_sequence_free(seq: *mut DcmSequence) {
    if !seq.is_null() {
        drop(unsafe { Box::from_raw(seq) });
    }
}

/// Pairs the stubs of `seq` uniformly at random. The graph keeps its own
/// reference to the sequence, which may be freed afterwards.
///
/// # Safety
/// `seq` must be a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dcm_graph_build(seq: *const DcmSequence, seed: u64, out: *mut *mut DcmGraph) -> DcmStatus {
    guard(|| {
        non_null!(seq, out);
        let s = unsafe { &*seq }.0.clone();
        match build_graph(s, &mut stream(seed, purpose::GRAPH, 0)) {
            Ok(g) => {
                unsafe { *out = Box::into_raw(Box::new(DcmGraph(g))) };
                DcmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcm_graph_node_count(graph: *const DcmGraph) -> usize {
    if graph.is_null() {
        return 0;
    }
    unsafe { &*graph }.0.node_count()
}

/// Number of edges, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcm_graph_edge_count(graph: *const DcmGraph) -> usize {
    if graph.is_null() {
        return 0;
    }
    unsafe { &*graph }.0.edge_count()
}

/// Copies the edges as `(sources[e], targets[e])` pairs, grouped by target.
/// `capacity` is the length of both buffers.
///
/// # Safety
/// `graph` must be a live handle; both buffers must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn dcm_graph_edges(
    graph: *const DcmGraph,
    sources: *mut u32,
    targets: *mut u32,
    capacity: usize,
) -> DcmStatus {
    guard(|| {
        non_null!(graph, sources, targets);
        let g = &unsafe { &*graph }.0;
        if capacity < g.edge_count() {
            return fail(DcmStatus::BufferTooSmall, format!("need {} edges, buffer holds {capacity}", g.edge_count()));
        }
        let (src, dst) = unsafe {
            (std::slice::from_raw_parts_mut(sources, capacity), std::slice::from_raw_parts_mut(targets, capacity))
        };
        for (e, (s, t)) in g.edges().enumerate() {
            src[e] = s;
            dst[e] = t;
        }
        DcmStatus::Ok
    })
}

/// # Safety
/// `graph` must be null or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn dcm_graph_free(graph: *mut DcmGraph) {
    if !graph.is_null() {
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// Generalized PageRank `R = R M + Q` by power iteration from `r0`, stopping
/// when successive iterates differ by less than `tolerance` in L2 or after
/// `max_k` steps. `damping_bound` is the certified `max |C_i| D_i < 1`.
/// Writes `node_count` values; `iterations` and `error_bound` may be null.
///
/// # Safety
/// `graph` must be a live handle; `values` must hold `capacity` elements;
/// non-null scalar outputs must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dcm_pagerank(
    graph: *const DcmGraph,
    damping_bound: f64,
    r0: f64,
    tolerance: f64,
    max_k: usize,
    values: *mut f64,
    capacity: usize,
    iterations: *mut usize,
    error_bound: *mut f64,
) -> DcmStatus {
    guard(|| {
        non_null!(graph, values);
        let g = &unsafe { &*graph }.0;
        if capacity < g.node_count() {
            return fail(DcmStatus::BufferTooSmall, format!("need {} values, buffer holds {capacity}", g.node_count()));
        }
        let config = RankingConfig { r0, max_k, tolerance, damping_bound };
        match power_iteration(g, g.sequence().personalization(), &config) {
            Ok(r) => {
                unsafe {
                    std::slice::from_raw_parts_mut(values, capacity)[..r.values.len()].copy_from_slice(&r.values);
                    if !iterations.is_null() {
                        *iterations = r.iterations;
                    }
                    if !error_bound.is_null() {
                        *error_bound = r.certified_error_bound;
                    }
                }
                DcmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Draws `count` samples of the root mixture `ℛ*` of the model's limit laws,
/// each truncated at `generations`; sample `i` uses its own stream of `seed`.
///
/// # Safety
/// `model` must be a live handle; `out` must hold `count` elements.
#[no_mangle]
pub unsafe extern "C" fn dcm_sample_r_star(
    model: *const DcmModel,
    count: usize,
    generations: usize,
    seed: u64,
    out: *mut f64,
) -> DcmStatus {
    guard(|| {
        non_null!(model, out);
        let limits = &unsafe { &*model }.limits;
        let opts = WbpOptions { generations, ..WbpOptions::default() };
        let dst = unsafe { std::slice::from_raw_parts_mut(out, count) };
        for (i, slot) in dst.iter_mut().enumerate() {
            match sample_r_star(limits, &opts, &mut stream(seed, purpose::WBP, i as u64)) {
                Ok(v) => *slot = v,
                Err(e) => return from_error(e),
            }
        }
        DcmStatus::Ok
    })
}

/// Kantorovich–Rubinstein (Wasserstein-1) distance between two samples.
///
/// # Safety
/// `a` and `b` must hold `len_a` and `len_b` elements; `out` must be valid
/// for writing.
#[no_mangle]
pub unsafe extern "C" fn dcm_kr_distance(
    a: *const f64,
    len_a: usize,
    b: *const f64,
    len_b: usize,
    out: *mut f64,
) -> DcmStatus {
    guard(|| {
        non_null!(a, b, out);
        if len_a == 0 || len_b == 0 {
            return fail(DcmStatus::InvalidArgument, "samples must be nonempty");
        }
        let (xa, xb) = unsafe { (std::slice::from_raw_parts(a, len_a), std::slice::from_raw_parts(b, len_b)) };
        let result = EmpiricalDistribution::new(xa.to_vec())
            .and_then(|da| EmpiricalDistribution::new(xb.to_vec()).and_then(|db| kr_distance(&da, &db)));
        match result {
            Ok(d) => {
                unsafe { *out = d };
                DcmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
