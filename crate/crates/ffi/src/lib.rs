//! C ABI over the `qaoa-rl` core.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_load`
//! style constructors and released with the matching `*_free`. Every
//! fallible function returns a [`QrStatus`]; on failure a description is
//! available from [`qr_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use qaoa_rl::graphs::{self, Graph};
use qaoa_rl::optimizers::{nelder_mead, rl_rollout_opt, rlnm};
use qaoa_rl::ppo::{load_checkpoint, PolicyCheckpoint};
use qaoa_rl::qsim::{evaluate, CostDiagonal, EvalCounter, QaoaObjective, QaoaParams};
use qaoa_rl::Error;

/// Result codes of the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Capacity = 3,
    DimensionMismatch = 4,
    BudgetExhausted = 5,
    Parse = 6,
    ShapeMismatch = 7,
    Io = 8,
    NonFinite = 9,
    Internal = 10,
}

/// Optimizer selector for [`qr_optimize`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrOptimizer {
    NelderMead = 0,
    Rl = 1,
    Rlnm = 2,
}

/// Undirected graph.
pub struct QrGraph(Graph);

/// Cut-value diagonal of a graph, ready for simulation.
pub struct QrDiagonal(CostDiagonal);

/// Trained policy checkpoint.
pub struct QrCheckpoint(PolicyCheckpoint);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QrStatus {
    match e {
        Error::InvalidArgument(_) | Error::Empty(_) | Error::EpisodeFinished => QrStatus::InvalidArgument,
        Error::Capacity { .. } => QrStatus::Capacity,
        Error::DimensionMismatch { .. } => QrStatus::DimensionMismatch,
        Error::BudgetExhausted { .. } => QrStatus::BudgetExhausted,
        Error::Parse { .. } | Error::Json(_) => QrStatus::Parse,
        Error::ShapeMismatch(_) | Error::SchemaVersion { .. } => QrStatus::ShapeMismatch,
        Error::Io(_) => QrStatus::Io,
        Error::NonFinite(_) => QrStatus::NonFinite,
        Error::Bookkeeping(_) => QrStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (QrStatus, String)>) -> QrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QrStatus::Internal
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, (QrStatus, String)>;
}

impl<T> OrStatus<T> for qaoa_rl::Result<T> {
    fn or_status(self) -> Result<T, (QrStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (QrStatus, String) {
    (QrStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (QrStatus, String) {
    (QrStatus::InvalidArgument, msg.into())
}

unsafe fn out_handle<T>(out: *mut *mut T, value: T) -> Result<(), (QrStatus, String)> {
    if out.is_null() {
        return Err(null("output handle pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (QrStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (QrStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], (QrStatus, String)> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Erdos-Renyi graph on `n` vertices with edge probability `edge_prob`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qr_graph_erdos_renyi(n: usize, edge_prob: f64, seed: u64, out: *mut *mut QrGraph) -> QrStatus {
    guard(|| out_handle(out, QrGraph(graphs::gen_erdos_renyi(n, edge_prob, seed).or_status()?)))
}

/// Ladder with `len` rungs.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qr_graph_ladder(len: usize, out: *mut *mut QrGraph) -> QrStatus {
    guard(|| out_handle(out, QrGraph(graphs::gen_ladder(len).or_status()?)))
}

/// Two `K_clique` joined by one edge.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qr_graph_barbell(clique: usize, out: *mut *mut QrGraph) -> QrStatus {
    guard(|| out_handle(out, QrGraph(graphs::gen_barbell(clique).or_status()?)))
}

/// Connected caveman graph of `cliques` cliques of `size` vertices.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qr_graph_caveman(cliques: usize, size: usize, out: *mut *mut QrGraph) -> QrStatus {
    guard(|| out_handle(out, QrGraph(graphs::gen_caveman(cliques, size).or_status()?)))
}

/// Parses the canonical text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_graph_parse(text: *const c_char, out: *mut *mut QrGraph) -> QrStatus {
    guard(|| {
        let text = c_str(text, "graph text")?;
        out_handle(out, QrGraph(graphs::parse_graph(text).or_status()?))
    })
}

/// # Safety
/// `g` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qr_graph_free(g: *mut QrGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn qr_graph_num_vertices(g: *const QrGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.n())
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn qr_graph_num_edges(g: *const QrGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_edges())
}

/// Exact maximum cut. `assignment` receives one 0/1 side per vertex and
/// must hold `assignment_len >= n` bytes; it may be null when `assignment_len` is 0.
///
/// # Safety
/// `g` must be a live graph handle, `value` writable, `assignment` valid for `assignment_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn qr_graph_maxcut(
    g: *const QrGraph,
    value: *mut usize,
    assignment: *mut u8,
    assignment_len: usize,
) -> QrStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        if value.is_null() {
            return Err(null("value"));
        }
        let cut = graphs::brute_force_maxcut(&g.0).or_status()?;
        if assignment_len > 0 {
            if assignment_len < cut.assignment.len() {
                return Err(invalid(format!(
                    "assignment buffer holds {assignment_len}, need {}",
                    cut.assignment.len()
                )));
            }
            slice_mut(assignment, cut.assignment.len(), "assignment")?.copy_from_slice(&cut.assignment);
        }
        *value = cut.value;
        Ok(())
    })
}

/// # Safety
/// `g` must be a live graph handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_diagonal_new(g: *const QrGraph, out: *mut *mut QrDiagonal) -> QrStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        out_handle(out, QrDiagonal(CostDiagonal::from_graph(&g.0).or_status()?))
    })
}

/// # Safety
/// `d` must be null or a diagonal handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qr_diagonal_free(d: *mut QrDiagonal) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Expected cut of the depth-`p` circuit with angles `beta[0..p]`, `gamma[0..p]`.
///
/// # Safety
/// `d` must be a live diagonal handle, `beta` and `gamma` valid for `p`
/// reads, `f` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_expected_cut(
    d: *const QrDiagonal,
    beta: *const f64,
    gamma: *const f64,
    p: usize,
    f: *mut f64,
) -> QrStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("diagonal"))?;
        if f.is_null() {
            return Err(null("f"));
        }
        let params =
            QaoaParams::new(slice(beta, p, "beta")?.to_vec(), slice(gamma, p, "gamma")?.to_vec()).or_status()?;
        *f = evaluate(&d.0, &params, &EvalCounter::new(1)).or_status()?;
        Ok(())
    })
}

/// Loads a checkpoint JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_checkpoint_load(path: *const c_char, out: *mut *mut QrCheckpoint) -> QrStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        out_handle(out, QrCheckpoint(load_checkpoint(Path::new(path)).or_status()?))
    })
}

/// # Safety
/// `ck` must be null or a checkpoint handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qr_checkpoint_free(ck: *mut QrCheckpoint) {
    if !ck.is_null() {
        drop(Box::from_raw(ck));
    }
}

/// Circuit depth the checkpoint acts on, or 0 for a null handle.
///
/// # Safety
/// `ck` must be null or a live checkpoint handle.
#[no_mangle]
pub unsafe extern "C" fn qr_checkpoint_p(ck: *const QrCheckpoint) -> usize {
    ck.as_ref().map_or(0, |c| c.0.p())
}

/// Maximizes the depth-`p` expected cut from `x0 = [beta.., gamma..]`
/// (`2p` values) using at most `budget` circuit evaluations. The policy
/// optimizers need a checkpoint; Nelder-Mead ignores it (may be null).
/// On success `best_params` (room for `2p` values) and `best_f` hold the best point seen.
///
/// # Safety
/// Handles must be live or null as described; `x0` and `best_params` valid
/// for `2p` elements; `best_f` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qr_optimize(
    method: QrOptimizer,
    ck: *const QrCheckpoint,
    d: *const QrDiagonal,
    p: usize,
    x0: *const f64,
    budget: usize,
    best_params: *mut f64,
    best_f: *mut f64,
) -> QrStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("diagonal"))?;
        if best_f.is_null() {
            return Err(null("best_f"));
        }
        let objective = QaoaObjective::new(&d.0, p).or_status()?;
        let x0 = slice(x0, 2 * p, "x0")?;
        let out = slice_mut(best_params, 2 * p, "best_params")?;
        let record = match method {
            QrOptimizer::NelderMead => nelder_mead(&objective, x0, budget),
            QrOptimizer::Rl | QrOptimizer::Rlnm => {
                let ck = ck.as_ref().ok_or_else(|| null("checkpoint"))?;
                if method == QrOptimizer::Rl {
                    rl_rollout_opt(&ck.0, &objective, x0, budget)
                } else {
                    rlnm(&ck.0, &objective, x0, budget)
                }
            }
        }
        .or_status()?;
        out.copy_from_slice(&record.best_params);
        *best_f = record.best_f;
        Ok(())
    })
}

/// Resets the last error message of this thread.
#[no_mangle]
pub extern "C" fn qr_clear_error() {
    set_error("");
}
