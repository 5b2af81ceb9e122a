//! C ABI for `heatsparse`.
//!
//! Graphs and sparsifiers cross the boundary as opaque handles created by
//! `hs_*_new`-style constructors and released with the matching `*_free`.
//! Every fallible call returns an [`HsStatus`]; on failure a description is
//! available from [`hs_last_error_message`] on the same thread. Panics are
//! caught and reported as `HS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use heatsparse::graph::generate::{self, Weighting};
use heatsparse::graph::mtx;
use heatsparse::partition::{fiedler_approx, sign_cut, FiedlerConfig};
use heatsparse::pcg::pcg_solve;
use heatsparse::sparsifier::{densify, DensifyConfig, Sparsifier};
use heatsparse::tree::{low_stretch, max_weight};
use heatsparse::{Error, WeightedGraph};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    /// Bad weights, self loops, disconnected input and similar.
    InvalidGraph = 4,
    Io = 5,
    Parse = 6,
    /// Factorization or solver breakdown.
    Numerical = 7,
    /// The call finished but did not reach its tolerance; outputs are valid.
    NotConverged = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsTreeKind {
    MaxWeight = 0,
    LowStretch = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsSparsifyOptions {
    pub target_sigma2: f64,
    /// Power-iteration steps per heat vector.
    pub t: usize,
    /// Random vectors per round; 0 picks the default.
    pub r: usize,
    pub seed: u64,
    pub max_rounds: usize,
    /// Total cap on recovered off-tree edges; 0 means no cap.
    pub edge_budget: usize,
    /// One of the `HsTreeKind` values.
    pub tree: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HsSparsifierStats {
    pub n: usize,
    pub edge_count: usize,
    pub offtree_edges: usize,
    pub rounds: usize,
    pub density: f64,
    pub lambda_max_est: f64,
    pub lambda_min_est: f64,
    pub sigma2_est: f64,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HsSolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
    /// Mean removed from the right-hand side of a singular system.
    pub projected_component: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HsPartitionStats {
    pub balance_ratio: f64,
    pub cut_weight: f64,
    pub positive: usize,
    /// Rayleigh quotient of the final Fiedler estimate.
    pub rayleigh_quotient: f64,
}

/// Opaque weighted graph.
pub struct HsGraph {
    inner: WeightedGraph,
}

/// Opaque sparsifier of a particular graph.
pub struct HsSparsifier {
    inner: Sparsifier,
    graph_m: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: HsStatus,
    message: String,
}

impl Failure {
    fn new(status: HsStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }

    fn null(what: &str) -> Self {
        Failure::new(HsStatus::NullPointer, format!("{what} is null"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::LengthMismatch { .. } => HsStatus::LengthMismatch,
            Error::VertexOutOfRange { .. }
            | Error::SelfLoop(_)
            | Error::BadWeight { .. }
            | Error::BadSelfWeight { .. }
            | Error::Disconnected { .. }
            | Error::TooSmall(_)
            | Error::GridTooSmall { .. }
            | Error::NotSpanning(_)
            | Error::MissingEdge { .. } => HsStatus::InvalidGraph,
            Error::Io { .. } => HsStatus::Io,
            Error::MatrixMarket(_) => HsStatus::Parse,
            Error::NonPositivePivot { .. } | Error::Breakdown(_) | Error::NotConverged { .. } => {
                HsStatus::Numerical
            }
            _ => HsStatus::InvalidArgument,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: Option<String>) {
    let c = message.map(|m| CString::new(m.replace('\0', " ")).expect("interior nul removed"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<HsStatus, Failure>) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            set_last_error(None);
            status
        }
        Ok(Err(failure)) => {
            set_last_error(Some(failure.message));
            failure.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(Some(format!("internal panic: {msg}")));
            HsStatus::Panic
        }
    }
}

unsafe fn slice_in<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<HsStatus, Failure> {
    *out = Box::into_raw(Box::new(value));
    Ok(HsStatus::Ok)
}

fn compatible(g: &HsGraph, sp: &HsSparsifier) -> Result<(), Failure> {
    if sp.inner.n() != g.inner.n() || sp.graph_m != g.inner.m() {
        return Err(Failure::new(
            HsStatus::InvalidArgument,
            "sparsifier was built from a different graph",
        ));
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL after a
/// successful call. The pointer stays valid until the next `hs_*` call on
/// the same thread.
#[no_mangle]
pub extern "C" fn hs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a graph on `n` vertices from `m` edges `(p[i], q[i], w[i])`.
///
/// # Safety
/// `p`, `q` and `w` must each point to `m` readable elements (or may be
/// NULL when `m` is 0). `out` must be a valid pointer to write a handle to.
#[no_mangle]
pub unsafe extern "C" fn hs_graph_new(
    n: usize,
    p: *const usize,
    q: *const usize,
    w: *const f64,
    m: usize,
    out: *mut *mut HsGraph,
) -> HsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let (p, q, w) = (
            slice_in(p, m, "p")?,
            slice_in(q, m, "q")?,
            slice_in(w, m, "w")?,
        );
        let edges = (0..m).map(|i| (p[i], q[i], w[i]));
        store(
            out,
            HsGraph {
                inner: WeightedGraph::new(n, edges)?,
            },
        )
    })
}

/// Reads a symmetric Matrix Market file holding a Laplacian or SDD matrix.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_graph_read_mtx(
    path: *const c_char,
    out: *mut *mut HsGraph,
) -> HsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        if path.is_null() {
            return Err(Failure::null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure::new(HsStatus::InvalidArgument, "path is not UTF-8"))?;
        let import = mtx::read_matrix_market(path)?;
        store(
            out,
            HsGraph {
                inner: import.graph,
            },
        )
    })
}

/// `rows x cols` 4-connected mesh; with `random_weights` the weights are
/// drawn from `[0.5, 1.5)` using `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_graph_grid(
    rows: usize,
    cols: usize,
    random_weights: bool,
    seed: u64,
    out: *mut *mut HsGraph,
) -> HsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let w = if random_weights {
            Weighting::UniformRandom(seed)
        } else {
            Weighting::Unit
        };
        store(
            out,
            HsGraph {
                inner: generate::grid(rows, cols, w)?,
            },
        )
    })
}

/// # Safety
/// `graph` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_graph_free(graph: *mut HsGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Vertex count, or 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_graph_vertex_count(graph: *const HsGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.n())
}

/// Edge count, or 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_graph_edge_count(graph: *const HsGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.m())
}

#[no_mangle]
pub extern "C" fn hs_sparsify_options_default() -> HsSparsifyOptions {
    let d = DensifyConfig::default();
    HsSparsifyOptions {
        target_sigma2: 100.0,
        t: d.t,
        r: 0,
        seed: d.seed,
        max_rounds: d.max_rounds,
        edge_budget: 0,
        tree: HsTreeKind::MaxWeight as u32,
    }
}

/// Builds a sparsifier of `graph`. `options` may be NULL for defaults.
/// Returns `HS_STATUS_NOT_CONVERGED` with a valid handle when the target
/// was not reached.
///
/// # Safety
/// `graph` must be a live handle, `options` NULL or readable, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn hs_sparsify(
    graph: *const HsGraph,
    options: *const HsSparsifyOptions,
    out: *mut *mut HsSparsifier,
) -> HsStatus {
    guard(|| {
        let g = &handle(graph, "graph")?.inner;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let o = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| hs_sparsify_options_default());
        let tree = match o.tree {
            t if t == HsTreeKind::MaxWeight as u32 => max_weight(g)?,
            t if t == HsTreeKind::LowStretch as u32 => low_stretch(g, o.seed)?,
            t => {
                return Err(Failure::new(
                    HsStatus::InvalidArgument,
                    format!("unknown tree kind {t}"),
                ))
            }
        };
        let cfg = DensifyConfig {
            t: o.t,
            r: (o.r > 0).then_some(o.r),
            seed: o.seed,
            max_rounds: o.max_rounds,
            edge_budget: (o.edge_budget > 0).then_some(o.edge_budget),
            ..DensifyConfig::default()
        };
        let sp = densify(g, tree, o.target_sigma2, &cfg)?;
        let converged = sp.converged();
        store(
            out,
            HsSparsifier {
                inner: sp,
                graph_m: g.m(),
            },
        )?;
        Ok(if converged {
            HsStatus::Ok
        } else {
            HsStatus::NotConverged
        })
    })
}

/// # Safety
/// `sparsifier` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_sparsifier_free(sparsifier: *mut HsSparsifier) {
    if !sparsifier.is_null() {
        drop(Box::from_raw(sparsifier));
    }
}

/// # Safety
/// `sparsifier` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_sparsifier_stats(
    sparsifier: *const HsSparsifier,
    out: *mut HsSparsifierStats,
) -> HsStatus {
    guard(|| {
        let sp = &handle(sparsifier, "sparsifier")?.inner;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let last = sp.history().last().map(|r| r.estimate);
        *out = HsSparsifierStats {
            n: sp.n(),
            edge_count: sp.edge_count(),
            offtree_edges: sp.offtree_edges().len(),
            rounds: sp.history().iter().filter(|r| r.edges_added > 0).count(),
            density: sp.density(),
            lambda_max_est: last.map_or(f64::NAN, |e| e.lambda_max_est),
            lambda_min_est: last.map_or(f64::NAN, |e| e.lambda_min_est),
            sigma2_est: last.map_or(f64::NAN, |e| e.sigma2_est),
            converged: sp.converged(),
        };
        Ok(HsStatus::Ok)
    })
}

/// Writes the sparsifier Laplacian in Matrix Market format.
///
/// # Safety
/// `sparsifier` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hs_sparsifier_write_mtx(
    sparsifier: *const HsSparsifier,
    path: *const c_char,
) -> HsStatus {
    guard(|| {
        let sp = &handle(sparsifier, "sparsifier")?.inner;
        if path.is_null() {
            return Err(Failure::null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure::new(HsStatus::InvalidArgument, "path is not UTF-8"))?;
        sp.write_matrix_market(path)?;
        Ok(HsStatus::Ok)
    })
}

/// Solves `L x = b` by PCG preconditioned with `sparsifier`. `x` receives
/// `n` values; `stats` may be NULL. Returns `HS_STATUS_NOT_CONVERGED` when
/// `max_iters` ran out, with `x` holding the last iterate.
///
/// # Safety
/// Handles must be live; `b` and `x` must hold `n` elements and not
/// overlap; `stats` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hs_solve(
    graph: *const HsGraph,
    sparsifier: *const HsSparsifier,
    b: *const f64,
    x: *mut f64,
    n: usize,
    rel_tol: f64,
    max_iters: usize,
    stats: *mut HsSolveStats,
) -> HsStatus {
    guard(|| {
        let g = handle(graph, "graph")?;
        let sp = handle(sparsifier, "sparsifier")?;
        compatible(g, sp)?;
        let b = slice_in(b, n, "b")?;
        let x = slice_out(x, n, "x")?;
        let res = pcg_solve(&g.inner, &sp.inner, b, rel_tol, max_iters)?;
        x.copy_from_slice(&res.x);
        if let Some(s) = stats.as_mut() {
            *s = HsSolveStats {
                iterations: res.iterations,
                relative_residual: res.relative_residual,
                converged: res.converged,
                projected_component: res.projected_component,
            };
        }
        Ok(if res.converged {
            HsStatus::Ok
        } else {
            HsStatus::NotConverged
        })
    })
}

/// Sign-cut bipartition from `iters` inverse power iterations, with inner
/// PCG solves preconditioned by `sparsifier`. `signs` receives `n` values
/// of +1 or -1; `stats` may be NULL.
///
/// # Safety
/// Handles must be live; `signs` must hold `n` elements; `stats` NULL or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn hs_partition(
    graph: *const HsGraph,
    sparsifier: *const HsSparsifier,
    iters: usize,
    seed: u64,
    signs: *mut i8,
    n: usize,
    stats: *mut HsPartitionStats,
) -> HsStatus {
    guard(|| {
        let g = handle(graph, "graph")?;
        let sp = handle(sparsifier, "sparsifier")?;
        compatible(g, sp)?;
        if n != g.inner.n() {
            return Err(Error::LengthMismatch {
                expected: g.inner.n(),
                got: n,
            }
            .into());
        }
        let out = slice_out(signs, n, "signs")?;
        let cfg = FiedlerConfig {
            iters,
            seed,
            ..FiedlerConfig::default()
        };
        let run = fiedler_approx(&g.inner, &sp.inner, &cfg)?;
        let cut = sign_cut(&g.inner, &run.vector)?;
        out.copy_from_slice(&cut.signs);
        if let Some(s) = stats.as_mut() {
            *s = HsPartitionStats {
                balance_ratio: cut.balance_ratio,
                cut_weight: cut.cut_weight,
                positive: cut.signs.iter().filter(|&&v| v > 0).count(),
                rayleigh_quotient: *run.rayleigh_history.last().unwrap_or(&f64::NAN),
            };
        }
        Ok(HsStatus::Ok)
    })
}
