//! C ABI over the toponame library.
//!
//! Objects cross the boundary as opaque heap handles that the caller frees
//! with the matching `*_free` function. Every fallible call returns a
//! [`TnStatus`]; on failure `tn_last_error_message` describes the error for
//! the calling thread. Strings returned through out-parameters are owned by
//! the caller and released with `tn_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use toponame::embed::{embed_nodes, load_model, EmbedModel};
use toponame::graph::{
    components_and_cycle_rank, load_reduced, load_skeleton, save_reduced, ObjectType, ReducedGraph, SkeletonGraph,
};
use toponame::matching::graph_similarity;
use toponame::nomenclature::{name_graph, parse_name};
use toponame::reduce::{reduce_pipeline, ReduceConfig, TauMode};
use toponame::spectral::{laplacian_eigenvalues, spectrum_cosine};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidGraph = 3,
    ParseError = 4,
    NameError = 5,
    EmbedError = 6,
    InvalidArgument = 7,
    Panic = 8,
}

/// Object type selector for naming. `FromGraph` uses the type stored in the
/// graph.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnObjectType {
    FromGraph = -1,
    Mito = 0,
    Pyr = 1,
    Other = 2,
}

pub struct TnSkeleton(SkeletonGraph);

pub struct TnReduced(ReducedGraph);

pub struct TnModel(EmbedModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("nul bytes removed"));
}

fn fail(status: TnStatus, msg: impl Into<String>) -> TnStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into `TnStatus::Panic`.
fn guard(f: impl FnOnce() -> TnStatus) -> TnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(TnStatus::Panic, "internal panic"),
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, TnStatus> {
    if s.is_null() {
        return Err(fail(TnStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(TnStatus::InvalidUtf8, e.to_string()))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> TnStatus {
    *out = Box::into_raw(Box::new(value));
    TnStatus::Ok
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> TnStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            TnStatus::Ok
        }
        Err(e) => fail(TnStatus::InvalidArgument, e.to_string()),
    }
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            return fail(TnStatus::NullArgument, "null pointer argument");
        }
    };
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn tn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn tn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a skeleton document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_skeleton_from_json(json: *const c_char, out: *mut *mut TnSkeleton) -> TnStatus {
    guard(|| {
        nonnull!(out);
        let s = match text(json) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match load_skeleton(s.as_bytes()) {
            Ok(g) => put(out, TnSkeleton(g)),
            Err(e) => fail(TnStatus::InvalidGraph, e.to_string()),
        }
    })
}

/// # Safety
/// `g` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tn_skeleton_free(g: *mut TnSkeleton) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Reduces a skeleton. `tau_relative` scales `tau` by the total length.
///
/// # Safety
/// `g` must be a live skeleton handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_reduce(
    g: *const TnSkeleton,
    tau: f64,
    tau_relative: bool,
    preserve_loops: bool,
    smooth: bool,
    out: *mut *mut TnReduced,
) -> TnStatus {
    guard(|| {
        nonnull!(g, out);
        if !(tau.is_finite() && tau >= 0.0) {
            return fail(TnStatus::InvalidArgument, format!("tau must be non-negative, got {tau}"));
        }
        let cfg = ReduceConfig {
            tau,
            preserve_loops,
            smooth_degree2: smooth,
            tau_mode: if tau_relative { TauMode::Relative } else { TauMode::Absolute },
        };
        put(out, TnReduced(reduce_pipeline(&(*g).0, &cfg)))
    })
}

/// Parses a reduced-graph document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_reduced_from_json(json: *const c_char, out: *mut *mut TnReduced) -> TnStatus {
    guard(|| {
        nonnull!(out);
        let s = match text(json) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match load_reduced(s.as_bytes()) {
            Ok(g) => put(out, TnReduced(g)),
            Err(e) => fail(TnStatus::InvalidGraph, e.to_string()),
        }
    })
}

/// Serializes a reduced graph; free the result with `tn_string_free`.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_reduced_to_json(g: *const TnReduced, out: *mut *mut c_char) -> TnStatus {
    guard(|| {
        nonnull!(g, out);
        put_string(out, save_reduced(&(*g).0))
    })
}

/// Node, edge and independent-cycle counts.
///
/// # Safety
/// `g` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_reduced_counts(
    g: *const TnReduced,
    nodes: *mut usize,
    edges: *mut usize,
    cycle_rank: *mut usize,
) -> TnStatus {
    guard(|| {
        nonnull!(g, nodes, edges, cycle_rank);
        let r = &(*g).0;
        *nodes = r.nodes().len();
        *edges = r.edges().len();
        *cycle_rank = components_and_cycle_rank(r).1;
        TnStatus::Ok
    })
}

/// # Safety
/// `g` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tn_reduced_free(g: *mut TnReduced) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Canonical name; free the result with `tn_string_free`.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_name(g: *const TnReduced, object_type: TnObjectType, out: *mut *mut c_char) -> TnStatus {
    guard(|| {
        nonnull!(g, out);
        let r = &(*g).0;
        let t = match object_type {
            TnObjectType::FromGraph => r.object_type(),
            TnObjectType::Mito => ObjectType::Mitochondrion,
            TnObjectType::Pyr => ObjectType::PyramidalNeuron,
            TnObjectType::Other => ObjectType::Other,
        };
        match name_graph(r, t) {
            Ok(name) => put_string(out, name.text),
            Err(e) => fail(TnStatus::NameError, e.to_string()),
        }
    })
}

/// Builds the graph a name describes. On a parse failure `error_pos`, if
/// non-null, receives the byte offset of the offending token.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable;
/// `error_pos` may be null.
#[no_mangle]
pub unsafe extern "C" fn tn_parse_name(name: *const c_char, out: *mut *mut TnReduced, error_pos: *mut usize) -> TnStatus {
    guard(|| {
        nonnull!(out);
        let s = match text(name) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match parse_name(s) {
            Ok(g) => put(out, TnReduced(g)),
            Err(e) => {
                if !error_pos.is_null() {
                    *error_pos = e.position();
                }
                fail(TnStatus::ParseError, e.to_string())
            }
        }
    })
}

/// Cosine similarity of the two graphs' Laplacian spectra.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_spectrum_cosine(a: *const TnReduced, b: *const TnReduced, out: *mut f64) -> TnStatus {
    guard(|| {
        nonnull!(a, b, out);
        let sa = laplacian_eigenvalues(&(*a).0);
        let sb = laplacian_eigenvalues(&(*b).0);
        match (sa, sb) {
            (Ok(sa), Ok(sb)) => {
                *out = spectrum_cosine(&sa, &sb);
                TnStatus::Ok
            }
            (Err(e), _) | (_, Err(e)) => fail(TnStatus::InvalidGraph, e.to_string()),
        }
    })
}

/// Loads an embedding model document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_model_from_json(json: *const c_char, out: *mut *mut TnModel) -> TnStatus {
    guard(|| {
        nonnull!(out);
        let s = match text(json) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match load_model(s.as_bytes()) {
            Ok(m) => put(out, TnModel(m)),
            Err(e) => fail(TnStatus::EmbedError, e.to_string()),
        }
    })
}

/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tn_model_free(m: *mut TnModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Mean matched embedding distance between two graphs (0 = identical).
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_graph_similarity(
    m: *const TnModel,
    a: *const TnReduced,
    b: *const TnReduced,
    out: *mut f64,
) -> TnStatus {
    guard(|| {
        nonnull!(m, a, b, out);
        let model = &(*m).0;
        let za = match embed_nodes(model, &(*a).0) {
            Ok(z) => z,
            Err(e) => return fail(TnStatus::EmbedError, e.to_string()),
        };
        let zb = match embed_nodes(model, &(*b).0) {
            Ok(z) => z,
            Err(e) => return fail(TnStatus::EmbedError, e.to_string()),
        };
        match graph_similarity(&za, &zb) {
            Ok(s) => {
                *out = s;
                TnStatus::Ok
            }
            Err(e) => fail(TnStatus::EmbedError, e.to_string()),
        }
    })
}
