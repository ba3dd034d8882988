//! C ABI over `causal_refine`.
//!
//! Objects are opaque handles created by `cr_*_load`/`cr_discover`/... and
//! released with the matching `cr_*_free`. Every fallible call returns a
//! `CrStatus`; on failure `cr_last_error_message` describes the error for
//! the calling thread. Strings handed out by the library are released with
//! `cr_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use causal_refine::cpt::{fit_cpts, CptSet};
use causal_refine::eval::f_measure;
use causal_refine::meanshift::select_from_values;
use causal_refine::pc::{discover, PcConfig, TierKnowledge};
use causal_refine::refine::{RefineConfig, Refiner};
use causal_refine::{io, BeliefVector, BinaryDataset, CausalGraph, Error};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    SchemaMismatch = 6,
    NotADag = 7,
    NotFullyOriented = 8,
    CycleIntroduced = 9,
    NoLegalEdges = 10,
    KnowledgeViolation = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

impl From<&Error> for CrStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => CrStatus::Io,
            Error::EmptyFile { .. }
            | Error::BadCell { .. }
            | Error::RowWidth { .. }
            | Error::Format { .. }
            | Error::DuplicateLabel(_)
            | Error::EmptyLabel(_)
            | Error::MissingTier(..)
            | Error::UnknownLabel(_)
            | Error::InvalidTier { .. }
            | Error::Json(_) => CrStatus::Parse,
            Error::InvalidArgument(_) | Error::InvalidIndex { .. } | Error::InfeasibleSpec(_) => {
                CrStatus::InvalidArgument
            }
            Error::SchemaMismatch(_) => CrStatus::SchemaMismatch,
            Error::NotADag(_) => CrStatus::NotADag,
            Error::NotFullyOriented { .. } => CrStatus::NotFullyOriented,
            Error::CycleIntroduced => CrStatus::CycleIntroduced,
            Error::NoLegalEdges => CrStatus::NoLegalEdges,
            Error::KnowledgeViolation { .. } => CrStatus::KnowledgeViolation,
        }
    }
}

/// Binary dataset with its label schema.
pub struct CrDataset(BinaryDataset);

/// Causal graph over a label schema.
pub struct CrGraph(CausalGraph);

/// Fitted conditionals for a graph.
pub struct CrCpts(CptSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(CrStatus::from(&e), format!("error[{}]: {e}", e.name()))
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> CrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CrStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CrStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CrStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> FfiResult<PathBuf> {
    Ok(PathBuf::from(str_arg(p, what)?))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CrStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> FfiResult<()> {
    let c = CString::new(s).map_err(|_| Failure(CrStatus::Panic, "string contains NUL".into()))?;
    put(out, c.into_raw(), "out")
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn cr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a binary CSV dataset and its tier JSON.
///
/// # Safety
/// Paths must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_dataset_load(
    csv_path: *const c_char,
    tiers_path: *const c_char,
    out: *mut *mut CrDataset,
) -> CrStatus {
    guard(|| {
        let data = io::load_dataset(
            &path_arg(csv_path, "csv_path")?,
            &path_arg(tiers_path, "tiers_path")?,
        )?;
        put(out, Box::into_raw(Box::new(CrDataset(data))), "out")
    })
}

/// # Safety
/// `ds` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn cr_dataset_free(ds: *mut CrDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// # Safety
/// `ds` must be a live dataset handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_dataset_shape(
    ds: *const CrDataset,
    n_rows: *mut usize,
    n_labels: *mut usize,
) -> CrStatus {
    guard(|| {
        let ds = &borrow(ds, "dataset")?.0;
        put(n_rows, ds.n_rows(), "n_rows")?;
        put(n_labels, ds.n_cols(), "n_labels")
    })
}

/// Tier-constrained PC discovery with the G² test.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_discover(
    ds: *const CrDataset,
    alpha: f64,
    max_cond: usize,
    allow_tier_skip: bool,
    strict: bool,
    out: *mut *mut CrGraph,
) -> CrStatus {
    guard(|| {
        let ds = &borrow(ds, "dataset")?.0;
        let mut config = PcConfig {
            max_cond,
            strict,
            ..PcConfig::default()
        };
        config.ci.alpha = alpha;
        config.ci.validate()?;
        let knowledge = TierKnowledge::tiered(ds.schema().clone(), allow_tier_skip);
        let found = discover(ds, &knowledge, &config)?;
        put(out, Box::into_raw(Box::new(CrGraph(found.graph))), "out")
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_graph_from_json(
    json: *const c_char,
    out: *mut *mut CrGraph,
) -> CrStatus {
    guard(|| {
        let g = CausalGraph::from_json(str_arg(json, "json")?)?;
        put(out, Box::into_raw(Box::new(CrGraph(g))), "out")
    })
}

/// # Safety
/// `g` must be NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn cr_graph_free(g: *mut CrGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live graph handle; free the result with `cr_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cr_graph_to_json(g: *const CrGraph, out: *mut *mut c_char) -> CrStatus {
    guard(|| put_string(out, borrow(g, "graph")?.0.to_json()))
}

/// # Safety
/// `g` must be a live graph handle; free the result with `cr_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cr_graph_to_dot(g: *const CrGraph, out: *mut *mut c_char) -> CrStatus {
    guard(|| put_string(out, borrow(g, "graph")?.0.to_dot()))
}

/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_graph_is_dag(g: *const CrGraph, out: *mut bool) -> CrStatus {
    guard(|| put(out, borrow(g, "graph")?.0.is_dag(), "out"))
}

/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_graph_n_edges(g: *const CrGraph, out: *mut usize) -> CrStatus {
    guard(|| put(out, borrow(g, "graph")?.0.n_edges(), "out"))
}

/// Fits smoothed CPTs for `g` from `ds`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_fit_cpts(
    ds: *const CrDataset,
    g: *const CrGraph,
    smoothing: f64,
    out: *mut *mut CrCpts,
) -> CrStatus {
    guard(|| {
        let cpts = fit_cpts(&borrow(ds, "dataset")?.0, &borrow(g, "graph")?.0, smoothing)?;
        put(out, Box::into_raw(Box::new(CrCpts(cpts))), "out")
    })
}

/// # Safety
/// `c` must be NULL or a live CPT handle.
#[no_mangle]
pub unsafe extern "C" fn cr_cpts_free(c: *mut CrCpts) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` must be a live CPT handle; free the result with `cr_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cr_cpts_to_json(c: *const CrCpts, out: *mut *mut c_char) -> CrStatus {
    guard(|| put_string(out, borrow(c, "cpts")?.0.to_json()))
}

/// Refines one belief vector of `n_labels` entries for `tau` iterations and
/// writes the final beliefs to `out` (also `n_labels` entries).
///
/// # Safety
/// Handles must be live; `init` and `out` must hold `n_labels` doubles.
#[no_mangle]
pub unsafe extern "C" fn cr_refine(
    g: *const CrGraph,
    c: *const CrCpts,
    init: *const f64,
    n_labels: usize,
    epsilon: f64,
    tau: usize,
    out: *mut f64,
) -> CrStatus {
    guard(|| {
        let g = &borrow(g, "graph")?.0;
        let c = &borrow(c, "cpts")?.0;
        let init = slice_arg(init, n_labels, "init")?;
        if n_labels != g.n_nodes() {
            return Err(Error::SchemaMismatch(format!(
                "{n_labels} beliefs for {} labels",
                g.n_nodes()
            ))
            .into());
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let config = RefineConfig {
            epsilon,
            tau,
            ..RefineConfig::default()
        };
        let beliefs = BeliefVector::new(g.schema().clone(), init.to_vec())?;
        let trace = Refiner::new(g, c, config)?.run(&beliefs)?;
        std::slice::from_raw_parts_mut(out, n_labels).copy_from_slice(trace.last().values());
        Ok(())
    })
}

/// Mean-shift label selection. Writes the chosen indices (ascending) to
/// `out_indices`, which must have room for `n` entries, and their count to
/// `out_len`.
///
/// # Safety
/// `values` must hold `n` doubles and `out_indices` room for `n` entries.
#[no_mangle]
pub unsafe extern "C" fn cr_select_labels(
    values: *const f64,
    n: usize,
    bandwidth: f64,
    out_indices: *mut usize,
    out_len: *mut usize,
) -> CrStatus {
    guard(|| {
        let values = slice_arg(values, n, "values")?;
        let chosen = select_from_values(values, bandwidth)?;
        if !chosen.is_empty() && out_indices.is_null() {
            return Err(null("out_indices"));
        }
        if chosen.len() > n {
            return Err(Failure(
                CrStatus::BufferTooSmall,
                "selection exceeds buffer".into(),
            ));
        }
        if !chosen.is_empty() {
            std::slice::from_raw_parts_mut(out_indices, chosen.len()).copy_from_slice(&chosen);
        }
        put(out_len, chosen.len(), "out_len")
    })
}

/// Set F1 between two index lists; 1 when both are empty.
///
/// # Safety
/// Arrays must hold the stated number of entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_f_measure(
    predicted: *const usize,
    n_predicted: usize,
    truth: *const usize,
    n_truth: usize,
    out: *mut f64,
) -> CrStatus {
    guard(|| {
        let p = slice_arg(predicted, n_predicted, "predicted")?;
        let t = slice_arg(truth, n_truth, "truth")?;
        put(out, f_measure(p, t), "out")
    })
}
