//! C ABI over `steklov-trees`.
//!
//! Trees are opaque heap handles. Every fallible call returns a
//! [`SteklovStatus`]; on failure the message is kept per thread and can be
//! read with [`steklov_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use steklov_trees::bounds::{default_ks, reports_to_json, BoundAudit};
use steklov_trees::spectra::{self, TreeInertia, STRUCTURED_TOL};
use steklov_trees::{io, BoundaryTree, Error, FamilySpec, Tolerances};

/// Opaque tree handle.
pub struct SteklovTree {
    inner: BoundaryTree,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteklovStatus {
    Ok = 0,
    NullPointer = 1,
    /// The input is not a valid tree with boundary.
    InvalidTree = 2,
    /// Bad parameter, index out of range, or malformed text.
    InvalidArgument = 3,
    Numerical = 4,
    /// The caller's buffer is too small; the required length was written.
    BufferTooSmall = 5,
    /// A bound failed its check.
    BoundViolated = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> SteklovStatus {
    match e {
        Error::NotATree(_) | Error::TooSmall(_) | Error::Malformed(_) | Error::NotConnected => {
            SteklovStatus::InvalidTree
        }
        Error::BadVertex(_)
        | Error::Parse(_)
        | Error::BadParams(_)
        | Error::InfeasibleK { .. }
        | Error::InfeasibleDegreeCap(_)
        | Error::DimensionMismatch { .. } => SteklovStatus::InvalidArgument,
        _ => SteklovStatus::Numerical,
    }
}

fn fail(e: Error) -> SteklovStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

/// Runs `f`, converting panics into [`SteklovStatus::Panic`].
fn guarded(f: impl FnOnce() -> SteklovStatus) -> SteklovStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            SteklovStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, SteklovStatus> {
    if s.is_null() {
        set_error("null string");
        return Err(SteklovStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string is not UTF-8");
        SteklovStatus::InvalidArgument
    })
}

fn emit_tree(tree: BoundaryTree, out: *mut *mut SteklovTree) -> SteklovStatus {
    unsafe { *out = Box::into_raw(Box::new(SteklovTree { inner: tree })) };
    SteklovStatus::Ok
}

/// Message of the last failure on this thread, or null. Valid until the next call on the thread.
#[no_mangle]
pub extern "C" fn steklov_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a tree from `edge_count` pairs stored flat in `edges` (`2 * edge_count` entries).
///
/// # Safety
/// `edges` must point to `2 * edge_count` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn steklov_tree_from_edges(
    edges: *const usize,
    edge_count: usize,
    out: *mut *mut SteklovTree,
) -> SteklovStatus {
    guarded(|| {
        if edges.is_null() || out.is_null() {
            set_error("null pointer");
            return SteklovStatus::NullPointer;
        }
        let flat = std::slice::from_raw_parts(edges, 2 * edge_count);
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        match BoundaryTree::from_edges(&pairs) {
            Ok(t) => emit_tree(t, out),
            Err(e) => fail(e),
        }
    })
}

/// Parses an edge list or a JSON tree document.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn steklov_tree_parse(
    text: *const c_char,
    out: *mut *mut SteklovTree,
) -> SteklovStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null pointer");
            return SteklovStatus::NullPointer;
        }
        let text = match c_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match io::parse_tree(text) {
            Ok(t) => emit_tree(t, out),
            Err(e) => fail(e),
        }
    })
}

/// Builds a family member from a JSON spec such as `{"family":"BALL","D":3,"r":2}`.
///
/// # Safety
/// `family_json` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn steklov_tree_generate(
    family_json: *const c_char,
    out: *mut *mut SteklovTree,
) -> SteklovStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null pointer");
            return SteklovStatus::NullPointer;
        }
        let text = match c_str(family_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let spec: FamilySpec = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => {
                set_error(format!("bad family spec: {e}"));
                return SteklovStatus::InvalidArgument;
            }
        };
        match spec.build() {
            Ok(t) => emit_tree(t, out),
            Err(e) => fail(e),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `tree` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn steklov_tree_free(tree: *mut SteklovTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// # Safety
/// `tree` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn steklov_tree_vertex_count(tree: *const SteklovTree) -> usize {
    tree.as_ref().map_or(0, |t| t.inner.vertex_count())
}

/// # Safety
/// `tree` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn steklov_tree_boundary_count(tree: *const SteklovTree) -> usize {
    tree.as_ref().map_or(0, |t| t.inner.boundary_count())
}

/// `λ_k` (1-based) by inertia counting, without forming the DtN matrix.
///
/// # Safety
/// `tree` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn steklov_eigenvalue(
    tree: *const SteklovTree,
    k: usize,
    out: *mut f64,
) -> SteklovStatus {
    guarded(|| {
        let (Some(t), false) = (tree.as_ref(), out.is_null()) else {
            set_error("null pointer");
            return SteklovStatus::NullPointer;
        };
        match TreeInertia::new(&t.inner).eigenvalue(k, STRUCTURED_TOL) {
            Ok(v) => {
                *out = v;
                SteklovStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes the sorted spectrum into `values`. `*written` receives the
/// spectrum length; if `capacity` is smaller nothing is copied and
/// `BufferTooSmall` is returned.
///
/// # Safety
/// `tree` must be a live handle, `values` must hold `capacity` doubles, and `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn steklov_spectrum(
    tree: *const SteklovTree,
    values: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> SteklovStatus {
    guarded(|| {
        let (Some(t), false) = (tree.as_ref(), written.is_null()) else {
            set_error("null pointer");
            return SteklovStatus::NullPointer;
        };
        let m = t.inner.boundary_count();
        *written = m;
        if capacity < m {
            set_error(format!("spectrum has {m} values, buffer holds {capacity}"));
            return SteklovStatus::BufferTooSmall;
        }
        if values.is_null() {
            set_error("null pointer");
            return SteklovStatus::NullPointer;
        }
        match spectra::steklov_spectrum(&t.inner) {
            Ok(s) => {
                ptr::copy_nonoverlapping(s.eigenvalues.as_ptr(), values, m);
                SteklovStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Evaluates every bound and returns the JSON report in `*json` (free it
/// with [`steklov_string_free`]). `ks` may be null to audit the default
/// indices. Returns `BoundViolated` (with the report still written) if any
/// applicable bound fails.
///
/// # Safety
/// `tree` must be a live handle, `ks` null or readable for `k_count` values, `json` writable.
#[no_mangle]
pub unsafe extern "C" fn steklov_bounds_json(
    tree: *const SteklovTree,
    ks: *const usize,
    k_count: usize,
    json: *mut *mut c_char,
) -> SteklovStatus {
    guarded(|| {
        let (Some(t), false) = (tree.as_ref(), json.is_null()) else {
            set_error("null pointer");
            return SteklovStatus::NullPointer;
        };
        let ks = if ks.is_null() {
            default_ks(&t.inner)
        } else {
            std::slice::from_raw_parts(ks, k_count).to_vec()
        };
        let audit = match BoundAudit::new(&t.inner, Tolerances::default()) {
            Ok(a) => a,
            Err(e) => return fail(e),
        };
        let reports = match audit.all(&ks) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        let text = reports_to_json("ffi", &reports).to_string();
        *json = CString::new(text).expect("JSON has no NUL").into_raw();
        if reports.iter().any(|r| r.violated()) {
            set_error("a bound was violated");
            SteklovStatus::BoundViolated
        } else {
            SteklovStatus::Ok
        }
    })
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn steklov_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
