//! C interface to `netadvect`.
//!
//! Networks and solutions are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns a
//! [`NetadvectStatus`]; the message of the most recent failure on the calling
//! thread is available from [`netadvect_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use netadvect::edge::{self, EdgeProblem};
use netadvect::kernels::{Scheme, SchemeConfig, SpaceGrid, TimeGrid};
use netadvect::netfile::NetworkFile;
use netadvect::network::{self, NetworkModel, NetworkSolution};
use netadvect::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetadvectStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed text input: JSON, UTF-8 or a scheme name.
    Parse = 2,
    /// Well-formed input that describes an invalid problem.
    Validation = 3,
    Solve = 4,
    /// Output buffer too small or index out of range.
    Buffer = 5,
    Panic = 6,
}

/// Parsed and validated network.
pub struct NetadvectNetwork {
    model: NetworkModel,
}

/// Result of a network solve.
pub struct NetadvectSolution {
    model: NetworkModel,
    solution: NetworkSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> NetadvectStatus {
    match e {
        Error::Parse(_) => NetadvectStatus::Parse,
        Error::Sequencing(_) | Error::NotBracketed { .. } | Error::Io(_) => NetadvectStatus::Solve,
        _ => NetadvectStatus::Validation,
    }
}

struct Failure(NetadvectStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(NetadvectStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> NetadvectStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => NetadvectStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            NetadvectStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(NetadvectStatus::Parse, format!("{what} is not valid UTF-8: {e}")))
}

unsafe fn config(scheme: *const c_char) -> Result<SchemeConfig, Failure> {
    let name = text(scheme, "scheme")?;
    let c = SchemeConfig::new(Scheme::from_name(name)?);
    c.validate()?;
    Ok(c)
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn netadvect_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a network description (JSON, NUL-terminated).
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn netadvect_network_from_json(
    json: *const c_char,
    out: *mut *mut NetadvectNetwork,
) -> NetadvectStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let file = NetworkFile::parse(text(json, "json")?)?;
        let model = file.to_model()?;
        *out = Box::into_raw(Box::new(NetadvectNetwork { model }));
        Ok(())
    })
}

/// # Safety
/// `network` must come from `netadvect_network_from_json` and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn netadvect_network_free(network: *mut NetadvectNetwork) {
    if !network.is_null() {
        drop(Box::from_raw(network));
    }
}

/// Number of edges, or 0 for a null handle.
///
/// # Safety
/// `network` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netadvect_network_edge_count(network: *const NetadvectNetwork) -> usize {
    network.as_ref().map_or(0, |n| n.model.edges.len())
}

/// Index of the edge with the given id.
///
/// # Safety
/// `network` must be a live handle, `id` a valid C string, `index` valid.
#[no_mangle]
pub unsafe extern "C" fn netadvect_network_edge_index(
    network: *const NetadvectNetwork,
    id: *const c_char,
    index: *mut usize,
) -> NetadvectStatus {
    guard(|| {
        let n = network.as_ref().ok_or_else(|| null("network"))?;
        if index.is_null() {
            return Err(null("index"));
        }
        let id = text(id, "id")?;
        *index = n
            .model
            .edge_index(id)
            .ok_or_else(|| Failure(NetadvectStatus::Buffer, format!("no edge with id {id:?}")))?;
        Ok(())
    })
}

/// Solves every edge with the named scheme (`first`, `second`, `third`,
/// `weno`, `hr`, `direct-hr` or `w=<value>`).
///
/// # Safety
/// `network` must be a live handle, `scheme` a valid C string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn netadvect_network_solve(
    network: *const NetadvectNetwork,
    scheme: *const c_char,
    out: *mut *mut NetadvectSolution,
) -> NetadvectStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let n = network.as_ref().ok_or_else(|| null("network"))?;
        let config = config(scheme)?;
        let solution = network::solve_network(&n.model, &config)?;
        *out = Box::into_raw(Box::new(NetadvectSolution { model: n.model.clone(), solution }));
        Ok(())
    })
}

/// # Safety
/// `solution` must come from `netadvect_network_solve` and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn netadvect_solution_free(solution: *mut NetadvectSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

unsafe fn edge_of<'a>(s: *const NetadvectSolution, edge: usize) -> Result<(&'a NetadvectSolution, usize), Failure> {
    let s = s.as_ref().ok_or_else(|| null("solution"))?;
    if edge >= s.solution.edges.len() {
        return Err(Failure(NetadvectStatus::Buffer, format!("edge index {edge} out of range")));
    }
    Ok((s, edge))
}

/// Cell count `I` and step count `N` of one edge; its table holds
/// `(I + 1) * (N + 1)` values.
///
/// # Safety
/// `solution` must be a live handle; `cells` and `steps` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn netadvect_solution_edge_dims(
    solution: *const NetadvectSolution,
    edge: usize,
    cells: *mut usize,
    steps: *mut usize,
) -> NetadvectStatus {
    guard(|| {
        let (s, e) = edge_of(solution, edge)?;
        if cells.is_null() || steps.is_null() {
            return Err(null("cells or steps"));
        }
        *cells = s.solution.edges[e].cells();
        *steps = s.solution.edges[e].steps();
        Ok(())
    })
}

/// Copies the values of one edge into `buffer`, column-major: node `(i, n)`
/// goes to `buffer[i * (N + 1) + n]`.
///
/// # Safety
/// `buffer` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn netadvect_solution_edge_values(
    solution: *const NetadvectSolution,
    edge: usize,
    buffer: *mut f64,
    len: usize,
) -> NetadvectStatus {
    guard(|| {
        let (s, e) = edge_of(solution, edge)?;
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        let values = s.solution.edges[e].values();
        if len < values.len() {
            return Err(Failure(NetadvectStatus::Buffer, format!("buffer holds {len} values, need {}", values.len())));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
        Ok(())
    })
}

/// Number of local bound violations over all edges.
///
/// # Safety
/// `solution` must be a live handle and `count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn netadvect_solution_dmp_violations(
    solution: *const NetadvectSolution,
    count: *mut usize,
) -> NetadvectStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        if count.is_null() {
            return Err(null("count"));
        }
        *count = network::network_dmp(&s.solution).iter().map(|(_, v)| v.len()).sum();
        Ok(())
    })
}

/// Global mass balance: residual and the throughput that scales it.
///
/// # Safety
/// `solution` must be a live handle; the outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn netadvect_solution_balance(
    solution: *const NetadvectSolution,
    residual: *mut f64,
    throughput: *mut f64,
) -> NetadvectStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        if residual.is_null() || throughput.is_null() {
            return Err(null("residual or throughput"));
        }
        let a = network::network_audit(&s.model, &s.solution)?;
        *residual = a.residual;
        *throughput = a.throughput;
        Ok(())
    })
}

/// Solves one uniform edge of length `length` with `cells` cells up to time
/// `horizon` with `steps` steps, constant `velocity` and capacity `kappa`.
/// `boundary` holds `steps + 1` inflow values, `initial` holds `cells + 1`
/// values or is null for zero data. The result is written column-major into
/// `out`, which must hold `(cells + 1) * (steps + 1)` doubles.
///
/// # Safety
/// All non-null pointers must reference buffers of the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn netadvect_edge_solve(
    length: f64,
    cells: usize,
    horizon: f64,
    steps: usize,
    kappa: f64,
    velocity: f64,
    boundary: *const f64,
    initial: *const f64,
    scheme: *const c_char,
    out: *mut f64,
    out_len: usize,
) -> NetadvectStatus {
    guard(|| {
        if boundary.is_null() || out.is_null() {
            return Err(null("boundary or out"));
        }
        let nodes = (cells + 1)
            .checked_mul(steps + 1)
            .ok_or_else(|| Failure(NetadvectStatus::Validation, "grid too large".into()))?;
        if out_len < nodes {
            return Err(Failure(NetadvectStatus::Buffer, format!("out holds {out_len} values, need {nodes}")));
        }
        let config = config(scheme)?;
        let grid = SpaceGrid::uniform(length, cells)?;
        let time = TimeGrid::new(horizon, steps)?;
        let bc = std::slice::from_raw_parts(boundary, steps + 1).to_vec();
        let mut problem = EdgeProblem::linear(grid, time, kappa, velocity, bc);
        if !initial.is_null() {
            problem.initial = std::slice::from_raw_parts(initial, cells + 1).to_vec();
        }
        let sol = edge::solve(&problem, &config)?;
        ptr::copy_nonoverlapping(sol.values().as_ptr(), out, nodes);
        Ok(())
    })
}
