//! C ABI over the core library.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns a `CouetteStatus`; the message of the last
//! failure on the calling thread is available from `couette_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use couette_lab::grid::{Grid, SpectralField};
use couette_lab::linprop::{exact_evolve_sheared, viscous_integral};
use couette_lab::nlsolve::{SimConfig, Simulation};
use num_complex::Complex64;
use couette_lab::weights::{MultiplierEvaluator, MultiplierParams};
use couette_lab::LabError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouetteStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    GridIncompatible = 3,
    Config = 4,
    Io = 5,
    Format = 6,
    Numerical = 7,
    Panic = 8,
}

/// Spectral field on a sheared-frame grid.
pub struct CouetteField {
    inner: SpectralField,
}

/// Nonlinear simulation state.
pub struct CouetteSimulation {
    inner: Simulation,
}

/// Cached multiplier evaluator.
pub struct CouetteWeights {
    inner: MultiplierEvaluator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &LabError) -> CouetteStatus {
    match e {
        LabError::InvalidParameter(_) | LabError::EmptyInterval(_) => CouetteStatus::InvalidParameter,
        LabError::GridIncompatible(_) => CouetteStatus::GridIncompatible,
        LabError::Config(_) | LabError::Json(_) => CouetteStatus::Config,
        LabError::Io { .. } => CouetteStatus::Io,
        LabError::Format(_) | LabError::Csv(_) => CouetteStatus::Format,
        _ => CouetteStatus::Numerical,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CouetteStatus, String)>) -> CouetteStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CouetteStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            CouetteStatus::Panic
        }
    }
}

fn lab<T>(r: couette_lab::Result<T>) -> Result<T, (CouetteStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (CouetteStatus, String) {
    (CouetteStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CouetteStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (CouetteStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), (CouetteStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn couette_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn couette_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// `int_{t0}^{t1} k^2 + (eta - k s)^2 ds`, the exponent of the viscous factor.
#[no_mangle]
pub extern "C" fn couette_viscous_integral(k: i64, eta: f64, t0: f64, t1: f64) -> f64 {
    viscous_integral(k, eta, t0, t1)
}

/// Zero field on an `nz x nv` grid with vertical period `2 pi lv`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn couette_field_new(nz: usize, nv: usize, lv: f64, out: *mut *mut CouetteField) -> CouetteStatus {
    guard(|| {
        let g = lab(Grid::with_resolution(nz, nv, lv))?;
        let h = Box::new(CouetteField {
            inner: SpectralField::zeros(g),
        });
        put(out, Box::into_raw(h), "out")
    })
}

/// # Safety
/// `f` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn couette_field_free(f: *mut CouetteField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Set mode `(k, j)` and its conjugate partner so the field stays real.
///
/// # Safety
/// `f` must be a live field handle.
#[no_mangle]
pub unsafe extern "C" fn couette_field_set_mode(f: *mut CouetteField, k: i64, j: i64, re: f64, im: f64) -> CouetteStatus {
    guard(|| {
        let f = as_mut(f, "field")?;
        if !f.inner.grid().contains(k, j) {
            return Err((CouetteStatus::InvalidParameter, format!("mode ({k}, {j}) outside the grid")));
        }
        f.inner.set_real_mode(k, j, Complex64::new(re, im));
        Ok(())
    })
}

/// # Safety
/// `f` must be a live field handle; `re` and `im` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn couette_field_get_mode(
    f: *const CouetteField,
    k: i64,
    j: i64,
    re: *mut f64,
    im: *mut f64,
) -> CouetteStatus {
    guard(|| {
        let f = as_ref(f, "field")?;
        if !f.inner.grid().contains(k, j) {
            return Err((CouetteStatus::InvalidParameter, format!("mode ({k}, {j}) outside the grid")));
        }
        let c = f.inner.get(k, j);
        put(re, c.re, "re")?;
        put(im, c.im, "im")
    })
}

/// # Safety
/// `f` must be a live field handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn couette_field_l2_norm(f: *const CouetteField, out: *mut f64) -> CouetteStatus {
    guard(|| put(out, as_ref(f, "field")?.inner.l2_norm(), "out"))
}

/// Exact linear evolution in the sheared frame to time `t`; writes a new field.
///
/// # Safety
/// `f` must be a live field handle; `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn couette_linear_evolve(
    f: *const CouetteField,
    t: f64,
    nu: f64,
    out: *mut *mut CouetteField,
) -> CouetteStatus {
    guard(|| {
        let w = lab(exact_evolve_sheared(&as_ref(f, "field")?.inner, t, nu))?;
        put(out, Box::into_raw(Box::new(CouetteField { inner: w })), "out")
    })
}

/// Simulation from a JSON configuration string.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn couette_sim_new(json: *const c_char, out: *mut *mut CouetteSimulation) -> CouetteStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (CouetteStatus::Config, e.to_string()))?;
        let cfg = lab(SimConfig::from_json(text))?;
        let sim = lab(Simulation::new(cfg))?;
        put(out, Box::into_raw(Box::new(CouetteSimulation { inner: sim })), "out")
    })
}

/// # Safety
/// `s` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn couette_sim_free(s: *mut CouetteSimulation) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn couette_sim_advance_to(s: *mut CouetteSimulation, t: f64) -> CouetteStatus {
    guard(|| lab(as_mut(s, "simulation")?.inner.advance_to(t)))
}

/// Current time, step count and `||P_!= omega||`.
///
/// # Safety
/// `s` must be a live simulation handle; outputs may be null to skip them.
#[no_mangle]
pub unsafe extern "C" fn couette_sim_status(
    s: *const CouetteSimulation,
    t: *mut f64,
    steps: *mut u64,
    l2_nonzero: *mut f64,
) -> CouetteStatus {
    guard(|| {
        let sim = &as_ref(s, "simulation")?.inner;
        let st = sim.state();
        if !t.is_null() {
            t.write(st.t);
        }
        if !steps.is_null() {
            steps.write(st.steps);
        }
        if !l2_nonzero.is_null() {
            l2_nonzero.write(st.omega.project_modes().1.l2_norm());
        }
        Ok(())
    })
}

/// Copy of the current vorticity.
///
/// # Safety
/// `s` must be a live simulation handle; `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn couette_sim_field(s: *const CouetteSimulation, out: *mut *mut CouetteField) -> CouetteStatus {
    guard(|| {
        let w = as_ref(s, "simulation")?.inner.state().omega.clone();
        put(out, Box::into_raw(Box::new(CouetteField { inner: w })), "out")
    })
}

/// Multiplier evaluator with standard constants for `(beta, nu)`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn couette_weights_new(beta: f64, nu: f64, out: *mut *mut CouetteWeights) -> CouetteStatus {
    guard(|| {
        let p = lab(MultiplierParams::new(beta, nu))?;
        let h = Box::new(CouetteWeights {
            inner: MultiplierEvaluator::new(p),
        });
        put(out, Box::into_raw(h), "out")
    })
}

/// # Safety
/// `w` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn couette_weights_free(w: *mut CouetteWeights) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// `log A_k(t, eta)`.
///
/// # Safety
/// `w` must be a live weights handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn couette_weights_log_a(
    w: *const CouetteWeights,
    t: f64,
    k: i64,
    eta: f64,
    out: *mut f64,
) -> CouetteStatus {
    guard(|| {
        let ev = &as_ref(w, "weights")?.inner;
        put(out, ev.at(t).a(k, eta).log_value, "out")
    })
}
