//! C ABI over the counting simulator.
//!
//! Objects cross the boundary as opaque handles created and destroyed by the
//! library. Every fallible call returns an [`AqcStatus`]; on failure a
//! description is available from [`aqc_last_error_message`] on the same
//! thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use adiabatic_counting::closed_form::overlap_report;
use adiabatic_counting::hamiltonian::berry_phase_exact;
use adiabatic_counting::scheduler::{
    run_counting, scaling_curve, CountingConfig, CountingRun, Mode,
};
use adiabatic_counting::{Error, MarkedDatabase};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AqcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GuardExceeded = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AqcMode {
    ClosedForm = 0,
    Integrate2d = 1,
    Full = 2,
}

impl From<AqcMode> for Mode {
    fn from(m: AqcMode) -> Self {
        match m {
            AqcMode::ClosedForm => Mode::ClosedForm,
            AqcMode::Integrate2d => Mode::Integrate2d,
            AqcMode::Full => Mode::Full,
        }
    }
}

/// Overlap of the two control branches after a sweep of duration `t`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AqcOverlap {
    pub inner_re: f64,
    pub inner_im: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub p_success: f64,
    pub arg_phase: f64,
    pub leak_magnitude: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AqcCountingOptions {
    pub m: u32,
    pub mode: AqcMode,
    pub seed: u64,
    pub c_omega: f64,
    pub delta: f64,
    pub failure_prob: f64,
}

/// Opaque database handle.
pub struct AqcDatabase(MarkedDatabase);

/// Opaque result of one counting run.
pub struct AqcRun {
    run: CountingRun,
    json: String,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> AqcStatus {
    match err {
        _ if err.is_io() => AqcStatus::Io,
        Error::GuardExceeded(_)
        | Error::CostGuardExceeded { .. }
        | Error::DimensionTooLarge { .. } => AqcStatus::GuardExceeded,
        Error::NormDrift(_) | Error::NonPhysicalOverlap(_) => AqcStatus::Numerical,
        _ => AqcStatus::InvalidArgument,
    }
}

fn guard(body: impl FnOnce() -> Result<(), AqcStatus>) -> AqcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AqcStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            AqcStatus::Panic
        }
    }
}

fn lift<T>(r: adiabatic_counting::Result<T>) -> Result<T, AqcStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), AqcStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        Err(AqcStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn aqc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `marked` must point to `len` readable values (or be null when `len` is 0)
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqc_database_new(
    n: u32,
    marked: *const u64,
    len: usize,
    out: *mut *mut AqcDatabase,
) -> AqcStatus {
    guard(|| {
        non_null(out, "out")?;
        let items: &[u64] = if len == 0 {
            &[]
        } else {
            non_null(marked, "marked")?;
            std::slice::from_raw_parts(marked, len)
        };
        let db = lift(MarkedDatabase::new(n, items.iter().copied()))?;
        *out = Box::into_raw(Box::new(AqcDatabase(db)));
        Ok(())
    })
}

/// Parses the `n=..` / `marked=..` instance text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aqc_database_parse(
    text: *const c_char,
    out: *mut *mut AqcDatabase,
) -> AqcStatus {
    guard(|| {
        non_null(text, "text")?;
        non_null(out, "out")?;
        let s = CStr::from_ptr(text).to_str().map_err(|_| {
            set_error("instance text is not UTF-8".into());
            AqcStatus::InvalidArgument
        })?;
        let db = lift(s.parse::<MarkedDatabase>())?;
        *out = Box::into_raw(Box::new(AqcDatabase(db)));
        Ok(())
    })
}

/// # Safety
/// `db` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn aqc_database_free(db: *mut AqcDatabase) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// Marked fraction as a reduced fraction.
///
/// # Safety
/// `db` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqc_database_alpha(
    db: *const AqcDatabase,
    numer: *mut u64,
    denom: *mut u64,
) -> AqcStatus {
    guard(|| {
        non_null(db, "db")?;
        non_null(numer, "numer")?;
        non_null(denom, "denom")?;
        let a = (*db).0.alpha();
        *numer = *a.numer();
        *denom = *a.denom();
        Ok(())
    })
}

/// Berry phase of one branch and the relative phase after stage `j`.
///
/// # Safety
/// The output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqc_berry_phase_exact(
    alpha: f64,
    j: u32,
    gamma: *mut f64,
    big_gamma: *mut f64,
) -> AqcStatus {
    guard(|| {
        non_null(gamma, "gamma")?;
        non_null(big_gamma, "big_gamma")?;
        let r = lift(berry_phase_exact(alpha, j))?;
        *gamma = r.gamma;
        *big_gamma = r.big_gamma;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqc_overlap_report(
    alpha: f64,
    omega: f64,
    t: f64,
    out: *mut AqcOverlap,
) -> AqcStatus {
    guard(|| {
        non_null(out, "out")?;
        let r = lift(overlap_report(alpha, omega, t))?;
        *out = AqcOverlap {
            inner_re: r.inner.re,
            inner_im: r.inner.im,
            mu1: r.mu1,
            mu2: r.mu2,
            p_success: r.p_success,
            arg_phase: r.arg_phase,
            leak_magnitude: r.leak_magnitude,
        };
        Ok(())
    })
}

/// Defaults for `m` stages in closed-form mode with seed 0.
#[no_mangle]
pub extern "C" fn aqc_counting_options_default(m: u32) -> AqcCountingOptions {
    let c = CountingConfig::new(m, Mode::ClosedForm, 0);
    AqcCountingOptions {
        m,
        mode: AqcMode::ClosedForm,
        seed: 0,
        c_omega: c.c_omega,
        delta: c.delta,
        failure_prob: c.failure_prob,
    }
}

/// # Safety
/// `db` and `options` must be valid; `out` must be writable. The run is
/// released with [`aqc_run_free`].
#[no_mangle]
pub unsafe extern "C" fn aqc_run_counting(
    db: *const AqcDatabase,
    options: *const AqcCountingOptions,
    out: *mut *mut AqcRun,
) -> AqcStatus {
    guard(|| {
        non_null(db, "db")?;
        non_null(options, "options")?;
        non_null(out, "out")?;
        let o = *options;
        let mut cfg = CountingConfig::new(o.m, o.mode.into(), o.seed);
        cfg.c_omega = o.c_omega;
        cfg.delta = o.delta;
        cfg.failure_prob = o.failure_prob;
        let db = &(*db).0;
        let run = lift(run_counting(db, &cfg))?;
        let json = lift(serde_json::to_string(&run.report(db, &cfg)).map_err(Error::from))?;
        *out = Box::into_raw(Box::new(AqcRun { run, json }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn aqc_run_free(run: *mut AqcRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Estimate as a reduced fraction.
///
/// # Safety
/// `run` must be live; the output pointers writable.
#[no_mangle]
pub unsafe extern "C" fn aqc_run_alpha_hat(
    run: *const AqcRun,
    numer: *mut u64,
    denom: *mut u64,
) -> AqcStatus {
    guard(|| {
        non_null(run, "run")?;
        non_null(numer, "numer")?;
        non_null(denom, "denom")?;
        let v = (*run).run.estimate.value;
        *numer = *v.numer();
        *denom = *v.denom();
        Ok(())
    })
}

/// Number of stages, or 0 for a null handle.
///
/// # Safety
/// `run` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn aqc_run_stage_count(run: *const AqcRun) -> usize {
    if run.is_null() {
        0
    } else {
        (*run).run.stages.len()
    }
}

/// Total evolution time charged to the run.
///
/// # Safety
/// `run` must be live; `total` writable.
#[no_mangle]
pub unsafe extern "C" fn aqc_run_total_cost(run: *const AqcRun, total: *mut f64) -> AqcStatus {
    guard(|| {
        non_null(run, "run")?;
        non_null(total, "total")?;
        *total = (*run).run.ledger.total;
        Ok(())
    })
}

/// The run report as a JSON string owned by the caller; release it with
/// [`aqc_string_free`]. Returns null for a null handle.
///
/// # Safety
/// `run` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn aqc_run_to_json(run: *const AqcRun) -> *mut c_char {
    if run.is_null() {
        set_error("run is null".into());
        return ptr::null_mut();
    }
    CString::new((*run).json.as_str()).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn aqc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Fitted exponent of total evolution time against `1/epsilon` over
/// `m_lo..=m_hi`.
///
/// # Safety
/// `slope` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aqc_scaling_slope(
    m_lo: u32,
    m_hi: u32,
    c_omega: f64,
    slope: *mut f64,
) -> AqcStatus {
    guard(|| {
        non_null(slope, "slope")?;
        if m_lo > m_hi {
            set_error(format!("empty range {m_lo}..={m_hi}"));
            return Err(AqcStatus::InvalidArgument);
        }
        *slope = lift(scaling_curve(m_lo..=m_hi, c_omega))?.slope;
        Ok(())
    })
}
