//! C ABI for qewp.
//!
//! Every fallible call returns a [`QewpStatus`]; on failure the message is
//! available from [`qewp_last_error_message`] on the same thread. Scenarios
//! are opaque handles created by `qewp_scenario_*` and released with
//! [`qewp_scenario_free`]. Panics never cross the boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qewp::cli::config::ScenarioConfig;
use qewp::emission::{self, bunching_bl, bunching_spectrum, PhotonFieldState};
use qewp::kinematics::{DimensionlessScenario, ModulationParams, SmallRatios};
use qewp::oracle::{oracle_emit, QuadratureOptions};
use qewp::specfun::{bessel_row, sinc};
use qewp::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QewpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericalError = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QewpPhotonKind {
    Vacuum = 0,
    Fock = 1,
    Coherent = 2,
}

/// Photon-number increments of one evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QewpEmission {
    pub dnu1: f64,
    pub dnu2: f64,
    pub total: f64,
}

/// Opaque scenario handle.
pub struct QewpScenario {
    inner: DimensionlessScenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QewpStatus {
    match e {
        Error::InvalidInput(_) => QewpStatus::InvalidArgument,
        Error::Config { .. } | Error::Io(_) | Error::Json(_) => QewpStatus::ConfigError,
        Error::GridTooNarrow(_) | Error::NonFiniteIntegrand { .. } | Error::Numerical(_) => QewpStatus::NumericalError,
    }
}

struct Failure(QewpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QewpStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QewpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QewpStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            QewpStatus::Panic
        }
    }
}

unsafe fn scenario_mut<'a>(s: *mut QewpScenario) -> Result<&'a mut QewpScenario, Failure> {
    s.as_mut().ok_or_else(|| null("scenario"))
}

unsafe fn scenario_ref<'a>(s: *const QewpScenario) -> Result<&'a QewpScenario, Failure> {
    s.as_ref().ok_or_else(|| null("scenario"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn boxed(inner: DimensionlessScenario) -> *mut QewpScenario {
    Box::into_raw(Box::new(QewpScenario { inner }))
}

fn to_emission(r: emission::EmissionResult) -> QewpEmission {
    QewpEmission { dnu1: r.dnu1, dnu2: r.dnu2, total: r.total }
}

/// Message of the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qewp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qewp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON scenario document (physical or dimensionless).
#[no_mangle]
pub unsafe extern "C" fn qewp_scenario_from_json(json: *const c_char, out: *mut *mut QewpScenario) -> QewpStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(QewpStatus::InvalidArgument, format!("json is not UTF-8: {e}")))?;
        let resolved = ScenarioConfig::from_json(text)?.resolve()?;
        out.write(boxed(resolved.scenario().clone()));
        Ok(())
    })
}

/// Unmodulated vacuum scenario with zero small ratios.
#[no_mangle]
pub unsafe extern "C" fn qewp_scenario_new_dimensionless(
    ups: f64,
    theta: f64,
    eps: f64,
    phi0: f64,
    gamma0: f64,
    chirp: f64,
    out: *mut *mut QewpScenario,
) -> QewpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let s = DimensionlessScenario {
            ups,
            theta,
            eps,
            phi0,
            extinction0: gamma0,
            chirp,
            photon_state: PhotonFieldState::Vacuum,
            modulation: None,
            small_ratios: SmallRatios { rec_over_p0: 0.0, qz_over_p0: 0.0, sig_over_p0: 0.0, delta: 0.0 },
        };
        s.validate()?;
        out.write(boxed(s));
        Ok(())
    })
}

/// `nu0` is ignored for vacuum and must be a non-negative integer for Fock.
#[no_mangle]
pub unsafe extern "C" fn qewp_scenario_set_photon_state(
    scenario: *mut QewpScenario,
    kind: QewpPhotonKind,
    nu0: f64,
) -> QewpStatus {
    guard(|| {
        let s = scenario_mut(scenario)?;
        let state = match kind {
            QewpPhotonKind::Vacuum => PhotonFieldState::Vacuum,
            QewpPhotonKind::Fock => {
                if !(nu0 >= 0.0 && nu0.fract() == 0.0 && nu0 <= u64::MAX as f64) {
                    return Err(Failure(
                        QewpStatus::InvalidArgument,
                        format!("Fock nu0 must be a non-negative integer, got {nu0}"),
                    ));
                }
                PhotonFieldState::Fock { nu0: nu0 as u64 }
            }
            QewpPhotonKind::Coherent => PhotonFieldState::Coherent { nu0 },
        };
        state.validate()?;
        s.inner.photon_state = state;
        Ok(())
    })
}

/// Attaches a modulation and sets Γ₀ = w·r to keep both routes to Γ consistent.
#[no_mangle]
pub unsafe extern "C" fn qewp_scenario_set_modulation(
    scenario: *mut QewpScenario,
    g_mag: f64,
    r: f64,
    w: f64,
) -> QewpStatus {
    guard(|| {
        let s = scenario_mut(scenario)?;
        let mut next = s.inner.clone();
        next.modulation = Some(ModulationParams { g_mag, r, w });
        next.extinction0 = w * r;
        next.validate()?;
        s.inner = next;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qewp_scenario_clear_modulation(scenario: *mut QewpScenario) -> QewpStatus {
    guard(|| {
        scenario_mut(scenario)?.inner.modulation = None;
        Ok(())
    })
}

/// Small ratios p_rec/p₀, ħq_z/p₀, σ_p0/p₀ and the recoil asymmetry δ, used
/// only by the oracle.
#[no_mangle]
pub unsafe extern "C" fn qewp_scenario_set_small_ratios(
    scenario: *mut QewpScenario,
    rec_over_p0: f64,
    qz_over_p0: f64,
    sig_over_p0: f64,
    delta: f64,
) -> QewpStatus {
    guard(|| {
        let s = scenario_mut(scenario)?;
        let ratios = SmallRatios { rec_over_p0, qz_over_p0, sig_over_p0, delta };
        ratios.validate()?;
        s.inner.small_ratios = ratios;
        Ok(())
    })
}

/// Releases a scenario; NULL is accepted.
#[no_mangle]
pub unsafe extern "C" fn qewp_scenario_free(scenario: *mut QewpScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Γ = Γ₀√(1+C²).
#[no_mangle]
pub unsafe extern "C" fn qewp_scenario_gamma(scenario: *const QewpScenario, out: *mut f64) -> QewpStatus {
    guard(|| write(out, scenario_ref(scenario)?.inner.extinction()))
}

/// Closed-form emission.
#[no_mangle]
pub unsafe extern "C" fn qewp_emit(scenario: *const QewpScenario, out: *mut QewpEmission) -> QewpStatus {
    guard(|| {
        let r = emission::emit(&scenario_ref(scenario)?.inner)?;
        write(out, to_emission(r))
    })
}

/// Emission by momentum quadrature; `min_nodes` = 0 picks the default grid.
#[no_mangle]
pub unsafe extern "C" fn qewp_oracle_emit(
    scenario: *const QewpScenario,
    min_nodes: usize,
    out: *mut QewpEmission,
) -> QewpStatus {
    guard(|| {
        let opts = QuadratureOptions { min_nodes, ..QuadratureOptions::default() };
        let r = oracle_emit(&scenario_ref(scenario)?.inner, &opts)?;
        write(out, to_emission(r))
    })
}

#[no_mangle]
pub unsafe extern "C" fn qewp_bunching_bl(g_mag: f64, r: f64, chirp: f64, l: i64, out: *mut f64) -> QewpStatus {
    guard(|| write(out, bunching_bl(g_mag, r, chirp, l)?))
}

/// Writes B(w_i) for `n` frequency ratios into `out`.
#[no_mangle]
pub unsafe extern "C" fn qewp_bunching_spectrum(
    g_mag: f64,
    r: f64,
    chirp: f64,
    w: *const f64,
    n: usize,
    out: *mut f64,
) -> QewpStatus {
    guard(|| {
        if n == 0 {
            return Ok(());
        }
        if w.is_null() {
            return Err(null("w"));
        }
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let grid = std::slice::from_raw_parts(w, n);
        let spectrum = bunching_spectrum(g_mag, r, chirp, grid)?;
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&spectrum.values);
        Ok(())
    })
}

/// sin(x)/x with sinc(0) = 1.
#[no_mangle]
pub extern "C" fn qewp_sinc(x: f64) -> f64 {
    sinc(x)
}

/// Integer-order Bessel function J_n(x).
#[no_mangle]
pub unsafe extern "C" fn qewp_bessel_jn(n: i64, x: f64, out: *mut f64) -> QewpStatus {
    guard(|| {
        let order = usize::try_from(n.unsigned_abs())
            .map_err(|_| Failure(QewpStatus::InvalidArgument, format!("order {n} too large")))?;
        let row = bessel_row(x.abs(), order)?;
        let v = row.get(n);
        // J_n(−x) = (−1)^n J_n(x)
        let v = if x < 0.0 && n % 2 != 0 { -v } else { v };
        write(out, v)
    })
}
