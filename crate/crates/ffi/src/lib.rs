//! C ABI for the underlap library.
//!
//! Densities cross the boundary as opaque [`UnlDensity`] handles built from
//! the JSON density format. Every fallible call returns a [`UnlStatus`]; on
//! failure, [`unl_last_error`] describes the problem for the calling thread.
//! Panics are caught at the boundary and reported as [`UnlStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use underlap::density::DensityModel;
use underlap::seed::rng_from_seed;
use underlap::unl::{estimate_unl_seeded, unl_exact_discrete, variance_bound};
use underlap::Error;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    Shape = 4,
    InvalidArgument = 5,
    Numeric = 6,
    Capacity = 7,
    Precondition = 8,
    Io = 9,
    Panic = 10,
    Other = 11,
}

/// Opaque density handle. Create with [`unl_density_from_json`], release with
/// [`unl_density_free`].
pub struct UnlDensity {
    model: DensityModel,
}

/// Importance-sampling estimate returned by [`unl_estimate`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UnlEstimateC {
    pub value: f64,
    pub k: usize,
    pub m: usize,
    pub weight_mean: f64,
    pub weight_max: f64,
    pub ess: f64,
    /// `value (k - value) / m`.
    pub variance_bound: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> UnlStatus {
    match err {
        Error::Shape(_) => UnlStatus::Shape,
        Error::Argument(_) | Error::Parse { .. } | Error::Undersized { .. } => UnlStatus::InvalidArgument,
        Error::Numeric(_) => UnlStatus::Numeric,
        Error::Capacity(_) => UnlStatus::Capacity,
        Error::Precondition(_) => UnlStatus::Precondition,
        Error::Io(_) => UnlStatus::Io,
        Error::Json(_) => UnlStatus::InvalidJson,
        Error::Stage { source, .. } => status_of(source),
        _ => UnlStatus::Other,
    }
}

struct Failure(UnlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard<F>(f: F) -> UnlStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_error();
            UnlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("panic: {msg}"));
            UnlStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(UnlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn collect_groups<'a>(handles: *const *const UnlDensity, k: usize) -> Result<Vec<DensityModel>, Failure> {
    let hs = slice(handles, k, "groups")?;
    hs.iter()
        .enumerate()
        .map(|(i, &h)| h.as_ref().map(|d| d.model.clone()).ok_or_else(|| null(&format!("group {i}"))))
        .collect()
}

/// Message for the most recent failure on this thread, or null after a
/// success. The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn unl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn unl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a density from NUL-terminated JSON into `*out`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn unl_density_from_json(json: *const c_char, out: *mut *mut UnlDensity) -> UnlStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(UnlStatus::InvalidUtf8, e.to_string()))?;
        let model: DensityModel =
            serde_json::from_str(text).map_err(|e| Failure(UnlStatus::InvalidJson, e.to_string()))?;
        *out = Box::into_raw(Box::new(UnlDensity { model }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `density` must come from [`unl_density_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn unl_density_free(density: *mut UnlDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// Writes the number of continuous and categorical variables.
///
/// # Safety
/// `density` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn unl_density_dims(
    density: *const UnlDensity,
    n_continuous: *mut usize,
    n_categorical: *mut usize,
) -> UnlStatus {
    guard(|| {
        let d = density.as_ref().ok_or_else(|| null("density"))?;
        if n_continuous.is_null() || n_categorical.is_null() {
            return Err(null("out"));
        }
        let sig = d.model.signature();
        *n_continuous = sig.p_continuous;
        *n_categorical = sig.n_categorical();
        Ok(())
    })
}

/// Log density at one point given as continuous and categorical parts.
///
/// # Safety
/// `continuous` must hold `n_continuous` values and `categorical`
/// `n_categorical` values (either may be null when its length is zero).
#[no_mangle]
pub unsafe extern "C" fn unl_density_log_density(
    density: *const UnlDensity,
    continuous: *const f64,
    n_continuous: usize,
    categorical: *const usize,
    n_categorical: usize,
    out: *mut f64,
) -> UnlStatus {
    guard(|| {
        let d = density.as_ref().ok_or_else(|| null("density"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let point = underlap::MixedPoint {
            continuous: slice(continuous, n_continuous, "continuous")?.to_vec(),
            categorical: slice(categorical, n_categorical, "categorical")?.to_vec(),
        };
        *out = d.model.log_density(&point)?;
        Ok(())
    })
}

/// Draws `n` points, written row-major into `continuous` (`n * n_continuous`
/// values) and `categorical` (`n * n_categorical` values).
///
/// # Safety
/// The output buffers must have the sizes above; either may be null when its
/// dimension is zero.
#[no_mangle]
pub unsafe extern "C" fn unl_density_sample(
    density: *const UnlDensity,
    n: usize,
    seed: u64,
    continuous: *mut f64,
    categorical: *mut usize,
) -> UnlStatus {
    guard(|| {
        let d = density.as_ref().ok_or_else(|| null("density"))?;
        let sig = d.model.signature();
        let (pc, pd) = (sig.p_continuous, sig.n_categorical());
        if n > 0 && ((pc > 0 && continuous.is_null()) || (pd > 0 && categorical.is_null())) {
            return Err(null("output buffer"));
        }
        let pts = d.model.sample(&mut rng_from_seed(seed), n)?;
        for (i, p) in pts.iter().enumerate() {
            for (j, v) in p.continuous.iter().enumerate() {
                *continuous.add(i * pc + j) = *v;
            }
            for (j, v) in p.categorical.iter().enumerate() {
                *categorical.add(i * pd + j) = *v;
            }
        }
        Ok(())
    })
}

/// Importance-sampling UNL estimate of `k` groups from `m` mixture draws.
///
/// # Safety
/// `groups` must point to `k` live handles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn unl_estimate(
    groups: *const *const UnlDensity,
    k: usize,
    m: usize,
    seed: u64,
    out: *mut UnlEstimateC,
) -> UnlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let gs = collect_groups(groups, k)?;
        let est = estimate_unl_seeded(&gs, m, seed)?;
        *out = UnlEstimateC {
            value: est.value,
            k: est.k,
            m: est.m,
            weight_mean: est.weight_mean,
            weight_max: est.weight_max,
            ess: est.ess,
            variance_bound: est.variance_bound(),
        };
        Ok(())
    })
}

/// Exact UNL of categorical groups by state enumeration.
///
/// # Safety
/// `groups` must point to `k` live handles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn unl_exact(groups: *const *const UnlDensity, k: usize, out: *mut f64) -> UnlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let gs = collect_groups(groups, k)?;
        *out = unl_exact_discrete(&gs)?;
        Ok(())
    })
}

/// `unl (k - unl) / m`, the variance bound of the estimator.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn unl_variance_bound(k: usize, unl: f64, m: usize, out: *mut f64) -> UnlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = variance_bound(k, unl, m)?;
        Ok(())
    })
}
