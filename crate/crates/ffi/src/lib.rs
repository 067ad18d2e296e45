//! C ABI for the ctlasso library.
//!
//! Objects are opaque handles created by `*_new` functions and released with
//! the matching `*_free`. Every fallible call returns a [`CtStatus`]; the
//! message for the most recent failure on the calling thread is available
//! from [`ct_last_error_message`]. Matrices are passed row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use ctlasso::covariance::{standardize, StandardizedDesign, ThresholdRule};
use ctlasso::estimators::{EstimatorSpec, TuningGrids};
use ctlasso::model_selection::{grid_search_cv, CvOptions, CvVariant};
use ctlasso::nalgebra::DMatrix;
use ctlasso::{Error, PathOptions, SolutionPath, Termination};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad dimensions, parameters or data.
    InvalidArgument = 2,
    /// The numerical routines failed on valid input.
    Numerical = 3,
    /// The requested λ lies below the computed path.
    LambdaBelowPath = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtMethod {
    Lasso = 0,
    Ust = 1,
    AdaptiveLasso = 2,
    ElasticNet = 3,
    CtHard = 4,
    CtSoft = 5,
    CtAdaptive = 6,
}

/// An estimator and its fixed parameters. Fields a method does not use are
/// ignored.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CtSpec {
    pub method: CtMethod,
    pub nu: f64,
    pub gamma: f64,
    pub lambda2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtTermination {
    CorrelationExhausted = 0,
    EigenvalueStop = 1,
    MaxSteps = 2,
    LambdaFloor = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtCvVariant {
    Minus = 0,
    Zero = 1,
    Plus = 2,
    Auto = 3,
}

/// A standardized data set.
pub struct CtDesign {
    inner: StandardizedDesign,
}

/// A computed solution path.
pub struct CtPath {
    inner: SolutionPath,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CtStatus {
    match e {
        Error::LambdaBelowPath { .. } => CtStatus::LambdaBelowPath,
        Error::SingularActiveSubmatrix { .. }
        | Error::NotConverged { .. }
        | Error::IndefiniteMatrix(_)
        | Error::ZeroInitialEstimate(_)
        | Error::CholeskyFailure(_)
        | Error::SingularSS => CtStatus::Numerical,
        _ => CtStatus::InvalidArgument,
    }
}

fn fail(status: CtStatus, msg: impl Into<String>) -> CtStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, records its error and converts panics.
fn guard(f: impl FnOnce() -> Result<(), CtStatus>) -> CtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(CtStatus::Internal, "panic inside ctlasso"),
    }
}

fn lib(e: Error) -> CtStatus {
    let s = status_of(&e);
    fail(s, e.to_string())
}

fn null() -> CtStatus {
    fail(CtStatus::NullPointer, "null pointer argument")
}

fn spec_of(s: &CtSpec) -> Result<EstimatorSpec, CtStatus> {
    let spec = match s.method {
        CtMethod::Lasso => EstimatorSpec::lasso(),
        CtMethod::Ust => EstimatorSpec::ust(),
        CtMethod::AdaptiveLasso => EstimatorSpec::adaptive_lasso(s.gamma),
        CtMethod::ElasticNet => EstimatorSpec::elastic_net(s.lambda2),
        CtMethod::CtHard => EstimatorSpec::ct_lasso(ThresholdRule::hard(s.nu)),
        CtMethod::CtSoft => EstimatorSpec::ct_lasso(ThresholdRule::soft(s.nu)),
        CtMethod::CtAdaptive => EstimatorSpec::ct_lasso(ThresholdRule::adaptive(s.nu, s.gamma)),
    };
    spec.effective_rule().validate().map_err(lib)?;
    if !(s.gamma >= 0.0 && s.gamma.is_finite()) && s.method == CtMethod::AdaptiveLasso {
        return Err(fail(CtStatus::InvalidArgument, format!("invalid gamma {}", s.gamma)));
    }
    Ok(spec)
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ct_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ct_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Standardizes an `n × p` row-major matrix `x` and response `y`.
///
/// # Safety
/// `x` must point to `n*p` doubles, `y` to `n` doubles, `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_design_new(
    x: *const f64,
    y: *const f64,
    n: usize,
    p: usize,
    out: *mut *mut CtDesign,
) -> CtStatus {
    guard(|| {
        if x.is_null() || y.is_null() || out.is_null() {
            return Err(null());
        }
        let len = n.checked_mul(p).ok_or_else(|| fail(CtStatus::InvalidArgument, "n*p overflows"))?;
        let xs = slice::from_raw_parts(x, len);
        let ys = slice::from_raw_parts(y, n);
        let design = standardize(&DMatrix::from_row_slice(n, p, xs), ys).map_err(lib)?;
        *out = Box::into_raw(Box::new(CtDesign { inner: design }));
        Ok(())
    })
}

/// # Safety
/// `design` must come from [`ct_design_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ct_design_free(design: *mut CtDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// # Safety
/// `design` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ct_design_n(design: *const CtDesign) -> usize {
    design.as_ref().map_or(0, |d| d.inner.n())
}

/// # Safety
/// `design` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ct_design_p(design: *const CtDesign) -> usize {
    design.as_ref().map_or(0, |d| d.inner.p())
}

/// Converts standardized coefficients to the original units.
///
/// # Safety
/// `beta` and `slopes` must each hold `len` doubles; `intercept` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ct_design_to_original(
    design: *const CtDesign,
    beta: *const f64,
    len: usize,
    slopes: *mut f64,
    intercept: *mut f64,
) -> CtStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(null)?;
        if beta.is_null() || slopes.is_null() || intercept.is_null() {
            return Err(null());
        }
        check_len(len, d.inner.p())?;
        let (b0, b) = d.inner.to_original_scale(slice::from_raw_parts(beta, len));
        slice::from_raw_parts_mut(slopes, len).copy_from_slice(&b);
        *intercept = b0;
        Ok(())
    })
}

fn check_len(len: usize, p: usize) -> Result<(), CtStatus> {
    if len == p {
        Ok(())
    } else {
        Err(fail(CtStatus::InvalidArgument, format!("buffer length {len}, expected {p}")))
    }
}

/// Computes the solution path. `max_steps == 0` selects the default cap.
/// If the active block turns singular, the partial path is still returned
/// through `out` together with [`CtStatus::Numerical`].
///
/// # Safety
/// `design` must be live, `spec` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ct_path_new(
    design: *const CtDesign,
    spec: *const CtSpec,
    max_steps: usize,
    out: *mut *mut CtPath,
) -> CtStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(null)?;
        let s = spec.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let spec = spec_of(s)?;
        let opts = PathOptions {
            max_steps: (max_steps > 0).then_some(max_steps),
            ..PathOptions::default()
        };
        match spec.fit_path(&d.inner, &opts) {
            Ok(path) => {
                *out = Box::into_raw(Box::new(CtPath { inner: path }));
                Ok(())
            }
            Err(Error::SingularActiveSubmatrix { path }) => {
                let msg = Error::SingularActiveSubmatrix { path: path.clone() }.to_string();
                *out = Box::into_raw(Box::new(CtPath { inner: *path }));
                Err(fail(CtStatus::Numerical, msg))
            }
            Err(e) => Err(lib(e)),
        }
    })
}

/// # Safety
/// `path` must come from [`ct_path_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ct_path_free(path: *mut CtPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Number of breakpoints.
///
/// # Safety
/// `path` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ct_path_len(path: *const CtPath) -> usize {
    path.as_ref().map_or(0, |p| p.inner.breakpoints.len())
}

/// Number of coefficients.
///
/// # Safety
/// `path` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ct_path_p(path: *const CtPath) -> usize {
    path.as_ref().map_or(0, |p| p.inner.p())
}

/// # Safety
/// `path` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ct_path_termination(path: *const CtPath, out: *mut CtTermination) -> CtStatus {
    guard(|| {
        let p = path.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        *out = match p.inner.termination {
            Termination::CorrelationExhausted => CtTermination::CorrelationExhausted,
            Termination::EigenvalueStop => CtTermination::EigenvalueStop,
            Termination::MaxSteps => CtTermination::MaxSteps,
            Termination::LambdaFloor => CtTermination::LambdaFloor,
        };
        Ok(())
    })
}

/// λ and coefficients (standardized scale) at breakpoint `index`.
///
/// # Safety
/// `path` must be live, `lambda` writable and `beta` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ct_path_breakpoint(
    path: *const CtPath,
    index: usize,
    lambda: *mut f64,
    beta: *mut f64,
    len: usize,
) -> CtStatus {
    guard(|| {
        let p = path.as_ref().ok_or_else(null)?;
        if lambda.is_null() || beta.is_null() {
            return Err(null());
        }
        let bp = p.inner.breakpoints.get(index).ok_or_else(|| {
            fail(
                CtStatus::InvalidArgument,
                format!("breakpoint {index} out of range ({} breakpoints)", p.inner.breakpoints.len()),
            )
        })?;
        check_len(len, p.inner.p())?;
        *lambda = bp.lambda;
        slice::from_raw_parts_mut(beta, len).copy_from_slice(&bp.beta);
        Ok(())
    })
}

/// Coefficients at any λ by linear interpolation. With `clamp` nonzero a λ
/// below the path end returns the last breakpoint; otherwise it fails with
/// [`CtStatus::LambdaBelowPath`].
///
/// # Safety
/// `path` must be live and `beta` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ct_path_coefficients_at(
    path: *const CtPath,
    lambda: f64,
    clamp: bool,
    beta: *mut f64,
    len: usize,
) -> CtStatus {
    guard(|| {
        let p = path.as_ref().ok_or_else(null)?;
        if beta.is_null() {
            return Err(null());
        }
        check_len(len, p.inner.p())?;
        let b = p.inner.coefficients_at(lambda, clamp).map_err(lib)?;
        slice::from_raw_parts_mut(beta, len).copy_from_slice(&b);
        Ok(())
    })
}

/// K-fold cross-validated λ for a fixed spec (default 100-point log grid).
///
/// # Safety
/// `design` must be live, `spec` readable and `lambda` writable.
#[no_mangle]
pub unsafe extern "C" fn ct_cv_lambda(
    design: *const CtDesign,
    spec: *const CtSpec,
    folds: usize,
    variant: CtCvVariant,
    seed: u64,
    lambda: *mut f64,
) -> CtStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(null)?;
        let s = spec.as_ref().ok_or_else(null)?;
        if lambda.is_null() {
            return Err(null());
        }
        let base = spec_of(s)?;
        let grids = TuningGrids {
            nu: vec![s.nu],
            gamma: vec![s.gamma],
            lambda2: vec![s.lambda2],
        };
        let opts = CvOptions {
            k: folds,
            variant: match variant {
                CtCvVariant::Minus => CvVariant::CvMinus,
                CtCvVariant::Zero => CvVariant::CvZero,
                CtCvVariant::Plus => CvVariant::CvPlus,
                CtCvVariant::Auto => CvVariant::Auto,
            },
            seed,
            ..CvOptions::default()
        };
        let sel = grid_search_cv(&d.inner, &base, &grids, &opts).map_err(lib)?;
        *lambda = sel.lambda_hat;
        Ok(())
    })
}
