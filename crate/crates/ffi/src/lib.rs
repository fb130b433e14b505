//! C ABI for `qest-core`.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns a [`QestStatus`]; on failure the message is kept per
//! thread and can be copied out with [`qest_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qest_core::bounds::{bound_report, WeightSpec};
use qest_core::linalg::SymMat;
use qest_core::povm::{build_optimal_estimator, build_optimal_povm, QuantumEstimator};
use qest_core::simulate::{self, SimConfig, Strategy};
use qest_core::{region, QestError, ThetaParams};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QestStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidTheta = 3,
    InvalidWeight = 4,
    Numerical = 5,
    Infeasible = 6,
    IndexOutOfRange = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QestStrategy {
    SingleCopyOptimal = 0,
    TwoStep = 1,
    Adaptive = 2,
}

/// A validated model point.
pub struct QestModel {
    theta: ThetaParams,
}

/// The optimal measurement with its locally unbiased estimator.
pub struct QestPovm {
    estimator: QuantumEstimator,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QestBounds {
    pub sld_cr: f64,
    pub rld_cr: f64,
    /// Nagaoka bound for k = 2, HGM bound for k = 3.
    pub nagaoka_hgm: f64,
    pub holevo: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QestSimSummary {
    pub weighted_mse: f64,
    pub n_times_weighted_mse: f64,
    pub std_error: f64,
    pub flagged_trials: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &QestError) -> QestStatus {
    match e {
        QestError::InvalidTheta(_) | QestError::InvalidParamCount(_) => QestStatus::InvalidTheta,
        QestError::InvalidWeight(_) | QestError::NotPd { .. } | QestError::NotPsd { .. } | QestError::NotSymmetric(_) => {
            QestStatus::InvalidWeight
        }
        QestError::InfeasibleMse { .. } => QestStatus::Infeasible,
        QestError::InvalidConfig(_) | QestError::Parse(_) | QestError::DimensionMismatch { .. } | QestError::InvalidPovm(_) => {
            QestStatus::InvalidArgument
        }
        _ => QestStatus::Numerical,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (QestStatus, String)>) -> QestStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            QestStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            QestStatus::Panic
        }
    }
}

fn core<T>(r: qest_core::Result<T>) -> Result<T, (QestStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (QestStatus, String) {
    (QestStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (QestStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn model<'a>(m: *const QestModel) -> Result<&'a QestModel, (QestStatus, String)> {
    m.as_ref().ok_or_else(|| null("model"))
}

fn sym(dim: usize, v: &[f64]) -> Result<SymMat, (QestStatus, String)> {
    core(SymMat::from_row_major(dim, v))
}

/// Creates a model point. `theta1` must be nonzero and `theta1² + theta2² < 1`.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to release with [`qest_model_free`].
#[no_mangle]
pub unsafe extern "C" fn qest_model_new(theta1: f64, theta2: f64, theta3: f64, out: *mut *mut QestModel) -> QestStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let theta = core(ThetaParams::new(theta1, theta2, theta3))?;
        *out = Box::into_raw(Box::new(QestModel { theta }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`qest_model_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qest_model_free(m: *mut QestModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Bounds for `k` parameters. `weight` holds `k*k` row-major entries; for `k = 3`
/// a positive `w3` instead selects the block weight built from the first 4 entries.
///
/// # Safety
/// `weight` must point to `k*k` doubles (4 when `w3 > 0`), `out` to a writable struct.
#[no_mangle]
pub unsafe extern "C" fn qest_bounds(m: *const QestModel, k: usize, weight: *const f64, w3: f64, out: *mut QestBounds) -> QestStatus {
    guard(|| {
        let m = model(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if k != 2 && k != 3 {
            return Err((QestStatus::InvalidArgument, format!("k must be 2 or 3, got {k}")));
        }
        let w = if k == 3 && w3 > 0.0 {
            core(WeightSpec::block(sym(2, slice(weight, 4, "weight")?)?, w3))?
        } else {
            core(WeightSpec::full(sym(k, slice(weight, k * k, "weight")?)?))?
        };
        let r = core(bound_report(&m.theta, k, &w, None))?;
        *out = QestBounds { sld_cr: r.sld_cr, rld_cr: r.rld_cr, nagaoka_hgm: r.nagaoka_hgm, holevo: r.holevo };
        Ok(())
    })
}

/// Optimal measurement for the 2×2 weight `w2` (row-major) at the model point.
///
/// # Safety
/// `w2` must point to 4 doubles and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn qest_optimal_povm_new(m: *const QestModel, w2: *const f64, out: *mut *mut QestPovm) -> QestStatus {
    guard(|| {
        let m = model(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let w = sym(2, slice(w2, 4, "w2")?)?;
        let (povm, _) = core(build_optimal_povm(&m.theta, &w))?;
        let estimator = core(build_optimal_estimator(&m.theta, &povm, 2))?;
        *out = Box::into_raw(Box::new(QestPovm { estimator }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from [`qest_optimal_povm_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qest_povm_free(p: *mut QestPovm) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of POVM elements.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qest_povm_len(p: *const QestPovm, out: *mut usize) -> QestStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("povm"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = p.estimator.povm.len();
        Ok(())
    })
}

/// Element `i` as 8 doubles: `re, im` for entries `(0,0), (0,1), (1,0), (1,1)`.
///
/// # Safety
/// `p` must be a live handle and `matrix` must point to 8 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qest_povm_element(p: *const QestPovm, i: usize, matrix: *mut f64) -> QestStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("povm"))?;
        if matrix.is_null() {
            return Err(null("matrix"));
        }
        let e = p.estimator.povm.elements().get(i).ok_or((QestStatus::IndexOutOfRange, format!("no element {i}")))?;
        let out = std::slice::from_raw_parts_mut(matrix, 8);
        for r in 0..2 {
            for c in 0..2 {
                let z = e.operator.get(r, c);
                out[4 * r + 2 * c] = z.re;
                out[4 * r + 2 * c + 1] = z.im;
            }
        }
        Ok(())
    })
}

/// Estimate `(theta1, theta2)` attached to element `i`.
///
/// # Safety
/// `p` must be a live handle and `estimate` must point to 2 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qest_povm_estimate(p: *const QestPovm, i: usize, estimate: *mut f64) -> QestStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("povm"))?;
        if estimate.is_null() {
            return Err(null("estimate"));
        }
        let e = p.estimator.estimates.get(i).ok_or((QestStatus::IndexOutOfRange, format!("no element {i}")))?;
        std::slice::from_raw_parts_mut(estimate, 2).copy_from_slice(e);
        Ok(())
    })
}

/// Membership of the 2×2 candidate `v` (row-major) in the attainable region.
/// `member` and `boundary` receive 0 or 1.
///
/// # Safety
/// `v` must point to 4 doubles; `member` and `boundary` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qest_region_d(m: *const QestModel, v: *const f64, member: *mut c_int, boundary: *mut c_int) -> QestStatus {
    guard(|| {
        let m = model(m)?;
        if member.is_null() || boundary.is_null() {
            return Err(null("output"));
        }
        let r = core(region::in_region_d(&sym(2, slice(v, 4, "v")?)?, &m.theta))?;
        *member = c_int::from(r.member);
        *boundary = c_int::from(r.boundary);
        Ok(())
    })
}

/// Monte-Carlo MSE of a strategy at the model point (the true state), 2×2 weight `w2`.
///
/// # Safety
/// `w2` must point to 4 doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qest_simulate(
    m: *const QestModel,
    strategy: QestStrategy,
    w2: *const f64,
    n: u64,
    trials: u64,
    seed: u64,
    out: *mut QestSimSummary,
) -> QestStatus {
    guard(|| {
        let m = model(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let w = core(WeightSpec::full(sym(2, slice(w2, 4, "w2")?)?))?;
        let strategy = match strategy {
            QestStrategy::SingleCopyOptimal => Strategy::SingleCopyOptimal,
            QestStrategy::TwoStep => Strategy::TwoStep,
            QestStrategy::Adaptive => Strategy::Adaptive,
        };
        let trials = usize::try_from(trials).map_err(|_| (QestStatus::InvalidArgument, "trials too large".to_string()))?;
        let r = core(simulate::run(&SimConfig::new(m.theta, w, strategy, n, trials, seed)))?;
        *out = QestSimSummary {
            weighted_mse: r.weighted_mse,
            n_times_weighted_mse: r.n_times_weighted_mse,
            std_error: r.stderr,
            flagged_trials: r.flagged_trials as u64,
        };
        Ok(())
    })
}

/// Copies the calling thread's last error message, NUL-terminated, into `buf`.
/// Writes the required size including the terminator to `needed` when non-null.
///
/// # Safety
/// `buf` must point to `len` writable bytes (or be null with `len == 0`).
#[no_mangle]
pub unsafe extern "C" fn qest_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> QestStatus {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !needed.is_null() {
            *needed = bytes.len() + 1;
        }
        if buf.is_null() || len < bytes.len() + 1 {
            return if buf.is_null() && len == 0 { QestStatus::Ok } else { QestStatus::BufferTooSmall };
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
        *buf.add(bytes.len()) = 0;
        QestStatus::Ok
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qest_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
