//! C interface to `spectraldiff`.
//!
//! Objects cross the boundary as opaque handles created by `sd_*_new`/`sd_*_from_*`
//! calls and released with the matching `sd_*_free`. Every fallible call returns an
//! [`SdStatus`]; on failure the message is available from [`sd_last_error_message`]
//! on the same thread.

use spectraldiff::eigen::smallest_eigs;
use spectraldiff::inflation::{
    analytic_well_overlap, hybrid_spectrum, HybridParams, HybridSpectrum, PotentialModel, Scheme, WellVariant,
};
use spectraldiff::qsvt::{est_eig, EstimatorConfig};
use spectraldiff::sturm_liouville::{assemble_fd_matrix, parse_operator_spec, FDMatrix, OperatorSpec};
use spectraldiff::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes. `2..=5` match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 or a buffer that is too small.
    InvalidArgument = 1,
    Config = 2,
    Numeric = 3,
    Estimator = 4,
    RootFind = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 70,
}

/// Well shapes for [`sd_well_overlap`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdWellVariant {
    Hilltop = 0,
    Inflection = 1,
}

/// Discretizations for [`sd_hybrid_new`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdScheme {
    Weighted = 0,
    Spec = 1,
}

/// Parsed operator document.
pub struct SdOperator {
    spec: OperatorSpec,
}

/// Assembled finite-difference matrix.
pub struct SdMatrix {
    fd: FDMatrix,
}

/// Hybrid-model spectrum with its overlaps.
pub struct SdHybrid {
    inner: HybridSpectrum,
}

/// Result of one estimator run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SdEstimate {
    pub lambda_hat: f64,
    pub lower: f64,
    pub upper: f64,
    pub levels: usize,
    pub shots_per_level: u64,
    pub degree: usize,
    pub alpha: f64,
    pub entry_oracle_calls: u64,
    pub row_col_oracle_calls: u64,
    pub state_prep_calls: u64,
    pub block_encoding_calls: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SdStatus {
    match e.exit_code() {
        2 => SdStatus::Config,
        3 => SdStatus::Numeric,
        4 => SdStatus::Estimator,
        5 => SdStatus::RootFind,
        _ => SdStatus::Internal,
    }
}

enum Fail {
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> SdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SdStatus::Ok,
        Ok(Err(Fail::Arg(m))) => {
            set_error(m);
            SdStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {m}"));
            SdStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Arg(format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Arg(format!("`{name}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail::Arg(format!("`{name}` is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail::Arg(format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. Valid until the next
/// `sd_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an operator JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sd_operator_from_json(json: *const c_char, out: *mut *mut SdOperator) -> SdStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(json, "json")?;
        let spec = parse_operator_spec(text)?;
        *out = Box::into_raw(Box::new(SdOperator { spec }));
        Ok(())
    })
}

/// # Safety
/// `op` must come from [`sd_operator_from_json`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sd_operator_free(op: *mut SdOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Dimension of the operator's box.
///
/// # Safety
/// `op` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sd_operator_dim(op: *const SdOperator) -> usize {
    op.as_ref().map_or(0, |o| o.spec.dim())
}

/// Assembles the matrix on `n_gr` interior points per axis.
///
/// # Safety
/// `op` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_assemble(op: *const SdOperator, n_gr: usize, out: *mut *mut SdMatrix) -> SdStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ptr::null_mut();
        let op = ref_arg(op, "op")?;
        let fd = assemble_fd_matrix(&op.spec, n_gr)?;
        *out = Box::into_raw(Box::new(SdMatrix { fd }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`sd_matrix_assemble`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_free(m: *mut SdMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of rows, `n_gr^d`; 0 for null.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_dim(m: *const SdMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.fd.dim())
}

/// Entry `(row, col)`; 0 outside the pattern or for null.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_entry(m: *const SdMatrix, row: usize, col: usize) -> f64 {
    match m.as_ref() {
        Some(m) if row < m.fd.dim() && col < m.fd.dim() => m.fd.entry(row, col),
        _ => 0.0,
    }
}

/// The `k` smallest eigenvalues in ascending order, written to `values[0..k]`.
///
/// # Safety
/// `m` must be a live handle and `values` must hold `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn sd_smallest_eigenvalues(m: *const SdMatrix, k: usize, values: *mut f64) -> SdStatus {
    guard(|| {
        let m = ref_arg(m, "m")?;
        if k == 0 {
            return Ok(());
        }
        out_arg(values, "values")?;
        let e = smallest_eigs(&m.fd, k)?;
        std::slice::from_raw_parts_mut(values, k).copy_from_slice(&e.eigenvalues);
        Ok(())
    })
}

/// One estimator run on `m` with the trial vector `trial[0..len]` and a JSON
/// configuration (`eps`, `delta`, `gamma`, optional `sampling`, `seed`).
///
/// # Safety
/// `m` must be a live handle, `config_json` NUL-terminated, `trial` must hold
/// `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_est_eig(
    m: *const SdMatrix,
    config_json: *const c_char,
    trial: *const f64,
    len: usize,
    out: *mut SdEstimate,
) -> SdStatus {
    guard(|| {
        out_arg(out, "out")?;
        let m = ref_arg(m, "m")?;
        let text = str_arg(config_json, "config_json")?;
        let config: EstimatorConfig =
            serde_json::from_str(text).map_err(|e| Fail::Lib(Error::Config(format!("estimator config: {e}"))))?;
        if trial.is_null() {
            return Err(Fail::Arg("`trial` is null".into()));
        }
        let trial = std::slice::from_raw_parts(trial, len);
        let e = est_eig(&m.fd, trial, &config)?;
        let t = &e.ledger.totals;
        *out = SdEstimate {
            lambda_hat: e.lambda_hat,
            lower: e.lower,
            upper: e.upper,
            levels: e.levels,
            shots_per_level: e.shots_per_level,
            degree: e.degree,
            alpha: e.block_encoding.alpha,
            entry_oracle_calls: t.entry_oracle_calls,
            row_col_oracle_calls: t.row_col_oracle_calls,
            state_prep_calls: t.state_prep_calls,
            block_encoding_calls: t.block_encoding_calls,
        };
        Ok(())
    })
}

/// Signed analytic overlap of the Gaussian test function of width `r` with the
/// `n`-th well eigenfunction.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_well_overlap(variant: SdWellVariant, n: usize, r: f64, out: *mut f64) -> SdStatus {
    guard(|| {
        out_arg(out, "out")?;
        let v = match variant {
            SdWellVariant::Hilltop => WellVariant::Hilltop,
            SdWellVariant::Inflection => WellVariant::Inflection,
        };
        *out = analytic_well_overlap(v, n, r)?;
        Ok(())
    })
}

/// Builds the nonuniform grid of the reference hybrid model at `scale`, and solves for
/// the first `k` eigenpairs.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_hybrid_new(scale: f64, k: usize, scheme: SdScheme, out: *mut *mut SdHybrid) -> SdStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ptr::null_mut();
        let scheme = match scheme {
            SdScheme::Weighted => Scheme::Weighted,
            SdScheme::Spec => Scheme::Spec,
        };
        let model = PotentialModel::Hybrid(HybridParams::reference());
        let inner = hybrid_spectrum(&model, scale, k, scheme, 1.0)?;
        *out = Box::into_raw(Box::new(SdHybrid { inner }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`sd_hybrid_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sd_hybrid_free(h: *mut SdHybrid) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of eigenpairs held; 0 for null.
///
/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sd_hybrid_count(h: *const SdHybrid) -> usize {
    h.as_ref().map_or(0, |h| h.inner.eigen.eigenvalues.len())
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, len: usize) -> Result<(), Fail> {
    out_arg(dst, "buffer")?;
    if len < src.len() {
        return Err(Fail::Arg(format!("buffer holds {len} values, need {}", src.len())));
    }
    std::slice::from_raw_parts_mut(dst, src.len()).copy_from_slice(src);
    Ok(())
}

/// Eigenvalues in ascending order into `values[0..count]`.
///
/// # Safety
/// `h` must be a live handle and `values` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sd_hybrid_eigenvalues(h: *const SdHybrid, values: *mut f64, len: usize) -> SdStatus {
    guard(|| copy_out(&ref_arg(h, "h")?.inner.eigen.eigenvalues, values, len))
}

/// Squared test-function overlaps into `values[0..count]`.
///
/// # Safety
/// `h` must be a live handle and `values` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sd_hybrid_overlaps(h: *const SdHybrid, values: *mut f64, len: usize) -> SdStatus {
    guard(|| copy_out(&ref_arg(h, "h")?.inner.overlaps, values, len))
}
