//! C interface to `bernstein-calculus`.
//!
//! Functions return a [`BcStatus`]; on failure the message is available from
//! [`bc_last_error_message`] on the calling thread. Objects are opaque handles
//! created by `*_new`/`*_factory`/`*_from_matrices` and released by the
//! matching `*_free`. Matrices cross the boundary as row-major arrays of real
//! and imaginary parts.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bernstein_calculus::cli::parse_config;
use bernstein_calculus::operators::{FactorySpec, TupleFactory};
use bernstein_calculus::verify::{run_campaign, write_csv, write_records};
use bernstein_calculus::{apply, BernsteinFunction, Error, GeneratorTuple, MatrixOp, QuadratureSpec};
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Spectrum = 4,
    Hypothesis = 5,
    Numerical = 6,
    Parse = 7,
    Panic = 8,
}

/// Report serialization for [`bc_verify_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcFormat {
    Records = 0,
    Csv = 1,
}

/// Campaign totals.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BcVerifySummary {
    pub reports: usize,
    pub passed: usize,
    pub failed: usize,
    pub gated: usize,
}

/// A Bernstein function from the catalog.
pub struct BcFunction {
    inner: BernsteinFunction,
}

/// A tuple of commuting generators.
pub struct BcTuple {
    inner: GeneratorTuple,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> BcStatus {
    match e {
        Error::Domain(_) => BcStatus::Domain,
        Error::Spectrum(_) => BcStatus::Spectrum,
        Error::Hypothesis(_) | Error::MissingConstruction(_) => BcStatus::Hypothesis,
        Error::TruncationNotCertified { .. } | Error::ExpmOverflow(_) => BcStatus::Numerical,
        Error::Parse(_) | Error::UnknownFunction { .. } => BcStatus::Parse,
        Error::Dimension(_) | Error::InvalidMeasure(_) | Error::InvalidSpec(_) | Error::Io(_) => {
            BcStatus::InvalidArgument
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), (BcStatus, String)>) -> BcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BcStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BcStatus::Panic
        }
    }
}

fn lib(e: Error) -> (BcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (BcStatus, String) {
    (BcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn string_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (BcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (BcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bc_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Create a function from a catalog name such as `sqrt`, `alpha:0.3` or `sum:log,rat`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bc_function_new(name: *const c_char, out: *mut *mut BcFunction) -> BcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let name = string_arg(name, "name")?;
        let inner = BernsteinFunction::from_name(name).map_err(lib)?;
        *out = Box::into_raw(Box::new(BcFunction { inner }));
        Ok(())
    })
}

/// # Safety
/// `f` must come from [`bc_function_new`] and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bc_function_free(f: *mut BcFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_function_arity(f: *const BcFunction) -> usize {
    f.as_ref().map_or(0, |f| f.inner.arity())
}

/// `ψ(s)` for `s` of length `n` with nonpositive entries.
///
/// # Safety
/// `f` must be live, `s` must point to `n` doubles and `out` to one.
#[no_mangle]
pub unsafe extern "C" fn bc_function_eval(f: *const BcFunction, s: *const f64, n: usize, out: *mut f64) -> BcStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("function"))?;
        if s.is_null() || out.is_null() {
            return Err(null("s or out"));
        }
        let point = std::slice::from_raw_parts(s, n);
        *out = f.inner.evaluate(point).map_err(lib)?;
        Ok(())
    })
}

/// `∂ψ/∂s_i(−0)`; `+INFINITY` when the moment diverges.
///
/// # Safety
/// `f` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bc_function_partial_at_zero(f: *const BcFunction, i: usize, out: *mut f64) -> BcStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("function"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if i >= f.inner.arity() {
            return Err((BcStatus::InvalidArgument, format!("index {i} out of range")));
        }
        *out = f.inner.partial_at_zero(i).to_f64();
        Ok(())
    })
}

/// A seeded random tuple `A_j = S·D_j·S⁻¹` with `κ(S) ≤ kappa_max` and `Re λ ≤ omega < 0`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bc_tuple_factory(
    n: usize,
    d: usize,
    seed: u64,
    kappa_max: f64,
    omega: f64,
    out: *mut *mut BcTuple,
) -> BcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if n == 0 || d == 0 || kappa_max.is_nan() || kappa_max < 1.0 || omega.is_nan() || omega >= 0.0 {
            return Err((BcStatus::InvalidArgument, "need n, d ≥ 1, kappa_max ≥ 1 and omega < 0".into()));
        }
        let inner = TupleFactory::new(seed).tuple(&FactorySpec::new(n, d).kappa_max(kappa_max).omega(omega));
        *out = Box::into_raw(Box::new(BcTuple { inner }));
        Ok(())
    })
}

/// A tuple from `n` row-major `d × d` matrices stacked in `re` and `im`
/// (`im` may be null for real input). With `bound_m ≥ 1` the tuple is
/// uncertified with that semigroup bound; with `bound_m ≤ 0` and `n = 1` an
/// eigendecomposition supplies the bound.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `n·d·d` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bc_tuple_from_matrices(
    re: *const f64,
    im: *const f64,
    n: usize,
    d: usize,
    bound_m: f64,
    out: *mut *mut BcTuple,
) -> BcStatus {
    guard(|| {
        if out.is_null() || re.is_null() {
            return Err(null("re or out"));
        }
        *out = ptr::null_mut();
        if n == 0 || d == 0 {
            return Err((BcStatus::InvalidArgument, "need n, d ≥ 1".into()));
        }
        let len = n * d * d;
        let re = std::slice::from_raw_parts(re, len);
        let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, len)) };
        let mats: Vec<MatrixOp> = (0..n)
            .map(|j| {
                MatrixOp::from_fn(d, d, |r, c| {
                    let k = j * d * d + r * d + c;
                    Complex64::new(re[k], im.map_or(0.0, |v| v[k]))
                })
            })
            .collect();
        let inner = if bound_m <= 0.0 && n == 1 {
            bernstein_calculus::cli::generator_from_matrix(&mats[0])
        } else {
            GeneratorTuple::uncertified(mats, bound_m)
        }
        .map_err(lib)?;
        *out = Box::into_raw(Box::new(BcTuple { inner }));
        Ok(())
    })
}

/// # Safety
/// `t` must come from a tuple constructor and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bc_tuple_free(t: *mut BcTuple) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Matrix size `d`, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn bc_tuple_dim(t: *const BcTuple) -> usize {
    t.as_ref().map_or(0, |t| t.inner.dim())
}

/// Number of generators, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn bc_tuple_arity(t: *const BcTuple) -> usize {
    t.as_ref().map_or(0, |t| t.inner.n())
}

/// Semigroup bound `M`, or NaN for a null handle.
///
/// # Safety
/// `t` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn bc_tuple_bound_m(t: *const BcTuple) -> f64 {
    t.as_ref().map_or(f64::NAN, |t| t.inner.bound_m())
}

/// `ψ(A)` into row-major `out_re`/`out_im` of length `d·d`. `target_tol ≤ 0`
/// selects the default matrix tolerance. `oracle_residual` may be null; it
/// receives NaN when no spectral data exist.
///
/// # Safety
/// Handles must be live; the output arrays must hold `d·d` doubles.
#[no_mangle]
pub unsafe extern "C" fn bc_apply(
    f: *const BcFunction,
    t: *const BcTuple,
    target_tol: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    oracle_residual: *mut f64,
) -> BcStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("function"))?;
        let t = t.as_ref().ok_or_else(|| null("tuple"))?;
        if out_re.is_null() || out_im.is_null() {
            return Err(null("output"));
        }
        let mut spec = QuadratureSpec::matrix();
        if target_tol > 0.0 {
            spec.target_tol = target_tol;
        }
        let r = apply(&f.inner, &t.inner, &spec).map_err(lib)?;
        let d = t.inner.dim();
        let re = std::slice::from_raw_parts_mut(out_re, d * d);
        let im = std::slice::from_raw_parts_mut(out_im, d * d);
        for i in 0..d {
            for j in 0..d {
                re[i * d + j] = r.value[(i, j)].re;
                im[i * d + j] = r.value[(i, j)].im;
            }
        }
        if !oracle_residual.is_null() {
            *oracle_residual = r.oracle_residual.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Run a campaign from configuration text. The serialized report is
/// returned in `report` (release with [`bc_string_free`]) and the totals in
/// `summary`; either may be null.
///
/// # Safety
/// `config` must be a NUL-terminated string; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn bc_verify_run(
    config: *const c_char,
    format: BcFormat,
    report: *mut *mut c_char,
    summary: *mut BcVerifySummary,
) -> BcStatus {
    guard(|| {
        if !report.is_null() {
            *report = ptr::null_mut();
        }
        let text = string_arg(config, "config")?;
        let config = parse_config(text).map_err(lib)?;
        let campaign = run_campaign(&config).map_err(lib)?;
        if !report.is_null() {
            let mut buf = Vec::new();
            match format {
                BcFormat::Records => write_records(&mut buf, &config, &campaign),
                BcFormat::Csv => write_csv(&mut buf, &config, &campaign),
            }
            .map_err(|e| (BcStatus::InvalidArgument, e.to_string()))?;
            *report = CString::new(buf).map_err(|_| (BcStatus::InvalidArgument, "NUL in report".into()))?.into_raw();
        }
        if !summary.is_null() {
            let t = campaign.totals();
            *summary = BcVerifySummary { reports: t.reports, passed: t.passed, failed: t.failed, gated: t.gated };
        }
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
