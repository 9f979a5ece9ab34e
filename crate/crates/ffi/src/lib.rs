//! C ABI for `sqchaos`.
//!
//! Every function returns an [`SqcStatus`]. On failure a message is stored
//! per thread and can be read with [`sqc_last_error_message`]. Strings
//! returned through `char **` out-parameters are owned by the caller and must
//! be released with [`sqc_string_free`]; handles are released with their
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sqchaos::hadamard::{closed_form, hadamard_series, SpdMatrix};
use sqchaos::lab::verify_hgp;
use sqchaos::moments::{isserlis_moment, squared_hermite_moment, CorrelationMatrix};
use sqchaos::polarization::{new_bound, pinasco_bound};
use sqchaos::scalar::{format_scalar, parse_scalar};
use sqchaos::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SqcStatus {
    Ok = 0,
    ErrInput = 1,
    ErrResource = 2,
    ErrInternal = 3,
    ErrNull = 4,
}

/// Opaque exact correlation matrix.
pub struct SqcCorrelation(CorrelationMatrix);

/// Opaque symmetric positive definite matrix.
pub struct SqcMatrix(SpdMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SqcStatus {
    match e {
        Error::Input(_) => SqcStatus::ErrInput,
        Error::Resource { .. } => SqcStatus::ErrResource,
        Error::Internal(_) => SqcStatus::ErrInternal,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, mapping errors and panics to a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SqcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SqcStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            SqcStatus::ErrNull
        }
        Err(_) => {
            set_error("internal panic".to_string());
            SqcStatus::ErrInternal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::input(format!("{what} is not valid UTF-8"))))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure::Lib(Error::internal("string contains NUL")))?;
    put(out, c.into_raw(), "out")
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next `sqc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sqc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sqc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a correlation matrix from rows separated by `;` with entries
/// separated by spaces or commas, e.g. `"1 1/2; 1/2 1"`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sqc_correlation_parse(text: *const c_char, out: *mut *mut SqcCorrelation) -> SqcStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let rows = text
            .split(';')
            .map(|r| {
                r.split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(parse_scalar)
                    .collect()
            })
            .collect::<Result<Vec<Vec<_>>, Error>>()?;
        let corr = CorrelationMatrix::from_rows(rows)?;
        put(out, Box::into_raw(Box::new(SqcCorrelation(corr))), "out")
    })
}

/// # Safety
/// `c` must be a handle from [`sqc_correlation_parse`] or NULL.
#[no_mangle]
pub unsafe extern "C" fn sqc_correlation_free(c: *mut SqcCorrelation) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sqc_correlation_dim(c: *const SqcCorrelation, out: *mut usize) -> SqcStatus {
    guard(|| put(out, ref_arg(c, "correlation")?.0.dim(), "out"))
}

/// `E[∏ H_{p_i}(G_i)²]` as an exact `num` or `num/den` string.
///
/// # Safety
/// `c` must be a live handle, `p` must point to `len` values, `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sqc_squared_hermite_moment(
    c: *const SqcCorrelation,
    p: *const u32,
    len: usize,
    out: *mut *mut c_char,
) -> SqcStatus {
    guard(|| {
        let corr = &ref_arg(c, "correlation")?.0;
        let p = slice_arg(p, len, "p")?;
        put_string(out, format_scalar(&squared_hermite_moment(p, corr)?))
    })
}

/// `E[∏ G_i^{m_i}]` as an exact string.
///
/// # Safety
/// As for [`sqc_squared_hermite_moment`].
#[no_mangle]
pub unsafe extern "C" fn sqc_isserlis_moment(
    c: *const SqcCorrelation,
    exponents: *const u32,
    len: usize,
    out: *mut *mut c_char,
) -> SqcStatus {
    guard(|| {
        let corr = &ref_arg(c, "correlation")?.0;
        let m = slice_arg(exponents, len, "exponents")?;
        put_string(out, format_scalar(&isserlis_moment(m, corr)?))
    })
}

/// JSON verification report for `E[∏ H_{p_i}(G_i)²] ≥ ∏ p_i!`.
///
/// # Safety
/// As for [`sqc_squared_hermite_moment`].
#[no_mangle]
pub unsafe extern "C" fn sqc_verify_hgp(
    c: *const SqcCorrelation,
    p: *const u32,
    len: usize,
    out_json: *mut *mut c_char,
) -> SqcStatus {
    guard(|| {
        let corr = &ref_arg(c, "correlation")?.0;
        let p = slice_arg(p, len, "p")?;
        put_string(out_json, verify_hgp(p, corr)?.to_json())
    })
}

/// `sqrt(2^K Γ(K + n/2) / (Γ(n/2) ∏ k_i!))`.
///
/// # Safety
/// `ks` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sqc_new_bound(n: u32, ks: *const u32, len: usize, out: *mut f64) -> SqcStatus {
    guard(|| put(out, new_bound(n, slice_arg(ks, len, "ks")?)?.value(), "out"))
}

/// `sqrt(2^{K-2} K^K / ∏ k_i^{k_i})`.
///
/// # Safety
/// As for [`sqc_new_bound`].
#[no_mangle]
pub unsafe extern "C" fn sqc_pinasco_bound(ks: *const u32, len: usize, out: *mut f64) -> SqcStatus {
    guard(|| put(out, pinasco_bound(slice_arg(ks, len, "ks")?)?.value(), "out"))
}

/// Parses a symmetric positive definite matrix from row-major text (rows on
/// separate lines) or a JSON array of rows.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sqc_matrix_parse(text: *const c_char, out: *mut *mut SqcMatrix) -> SqcStatus {
    guard(|| {
        let m = SpdMatrix::parse(str_arg(text, "text")?)?;
        put(out, Box::into_raw(Box::new(SqcMatrix(m))), "out")
    })
}

/// # Safety
/// `m` must be a handle from [`sqc_matrix_parse`] or NULL.
#[no_mangle]
pub unsafe extern "C" fn sqc_matrix_free(m: *mut SqcMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// `(det S)^{-1/2}` through the Gaussian-integral form; the matrix must be
/// admissible (`S_ii < 1`, `λ_max(diag S + S) < 2`).
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sqc_hadamard_closed_form(m: *const SqcMatrix, out: *mut f64) -> SqcStatus {
    guard(|| put(out, closed_form(&ref_arg(m, "matrix")?.0)?.value, "out"))
}

/// Hermite series for `(det S)^{-1/2}` truncated at total degree `order`.
///
/// # Safety
/// As for [`sqc_hadamard_closed_form`].
#[no_mangle]
pub unsafe extern "C" fn sqc_hadamard_series(m: *const SqcMatrix, order: u32, out: *mut f64) -> SqcStatus {
    guard(|| put(out, hadamard_series(&ref_arg(m, "matrix")?.0, order)?.value(), "out"))
}
