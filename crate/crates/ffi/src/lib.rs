//! C ABI over `tfq-core`.
//!
//! Objects cross the boundary as opaque heap handles (`TfqSignal`,
//! `TfqSymbol`, `TfqOperator`) that the caller releases with the matching
//! `*_free`. Every fallible call returns a [`TfqStatus`]; the message of the
//! last failure on the calling thread is available from
//! [`tfq_last_error_message`]. Complex data is passed as split real and
//! imaginary `double` arrays; grids are x-major.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use tfq_core::diagnostics::{covariance_check, symbol_window};
use tfq_core::normbank::sjostrand_norm;
use tfq_core::quantize::{dequantize, op_tau, tau_wigner};
use tfq_core::transforms::frame_bounds;
use tfq_core::{ComplexGrid, Grid, Lattice, OperatorMatrix, Signal, Symbol, TfqError, Weight};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidGrid = 2,
    DimensionMismatch = 3,
    TauOutOfRange = 4,
    LatticeMismatch = 5,
    ZeroWindow = 6,
    FrameSingular = 7,
    InvalidArgument = 8,
    Internal = 9,
}

pub struct TfqSignal(Signal);
pub struct TfqSymbol(Symbol);
pub struct TfqOperator(OperatorMatrix);

/// Spectral bounds of a Gabor frame operator.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfqFrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub condition_number: f64,
    pub is_frame: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &TfqError) -> TfqStatus {
    match e {
        TfqError::InvalidGrid(_) => TfqStatus::InvalidGrid,
        TfqError::DimensionMismatch { .. } => TfqStatus::DimensionMismatch,
        TfqError::TauOutOfRange => TfqStatus::TauOutOfRange,
        TfqError::LatticeMismatch => TfqStatus::LatticeMismatch,
        TfqError::ZeroWindow => TfqStatus::ZeroWindow,
        TfqError::FrameSingular => TfqStatus::FrameSingular,
        _ => TfqStatus::InvalidArgument,
    }
}

enum Fail {
    Null,
    Core(TfqError),
}

impl From<TfqError> for Fail {
    fn from(e: TfqError) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TfqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TfqStatus::Ok
        }
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument");
            TfqStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            TfqStatus::Internal
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

unsafe fn read_complex(re: *const f64, im: *const f64, len: usize) -> Result<Vec<Complex64>, Fail> {
    if re.is_null() || im.is_null() {
        return Err(Fail::Null);
    }
    let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
    Ok(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
}

unsafe fn write_complex(src: &[Complex64], re: *mut f64, im: *mut f64, len: usize) -> Result<(), Fail> {
    if re.is_null() || im.is_null() {
        return Err(Fail::Null);
    }
    if len != src.len() {
        return Err(TfqError::DimensionMismatch { expected: src.len(), got: len }.into());
    }
    let (re, im) = (std::slice::from_raw_parts_mut(re, len), std::slice::from_raw_parts_mut(im, len));
    for (i, v) in src.iter().enumerate() {
        re[i] = v.re;
        im[i] = v.im;
    }
    Ok(())
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

/// Message of the last failed call on this thread, or "" after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tfq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Signal of length `n` from split real/imaginary arrays.
///
/// # Safety
/// `re` and `im` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfq_signal_new(
    n: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut TfqSignal,
) -> TfqStatus {
    guard(|| {
        let v = read_complex(re, im, n)?;
        put(out, TfqSignal(Signal::new(v)?))
    })
}

/// Periodized Gaussian window of unit norm.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfq_signal_gaussian(n: usize, width: f64, out: *mut *mut TfqSignal) -> TfqStatus {
    guard(|| {
        if !(width.is_finite() && width > 0.0) {
            return Err(TfqError::InvalidArgument("width must be positive".into()).into());
        }
        put(out, TfqSignal(Signal::gaussian(Grid::new(n)?, width)))
    })
}

/// # Safety
/// `s` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfq_signal_free(s: *mut TfqSignal) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Length of the signal, 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfq_signal_len(s: *const TfqSignal) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Copies the samples into caller buffers of length `len`.
///
/// # Safety
/// `s` must be a live handle; `re`, `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tfq_signal_copy(s: *const TfqSignal, re: *mut f64, im: *mut f64, len: usize) -> TfqStatus {
    guard(|| write_complex(as_ref(s)?.0.as_slice(), re, im, len))
}

/// Symbol on Z_n × Z_n from x-major arrays of length `n * n`.
///
/// # Safety
/// `re` and `im` must point to `n * n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfq_symbol_new(
    n: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut TfqSymbol,
) -> TfqStatus {
    guard(|| {
        let grid = Grid::new(n)?;
        let v = read_complex(re, im, n * n)?;
        put(out, TfqSymbol(ComplexGrid::from_vec(grid, v)?))
    })
}

/// # Safety
/// `s` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfq_symbol_free(s: *mut TfqSymbol) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Grid size N of the symbol, 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfq_symbol_dim(s: *const TfqSymbol) -> usize {
    s.as_ref().map_or(0, |s| s.0.n())
}

/// Copies the symbol values (x-major, `len = N * N`).
///
/// # Safety
/// `s` must be a live handle; `re`, `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tfq_symbol_copy(s: *const TfqSymbol, re: *mut f64, im: *mut f64, len: usize) -> TfqStatus {
    guard(|| write_complex(as_ref(s)?.0.as_slice(), re, im, len))
}

/// `Op_τ(σ)` as an N × N operator.
///
/// # Safety
/// `sym` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfq_op_tau(sym: *const TfqSymbol, tau: f64, out: *mut *mut TfqOperator) -> TfqStatus {
    guard(|| {
        let op = op_tau(&as_ref(sym)?.0, tau)?;
        put(out, TfqOperator(op))
    })
}

/// τ-symbol of an operator.
///
/// # Safety
/// `op` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfq_dequantize(op: *const TfqOperator, tau: f64, out: *mut *mut TfqSymbol) -> TfqStatus {
    guard(|| {
        let s = dequantize(&as_ref(op)?.0, tau)?;
        put(out, TfqSymbol(s))
    })
}

/// # Safety
/// `op` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfq_operator_free(op: *mut TfqOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Dimension N of the operator, 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfq_operator_dim(op: *const TfqOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.n())
}

/// Copies the kernel `K[x][y]` row-major (`len = N * N`).
///
/// # Safety
/// `op` must be a live handle; `re`, `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tfq_operator_kernel_copy(
    op: *const TfqOperator,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> TfqStatus {
    guard(|| {
        let k = as_ref(op)?.0.kernel();
        let n = k.nrows();
        let rows: Vec<Complex64> = (0..n).flat_map(|x| (0..n).map(move |y| k[(x, y)])).collect();
        write_complex(&rows, re, im, len)
    })
}

/// `out = op · f`.
///
/// # Safety
/// `op`, `f` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfq_operator_apply(
    op: *const TfqOperator,
    f: *const TfqSignal,
    out: *mut *mut TfqSignal,
) -> TfqStatus {
    guard(|| {
        let g = as_ref(op)?.0.apply(&as_ref(f)?.0)?;
        put(out, TfqSignal(g))
    })
}

/// Cross τ-Wigner distribution `W_τ(g, f)`.
///
/// # Safety
/// `g`, `f` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfq_tau_wigner(
    g: *const TfqSignal,
    f: *const TfqSignal,
    tau: f64,
    out: *mut *mut TfqSymbol,
) -> TfqStatus {
    guard(|| {
        let w = tau_wigner(&as_ref(g)?.0, &as_ref(f)?.0, tau)?;
        put(out, TfqSymbol(w))
    })
}

/// Frame bounds of the Gabor system of `phi` over the lattice `aZ × bZ`.
///
/// # Safety
/// `phi` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfq_frame_bounds(
    phi: *const TfqSignal,
    a: usize,
    b: usize,
    out: *mut TfqFrameBounds,
) -> TfqStatus {
    guard(|| {
        let phi = &as_ref(phi)?.0;
        let lat = Lattice::new(a, b, phi.grid())?;
        let r = frame_bounds(phi, lat)?;
        let out = out.as_mut().ok_or(Fail::Null)?;
        *out = TfqFrameBounds {
            lower: r.lower_bound,
            upper: r.upper_bound,
            condition_number: r.condition_number,
            is_frame: r.is_frame,
        };
        Ok(())
    })
}

/// Relative symplectic-covariance residual of `Op_τ(σ)`.
///
/// # Safety
/// `sym` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfq_covariance_residual(sym: *const TfqSymbol, tau: f64, out: *mut f64) -> TfqStatus {
    guard(|| {
        let r = covariance_check(&as_ref(sym)?.0, tau)?;
        *out.as_mut().ok_or(Fail::Null)? = r;
        Ok(())
    })
}

/// Weighted Sjöstrand norm of `σ` with window `W_τ(φ, φ)` and weight `v_s`.
///
/// # Safety
/// `sym`, `phi` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfq_sjostrand_norm(
    sym: *const TfqSymbol,
    phi: *const TfqSignal,
    tau: f64,
    s: f64,
    out: *mut f64,
) -> TfqStatus {
    guard(|| {
        let win = symbol_window(&as_ref(phi)?.0, tau)?;
        let v = sjostrand_norm(&as_ref(sym)?.0, &win, &Weight::polynomial(s)?)?;
        *out.as_mut().ok_or(Fail::Null)? = v;
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tfq_version() -> *const c_char {
    static V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}
