//! C interface to the dualband toolkit.
//!
//! Every function returns a `DbStatus`. On failure a message is kept per
//! thread and can be read with `dualband_last_error`. Handles are opaque and
//! must be released with the matching `_free` function. Complex numbers are
//! passed as interleaved (re, im) pairs of doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dualband::dualband::DualBandSpace;
use dualband::linalg::CVec;
use dualband::runner::{self, RunOptions};
use dualband::scenario::Scenario;
use dualband::{expr, factorization, hankel, spectra, Error, Tolerances, C64};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbStatus {
    DbOk = 0,
    /// A required pointer argument was null.
    DbNullPointer = 1,
    /// A string argument was not valid UTF-8.
    DbInvalidUtf8 = 2,
    /// A symbol expression or scenario failed to parse.
    DbParseError = 3,
    /// Inputs were rejected (invalid space, eigenvalue where a resolvent was asked, ...).
    DbInputError = 4,
    /// A computed residual exceeded its bound.
    DbContractViolation = 5,
    /// The caller's buffer is too small; the required length was written.
    DbBufferTooSmall = 6,
    /// An internal panic was caught.
    DbPanic = 7,
}

/// A validated dual-band space.
pub struct DbSpace {
    inner: DualBandSpace,
}

/// One eigenvalue of the shift.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DbEigenvalue {
    pub re: f64,
    pub im: f64,
    pub ker_dim: usize,
    pub algebraic_multiplicity: usize,
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(DbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse { .. } => DbStatus::DbParseError,
            Error::Contract { .. } | Error::NotInKernel { .. } | Error::CutoffInadequate { .. } => DbStatus::DbContractViolation,
            _ => DbStatus::DbInputError,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DbStatus::DbNullPointer, format!("{what} is null"))
}

/// Run `f`, record any failure, and contain panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DbStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DbStatus::DbOk,
        Ok(Err(Fail(s, m))) => {
            set_error(&m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {m}"));
            DbStatus::DbPanic
        }
    }
}

/// # Safety
/// `p` must be null or a valid nul-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(DbStatus::DbInvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` must be null or point to a live `DbSpace`.
unsafe fn space<'a>(p: *const DbSpace) -> Result<&'a DualBandSpace, Fail> {
    p.as_ref().map(|s| &s.inner).ok_or_else(|| null("space"))
}

fn symbol(src: &str) -> Result<dualband::LaurentSymbol, Fail> {
    Ok(expr::parse_symbol(src, &Tolerances::default())?)
}

fn put_handle(out: *mut *mut DbSpace, sp: DualBandSpace) -> Result<(), Fail> {
    // SAFETY: checked non-null by the caller before any work.
    unsafe { *out = Box::into_raw(Box::new(DbSpace { inner: sp })) };
    Ok(())
}

/// Message of the last failure on this thread, or null. Valid until the next
/// call into this library from the same thread.
#[no_mangle]
pub extern "C" fn dualband_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Build a space from theta, phi, psi written in the symbol grammar.
///
/// # Safety
/// String arguments must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dualband_space_new(
    theta: *const c_char,
    phi: *const c_char,
    psi: *const c_char,
    out: *mut *mut DbSpace,
) -> DbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let tol = Tolerances::default();
        let th = expr::parse_inner(text(theta, "theta")?, &tol)?;
        let sp = DualBandSpace::build(&th, symbol(text(phi, "phi")?)?, symbol(text(psi, "psi")?)?, None, &tol)?;
        put_handle(out, sp)
    })
}

/// Build a free-symbol space from theta, A+ and A-.
///
/// # Safety
/// String arguments must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dualband_space_free_symbol(
    theta: *const c_char,
    aplus: *const c_char,
    aminus: *const c_char,
    out: *mut *mut DbSpace,
) -> DbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let tol = Tolerances::default();
        let th = expr::parse_inner(text(theta, "theta")?, &tol)?;
        let sp = DualBandSpace::free_symbol(&th, symbol(text(aplus, "aplus")?)?, symbol(text(aminus, "aminus")?)?, &tol)?;
        put_handle(out, sp)
    })
}

/// Release a space. Null is ignored.
///
/// # Safety
/// `space` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dualband_space_free(space: *mut DbSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Dimension 2n of the space.
///
/// # Safety
/// `space` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dualband_space_dim(space: *const DbSpace, out: *mut usize) -> DbStatus {
    guard(|| {
        let sp = self::space(space)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = 2 * sp.n();
        Ok(())
    })
}

/// Matrix of T^M_g, row-major, as d*d interleaved complex values (2*d*d doubles).
/// `len` is the buffer length in doubles; on DB_BUFFER_TOO_SMALL the required
/// length is written to `needed` when it is not null.
///
/// # Safety
/// `g` must be nul-terminated; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dualband_operator_matrix(
    space: *const DbSpace,
    g: *const c_char,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> DbStatus {
    guard(|| {
        let sp = self::space(space)?;
        let m = sp.dualband_matrix(&symbol(text(g, "g")?)?)?.entries;
        let d = m.nrows();
        let want = 2 * d * d;
        if let Some(n) = needed.as_mut() {
            *n = want;
        }
        if len < want {
            return Err(Fail(DbStatus::DbBufferTooSmall, format!("buffer holds {len} doubles, {want} needed")));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let out = std::slice::from_raw_parts_mut(buf, want);
        for r in 0..d {
            for c in 0..d {
                out[2 * (r * d + c)] = m[(r, c)].re;
                out[2 * (r * d + c) + 1] = m[(r, c)].im;
            }
        }
        Ok(())
    })
}

/// Eigenvalues of T^M_z from the determinant formulas, validated by eigenvectors.
/// Writes at most `cap` entries and the total count to `count`.
///
/// # Safety
/// `buf` must hold `cap` entries; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dualband_point_spectrum(
    space: *const DbSpace,
    buf: *mut DbEigenvalue,
    cap: usize,
    count: *mut usize,
) -> DbStatus {
    guard(|| {
        let sp = self::space(space)?;
        let count = count.as_mut().ok_or_else(|| null("count"))?;
        let pts = spectra::point_spectrum(sp)?;
        *count = pts.len();
        if cap < pts.len() {
            return Err(Fail(DbStatus::DbBufferTooSmall, format!("room for {cap} eigenvalues, {} found", pts.len())));
        }
        if pts.is_empty() {
            return Ok(());
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let out = std::slice::from_raw_parts_mut(buf, pts.len());
        for (o, e) in out.iter_mut().zip(&pts) {
            *o = DbEigenvalue {
                re: e.lambda.re,
                im: e.lambda.im,
                ker_dim: e.ker_dim,
                algebraic_multiplicity: e.algebraic_multiplicity,
                residual: e.residual,
            };
        }
        Ok(())
    })
}

/// Delta at lambda in the closed disc, or Delta tilde outside it.
///
/// # Safety
/// `out` must hold two doubles.
#[no_mangle]
pub unsafe extern "C" fn dualband_determinant(space: *const DbSpace, re: f64, im: f64, out: *mut f64) -> DbStatus {
    guard(|| {
        let sp = self::space(space)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let l = C64::new(re, im);
        let v = if l.norm() <= 1.0 + sp.tolerances().circle_band {
            spectra::delta(sp, l)?
        } else {
            spectra::delta_tilde(sp, l)?
        };
        *out = v.re;
        *out.add(1) = v.im;
        Ok(())
    })
}

/// ||T^M_g|| through the block Hankel matrix; g must give an analytic block symbol.
///
/// # Safety
/// `g` must be nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dualband_hankel_norm(space: *const DbSpace, g: *const c_char, out: *mut f64) -> DbStatus {
    guard(|| {
        let sp = self::space(space)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = hankel::hankel_norm(sp, &symbol(text(g, "g")?)?)?;
        Ok(())
    })
}

/// Solve (T^M_z - lambda) f = h through the Wiener-Hopf factorization.
/// `h` and `f` hold 2*dim doubles; `relative_difference` receives the
/// distance to a direct solve.
///
/// # Safety
/// Buffers must hold 2*dim doubles, dim being the space dimension.
#[no_mangle]
pub unsafe extern "C" fn dualband_resolvent(
    space: *const DbSpace,
    re: f64,
    im: f64,
    h: *const f64,
    f: *mut f64,
    dim: usize,
    relative_difference: *mut f64,
) -> DbStatus {
    guard(|| {
        let sp = self::space(space)?;
        if h.is_null() || f.is_null() {
            return Err(null("h or f"));
        }
        if dim != 2 * sp.n() {
            return Err(Error::DimensionMismatch { expected: 2 * sp.n(), got: dim }.into());
        }
        let hs = std::slice::from_raw_parts(h, 2 * dim);
        let hv = CVec::from_iterator(dim, hs.chunks(2).map(|p| C64::new(p[0], p[1])));
        let r = factorization::resolvent_apply(sp, C64::new(re, im), &hv)?;
        if r.relative_difference > factorization::RESOLVENT_AGREEMENT {
            return Err(Error::Contract {
                what: "resolvent agreement".into(),
                value: r.relative_difference,
                bound: factorization::RESOLVENT_AGREEMENT,
            }
            .into());
        }
        let fs = std::slice::from_raw_parts_mut(f, 2 * dim);
        for (k, v) in r.solution.iter().enumerate() {
            fs[2 * k] = v.re;
            fs[2 * k + 1] = v.im;
        }
        if let Some(d) = relative_difference.as_mut() {
            *d = r.relative_difference;
        }
        Ok(())
    })
}

/// Run a scenario given as text. `report_json` receives a string owned by the
/// library (release with `dualband_string_free`) and `exit_code` the CLI exit
/// code (0 ok, 2 contract violation, 3 input error). Timings are omitted.
///
/// # Safety
/// `scenario` must be nul-terminated; output pointers writable.
#[no_mangle]
pub unsafe extern "C" fn dualband_run_scenario(
    scenario: *const c_char,
    report_json: *mut *mut c_char,
    exit_code: *mut i32,
) -> DbStatus {
    guard(|| {
        if report_json.is_null() || exit_code.is_null() {
            return Err(null("output pointer"));
        }
        let sc = Scenario::parse(text(scenario, "scenario")?)?;
        let rep = runner::run(&sc, &RunOptions::default());
        let s = CString::new(rep.to_json(false)).map_err(|_| Fail(DbStatus::DbPanic, "nul in report".into()))?;
        *report_json = s.into_raw();
        *exit_code = rep.exit_code();
        Ok(())
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dualband_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
