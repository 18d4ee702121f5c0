//! C ABI for `nilcircle`.
//!
//! Objects cross the boundary as opaque handles created by `nc_*_new` style
//! functions and released by the matching `*_free`. Every fallible function
//! returns an [`NcStatus`]; on failure the message is kept per thread and can
//! be read with [`nc_last_error_message`]. Results are written through out
//! pointers, which are left untouched on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nilcircle::ergodic::{
    commutator_identity_check, ergodic_average, Averaging, IntPolynomial, NilSystem, QuasiGeometry,
};
use nilcircle::expsum::{gauss_sum_complete, nil_gauss_sum, SumMethod};
use nilcircle::group::{GroupElement, GroupShape, LatticeElement, WordVariant};
use nilcircle::rational::RationalVector;
use nilcircle::variation::{IndexedSequence, Seminorm};
use nilcircle::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcStatus {
    Ok = 0,
    InvalidArgument = 1,
    Infeasible = 2,
    Overflow = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

/// A point of `G0(d)` with integer coordinates.
pub struct NcElement(LatticeElement);

/// A finite nilsystem with permutation generators.
pub struct NcSystem(NilSystem);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NcStatus {
    match e {
        Error::Infeasible(_) | Error::Aliasing(_) => NcStatus::Infeasible,
        Error::Overflow(_) => NcStatus::Overflow,
        Error::Io(_) => NcStatus::Internal,
        _ => NcStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), NcStatus>) -> NcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            NcStatus::Internal
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, NcStatus>;
}

impl<T> OrStatus<T> for nilcircle::Result<T> {
    fn or_status(self) -> Result<T, NcStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            status_of(&e)
        })
    }
}

fn null(what: &str) -> NcStatus {
    set_error(format!("{what} is null"));
    NcStatus::NullPointer
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], NcStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, NcStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, NcStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 if there is none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn nc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates an element of `G0(d)` from its `len` coordinates, non-central first.
///
/// # Safety
/// `coords` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_element_new(d: usize, coords: *const i64, len: usize, out_el: *mut *mut NcElement) -> NcStatus {
    guard(|| {
        let c = slice(coords, len, "coords")?;
        let o = out(out_el, "out")?;
        let shape = GroupShape::new(d).or_status()?;
        let el = GroupElement::new(shape, c.iter().map(|v| *v as i128).collect()).or_status()?;
        *o = Box::into_raw(Box::new(NcElement(el)));
        Ok(())
    })
}

/// Releases an element; null is ignored.
///
/// # Safety
/// `el` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nc_element_free(el: *mut NcElement) {
    if !el.is_null() {
        drop(Box::from_raw(el));
    }
}

/// Number of coordinates `|Y_d|` of an element.
///
/// # Safety
/// `el` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn nc_element_len(el: *const NcElement) -> usize {
    el.as_ref().map(|e| e.0.coords().len()).unwrap_or(0)
}

/// Writes the coordinates into `buf`.
///
/// # Safety
/// `el` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn nc_element_coords(el: *const NcElement, buf: *mut i64, len: usize) -> NcStatus {
    guard(|| {
        let e = handle(el, "element")?;
        let c = e.0.coords();
        if len < c.len() {
            set_error(format!("buffer holds {len} values, need {}", c.len()));
            return Err(NcStatus::BufferTooSmall);
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        for (i, v) in c.iter().enumerate() {
            *buf.add(i) = i64::try_from(*v).map_err(|_| {
                set_error("coordinate does not fit in int64".into());
                NcStatus::Overflow
            })?;
        }
        Ok(())
    })
}

/// `a * b` in `G0(d)`.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_element_multiply(a: *const NcElement, b: *const NcElement, out_el: *mut *mut NcElement) -> NcStatus {
    guard(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        let o = out(out_el, "out")?;
        let p = a.0.multiply(&b.0).or_status()?;
        *o = Box::into_raw(Box::new(NcElement(p)));
        Ok(())
    })
}

/// `a^{-1}`.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_element_inverse(a: *const NcElement, out_el: *mut *mut NcElement) -> NcStatus {
    guard(|| {
        let a = handle(a, "a")?;
        let o = out(out_el, "out")?;
        let p = a.0.inverse().or_status()?;
        *o = Box::into_raw(Box::new(NcElement(p)));
        Ok(())
    })
}

/// Complete Gauss sum `S(a/q)` for the `m` numerators in `a`.
///
/// # Safety
/// `a` must hold `m` values; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_gauss_sum(a: *const i64, m: usize, q: i64, re: *mut f64, im: *mut f64) -> NcStatus {
    guard(|| {
        let a = slice(a, m, "a")?;
        let (re, im) = (out(re, "re")?, out(im, "im")?);
        let v = RationalVector::new(a.iter().map(|x| *x as i128).collect(), q as i128).or_status()?;
        let s = gauss_sum_complete(&v).or_status()?;
        *re = s.re;
        *im = s.im;
        Ok(())
    })
}

/// Nilpotent Gauss sum `G(a/q)` of length `r` on `G0(d)`; `tilde` selects the
/// `D~` form, `brute` the exhaustive evaluation.
///
/// # Safety
/// `a` must hold `len` values; `re` and `im` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn nc_nil_gauss_sum(
    d: usize,
    a: *const i64,
    len: usize,
    q: i64,
    r: usize,
    tilde: bool,
    brute: bool,
    re: *mut f64,
    im: *mut f64,
) -> NcStatus {
    guard(|| {
        let a = slice(a, len, "a")?;
        let (re, im) = (out(re, "re")?, out(im, "im")?);
        let shape = GroupShape::new(d).or_status()?;
        let v = RationalVector::new(a.iter().map(|x| *x as i128).collect(), q as i128).or_status()?;
        let variant = if tilde { WordVariant::DTilde } else { WordVariant::D };
        let method = if brute { SumMethod::Brute } else { SumMethod::Dp };
        let s = nil_gauss_sum(shape, &v, r, variant, method).or_status()?;
        *re = s.re;
        *im = s.im;
        Ok(())
    })
}

/// `V^rho` of a real sequence; `rho = INFINITY` gives the jump supremum.
///
/// # Safety
/// `values` must hold `n` values; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_variation(values: *const f64, n: usize, rho: f64, result: *mut f64) -> NcStatus {
    guard(|| {
        let v = slice(values, n, "values")?;
        let o = out(result, "result")?;
        let s = Seminorm::from_rho(rho).or_status()?;
        *o = s.eval(&IndexedSequence::from_reals(v)).or_status()?;
        Ok(())
    })
}

/// `#{y in H_Q : q_beta(x . y^{-1}) < r}` for the `|Y_d|` weights `beta` and centre `x`.
///
/// # Safety
/// `beta` and `center` must hold `len` values; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_ball_count(
    d: usize,
    q: i64,
    beta: *const f64,
    center: *const f64,
    len: usize,
    r: f64,
    count: *mut u64,
) -> NcStatus {
    guard(|| {
        let b = slice(beta, len, "beta")?;
        let c = slice(center, len, "center")?;
        let o = out(count, "count")?;
        let shape = GroupShape::new(d).or_status()?;
        let geom = QuasiGeometry::new(shape, b.to_vec(), q as i128).or_status()?;
        let x = GroupElement::new(shape, c.to_vec()).or_status()?;
        *o = geom.ball_count(&x, r).or_status()?;
        Ok(())
    })
}

/// The cyclic system `x -> x + 1 mod m`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_system_cyclic(m: usize, out_sys: *mut *mut NcSystem) -> NcStatus {
    guard(|| {
        let o = out(out_sys, "out")?;
        let s = NilSystem::cyclic(m).or_status()?;
        *o = Box::into_raw(Box::new(NcSystem(s)));
        Ok(())
    })
}

/// `J_Q = G0(d) / H_Q` with the `d` generator translations.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_system_heisenberg_quotient(d: usize, q: i64, out_sys: *mut *mut NcSystem) -> NcStatus {
    guard(|| {
        let o = out(out_sys, "out")?;
        let s = NilSystem::heisenberg_quotient(d, q as i128).or_status()?;
        *o = Box::into_raw(Box::new(NcSystem(s)));
        Ok(())
    })
}

/// Releases a system; null is ignored.
///
/// # Safety
/// `sys` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nc_system_free(sys: *mut NcSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of points of the system, 0 for null.
///
/// # Safety
/// `sys` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nc_system_len(sys: *const NcSystem) -> usize {
    sys.as_ref().map(|s| s.0.len()).unwrap_or(0)
}

/// Number of generators, 0 for null.
///
/// # Safety
/// `sys` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nc_system_arity(sys: *const NcSystem) -> usize {
    sys.as_ref().map(|s| s.0.arity()).unwrap_or(0)
}

/// Rough average `A_N f` with `P_j(n) = n^j`, written into `result` (one value per point).
///
/// # Safety
/// `f` and `result` must hold `len` values, `len` the number of points.
#[no_mangle]
pub unsafe extern "C" fn nc_system_average(
    sys: *const NcSystem,
    f: *const f64,
    len: usize,
    n: u64,
    result: *mut f64,
) -> NcStatus {
    guard(|| {
        let s = handle(sys, "system")?;
        let f = slice(f, len, "f")?;
        if result.is_null() {
            return Err(null("result"));
        }
        let polys: Vec<IntPolynomial> = (1..=s.0.arity()).map(IntPolynomial::monomial).collect();
        let a = ergodic_average(&s.0, f, &polys, n, Averaging::Rough).or_status()?;
        ptr::copy_nonoverlapping(a.as_ptr(), result, a.len());
        Ok(())
    })
}

/// Checks `prod T_i^{m_i} prod T_j^{n_j} = prod T_j^{m_j+n_j} prod_{i<j} S_{ji}^{m_j n_i}`
/// for exponent vectors of length `arity`; the answer goes to `holds`.
///
/// # Safety
/// `m` and `n` must hold `len` values; `holds` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_system_commutator_check(
    sys: *const NcSystem,
    m: *const i64,
    n: *const i64,
    len: usize,
    holds: *mut bool,
) -> NcStatus {
    guard(|| {
        let s = handle(sys, "system")?;
        let m: Vec<i128> = slice(m, len, "m")?.iter().map(|v| *v as i128).collect();
        let n: Vec<i128> = slice(n, len, "n")?.iter().map(|v| *v as i128).collect();
        let o = out(holds, "holds")?;
        *o = commutator_identity_check(&s.0, &m, &n).or_status()?;
        Ok(())
    })
}
