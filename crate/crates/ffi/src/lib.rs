//! C ABI over `henon-core`.
//!
//! Every fallible entry point returns a [`HenonStatus`]; on failure the
//! message is available from [`henon_last_error`] on the same thread.
//! Points cross the boundary as four doubles `x_re, x_im, y_re, y_im`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use henon_core::green::GreenEvaluator;
use henon_core::height::canonical_height;
use henon_core::map::{ComplexHenon, Direction, ExactPoint, HenonMap, NumPoint};
use henon_core::rational::{format_rational, to_f64};
use henon_core::spec_file::parse_map;
use henon_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HenonStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    CapExceeded = 3,
    /// Numeric evaluation left the representable range.
    Overflow = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HenonDirection {
    Plus = 0,
    Minus = 1,
}

impl From<HenonDirection> for Direction {
    fn from(d: HenonDirection) -> Self {
        match d {
            HenonDirection::Plus => Direction::Plus,
            HenonDirection::Minus => Direction::Minus,
        }
    }
}

/// Opaque map handle. Create with [`henon_map_from_json`], release with
/// [`henon_map_free`].
pub struct HenonMapHandle {
    map: HenonMap,
    forward: ComplexHenon,
    backward: ComplexHenon,
    green: GreenEvaluator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: HenonStatus, msg: impl Into<String>) -> HenonStatus {
    set_error(msg);
    status
}

fn from_core(e: Error) -> HenonStatus {
    let status = match e {
        Error::CapExceeded(_) => HenonStatus::CapExceeded,
        _ => HenonStatus::InvalidInput,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> HenonStatus) -> HenonStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(HenonStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, HenonStatus> {
    if s.is_null() {
        return Err(fail(HenonStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(HenonStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn read_point(p: *const f64) -> NumPoint {
    let v = std::slice::from_raw_parts(p, 4);
    NumPoint::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
}

unsafe fn write_point(q: &NumPoint, out: *mut f64) {
    let v = std::slice::from_raw_parts_mut(out, 4);
    v.copy_from_slice(&[q.x.re, q.x.im, q.y.re, q.y.im]);
}

fn out_string(s: String, out: *mut *mut c_char) -> HenonStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            HenonStatus::Ok
        }
        Err(_) => fail(HenonStatus::InvalidInput, "output contains a NUL byte"),
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn henon_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a map document (`{"factors": [...]}`) into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn henon_map_from_json(json: *const c_char, out: *mut *mut HenonMapHandle) -> HenonStatus {
    guard(|| {
        if out.is_null() {
            return fail(HenonStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match read_str(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let map = match parse_map(text) {
            Ok(m) => m,
            Err(e) => return from_core(e),
        };
        let forward = map.to_complex();
        let backward = forward.swapped_inverse();
        let green = GreenEvaluator::new(&map);
        *out = Box::into_raw(Box::new(HenonMapHandle {
            map,
            forward,
            backward,
            green,
        }));
        HenonStatus::Ok
    })
}

/// # Safety
/// `h` must come from [`henon_map_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn henon_map_free(h: *mut HenonMapHandle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn henon_map_degree(h: *const HenonMapHandle, out: *mut u64) -> HenonStatus {
    if h.is_null() || out.is_null() {
        return fail(HenonStatus::NullPointer, "null argument");
    }
    *out = (*h).map.dynamical_degree();
    HenonStatus::Ok
}

/// Jacobian determinant as a double and, if `text` is non-null, as an exact
/// `"n/d"` string to be released with [`henon_string_free`].
///
/// # Safety
/// `h` must be a live handle; `value` a valid pointer; `text` null or valid.
#[no_mangle]
pub unsafe extern "C" fn henon_map_jacobian(
    h: *const HenonMapHandle,
    value: *mut f64,
    text: *mut *mut c_char,
) -> HenonStatus {
    if h.is_null() || value.is_null() {
        return fail(HenonStatus::NullPointer, "null argument");
    }
    let jac = (*h).map.jacobian();
    *value = to_f64(jac);
    if text.is_null() {
        return HenonStatus::Ok;
    }
    out_string(format_rational(jac), text)
}

/// Applies the map (`Plus`) or its inverse (`Minus`) once.
///
/// # Safety
/// `h` must be a live handle; `point` and `out` must each hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn henon_map_eval(
    h: *const HenonMapHandle,
    direction: HenonDirection,
    point: *const f64,
    out: *mut f64,
) -> HenonStatus {
    if h.is_null() || point.is_null() || out.is_null() {
        return fail(HenonStatus::NullPointer, "null argument");
    }
    guard(|| {
        let h = &*h;
        let q = read_point(point);
        let image = match direction {
            HenonDirection::Plus => h.forward.step(&q),
            HenonDirection::Minus => h.backward.step(&q.swapped()).map(|r| r.swapped()),
        };
        match image {
            Some(r) => {
                write_point(&r, out);
                HenonStatus::Ok
            }
            None => fail(HenonStatus::Overflow, "image is not representable"),
        }
    })
}

/// Green function `G±` at a point with an absolute error bound.
///
/// # Safety
/// `h` must be a live handle; `point` must hold 4 doubles; `value` and
/// `error` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn henon_green(
    h: *const HenonMapHandle,
    direction: HenonDirection,
    point: *const f64,
    tol: f64,
    value: *mut f64,
    error: *mut f64,
) -> HenonStatus {
    if h.is_null() || point.is_null() || value.is_null() || error.is_null() {
        return fail(HenonStatus::NullPointer, "null argument");
    }
    guard(|| {
        let q = read_point(point);
        match (*h).green.green(direction.into(), &q, tol) {
            Ok(g) => {
                *value = g.value;
                *error = g.error;
                HenonStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Canonical height of a rational point `"x,y"` as a JSON object, released
/// with [`henon_string_free`].
///
/// # Safety
/// `h` must be a live handle, `point` a NUL-terminated string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn henon_height_json(
    h: *const HenonMapHandle,
    point: *const c_char,
    tol: f64,
    out: *mut *mut c_char,
) -> HenonStatus {
    if h.is_null() || out.is_null() {
        return fail(HenonStatus::NullPointer, "null argument");
    }
    guard(|| {
        *out = ptr::null_mut();
        let text = match read_str(point, "point") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let q = match ExactPoint::parse(text) {
            Ok(q) => q,
            Err(e) => return from_core(e),
        };
        match canonical_height(&(*h).map, &q, tol) {
            Ok(v) => out_string(serde_json::to_string(&v).expect("height serializes"), out),
            Err(e) => from_core(e),
        }
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn henon_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
