//! C interface to evoforge.
//!
//! Every fallible function returns an [`EvoStatus`] and writes its result
//! through an out-pointer. On failure, [`evo_last_error_message`] describes
//! what went wrong on the calling thread. Handles are opaque and must be
//! released with the matching `*_free` function; strings returned by the
//! library are released with [`evo_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use evoforge::cli::{execute_run, RunOverrides};
use evoforge::hdsl::{self, BoundExpr, Expr};
use evoforge::problems::io::{load_bpp, load_tsp};
use evoforge::problems::{bpp_lower_bound, bpp_pack, tsp_tour_length, BppInstance, Point, TourPermutation, TspInstance};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    DomainError = 5,
    IoError = 6,
    RunFailed = 7,
    Panic = 8,
}

/// A parsed heuristic expression.
pub struct EvoExpr {
    expr: Expr,
}

pub struct EvoBppInstance {
    inst: BppInstance,
}

pub struct EvoTspInstance {
    inst: TspInstance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(EvoStatus, String);

type Outcome = Result<(), Failure>;

fn fail<T>(status: EvoStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Outcome) -> EvoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EvoStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EvoStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(EvoStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(EvoStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().map_or_else(|| fail(EvoStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn slice_arg<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(EvoStatus::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Outcome {
    if out.is_null() {
        return fail(EvoStatus::NullPointer, "output pointer is null");
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).or_else(|_| fail(EvoStatus::InvalidArgument, "string contains NUL"))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn evo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn evo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn evo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `text` into a new expression handle.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_expr_parse(text: *const c_char, out: *mut *mut EvoExpr) -> EvoStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let expr = hdsl::parse(text).or_else(|e| fail(EvoStatus::ParseError, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(EvoExpr { expr })))
    })
}

/// Canonical text of an expression; free it with [`evo_string_free`].
///
/// # Safety
/// `expr` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_expr_print(expr: *const EvoExpr, out: *mut *mut c_char) -> EvoStatus {
    guard(|| {
        let e = ref_arg(expr, "expr")?;
        write_out(out, into_c_string(hdsl::print(&e.expr))?)
    })
}

/// Node count.
///
/// # Safety
/// `expr` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_expr_complexity(expr: *const EvoExpr, out: *mut usize) -> EvoStatus {
    guard(|| write_out(out, ref_arg(expr, "expr")?.expr.complexity()))
}

/// Evaluates with `n` variable bindings given as parallel arrays.
///
/// # Safety
/// `names` and `values` must each point to `n` valid elements; every name
/// must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn evo_expr_eval(
    expr: *const EvoExpr,
    names: *const *const c_char,
    values: *const f64,
    n: usize,
    out: *mut f64,
) -> EvoStatus {
    guard(|| {
        let e = ref_arg(expr, "expr")?;
        let names = slice_arg(names, n, "names")?
            .iter()
            .map(|&p| str_arg(p, "variable name"))
            .collect::<Result<Vec<_>, _>>()?;
        let values = slice_arg(values, n, "values")?;
        let bound = BoundExpr::bind(&e.expr, &names).or_else(|err| fail(EvoStatus::InvalidArgument, err.to_string()))?;
        let v = bound.eval(values).or_else(|err| fail(EvoStatus::DomainError, err.to_string()))?;
        write_out(out, v)
    })
}

/// # Safety
/// `expr` must be null or a handle from [`evo_expr_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn evo_expr_free(expr: *mut EvoExpr) {
    if !expr.is_null() {
        drop(Box::from_raw(expr));
    }
}

/// Builds a bin-packing instance from a capacity and `n` item sizes.
///
/// # Safety
/// `items` must point to `n` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_bpp_new(
    capacity: f64,
    items: *const f64,
    n: usize,
    out: *mut *mut EvoBppInstance,
) -> EvoStatus {
    guard(|| {
        let items = slice_arg(items, n, "items")?.to_vec();
        let inst = BppInstance::new("ffi", capacity, items).or_else(|e| fail(EvoStatus::InvalidArgument, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(EvoBppInstance { inst })))
    })
}

/// Loads a bin-packing instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_bpp_load(path: *const c_char, out: *mut *mut EvoBppInstance) -> EvoStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let inst = load_bpp(path).or_else(|e| fail(EvoStatus::IoError, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(EvoBppInstance { inst })))
    })
}

/// Packs the instance online with `expr` as the bin priority and writes the
/// number of bins used.
///
/// # Safety
/// Both handles must be live; `bins` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_bpp_pack(inst: *const EvoBppInstance, expr: *const EvoExpr, bins: *mut usize) -> EvoStatus {
    guard(|| {
        let inst = ref_arg(inst, "instance")?;
        let e = ref_arg(expr, "expr")?;
        let packing = bpp_pack(&inst.inst, &e.expr).or_else(|err| fail(EvoStatus::DomainError, err.to_string()))?;
        write_out(bins, packing.bin_count())
    })
}

/// `ceil(total size / capacity)`.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_bpp_lower_bound(inst: *const EvoBppInstance, out: *mut usize) -> EvoStatus {
    guard(|| write_out(out, bpp_lower_bound(&ref_arg(inst, "instance")?.inst)))
}

/// # Safety
/// `inst` must be null or a bin-packing handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn evo_bpp_free(inst: *mut EvoBppInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Builds a TSP instance from `n` cities given as interleaved x, y pairs.
///
/// # Safety
/// `xy` must point to `2 * n` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_tsp_new(xy: *const f64, n: usize, out: *mut *mut EvoTspInstance) -> EvoStatus {
    guard(|| {
        let len = n.checked_mul(2).map_or_else(|| fail(EvoStatus::InvalidArgument, "too many cities"), Ok)?;
        let coords = slice_arg(xy, len, "xy")?;
        let points = coords.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect();
        let inst = TspInstance::new("ffi", points).or_else(|e| fail(EvoStatus::InvalidArgument, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(EvoTspInstance { inst })))
    })
}

/// Loads a TSP instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_tsp_load(path: *const c_char, out: *mut *mut EvoTspInstance) -> EvoStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let inst = load_tsp(path).or_else(|e| fail(EvoStatus::IoError, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(EvoTspInstance { inst })))
    })
}

/// Closed-tour length of a permutation of the `n` cities.
///
/// # Safety
/// `inst` must be a live handle; `order` must point to `n` readable
/// indices; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_tsp_tour_length(
    inst: *const EvoTspInstance,
    order: *const usize,
    n: usize,
    out: *mut f64,
) -> EvoStatus {
    guard(|| {
        let inst = ref_arg(inst, "instance")?;
        let tour = TourPermutation(slice_arg(order, n, "order")?.to_vec());
        let len = tsp_tour_length(&inst.inst, &tour).or_else(|e| fail(EvoStatus::InvalidArgument, e.to_string()))?;
        write_out(out, len)
    })
}

/// # Safety
/// `inst` must be null or a TSP handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn evo_tsp_free(inst: *mut EvoTspInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Runs the search described by a config file, like `evoforge run`, and
/// returns the contents of `result.json`. `out_dir` may be null to use the
/// config's output directory.
///
/// # Safety
/// `config_path` must be a NUL-terminated string, `out_dir` null or one;
/// `result_json` must be writable. Free the result with [`evo_string_free`].
#[no_mangle]
pub unsafe extern "C" fn evo_run_config(
    config_path: *const c_char,
    out_dir: *const c_char,
    result_json: *mut *mut c_char,
) -> EvoStatus {
    guard(|| {
        let config = PathBuf::from(str_arg(config_path, "config_path")?);
        let out = if out_dir.is_null() { None } else { Some(PathBuf::from(str_arg(out_dir, "out_dir")?)) };
        let overrides = RunOverrides { out, ..RunOverrides::default() };
        let artifacts = execute_run(&config, &overrides).or_else(|e| match e.exit_code() {
            1 => fail(EvoStatus::InvalidArgument, e.to_string()),
            _ => fail(EvoStatus::RunFailed, e.to_string()),
        })?;
        let text = std::fs::read_to_string(artifacts.out_dir.join("result.json"))
            .or_else(|e| fail(EvoStatus::IoError, format!("reading result.json: {e}")))?;
        write_out(result_json, into_c_string(text)?)
    })
}
