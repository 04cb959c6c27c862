//! C ABI for the almost-L_p laboratory.
//!
//! All entry points follow the same conventions:
//! - handles (`AlpSpace`, `AlpFunction`) are opaque pointers owned by the
//!   library; release them with the matching `*_free` function;
//! - every fallible call returns an `int32_t` status code (`ALP_OK` = 0);
//!   on failure a human-readable message is stored in thread-local state
//!   and can be read with `alp_last_error_message`;
//! - strings returned through `char **` out-params are NUL-terminated,
//!   UTF-8, and must be released with `alp_string_free`;
//! - infinite extended-real results are reported as `INFINITY`.
//!
//! The authoritative header is `include/almost_lp.h`, kept in sync by hand
//! and cross-checked by the `header_lists_every_symbol` test below.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use almost_lp::convergence::{
    full_report, vitali_alpha, vitali_classic, vitali_lambda, FnSequence,
};
use almost_lp::functionals::{alpha_norm, frechet_mu, lambda_p_member, Membership};
use almost_lp::gallery::{list_entries, run_entry, GalleryParams};
use almost_lp::measure::integrate_p_whole;
use almost_lp::{AlpError, MeasurableFn, MeasureSpace};

/// Success.
pub const ALP_OK: i32 = 0;
/// A mathematical property or tolerance guarantee failed.
pub const ALP_ERR_VIOLATION: i32 = 1;
/// Malformed input (JSON, parameters out of domain, unknown entry).
pub const ALP_ERR_PARSE: i32 = 2;
/// Structurally valid input outside the supported closed-form families.
pub const ALP_ERR_UNSUPPORTED: i32 = 3;
/// A required ingredient (e.g. a candidate limit) is absent.
pub const ALP_ERR_MISSING: i32 = 4;
/// A null pointer was passed where a value is required.
pub const ALP_ERR_NULL: i32 = 5;
/// A `char *` argument was not valid UTF-8.
pub const ALP_ERR_UTF8: i32 = 6;
/// An internal panic was caught at the boundary.
pub const ALP_ERR_INTERNAL: i32 = 7;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn code_for(err: &AlpError) -> i32 {
    match err {
        AlpError::Invalid(_) | AlpError::ParamOutOfDomain(_) | AlpError::UnknownEntry(_) => {
            ALP_ERR_PARSE
        }
        AlpError::UnsupportedFamilyCombination(_) => ALP_ERR_UNSUPPORTED,
        AlpError::MissingLimit => ALP_ERR_MISSING,
        _ => ALP_ERR_VIOLATION,
    }
}

fn fail(err: AlpError) -> i32 {
    set_error(&err.to_string());
    code_for(&err)
}

/// Run `body` with panics converted into `ALP_ERR_INTERNAL`.
fn guarded(body: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            ALP_ERR_INTERNAL
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, i32> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(ALP_ERR_NULL);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        ALP_ERR_UTF8
    })
}

fn write_out<T>(out: *mut T, value: T) -> Result<(), i32> {
    if out.is_null() {
        set_error("null out-pointer");
        return Err(ALP_ERR_NULL);
    }
    unsafe { ptr::write(out, value) };
    Ok(())
}

fn write_string(out: *mut *mut c_char, s: String) -> Result<(), i32> {
    let c = CString::new(s.replace('\0', " ")).map_err(|_| {
        set_error("interior NUL in output");
        ALP_ERR_INTERNAL
    })?;
    write_out(out, c.into_raw())
}

/// Opaque measure-space handle.
pub struct AlpSpace(MeasureSpace);
/// Opaque measurable-function handle.
pub struct AlpFunction(MeasurableFn);

/// Message describing the most recent failure on this thread.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn alp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn alp_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Release a string produced by this library.
#[no_mangle]
pub unsafe extern "C" fn alp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a measure space from JSON.
#[no_mangle]
pub unsafe extern "C" fn alp_space_from_json(
    json: *const c_char,
    out: *mut *mut AlpSpace,
) -> i32 {
    guarded(|| {
        let json = match read_str(json) {
            Ok(s) => s,
            Err(code) => return code,
        };
        match MeasureSpace::from_json(json) {
            Ok(space) => match write_out(out, Box::into_raw(Box::new(AlpSpace(space)))) {
                Ok(()) => ALP_OK,
                Err(code) => code,
            },
            Err(e) => fail(e),
        }
    })
}

/// Release a measure-space handle.
#[no_mangle]
pub unsafe extern "C" fn alp_space_free(space: *mut AlpSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Total measure of the space (`INFINITY` if infinite).
#[no_mangle]
pub unsafe extern "C" fn alp_space_total_measure(
    space: *const AlpSpace,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        let Some(space) = space.as_ref() else {
            set_error("null space handle");
            return ALP_ERR_NULL;
        };
        match write_out(out, space.0.total_measure().value_or_inf()) {
            Ok(()) => ALP_OK,
            Err(code) => code,
        }
    })
}

/// Parse a measurable function from JSON.
#[no_mangle]
pub unsafe extern "C" fn alp_function_from_json(
    json: *const c_char,
    out: *mut *mut AlpFunction,
) -> i32 {
    guarded(|| {
        let json = match read_str(json) {
            Ok(s) => s,
            Err(code) => return code,
        };
        match MeasurableFn::from_json(json) {
            Ok(f) => match write_out(out, Box::into_raw(Box::new(AlpFunction(f)))) {
                Ok(()) => ALP_OK,
                Err(code) => code,
            },
            Err(e) => fail(e),
        }
    })
}

/// Release a function handle.
#[no_mangle]
pub unsafe extern "C" fn alp_function_free(f: *mut AlpFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

unsafe fn with_pair<'a>(
    space: *const AlpSpace,
    f: *const AlpFunction,
) -> Result<(&'a MeasureSpace, &'a MeasurableFn), i32> {
    let Some(space) = space.as_ref() else {
        set_error("null space handle");
        return Err(ALP_ERR_NULL);
    };
    let Some(f) = f.as_ref() else {
        set_error("null function handle");
        return Err(ALP_ERR_NULL);
    };
    Ok((&space.0, &f.0))
}

/// F-norm ‖f‖_{α_p} = ‖min(|f|,1)‖_p.
#[no_mangle]
pub unsafe extern "C" fn alp_alpha_norm(
    space: *const AlpSpace,
    f: *const AlpFunction,
    p: f64,
    tol: f64,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        let (space, f) = match with_pair(space, f) {
            Ok(pair) => pair,
            Err(code) => return code,
        };
        match alpha_norm(space, f, p, tol) {
            Ok(v) => match write_out(out, v.value_or_inf()) {
                Ok(()) => ALP_OK,
                Err(code) => code,
            },
            Err(e) => fail(e),
        }
    })
}

/// L_p norm (∫|f|^p)^{1/p}, `INFINITY` when the integral diverges.
#[no_mangle]
pub unsafe extern "C" fn alp_lp_norm(
    space: *const AlpSpace,
    f: *const AlpFunction,
    p: f64,
    tol: f64,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        let (space, f) = match with_pair(space, f) {
            Ok(pair) => pair,
            Err(code) => return code,
        };
        match integrate_p_whole(space, f, p, tol) {
            Ok(v) => match write_out(out, v.powf(1.0 / p).value_or_inf()) {
                Ok(()) => ALP_OK,
                Err(code) => code,
            },
            Err(e) => fail(e),
        }
    })
}

/// Fréchet functional ‖f‖_μ = min(inf_δ {μ(|f|>δ) + δ}, 1).
#[no_mangle]
pub unsafe extern "C" fn alp_frechet_mu(
    space: *const AlpSpace,
    f: *const AlpFunction,
    tol: f64,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        let (space, f) = match with_pair(space, f) {
            Ok(pair) => pair,
            Err(code) => return code,
        };
        match frechet_mu(space, f, tol) {
            Ok(v) => match write_out(out, v) {
                Ok(()) => ALP_OK,
                Err(code) => code,
            },
            Err(e) => fail(e),
        }
    })
}

/// Membership verdicts for `alp_member`.
pub const ALP_MEMBER: i32 = 1;
pub const ALP_NON_MEMBER: i32 = 0;
pub const ALP_MEMBER_INCONCLUSIVE: i32 = -1;

/// Decide Λ_p membership; writes one of the `ALP_MEMBER*` verdicts.
#[no_mangle]
pub unsafe extern "C" fn alp_member(
    space: *const AlpSpace,
    f: *const AlpFunction,
    p: f64,
    tol: f64,
    out_verdict: *mut i32,
) -> i32 {
    guarded(|| {
        let (space, f) = match with_pair(space, f) {
            Ok(pair) => pair,
            Err(code) => return code,
        };
        match lambda_p_member(space, f, p, &[0.5, 0.1, 0.01], tol) {
            Ok(report) => {
                let v = match report.verdict {
                    Membership::Member => ALP_MEMBER,
                    Membership::NonMember => ALP_NON_MEMBER,
                    Membership::Inconclusive => ALP_MEMBER_INCONCLUSIVE,
                };
                match write_out(out_verdict, v) {
                    Ok(()) => ALP_OK,
                    Err(code) => code,
                }
            }
            Err(e) => fail(e),
        }
    })
}

/// Full membership report (verdict plus witnesses) as a JSON string.
#[no_mangle]
pub unsafe extern "C" fn alp_member_report_json(
    space: *const AlpSpace,
    f: *const AlpFunction,
    p: f64,
    tol: f64,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let (space, f) = match with_pair(space, f) {
            Ok(pair) => pair,
            Err(code) => return code,
        };
        match lambda_p_member(space, f, p, &[0.5, 0.1, 0.01], tol) {
            Ok(report) => match serde_json::to_string_pretty(&report) {
                Ok(s) => match write_string(out_json, s) {
                    Ok(()) => ALP_OK,
                    Err(code) => code,
                },
                Err(e) => {
                    set_error(&e.to_string());
                    ALP_ERR_INTERNAL
                }
            },
            Err(e) => fail(e),
        }
    })
}

/// Run every convergence checker on a sequence described by JSON
/// (`{"family": "...", ...}`); writes the report array as JSON.
#[no_mangle]
pub unsafe extern "C" fn alp_classify_json(
    sequence_json: *const c_char,
    p: f64,
    tol: f64,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let json = match read_str(sequence_json) {
            Ok(s) => s,
            Err(code) => return code,
        };
        let seq = match FnSequence::from_json(json) {
            Ok(seq) => seq,
            Err(e) => return fail(e),
        };
        match full_report(&seq, p, tol) {
            Ok(report) => match serde_json::to_string_pretty(&report) {
                Ok(s) => match write_string(out_json, s) {
                    Ok(()) => ALP_OK,
                    Err(code) => code,
                },
                Err(e) => {
                    set_error(&e.to_string());
                    ALP_ERR_INTERNAL
                }
            },
            Err(e) => fail(e),
        }
    })
}

/// Vitali legs-vs-conclusion report; `variant` is "classic", "alpha", or
/// "lambda".
#[no_mangle]
pub unsafe extern "C" fn alp_vitali_json(
    variant: *const c_char,
    sequence_json: *const c_char,
    p: f64,
    tol: f64,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let variant = match read_str(variant) {
            Ok(s) => s,
            Err(code) => return code,
        };
        let json = match read_str(sequence_json) {
            Ok(s) => s,
            Err(code) => return code,
        };
        let seq = match FnSequence::from_json(json) {
            Ok(seq) => seq,
            Err(e) => return fail(e),
        };
        let report = match variant {
            "classic" => vitali_classic(&seq, p, tol),
            "alpha" => vitali_alpha(&seq, p, tol),
            "lambda" => vitali_lambda(&seq, p, tol),
            other => {
                set_error(&format!("unknown vitali variant: {other}"));
                return ALP_ERR_PARSE;
            }
        };
        match report {
            Ok(report) => match serde_json::to_string_pretty(&report) {
                Ok(s) => match write_string(out_json, s) {
                    Ok(()) => ALP_OK,
                    Err(code) => code,
                },
                Err(e) => {
                    set_error(&e.to_string());
                    ALP_ERR_INTERNAL
                }
            },
            Err(e) => fail(e),
        }
    })
}

/// Catalog of gallery entries as JSON.
#[no_mangle]
pub unsafe extern "C" fn alp_gallery_list_json(out_json: *mut *mut c_char) -> i32 {
    guarded(|| match serde_json::to_string_pretty(&list_entries()) {
        Ok(s) => match write_string(out_json, s) {
            Ok(()) => ALP_OK,
            Err(code) => code,
        },
        Err(e) => {
            set_error(&e.to_string());
            ALP_ERR_INTERNAL
        }
    })
}

/// Run a gallery entry. `params_json` may be NULL (defaults) or a JSON
/// object overriding any of p, eps, r, d, n, seed, trials.
/// On success writes the report JSON; a report whose checks fail yields
/// `ALP_ERR_VIOLATION` with the JSON still written.
#[no_mangle]
pub unsafe extern "C" fn alp_gallery_run_json(
    name: *const c_char,
    params_json: *const c_char,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let name = match read_str(name) {
            Ok(s) => s,
            Err(code) => return code,
        };
        let params = if params_json.is_null() {
            GalleryParams::default()
        } else {
            let raw = match read_str(params_json) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let mut value = match serde_json::to_value(GalleryParams::default()) {
                Ok(v) => v,
                Err(e) => {
                    set_error(&e.to_string());
                    return ALP_ERR_INTERNAL;
                }
            };
            let overrides: serde_json::Value = match serde_json::from_str(raw) {
                Ok(v) => v,
                Err(e) => {
                    set_error(&format!("invalid params JSON: {e}"));
                    return ALP_ERR_PARSE;
                }
            };
            let (Some(base), Some(over)) = (value.as_object_mut(), overrides.as_object())
            else {
                set_error("params JSON must be an object");
                return ALP_ERR_PARSE;
            };
            for (k, v) in over {
                if !base.contains_key(k) {
                    set_error(&format!("unknown gallery parameter: {k}"));
                    return ALP_ERR_PARSE;
                }
                base.insert(k.clone(), v.clone());
            }
            match serde_json::from_value(value) {
                Ok(p) => p,
                Err(e) => {
                    set_error(&format!("invalid params JSON: {e}"));
                    return ALP_ERR_PARSE;
                }
            }
        };
        match run_entry(name, &params) {
            Ok(report) => {
                let passed = report.passed;
                match serde_json::to_string_pretty(&report) {
                    Ok(s) => match write_string(out_json, s) {
                        Ok(()) if passed => ALP_OK,
                        Ok(()) => {
                            set_error("gallery checks failed");
                            ALP_ERR_VIOLATION
                        }
                        Err(code) => code,
                    },
                    Err(e) => {
                        set_error(&e.to_string());
                        ALP_ERR_INTERNAL
                    }
                }
            }
            Err(e) => fail(e),
        }
    })
}
