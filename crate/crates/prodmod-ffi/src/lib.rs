//! C bindings for the decision engine.
//!
//! Results travel behind an opaque handle; strings returned to the caller
//! are NUL terminated, owned by the caller, and released with
//! `prodmod_string_free`. Every entry point is panic safe.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use prodmod::decision::{decide_with_trace, parse_problem, DecideConfig, Decision};
use prodmod::report::Report;

/// Status of one call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProdmodStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    EngineError = 4,
}

/// Verdict of a decided problem.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProdmodVerdict {
    Entailed = 0,
    NotEntailed = 1,
    Unknown = 2,
}

/// Budgets for one decision run; zero means the built-in default, and a
/// zero time limit means no limit.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ProdmodOptions {
    pub branch_limit: u64,
    pub omega_limit: u64,
    pub truncation_k: u32,
    pub jobs: u32,
    pub time_limit_ms: u64,
}

/// Opaque result handle.
pub struct ProdmodResult {
    verdict: ProdmodVerdict,
    report: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let stored = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").expect("literal"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

/// Default budgets.
#[no_mangle]
pub extern "C" fn prodmod_options_default() -> ProdmodOptions {
    let cfg = DecideConfig::default();
    ProdmodOptions {
        branch_limit: cfg.branch_limit,
        omega_limit: cfg.omega_limit as u64,
        truncation_k: cfg.truncation_k as u32,
        jobs: cfg.jobs as u32,
        time_limit_ms: 0,
    }
}

fn config_from(options: &ProdmodOptions) -> DecideConfig {
    let defaults = DecideConfig::default();
    DecideConfig {
        branch_limit: if options.branch_limit == 0 {
            defaults.branch_limit
        } else {
            options.branch_limit
        },
        omega_limit: if options.omega_limit == 0 {
            defaults.omega_limit
        } else {
            options.omega_limit as usize
        },
        truncation_k: if options.truncation_k == 0 {
            defaults.truncation_k
        } else {
            options.truncation_k as usize
        },
        jobs: (options.jobs as usize).max(1),
        time_limit: (options.time_limit_ms > 0)
            .then(|| Duration::from_millis(options.time_limit_ms)),
    }
}

unsafe fn decide_impl(
    problem_text: *const c_char,
    options: *const ProdmodOptions,
    out: *mut *mut ProdmodResult,
) -> ProdmodStatus {
    if problem_text.is_null() || out.is_null() {
        set_error("null argument".into());
        return ProdmodStatus::NullArgument;
    }
    *out = std::ptr::null_mut();
    let Ok(text) = CStr::from_ptr(problem_text).to_str() else {
        set_error("problem text is not valid UTF-8".into());
        return ProdmodStatus::InvalidUtf8;
    };
    let problem = match parse_problem(text) {
        Ok(p) => p,
        Err(e) => {
            set_error(e.to_string());
            return ProdmodStatus::ParseError;
        }
    };
    let cfg = if options.is_null() {
        DecideConfig::default()
    } else {
        config_from(&*options)
    };
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| decide_with_trace(&problem, &cfg)));
    let (decision, traces) = match outcome {
        Ok(Ok(pair)) => pair,
        Ok(Err(e)) => {
            set_error(e.to_string());
            return ProdmodStatus::EngineError;
        }
        Err(_) => {
            set_error("internal panic".into());
            return ProdmodStatus::EngineError;
        }
    };
    let verdict = match &decision {
        Decision::Entailed => ProdmodVerdict::Entailed,
        Decision::NotEntailed { .. } => ProdmodVerdict::NotEntailed,
        Decision::Unknown { .. } => ProdmodVerdict::Unknown,
    };
    let report = Report::new(
        &problem,
        &decision,
        &traces,
        started.elapsed().as_millis() as u64,
    );
    *out = Box::into_raw(Box::new(ProdmodResult { verdict, report }));
    ProdmodStatus::Ok
}

/// Decide a problem given in the line-oriented text form, with defaults.
///
/// # Safety
/// `problem_text` must be a NUL terminated string and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn prodmod_decide(
    problem_text: *const c_char,
    out: *mut *mut ProdmodResult,
) -> ProdmodStatus {
    decide_impl(problem_text, std::ptr::null(), out)
}

/// Decide a problem with explicit budgets.
///
/// # Safety
/// Pointer arguments must be valid; `options` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn prodmod_decide_with_options(
    problem_text: *const c_char,
    options: *const ProdmodOptions,
    out: *mut *mut ProdmodResult,
) -> ProdmodStatus {
    decide_impl(problem_text, options, out)
}

/// Verdict of a finished run; null handles answer `Unknown`.
///
/// # Safety
/// `result` must be null or a handle from a decide call.
#[no_mangle]
pub unsafe extern "C" fn prodmod_result_verdict(result: *const ProdmodResult) -> ProdmodVerdict {
    if result.is_null() {
        return ProdmodVerdict::Unknown;
    }
    (*result).verdict
}

/// Full JSON report for a finished run; the caller frees the string.
///
/// # Safety
/// `result` must be a handle from a decide call.
#[no_mangle]
pub unsafe extern "C" fn prodmod_result_report_json(result: *const ProdmodResult) -> *mut c_char {
    if result.is_null() {
        return std::ptr::null_mut();
    }
    match CString::new((*result).report.to_json()) {
        Ok(s) => s.into_raw(),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Message for the most recent failure on this thread, or null.
#[no_mangle]
pub extern "C" fn prodmod_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(message) => message.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn prodmod_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a result handle.
///
/// # Safety
/// `result` must be null or a handle from a decide call, freed once.
#[no_mangle]
pub unsafe extern "C" fn prodmod_result_free(result: *mut ProdmodResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(text: &str) -> CString {
        CString::new(text).unwrap()
    }

    fn take_string(ptr: *mut c_char) -> String {
        assert!(!ptr.is_null());
        let owned = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_owned();
        unsafe { prodmod_string_free(ptr) };
        owned
    }

    #[test]
    fn decide_round_trips_through_the_c_abi() {
        let text = c("logic: crisp\nconclusion: box p -> p\n");
        let mut out: *mut ProdmodResult = std::ptr::null_mut();
        let status = unsafe { prodmod_decide(text.as_ptr(), &mut out) };
        assert_eq!(status, ProdmodStatus::Ok);
        assert_eq!(
            unsafe { prodmod_result_verdict(out) },
            ProdmodVerdict::NotEntailed
        );
        let json = take_string(unsafe { prodmod_result_report_json(out) });
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["schema"], 1);
        let report = Report::from_json(&json).unwrap();
        report.reverify(2).unwrap();
        unsafe { prodmod_result_free(out) };
    }

    #[test]
    fn bad_inputs_produce_statuses_and_messages() {
        let mut out: *mut ProdmodResult = std::ptr::null_mut();
        assert_eq!(
            unsafe { prodmod_decide(std::ptr::null(), &mut out) },
            ProdmodStatus::NullArgument
        );
        let broken = c("logic: crisp\nconclusion: box (p\n");
        assert_eq!(
            unsafe { prodmod_decide(broken.as_ptr(), &mut out) },
            ProdmodStatus::ParseError
        );
        assert!(out.is_null());
        let message = take_string(prodmod_last_error());
        assert!(message.contains("line 2"));
    }

    #[test]
    fn options_cap_the_search() {
        let text = c("logic: crisp\nconclusion: box p\n");
        let mut options = prodmod_options_default();
        options.omega_limit = 1;
        let mut out: *mut ProdmodResult = std::ptr::null_mut();
        let status = unsafe { prodmod_decide_with_options(text.as_ptr(), &options, &mut out) };
        assert_eq!(status, ProdmodStatus::Ok);
        assert_eq!(
            unsafe { prodmod_result_verdict(out) },
            ProdmodVerdict::Unknown
        );
        unsafe { prodmod_result_free(out) };
    }

    #[test]
    fn header_is_generated_with_the_public_names() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include")
            .join("prodmod.h");
        let text = std::fs::read_to_string(header).unwrap();
        for name in [
            "prodmod_decide_with_options",
            "prodmod_result_verdict",
            "prodmod_result_report_json",
            "prodmod_result_free",
            "prodmod_string_free",
            "prodmod_last_error",
            "ProdmodOptions",
            "ProdmodStatus",
        ] {
            assert!(text.contains(name), "missing {name}");
        }
    }
}
