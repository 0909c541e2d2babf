//! C ABI over the uamnet engine.
//!
//! Conventions: every function returns a `UamnetStatus`; results come back
//! through out-pointers; scenarios are opaque handles created and destroyed
//! here. Strings cross the boundary as NUL-terminated UTF-8. The last error
//! message is kept per thread and retrieved with `uamnet_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use uamnet::analytics::{self, AnalyticScenario};
use uamnet::antenna::optimal_tilt_deg;
use uamnet::config::{db_to_linear, ScenarioConfig};
use uamnet::sim;

/// Status codes for every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UamnetStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    ComputeFailed = 4,
    BufferTooSmall = 5,
}

/// Opaque scenario handle.
pub struct UamnetScenario {
    cfg: ScenarioConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(code: UamnetStatus, msg: &str) -> UamnetStatus {
    set_error(msg);
    code
}

/// Copy the last error message of this thread into `buf` (NUL-terminated).
/// `len` carries the buffer capacity in and the required size (including the
/// NUL) out.
///
/// # Safety
/// `len` must be a valid pointer; `buf` must point to at least `*len` bytes
/// or be null for a pure size query.
#[no_mangle]
pub unsafe extern "C" fn uamnet_last_error(buf: *mut c_char, len: *mut usize) -> UamnetStatus {
    if len.is_null() {
        return UamnetStatus::NullArgument;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        let needed = bytes.len();
        let cap = *len;
        *len = needed;
        if buf.is_null() || cap < needed {
            return UamnetStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, needed);
        UamnetStatus::Ok
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uamnet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Create a scenario with the built-in desk-scale defaults.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uamnet_scenario_default(
    out: *mut *mut UamnetScenario,
) -> UamnetStatus {
    if out.is_null() {
        return fail(UamnetStatus::NullArgument, "out is null");
    }
    *out = Box::into_raw(Box::new(UamnetScenario {
        cfg: ScenarioConfig::desk_scale(),
    }));
    UamnetStatus::Ok
}

/// Parse a scenario from TOML text. Validation failures list every violated
/// invariant in the error message.
///
/// # Safety
/// `toml` must be a valid NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uamnet_scenario_from_toml(
    toml: *const c_char,
    out: *mut *mut UamnetScenario,
) -> UamnetStatus {
    if toml.is_null() || out.is_null() {
        return fail(UamnetStatus::NullArgument, "toml or out is null");
    }
    let Ok(text) = CStr::from_ptr(toml).to_str() else {
        return fail(UamnetStatus::InvalidUtf8, "toml is not valid UTF-8");
    };
    match ScenarioConfig::from_toml_str(text) {
        Ok(cfg) => {
            *out = Box::into_raw(Box::new(UamnetScenario { cfg }));
            UamnetStatus::Ok
        }
        Err(e) => fail(UamnetStatus::InvalidConfig, &format!("{e:#}")),
    }
}

/// Destroy a scenario handle. Null is accepted and ignored.
///
/// # Safety
/// `h` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uamnet_scenario_free(h: *mut UamnetScenario) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Override the root seed.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uamnet_scenario_set_seed(
    h: *mut UamnetScenario,
    seed: u64,
) -> UamnetStatus {
    let Some(s) = h.as_mut() else {
        return fail(UamnetStatus::NullArgument, "handle is null");
    };
    s.cfg.seed = seed;
    UamnetStatus::Ok
}

/// Override the Monte Carlo drop count.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uamnet_scenario_set_drops(
    h: *mut UamnetScenario,
    drops: u64,
) -> UamnetStatus {
    let Some(s) = h.as_mut() else {
        return fail(UamnetStatus::NullArgument, "handle is null");
    };
    if drops == 0 {
        return fail(UamnetStatus::InvalidConfig, "drops must be >= 1");
    }
    s.cfg.drops = drops;
    UamnetStatus::Ok
}

/// Serialize the effective scenario to TOML. Two-call sizing like
/// `uamnet_last_error`.
///
/// # Safety
/// `h` must be a live handle; `len` valid; `buf` null or `*len` bytes.
#[no_mangle]
pub unsafe extern "C" fn uamnet_scenario_to_toml(
    h: *const UamnetScenario,
    buf: *mut c_char,
    len: *mut usize,
) -> UamnetStatus {
    let Some(s) = h.as_ref() else {
        return fail(UamnetStatus::NullArgument, "handle is null");
    };
    if len.is_null() {
        return fail(UamnetStatus::NullArgument, "len is null");
    }
    let text = s.cfg.to_toml_string();
    let needed = text.len() + 1;
    let cap = *len;
    *len = needed;
    if buf.is_null() || cap < needed {
        return UamnetStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(text.as_ptr() as *const c_char, buf, text.len());
    *buf.add(text.len()) = 0;
    UamnetStatus::Ok
}

/// Closed-form coverage probability at an SIR threshold in dB.
///
/// # Safety
/// `h` must be a live handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn uamnet_coverage_probability(
    h: *const UamnetScenario,
    threshold_db: f64,
    out: *mut f64,
) -> UamnetStatus {
    let Some(s) = h.as_ref() else {
        return fail(UamnetStatus::NullArgument, "handle is null");
    };
    if out.is_null() {
        return fail(UamnetStatus::NullArgument, "out is null");
    }
    let scn = AnalyticScenario::from_config(&s.cfg);
    match analytics::coverage_probability(db_to_linear(threshold_db), &scn) {
        Ok(c) => {
            *out = c.value;
            UamnetStatus::Ok
        }
        Err(e) => fail(UamnetStatus::ComputeFailed, &e.to_string()),
    }
}

/// Monte Carlo coverage at several thresholds (dB in, probabilities out,
/// same length).
///
/// # Safety
/// `h` live; `thresholds_db` and `out` must point to `n` doubles each.
#[no_mangle]
pub unsafe extern "C" fn uamnet_coverage_mc(
    h: *const UamnetScenario,
    thresholds_db: *const f64,
    n: usize,
    out: *mut f64,
) -> UamnetStatus {
    let Some(s) = h.as_ref() else {
        return fail(UamnetStatus::NullArgument, "handle is null");
    };
    if thresholds_db.is_null() || out.is_null() {
        return fail(UamnetStatus::NullArgument, "thresholds_db or out is null");
    }
    let ts = std::slice::from_raw_parts(thresholds_db, n);
    match sim::coverage_mc(&s.cfg, ts) {
        Ok(est) => {
            ptr::copy_nonoverlapping(est.coverage.as_ptr(), out, n);
            UamnetStatus::Ok
        }
        Err(e) => fail(UamnetStatus::ComputeFailed, &e.to_string()),
    }
}

/// Optimal elevation tilt in degrees for one vehicle height.
///
/// # Safety
/// `h` live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn uamnet_optimal_tilt_deg(
    h: *const UamnetScenario,
    height_m: f64,
    out: *mut f64,
) -> UamnetStatus {
    let Some(s) = h.as_ref() else {
        return fail(UamnetStatus::NullArgument, "handle is null");
    };
    if out.is_null() {
        return fail(UamnetStatus::NullArgument, "out is null");
    }
    if !(height_m > 0.0) {
        return fail(UamnetStatus::InvalidConfig, "height_m must be positive");
    }
    let imd = 1.0 / s.cfg.spatial.lambda_m_per_m2().sqrt();
    *out = optimal_tilt_deg(height_m, s.cfg.spatial.h_m_m, imd, &s.cfg.antenna);
    UamnetStatus::Ok
}

/// Line-of-sight probability for a link of 2D length `r_m` to a vehicle at
/// `height_m`.
///
/// # Safety
/// `h` live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn uamnet_los_probability(
    h: *const UamnetScenario,
    r_m: f64,
    height_m: f64,
    out: *mut f64,
) -> UamnetStatus {
    let Some(s) = h.as_ref() else {
        return fail(UamnetStatus::NullArgument, "handle is null");
    };
    if out.is_null() {
        return fail(UamnetStatus::NullArgument, "out is null");
    }
    *out = analytics::line_of_sight_probability(r_m, height_m, &s.cfg.spatial);
    UamnetStatus::Ok
}

/// Vehicles one sector can serve at a reliability target in (0, 1).
///
/// # Safety
/// `h` live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn uamnet_supportable_uams(
    h: *const UamnetScenario,
    reliability_target: f64,
    out: *mut f64,
) -> UamnetStatus {
    let Some(s) = h.as_ref() else {
        return fail(UamnetStatus::NullArgument, "handle is null");
    };
    if out.is_null() {
        return fail(UamnetStatus::NullArgument, "out is null");
    }
    if !(reliability_target > 0.0 && reliability_target < 1.0) {
        return fail(
            UamnetStatus::InvalidConfig,
            "reliability_target must lie in (0, 1)",
        );
    }
    let scn = AnalyticScenario::from_config(&s.cfg);
    match analytics::supportable_uams(reliability_target, &scn, &s.cfg.capacity) {
        Ok(v) => {
            *out = v;
            UamnetStatus::Ok
        }
        Err(e) => fail(UamnetStatus::ComputeFailed, &e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_round_trips() {
        unsafe {
            let mut h: *mut UamnetScenario = ptr::null_mut();
            assert_eq!(uamnet_scenario_default(&mut h), UamnetStatus::Ok);
            let mut len = 0usize;
            assert_eq!(
                uamnet_scenario_to_toml(h, ptr::null_mut(), &mut len),
                UamnetStatus::BufferTooSmall
            );
            let mut buf = vec![0i8; len];
            assert_eq!(
                uamnet_scenario_to_toml(h, buf.as_mut_ptr() as *mut c_char, &mut len),
                UamnetStatus::Ok
            );
            let text = CStr::from_ptr(buf.as_ptr() as *const c_char)
                .to_str()
                .unwrap()
                .to_string();
            let mut h2: *mut UamnetScenario = ptr::null_mut();
            let c = CString::new(text).unwrap();
            assert_eq!(
                uamnet_scenario_from_toml(c.as_ptr(), &mut h2),
                UamnetStatus::Ok
            );
            uamnet_scenario_free(h);
            uamnet_scenario_free(h2);
        }
    }

    #[test]
    fn null_arguments_are_rejected_with_message() {
        unsafe {
            assert_eq!(
                uamnet_scenario_default(ptr::null_mut()),
                UamnetStatus::NullArgument
            );
            let mut len = 0usize;
            assert_eq!(
                uamnet_last_error(ptr::null_mut(), &mut len),
                UamnetStatus::BufferTooSmall
            );
            let mut buf = vec![0i8; len];
            assert_eq!(
                uamnet_last_error(buf.as_mut_ptr() as *mut c_char, &mut len),
                UamnetStatus::Ok
            );
            let msg = CStr::from_ptr(buf.as_ptr() as *const c_char).to_str().unwrap();
            assert!(msg.contains("null"));
        }
    }

    #[test]
    fn invalid_toml_lists_violations() {
        unsafe {
            let mut h: *mut UamnetScenario = ptr::null_mut();
            let c = CString::new("drops = 0\nsim_duration_s = -1.0\n").unwrap();
            assert_eq!(
                uamnet_scenario_from_toml(c.as_ptr(), &mut h),
                UamnetStatus::InvalidConfig
            );
            let mut len = 0usize;
            uamnet_last_error(ptr::null_mut(), &mut len);
            let mut buf = vec![0i8; len];
            uamnet_last_error(buf.as_mut_ptr() as *mut c_char, &mut len);
            let msg = CStr::from_ptr(buf.as_ptr() as *const c_char).to_str().unwrap();
            assert!(msg.contains("drops"));
            assert!(msg.contains("sim_duration_s"));
        }
    }

    #[test]
    fn analytic_coverage_through_the_boundary() {
        unsafe {
            let mut h: *mut UamnetScenario = ptr::null_mut();
            uamnet_scenario_default(&mut h);
            // defaults use the beamformed stack; force the tractable channel
            (*h).cfg.channel.gamma = 0.0;
            (*h).cfg.channel.m = 1;
            let mut p = -1.0;
            assert_eq!(uamnet_coverage_probability(h, 0.0, &mut p), UamnetStatus::Ok);
            assert!(p > 0.0 && p < 1.0);
            let mut tilt = f64::NAN;
            assert_eq!(uamnet_optimal_tilt_deg(h, 300.0, &mut tilt), UamnetStatus::Ok);
            assert!(tilt < 0.0);
            uamnet_scenario_free(h);
        }
    }

    #[test]
    fn mc_coverage_matches_direct_call() {
        unsafe {
            let mut h: *mut UamnetScenario = ptr::null_mut();
            uamnet_scenario_default(&mut h);
            uamnet_scenario_set_drops(h, 100);
            let ts = [0.0, 10.0];
            let mut out = [0.0f64; 2];
            assert_eq!(
                uamnet_coverage_mc(h, ts.as_ptr(), 2, out.as_mut_ptr()),
                UamnetStatus::Ok
            );
            let direct = sim::coverage_mc(&(*h).cfg, &ts).unwrap();
            assert_eq!(out.to_vec(), direct.coverage);
            uamnet_scenario_free(h);
        }
    }
}
