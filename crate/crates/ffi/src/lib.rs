//! C ABI over `nvcert`.
//!
//! Every function returns an [`NvcertStatus`]; results go through out
//! pointers. On failure [`nvcert_last_error`] describes the error for the
//! calling thread. Newform sets are opaque and released with
//! [`nvcert_newforms_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nvcert::data::load_newforms;
use nvcert::geometry::{point_count_bound, PointBoundInput};
use nvcert::lseries::{self, NewformRecord, Theorem2Verdict};
use nvcert::moments::{moment_plus_bound, BoundMode, MomentQuery};
use nvcert::rigor::Enclosure;
use nvcert::thresholds::{certify_at, Condition, ConditionKind, Family, Verdict};
use nvcert::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NvcertStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Composite = 3,
    Regime = 4,
    Unsupported = 5,
    Budget = 6,
    Io = 7,
    Schema = 8,
    InsufficientData = 9,
    NotFound = 10,
    Panic = 11,
}

/// Closed interval `[lo, hi]` containing the true value.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NvcertInterval {
    pub lo: f64,
    pub hi: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NvcertFamily {
    X0Plus = 0,
    XnsPlus = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NvcertCondition {
    A1Positive = 0,
    A2Positive = 1,
    Ratio = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NvcertMode {
    First = 0,
    Improved = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NvcertLevelVerdict {
    Theorem2Holds = 0,
    FailsToCertify = 1,
    InsufficientData = 2,
}

/// Opaque set of newform records.
pub struct NvcertNewforms {
    records: Vec<NewformRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NvcertStatus {
    match e {
        Error::Composite(_) => NvcertStatus::Composite,
        Error::Regime { .. } => NvcertStatus::Regime,
        Error::UnsupportedTwist(_) => NvcertStatus::Unsupported,
        Error::Budget { .. } => NvcertStatus::Budget,
        Error::Io { .. } | Error::Fetch { .. } | Error::Integrity { .. } => NvcertStatus::Io,
        Error::Schema { .. } => NvcertStatus::Schema,
        Error::InsufficientData(_) | Error::MissingCoefficient(_) => NvcertStatus::InsufficientData,
        _ => NvcertStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (NvcertStatus, String)>) -> NvcertStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NvcertStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NvcertStatus::Panic
        }
    }
}

fn core<T>(r: nvcert::Result<T>) -> Result<T, (NvcertStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn out<'a, T>(p: *mut T) -> Result<&'a mut T, (NvcertStatus, String)> {
    // SAFETY: callers pass either null or a valid, aligned, writable pointer.
    unsafe { p.as_mut() }.ok_or((NvcertStatus::NullPointer, "null output pointer".into()))
}

fn interval(e: Enclosure) -> NvcertInterval {
    NvcertInterval { lo: e.lo(), hi: e.hi() }
}

fn c_str<'a>(p: *const c_char) -> Result<&'a str, (NvcertStatus, String)> {
    if p.is_null() {
        return Err((NvcertStatus::NullPointer, "null string".into()));
    }
    // SAFETY: non-null and nul-terminated by contract.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| (NvcertStatus::InvalidArgument, "string is not UTF-8".into()))
}

/// Message for the last failure on this thread, or null. Valid until the next
/// call on the same thread.
#[no_mangle]
pub extern "C" fn nvcert_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn nvcert_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `E1(x)` for `x > 0`.
///
/// # Safety
/// `result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nvcert_e1(x: f64, result: *mut NvcertInterval) -> NvcertStatus {
    guard(|| {
        let r = out(result)?;
        *r = interval(core(nvcert::rigor::e1(x))?);
        Ok(())
    })
}

/// `J1(x)` for finite `x ≥ 0`.
///
/// # Safety
/// `result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nvcert_bessel_j1(x: f64, result: *mut NvcertInterval) -> NvcertStatus {
    guard(|| {
        let r = out(result)?;
        if !(x.is_finite() && x >= 0.0) {
            return Err((NvcertStatus::InvalidArgument, format!("J1 needs finite x ≥ 0, got {x}")));
        }
        *r = interval(nvcert::rigor::bessel_j1(x));
        Ok(())
    })
}

/// Kloosterman sum `S(m, n; c)`, `c ≥ 1`.
///
/// # Safety
/// `result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nvcert_kloosterman(m: u64, n: u64, c: u64, result: *mut NvcertInterval) -> NvcertStatus {
    guard(|| {
        let r = out(result)?;
        if c == 0 {
            return Err((NvcertStatus::InvalidArgument, "modulus must be positive".into()));
        }
        *r = interval(nvcert::arith::kloosterman(m, n, c));
        Ok(())
    })
}

/// Closed-form enclosure of the normalized first moment `<a_m, L'>^+_M / 4π`.
///
/// # Safety
/// `result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nvcert_moment_plus_bound(m: u64, level: u64, mode: NvcertMode, result: *mut NvcertInterval) -> NvcertStatus {
    guard(|| {
        let r = out(result)?;
        let q = core(MomentQuery::plus(m, level))?;
        *r = interval(core(moment_plus_bound(&q, mode.into()))?.normalized);
        Ok(())
    })
}

/// Decides one threshold condition at a prime. `certified` is set to 1 or 0.
///
/// # Safety
/// `certified` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nvcert_certify_at(
    family: NvcertFamily,
    condition: NvcertCondition,
    mode: NvcertMode,
    prime: u64,
    certified: *mut bool,
) -> NvcertStatus {
    guard(|| {
        let r = out(certified)?;
        let kind = match condition {
            NvcertCondition::A1Positive => ConditionKind::A1Positive,
            NvcertCondition::A2Positive => ConditionKind::A2Positive,
            NvcertCondition::Ratio => ConditionKind::RatioInUnitInterval,
        };
        let family = match family {
            NvcertFamily::X0Plus => Family::X0plus,
            NvcertFamily::XnsPlus => Family::Xnsplus,
        };
        *r = core(certify_at(Condition { kind, family }, mode.into(), prime))? == Verdict::Certified;
        Ok(())
    })
}

/// Largest possible number of rational points from the explicit bound.
///
/// # Safety
/// `result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nvcert_point_count_bound(p: u64, genus: u64, fp_count: u64, nv_product: u64, result: *mut u64) -> NvcertStatus {
    guard(|| {
        let r = out(result)?;
        *r = core(point_count_bound(&PointBoundInput { p, genus, fp_count, nv_product }))?;
        Ok(())
    })
}

/// Loads a newform JSONL file. Release the handle with [`nvcert_newforms_free`].
///
/// # Safety
/// `path` must be null or a nul-terminated string; `handle` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nvcert_newforms_load(path: *const c_char, handle: *mut *mut NvcertNewforms) -> NvcertStatus {
    guard(|| {
        let h = out(handle)?;
        *h = std::ptr::null_mut();
        let records = core(load_newforms(c_str(path)?))?;
        *h = Box::into_raw(Box::new(NvcertNewforms { records }));
        Ok(())
    })
}

/// Number of records in the set.
///
/// # Safety
/// `handle` must be null or live; `count` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nvcert_newforms_count(handle: *const NvcertNewforms, count: *mut usize) -> NvcertStatus {
    guard(|| {
        let c = out(count)?;
        *c = forms(handle)?.records.len();
        Ok(())
    })
}

/// Releases a handle from [`nvcert_newforms_load`]. Null is ignored.
///
/// # Safety
/// `handle` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nvcert_newforms_free(handle: *mut NvcertNewforms) {
    if !handle.is_null() {
        // SAFETY: handle came from Box::into_raw in nvcert_newforms_load.
        drop(unsafe { Box::from_raw(handle) });
    }
}

fn forms<'a>(handle: *const NvcertNewforms) -> Result<&'a NvcertNewforms, (NvcertStatus, String)> {
    // SAFETY: null or a live handle from nvcert_newforms_load.
    unsafe { handle.as_ref() }.ok_or((NvcertStatus::NullPointer, "null newform handle".into()))
}

/// `L'(f, 1)` for the record with `label` using `truncation` coefficients;
/// 0 means all ingested coefficients.
///
/// # Safety
/// `handle` must be null or live, `label` null or nul-terminated, `result` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nvcert_lprime_at_1(
    handle: *const NvcertNewforms,
    label: *const c_char,
    truncation: usize,
    result: *mut NvcertInterval,
) -> NvcertStatus {
    guard(|| {
        let r = out(result)?;
        let label = c_str(label)?;
        let f = forms(handle)?
            .records
            .iter()
            .find(|f| f.label == label)
            .ok_or((NvcertStatus::NotFound, format!("no record labelled {label}")))?;
        let t = if truncation == 0 { f.coefficients.len() } else { truncation };
        *r = interval(core(lseries::lprime_at_1(f, t))?);
        Ok(())
    })
}

/// Theorem-2 verdict at `level` from the records of that level in the set.
///
/// # Safety
/// `handle` must be null or live; the out pointers null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nvcert_level_verdict(
    handle: *const NvcertNewforms,
    level: u64,
    plus_dimension: u64,
    budget: usize,
    verdict: *mut NvcertLevelVerdict,
    certified_dimension: *mut u64,
) -> NvcertStatus {
    guard(|| {
        let v = out(verdict)?;
        let d = out(certified_dimension)?;
        let records: Vec<NewformRecord> = forms(handle)?.records.iter().filter(|f| f.level == level).cloned().collect();
        let lv = core(lseries::level_verdict(level, &records, plus_dimension, budget))?;
        *v = match lv.verdict {
            Theorem2Verdict::Theorem2Holds => NvcertLevelVerdict::Theorem2Holds,
            Theorem2Verdict::FailsToCertify => NvcertLevelVerdict::FailsToCertify,
            Theorem2Verdict::InsufficientData => NvcertLevelVerdict::InsufficientData,
        };
        *d = lv.certified_dimension;
        Ok(())
    })
}

impl From<NvcertMode> for BoundMode {
    fn from(m: NvcertMode) -> Self {
        match m {
            NvcertMode::First => BoundMode::First,
            NvcertMode::Improved => BoundMode::Improved,
        }
    }
}
