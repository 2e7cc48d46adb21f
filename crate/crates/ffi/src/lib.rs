//! C ABI over `fpa-core`.
//!
//! Objects cross the boundary as opaque handles created by `fpa_*_new` or
//! `fpa_*_from_*` calls and released by the matching `fpa_*_free`. Every
//! fallible call returns an [`FpaStatus`]; on failure the message is
//! available from [`fpa_last_error`] on the same thread. Strings returned
//! through `char **` out-parameters are owned by the caller and released with
//! [`fpa_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fpa_core::dynamics::{classify_convergence, Outcome};
use fpa_core::equilibrium::{brute_force_nash_with_limit, enumerate_pure_nash_with_limit, DEFAULT_PROFILE_LIMIT};
use fpa_core::output::RunDocument;
use fpa_core::{derive_run_seed, expected_utility, is_nash, BidProfile, Error, EquilibriumSet, RunConfig, RunRecord, ValueProfile};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpaStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Bad argument: bid outside its bid set, index out of range, bad UTF-8.
    Domain = 2,
    /// Invalid run or learner configuration.
    Config = 3,
    /// An enumeration would exceed its profile guard.
    Capacity = 4,
    /// A result does not fit the requested output type.
    Overflow = 5,
    /// Internal error; the message names it.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpaMethod {
    /// Closed-form characterization.
    Closed = 0,
    /// Exhaustive deviation check.
    Brute = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpaOutcome {
    VMinusOne = 0,
    VMinusTwo = 1,
    NotConverged = 2,
}

/// Opaque set of pure equilibria.
pub struct FpaEquilibria {
    n: usize,
    set: EquilibriumSet,
}

/// Opaque run configuration.
pub struct FpaRunConfig {
    config: RunConfig,
}

/// Opaque finished run.
pub struct FpaRecord {
    record: RunRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: FpaStatus, msg: impl Into<String>) -> FpaStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> FpaStatus {
    let status = match e {
        Error::Capacity { .. } => FpaStatus::Capacity,
        Error::Config(_) | Error::UnknownExperiment(_) => FpaStatus::Config,
        Error::Domain(_) | Error::Io(_) => FpaStatus::Domain,
    };
    fail(status, e.to_string())
}

/// Run `f`, turning panics into [`FpaStatus::Panic`].
fn guard(f: impl FnOnce() -> FpaStatus) -> FpaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(FpaStatus::Panic, msg)
        }
    }
}

macro_rules! check_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(FpaStatus::NullPointer, concat!("null pointer: ", stringify!($p)));
        })+
    };
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return from_error(e),
        }
    };
}

/// # Safety
/// `ptr` must point to `len` readable values unless `len` is 0.
unsafe fn slice<'a, T>(ptr: *const T, len: usize) -> &'a [T] {
    if len == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(ptr, len)
    }
}

fn into_c_string(s: String, out: *mut *mut c_char) -> FpaStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: callers check `out` for null first.
            unsafe { *out = c.into_raw() };
            FpaStatus::Ok
        }
        Err(_) => fail(FpaStatus::Domain, "string contains a NUL byte"),
    }
}

/// Last error message on this thread, or null. Valid until the next failing
/// call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn fpa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fpa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Seed of run `index` of a batch with master seed `master`.
#[no_mangle]
pub extern "C" fn fpa_derive_run_seed(master: u64, index: u64) -> u64 {
    derive_run_seed(master, index)
}

/// Whether `bids` is a pure Nash equilibrium for `values` (both length `n`).
///
/// # Safety
/// `values` and `bids` must point to `n` readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fpa_is_nash(values: *const u32, bids: *const u32, n: usize, out: *mut bool) -> FpaStatus {
    check_null!(values, bids, out);
    guard(|| {
        let values = tri!(ValueProfile::new(slice(values, n).to_vec()));
        let profile = tri!(BidProfile::new(slice(bids, n).to_vec(), &values));
        *out = is_nash(&profile, &values);
        FpaStatus::Ok
    })
}

/// Expected utility of `bidder` bidding `bid` against the other bidders'
/// bids `others` (length `n - 1`, in bidder order), as an exact fraction.
///
/// # Safety
/// `values` must point to `n` values and `others` to `n - 1`; `num` and
/// `den` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpa_expected_utility(
    values: *const u32,
    n: usize,
    bidder: usize,
    bid: u32,
    others: *const u32,
    num: *mut i64,
    den: *mut i64,
) -> FpaStatus {
    check_null!(values, num, den);
    if n > 1 {
        check_null!(others);
    }
    guard(|| {
        let values = tri!(ValueProfile::new(slice(values, n).to_vec()));
        let others = slice(others, n.saturating_sub(1));
        let u = tri!(expected_utility(bidder, bid, others, &values));
        match (i64::try_from(*u.numer()), i64::try_from(*u.denom())) {
            (Ok(a), Ok(b)) => {
                *num = a;
                *den = b;
                FpaStatus::Ok
            }
            _ => fail(FpaStatus::Overflow, "utility does not fit in 64-bit integers"),
        }
    })
}

/// Pure equilibria of `values` (length `n`). `limit` caps the number of
/// profiles visited; 0 selects the default.
///
/// # Safety
/// `values` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpa_equilibria_new(
    values: *const u32,
    n: usize,
    method: FpaMethod,
    limit: u64,
    out: *mut *mut FpaEquilibria,
) -> FpaStatus {
    check_null!(values, out);
    guard(|| {
        let values = tri!(ValueProfile::new(slice(values, n).to_vec()));
        let limit = if limit == 0 { DEFAULT_PROFILE_LIMIT } else { limit as u128 };
        let set = match method {
            FpaMethod::Closed => tri!(enumerate_pure_nash_with_limit(&values, limit)),
            FpaMethod::Brute => tri!(brute_force_nash_with_limit(&values, limit)),
        };
        *out = Box::into_raw(Box::new(FpaEquilibria { n, set }));
        FpaStatus::Ok
    })
}

/// Number of profiles in the set.
///
/// # Safety
/// `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpa_equilibria_len(set: *const FpaEquilibria) -> usize {
    set.as_ref().map_or(0, |s| s.set.len())
}

/// Copy profile `index` (in ascending lexicographic order) into `bids`,
/// which must hold `n` values.
///
/// # Safety
/// `set` must be a live handle and `bids` writable for `n` values.
#[no_mangle]
pub unsafe extern "C" fn fpa_equilibria_get(set: *const FpaEquilibria, index: usize, bids: *mut u32, n: usize) -> FpaStatus {
    check_null!(set, bids);
    let s = &*set;
    if n != s.n {
        return fail(FpaStatus::Domain, format!("buffer holds {n} bids, profiles have {}", s.n));
    }
    let Some(p) = s.set.profiles().get(index) else {
        return fail(FpaStatus::Domain, format!("index {index} out of range"));
    };
    std::slice::from_raw_parts_mut(bids, n).copy_from_slice(p.bids());
    FpaStatus::Ok
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fpa_equilibria_free(set: *mut FpaEquilibria) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Parse a run configuration from JSON (the `config` object of run.json).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpa_run_config_from_json(json: *const c_char, out: *mut *mut FpaRunConfig) -> FpaStatus {
    check_null!(json, out);
    guard(|| {
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(FpaStatus::Domain, "configuration is not UTF-8");
        };
        let config: RunConfig = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(e) => return fail(FpaStatus::Config, format!("run configuration: {e}")),
        };
        tri!(config.validate());
        *out = Box::into_raw(Box::new(FpaRunConfig { config }));
        FpaStatus::Ok
    })
}

/// Serialize a run configuration to JSON. Free the result with
/// [`fpa_string_free`].
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpa_run_config_to_json(config: *const FpaRunConfig, out: *mut *mut c_char) -> FpaStatus {
    check_null!(config, out);
    guard(|| match serde_json::to_string(&(*config).config) {
        Ok(s) => into_c_string(s, out),
        Err(e) => fail(FpaStatus::Panic, e.to_string()),
    })
}

/// Replace the seed of a configuration.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpa_run_config_set_seed(config: *mut FpaRunConfig, seed: u64) -> FpaStatus {
    check_null!(config);
    (*config).config.seed = seed;
    FpaStatus::Ok
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fpa_run_config_free(config: *mut FpaRunConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Play the configured run.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpa_run(config: *const FpaRunConfig, out: *mut *mut FpaRecord) -> FpaStatus {
    check_null!(config, out);
    guard(|| {
        let record = tri!(fpa_core::run((*config).config.clone()));
        *out = Box::into_raw(Box::new(FpaRecord { record }));
        FpaStatus::Ok
    })
}

/// # Safety
/// `record` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpa_record_rounds(record: *const FpaRecord) -> u64 {
    record.as_ref().map_or(0, |r| r.record.rounds())
}

/// # Safety
/// `record` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpa_record_bidders(record: *const FpaRecord) -> usize {
    record.as_ref().map_or(0, |r| r.record.n())
}

/// Copy the bids of round `t` (1-based) into `bids`, which holds `n` values.
///
/// # Safety
/// `record` must be a live handle and `bids` writable for `n` values.
#[no_mangle]
pub unsafe extern "C" fn fpa_record_bids(record: *const FpaRecord, t: u64, bids: *mut u32, n: usize) -> FpaStatus {
    check_null!(record, bids);
    let r = &(*record).record;
    if n != r.n() {
        return fail(FpaStatus::Domain, format!("buffer holds {n} bids, the run has {} bidders", r.n()));
    }
    if t == 0 || t > r.rounds() {
        return fail(FpaStatus::Domain, format!("round {t} outside 1..={}", r.rounds()));
    }
    std::slice::from_raw_parts_mut(bids, n).copy_from_slice(r.profile(t));
    FpaStatus::Ok
}

/// Terminal frequency of `bid` for `bidder`.
///
/// # Safety
/// `record` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpa_record_frequency(record: *const FpaRecord, bidder: usize, bid: u32, out: *mut f64) -> FpaStatus {
    check_null!(record, out);
    let r = &(*record).record;
    if bidder >= r.n() || !r.config.values.contains_bid(bidder, bid) {
        return fail(FpaStatus::Domain, format!("bid {bid} of bidder {bidder} out of range"));
    }
    *out = r.stats.f(bidder, bid);
    FpaStatus::Ok
}

/// Verdict for the first top-value bidder at `threshold`.
///
/// # Safety
/// `record` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpa_record_verdict(record: *const FpaRecord, threshold: f64, out: *mut FpaOutcome) -> FpaStatus {
    check_null!(record, out);
    guard(|| {
        let r = &(*record).record;
        let bidder = r.config.values.top_group()[0];
        let v = tri!(classify_convergence(r, bidder, threshold));
        *out = match v.outcome {
            Outcome::ToHighMinusOne => FpaOutcome::VMinusOne,
            Outcome::ToHighMinusTwo => FpaOutcome::VMinusTwo,
            Outcome::NotConverged => FpaOutcome::NotConverged,
        };
        FpaStatus::Ok
    })
}

/// The run.json document of a record, without a verdict. Free the result
/// with [`fpa_string_free`].
///
/// # Safety
/// `record` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpa_record_to_json(record: *const FpaRecord, out: *mut *mut c_char) -> FpaStatus {
    check_null!(record, out);
    guard(|| {
        let doc = RunDocument::new(&(*record).record, None);
        into_c_string(tri!(doc.to_json()), out)
    })
}

/// # Safety
/// `record` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fpa_record_free(record: *mut FpaRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}
