//! C ABI over `omega-lab`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_parse`
//! functions and released by the matching `*_free`. Every fallible call
//! returns an [`OmegaLabStatus`]; on failure [`omega_lab_last_error`] holds a
//! message for the calling thread. Strings returned through out-pointers are
//! owned by the caller and released with [`omega_lab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use omega_lab::beta::exhaustive_equivalence;
use omega_lab::machine::{as_left_ce, sum_left_ce, GeneratorConfig, MachineTable};
use omega_lab::randomness::{brute_force_miss_measure, exact_miss_measure, BlockFamily};
use omega_lab::reduction::eventual_correctness;
use omega_lab::series::{lemma33_partition, Epsilon, RedundancyFunction, SeriesError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaLabStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    EpsilonBelowOne = 4,
    Computation = 5,
}

/// A prefix-free machine table.
pub struct OmegaLabMachine {
    table: MachineTable,
}

/// A redundancy function `g`.
pub struct OmegaLabRedundancy {
    g: RedundancyFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl ToString) {
    let msg = CString::new(msg.to_string().replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: OmegaLabStatus, msg: impl ToString) -> OmegaLabStatus {
    set_error(msg);
    status
}

fn series_status(e: SeriesError) -> OmegaLabStatus {
    let status = match e {
        SeriesError::EpsilonBelowOne(_) => OmegaLabStatus::EpsilonBelowOne,
        SeriesError::Parse(_) => OmegaLabStatus::Parse,
        _ => OmegaLabStatus::Computation,
    };
    fail(status, e)
}

/// # Safety
/// `s` is null or a valid nul-terminated string.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, OmegaLabStatus> {
    if s.is_null() {
        return Err(fail(OmegaLabStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(OmegaLabStatus::InvalidUtf8, e))
}

/// # Safety
/// `out` is null or valid for writes.
unsafe fn write_out<T>(out: *mut T, value: T) -> OmegaLabStatus {
    if out.is_null() {
        return fail(OmegaLabStatus::NullArgument, "null output pointer");
    }
    out.write(value);
    OmegaLabStatus::Ok
}

fn to_c_string(s: impl ToString) -> *mut c_char {
    CString::new(s.to_string())
        .expect("reports contain no nul bytes")
        .into_raw()
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! handle {
    ($p:expr) => {
        match $p.as_ref() {
            Some(h) => h,
            None => return fail(OmegaLabStatus::NullArgument, "null handle"),
        }
    };
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn omega_lab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn omega_lab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn omega_lab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a machine table, one `program halt-time` pair per line.
///
/// # Safety
/// `text` is a nul-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_lab_machine_parse(
    text: *const c_char,
    out: *mut *mut OmegaLabMachine,
) -> OmegaLabStatus {
    let text = try_status!(read_str(text));
    match text.parse::<MachineTable>() {
        Ok(table) => write_out(out, Box::into_raw(Box::new(OmegaLabMachine { table }))),
        Err(e) => fail(OmegaLabStatus::Parse, e),
    }
}

/// A random machine table from `seed` with the default generator settings.
#[no_mangle]
pub extern "C" fn omega_lab_machine_random(seed: u64) -> *mut OmegaLabMachine {
    let table = MachineTable::random(seed, &GeneratorConfig::default());
    Box::into_raw(Box::new(OmegaLabMachine { table }))
}

/// # Safety
/// `m` is null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn omega_lab_machine_free(m: *mut OmegaLabMachine) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Halting probability of the table as an exact `a/2^k` string.
///
/// # Safety
/// `m` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_lab_machine_omega(
    m: *const OmegaLabMachine,
    out: *mut *mut c_char,
) -> OmegaLabStatus {
    let m = handle!(m);
    write_out(out, to_c_string(m.table.kraft_sum()))
}

/// Redundancy function by name: `log`, `h_eps`, `h_star` or `adversarial`.
/// `eps` is read for `h_eps` and `h_star` and may be null otherwise.
///
/// # Safety
/// `kind` is a nul-terminated string; `eps` is null or one; `out` is valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_lab_redundancy_new(
    kind: *const c_char,
    eps: *const c_char,
    out: *mut *mut OmegaLabRedundancy,
) -> OmegaLabStatus {
    let kind = try_status!(read_str(kind));
    let eps = || -> Result<Epsilon, OmegaLabStatus> {
        read_str(eps)?.parse().map_err(series_status)
    };
    let g = match kind {
        "log" => RedundancyFunction::log(),
        "h_eps" => RedundancyFunction::h_eps(try_status!(eps())),
        "h_star" => RedundancyFunction::h_star(try_status!(eps())),
        "adversarial" => RedundancyFunction::Adversarial,
        other => return fail(OmegaLabStatus::Parse, format!("unknown redundancy function {other:?}")),
    };
    write_out(out, Box::into_raw(Box::new(OmegaLabRedundancy { g })))
}

/// # Safety
/// `g` is null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn omega_lab_redundancy_free(g: *mut OmegaLabRedundancy) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Certified `floor(n + g(n))`, the oracle use bound at `n`.
///
/// # Safety
/// `g` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_lab_use_bound(
    g: *const OmegaLabRedundancy,
    n: u64,
    out: *mut u64,
) -> OmegaLabStatus {
    let g = handle!(g);
    match g.g.floor_eval(n) {
        Ok(v) => write_out(out, v),
        Err(e) => series_status(e),
    }
}

/// Least `n0` from which the reduction of `alpha = Omega_u` to
/// `Omega = Omega_u + Omega_v` is correct through `n_max`. The two tables
/// together must have Kraft sum below 1.
///
/// # Safety
/// All handles are live; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_lab_reduce_threshold(
    u: *const OmegaLabMachine,
    v: *const OmegaLabMachine,
    g: *const OmegaLabRedundancy,
    n_max: u64,
    max_stage: u64,
    out: *mut u64,
) -> OmegaLabStatus {
    let (u, v, g) = (handle!(u), handle!(v), handle!(g));
    let alpha = as_left_ce(&u.table);
    let omega = match sum_left_ce(&alpha, &as_left_ce(&v.table)) {
        Ok(o) => o,
        Err(e) => return fail(OmegaLabStatus::Computation, e),
    };
    match eventual_correctness(&alpha, &omega, &g.g, n_max, max_stage) {
        Ok(r) => write_out(out, r.threshold),
        Err(e) => fail(OmegaLabStatus::Computation, e),
    }
}

/// Miss measure of a block family (`positions ; bits` per line), by the
/// product formula and by enumeration, both as exact `a/2^k` strings.
///
/// # Safety
/// `blocks` is a nul-terminated string; both outputs are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_lab_miss_measure(
    blocks: *const c_char,
    exact: *mut *mut c_char,
    brute_force: *mut *mut c_char,
) -> OmegaLabStatus {
    let text = try_status!(read_str(blocks));
    if exact.is_null() || brute_force.is_null() {
        return fail(OmegaLabStatus::NullArgument, "null output pointer");
    }
    let family: BlockFamily = match text.parse() {
        Ok(f) => f,
        Err(e) => return fail(OmegaLabStatus::Parse, e),
    };
    let enumerated = match brute_force_miss_measure(&family) {
        Ok(m) => m,
        Err(e) => return fail(OmegaLabStatus::Computation, e),
    };
    exact.write(to_c_string(exact_miss_measure(&family)));
    brute_force.write(to_c_string(enumerated));
    OmegaLabStatus::Ok
}

/// Exhaustive check of the prediction equivalence over all prefixes of
/// `length` bits, on the default partition for `g`, with cutoff `cutoff`.
///
/// # Safety
/// `g` is a live handle; both outputs are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_lab_beta_exhaustive(
    g: *const OmegaLabRedundancy,
    length: usize,
    cutoff: usize,
    counterexamples: *mut u64,
    qualifying: *mut u64,
) -> OmegaLabStatus {
    let g = handle!(g);
    if counterexamples.is_null() || qualifying.is_null() {
        return fail(OmegaLabStatus::NullArgument, "null output pointer");
    }
    let t = match lemma33_partition(length + 2) {
        Ok(t) => t,
        Err(e) => return series_status(e),
    };
    match exhaustive_equivalence(&t, &g.g, cutoff, length) {
        Ok(r) => {
            counterexamples.write(r.counterexamples);
            qualifying.write(r.qualifying);
            OmegaLabStatus::Ok
        }
        Err(e) => fail(OmegaLabStatus::Computation, e),
    }
}
