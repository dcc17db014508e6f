//! C ABI for the emq library: opaque machine handles, status codes, and a
//! thread-local last-error message. The header `include/emq.h` is generated
//! by cbindgen at build time.
//!
//! Conventions: constructors write a heap handle through an out-pointer and
//! the caller frees it with [`emq_machine_free`]; strings returned through
//! out-pointers are freed with [`emq_string_free`]; every fallible call
//! returns an [`EmqStatus`] and leaves a message for
//! [`emq_last_error_message`] on failure. Horizons are passed as `int64_t`
//! with `-1` meaning the asymptotic (infinite-horizon) value; orders are
//! returned as `int64_t` with `-1` for infinite and `-2` for undetermined.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use emq::measures::{MeasureOptions, Order};
use emq::pmm::Horizon;
use emq::Error;

/// Opaque handle to a validated machine.
pub struct EmqMachine(emq::EpsilonMachine);

/// Status code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EmqStatus {
    Ok = 0,
    /// A required pointer was null or an argument was malformed.
    InvalidArgument = 1,
    /// The input failed schema or machine validation.
    ValidationFailed = 2,
    /// A numerical invariant was violated.
    InvariantFailed = 3,
    /// A resource cap (horizon or memory budget) was exceeded.
    CapExceeded = 4,
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(err: &Error) -> EmqStatus {
    let message = CString::new(err.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
    match err.exit_code() {
        2 => EmqStatus::ValidationFailed,
        3 => EmqStatus::InvariantFailed,
        4 => EmqStatus::CapExceeded,
        _ => EmqStatus::Internal,
    }
}

fn invalid(message: &str) -> EmqStatus {
    let message = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
    EmqStatus::InvalidArgument
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn emq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn machine_ref<'a>(handle: *const EmqMachine) -> Option<&'a emq::EpsilonMachine> {
    handle.as_ref().map(|h| &h.0)
}

fn emit_machine(out: *mut *mut EmqMachine, machine: emq::EpsilonMachine) -> EmqStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    unsafe { *out = Box::into_raw(Box::new(EmqMachine(machine))) };
    EmqStatus::Ok
}

fn emit_f64(out: *mut f64, value: f64) -> EmqStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    unsafe { *out = value };
    EmqStatus::Ok
}

/// Parses a machine document (UTF-8 JSON) into a validated machine.
///
/// # Safety
/// `json` must be a valid NUL-terminated C string.
#[no_mangle]
pub unsafe extern "C" fn emq_machine_parse_json(
    json: *const c_char,
    out: *mut *mut EmqMachine,
) -> EmqStatus {
    if json.is_null() {
        return invalid("json pointer is null");
    }
    let Ok(text) = CStr::from_ptr(json).to_str() else {
        return invalid("json is not valid UTF-8");
    };
    match emq::parse_machine(text) {
        Ok(m) => emit_machine(out, m),
        Err(e) => fail(&e),
    }
}

/// Builds the two-state alternating biased coins machine.
#[no_mangle]
pub extern "C" fn emq_machine_biased_coins(p: f64, out: *mut *mut EmqMachine) -> EmqStatus {
    match emq::biased_coins(p) {
        Ok(m) => emit_machine(out, m),
        Err(e) => fail(&e),
    }
}

/// Builds the golden-mean generalization with Markov order `r` and cryptic
/// order `k`.
#[no_mangle]
pub extern "C" fn emq_machine_rk_golden_mean(
    r: usize,
    k: usize,
    p: f64,
    out: *mut *mut EmqMachine,
) -> EmqStatus {
    match emq::rk_golden_mean(r, k, p) {
        Ok(m) => emit_machine(out, m),
        Err(e) => fail(&e),
    }
}

/// Builds the three-state infinite-order machine.
#[no_mangle]
pub extern "C" fn emq_machine_nemo(p: f64, out: *mut *mut EmqMachine) -> EmqStatus {
    match emq::nemo(p) {
        Ok(m) => emit_machine(out, m),
        Err(e) => fail(&e),
    }
}

/// Builds a seeded random unifilar machine (minimized before return).
#[no_mangle]
pub extern "C" fn emq_machine_random(
    n_states: usize,
    alphabet_size: usize,
    seed: u64,
    out: *mut *mut EmqMachine,
) -> EmqStatus {
    match emq::random_machine(n_states, alphabet_size, seed) {
        Ok(m) => emit_machine(out, m),
        Err(e) => fail(&e),
    }
}

/// Merges predictively equivalent states into a fresh handle.
///
/// # Safety
/// `machine` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn emq_machine_minimize(
    machine: *const EmqMachine,
    out: *mut *mut EmqMachine,
) -> EmqStatus {
    let Some(m) = machine_ref(machine) else {
        return invalid("machine handle is null");
    };
    emit_machine(out, m.minimize())
}

/// Releases a machine handle. Null is ignored.
///
/// # Safety
/// `machine` must have been produced by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn emq_machine_free(machine: *mut EmqMachine) {
    if !machine.is_null() {
        drop(Box::from_raw(machine));
    }
}

/// Number of states; 0 for a null handle.
///
/// # Safety
/// `machine` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn emq_machine_state_count(machine: *const EmqMachine) -> usize {
    machine_ref(machine).map_or(0, |m| m.state_count())
}

/// Whether predictive-equivalence refinement would merge no states.
///
/// # Safety
/// `machine` must be a live handle or null (null reports false).
#[no_mangle]
pub unsafe extern "C" fn emq_machine_is_minimal(machine: *const EmqMachine) -> bool {
    machine_ref(machine).is_some_and(|m| m.is_minimal())
}

/// Serializes the machine back to document JSON; free with
/// [`emq_string_free`].
///
/// # Safety
/// `machine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emq_machine_to_json(
    machine: *const EmqMachine,
    out: *mut *mut c_char,
) -> EmqStatus {
    let Some(m) = machine_ref(machine) else {
        return invalid("machine handle is null");
    };
    if out.is_null() {
        return invalid("out pointer is null");
    }
    match serde_json::to_string(&m.to_document()) {
        Ok(text) => {
            let c = CString::new(text).unwrap_or_default();
            *out = c.into_raw();
            EmqStatus::Ok
        }
        Err(e) => fail(&Error::Schema(e)),
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must have been produced by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn emq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Shannon entropy of the stationary state distribution, in bits.
///
/// # Safety
/// `machine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emq_statistical_complexity(
    machine: *const EmqMachine,
    out: *mut f64,
) -> EmqStatus {
    let Some(m) = machine_ref(machine) else {
        return invalid("machine handle is null");
    };
    emit_f64(out, emq::measures::statistical_complexity(m))
}

/// Per-symbol entropy rate, in bits.
///
/// # Safety
/// `machine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emq_entropy_rate(machine: *const EmqMachine, out: *mut f64) -> EmqStatus {
    let Some(m) = machine_ref(machine) else {
        return invalid("machine handle is null");
    };
    emit_f64(out, emq::measures::entropy_rate(m))
}

/// Excess entropy with truncation horizon `max_l` (0 picks the per-alphabet
/// default). `out_converged` reports whether the value is exact or a
/// truncated lower bound.
///
/// # Safety
/// `machine` must be a live handle; out-pointers must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn emq_excess_entropy(
    machine: *const EmqMachine,
    tol: f64,
    max_l: usize,
    out_bits: *mut f64,
    out_converged: *mut bool,
) -> EmqStatus {
    let Some(m) = machine_ref(machine) else {
        return invalid("machine handle is null");
    };
    let max_l = if max_l == 0 {
        emq::measures::default_excess_max_l(m.alphabet().len())
    } else {
        max_l
    };
    match emq::excess_entropy(m, tol, max_l) {
        Ok((bits, status)) => {
            if !out_converged.is_null() {
                *out_converged = matches!(status, emq::EStatus::Converged { .. });
            }
            emit_f64(out_bits, bits)
        }
        Err(e) => fail(&e),
    }
}

fn order_to_i64(order: Order) -> i64 {
    match order {
        Order::Finite(k) => k as i64,
        Order::Infinite => -1,
        Order::Unknown { .. } => -2,
    }
}

/// Markov order: smallest history length that determines the state.
/// Writes -1 for infinite, -2 for undetermined within budget.
///
/// # Safety
/// `machine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emq_markov_order(machine: *const EmqMachine, out: *mut i64) -> EmqStatus {
    let Some(m) = machine_ref(machine) else {
        return invalid("machine handle is null");
    };
    if out.is_null() {
        return invalid("out pointer is null");
    }
    *out = order_to_i64(emq::markov_order(m, emq::measures::SUBSET_NODE_BUDGET));
    EmqStatus::Ok
}

/// Cryptic order: depth of the last pair merger. Writes -1 for infinite.
///
/// # Safety
/// `machine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emq_cryptic_order(machine: *const EmqMachine, out: *mut i64) -> EmqStatus {
    let Some(m) = machine_ref(machine) else {
        return invalid("machine handle is null");
    };
    if out.is_null() {
        return invalid("out pointer is null");
    }
    let pmm = emq::PairMergerMachine::build(m);
    *out = order_to_i64(pmm.cryptic_order());
    EmqStatus::Ok
}

/// Quantum compression value at horizon `l` (`-1` for the asymptotic
/// value), in bits, via the pairwise-merger route.
///
/// # Safety
/// `machine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emq_cq(machine: *const EmqMachine, l: i64, out: *mut f64) -> EmqStatus {
    let Some(m) = machine_ref(machine) else {
        return invalid("machine handle is null");
    };
    let horizon = if l < 0 {
        Horizon::Asymptotic
    } else {
        Horizon::Finite(l as usize)
    };
    match emq::cq(m, horizon) {
        Ok(v) => emit_f64(out, v),
        Err(e) => fail(&e),
    }
}

/// Brute-force oracle for the compression value at finite horizon `l`.
/// Subject to the word-space and memory caps.
///
/// # Safety
/// `machine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emq_cq_bruteforce(
    machine: *const EmqMachine,
    l: usize,
    out: *mut f64,
) -> EmqStatus {
    let Some(m) = machine_ref(machine) else {
        return invalid("machine handle is null");
    };
    match emq::cq_bruteforce(m, l) {
        Ok(v) => emit_f64(out, v),
        Err(e) => fail(&e),
    }
}

/// Full classical measure report as flat JSON; free with
/// [`emq_string_free`].
///
/// # Safety
/// `machine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emq_measure_report_json(
    machine: *const EmqMachine,
    out: *mut *mut c_char,
) -> EmqStatus {
    let Some(m) = machine_ref(machine) else {
        return invalid("machine handle is null");
    };
    if out.is_null() {
        return invalid("out pointer is null");
    }
    match emq::measure_report(m, MeasureOptions::default())
        .and_then(|r| serde_json::to_string(&r).map_err(Error::Schema))
    {
        Ok(text) => {
            let c = CString::new(text).unwrap_or_default();
            *out = c.into_raw();
            EmqStatus::Ok
        }
        Err(e) => fail(&e),
    }
}
