//! C interface to `iopv_core`.
//!
//! Every fallible function returns an [`IopvStatus`] and writes its result
//! through an out pointer. On failure the message is kept per thread and
//! can be fetched with [`iopv_last_error_message`]. Strings handed out by
//! this library are owned by the caller and must be released with
//! [`iopv_string_free`]; handles with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use iopv_core::constraint::CountingConstraint;
use iopv_core::decision::{self, DecisionOptions, Verdict, VerdictKind, Violation};
use iopv_core::error::Error;
use iopv_core::format::{self, ProtocolFile};
use iopv_core::reach::{self, ReachOptions};
use iopv_core::text::{parse_constraint, serialize_constraint};
use iopv_core::tm;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IopvStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidProtocol = 4,
    DimensionMismatch = 5,
    ResourceLimit = 6,
    InvalidMachine = 7,
    Overflow = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IopvVerdictKind {
    WellSpecified = 0,
    IllSpecified = 1,
    Correct = 2,
    Incorrect = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IopvViolation {
    None = 0,
    Condition1 = 1,
    Condition2 = 2,
    WrongValue0 = 3,
    WrongValue1 = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IopvDirection {
    Post = 0,
    Pre = 1,
}

/// A parsed protocol file.
pub struct IopvProtocol {
    file: ProtocolFile,
}

/// Outcome of a well-specification or correctness check.
pub struct IopvVerdict {
    verdict: Verdict,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(IopvStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } | Error::UnknownVariable(_) => IopvStatus::Parse,
            Error::DimensionMismatch { .. } => IopvStatus::DimensionMismatch,
            Error::ResourceLimit { .. } => IopvStatus::ResourceLimit,
            Error::InvalidMachine(_) => IopvStatus::InvalidMachine,
            Error::Overflow => IopvStatus::Overflow,
            Error::UndeclaredState(_)
            | Error::NotImmediateObservation { .. }
            | Error::NoInputs
            | Error::InvalidProtocol(_)
            | Error::InvalidConfiguration(_)
            | Error::MixedTotals(..) => IopvStatus::InvalidProtocol,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IopvStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IopvStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            IopvStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(IopvStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Fail(
            IopvStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(IopvStatus::NullArgument, format!("{what} is null")))
}

fn out_check<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        Err(Fail(
            IopvStatus::NullArgument,
            "output pointer is null".to_string(),
        ))
    } else {
        Ok(())
    }
}

fn into_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("no interior nul")
        .into_raw()
}

fn options(max_minterms: usize) -> DecisionOptions {
    DecisionOptions {
        reach: reach_options(max_minterms),
        ..DecisionOptions::default()
    }
}

fn reach_options(max_minterms: usize) -> ReachOptions {
    if max_minterms == 0 {
        ReachOptions::default()
    } else {
        ReachOptions { max_minterms }
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn iopv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn iopv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn iopv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a protocol in the text file format.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn iopv_protocol_parse(
    text: *const c_char,
    out: *mut *mut IopvProtocol,
) -> IopvStatus {
    guard(|| {
        out_check(out)?;
        let text = str_arg(text, "text")?;
        let file = format::parse_protocol(text)?;
        *out = Box::into_raw(Box::new(IopvProtocol { file }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from [`iopv_protocol_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn iopv_protocol_free(p: *mut IopvProtocol) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of states, or 0 for a null handle.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn iopv_protocol_num_states(p: *const IopvProtocol) -> usize {
    p.as_ref().map_or(0, |p| p.file.protocol.num_states())
}

/// Name of state `index` as a new string, or null when out of range.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn iopv_protocol_state_name(
    p: *const IopvProtocol,
    index: usize,
) -> *mut c_char {
    match p.as_ref().and_then(|p| p.file.protocol.states().get(index)) {
        Some(name) => into_c(name.clone()),
        None => ptr::null_mut(),
    }
}

/// Prints the protocol back in the file format.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn iopv_protocol_print(
    p: *const IopvProtocol,
    out: *mut *mut c_char,
) -> IopvStatus {
    guard(|| {
        out_check(out)?;
        let p = ref_arg(p, "protocol")?;
        *out = into_c(format::print_protocol(
            &p.file.protocol,
            p.file.init_config.as_ref(),
        ));
        Ok(())
    })
}

/// Decides well-specification. `init` is a constraint over the state
/// names, or null for the input configurations (or the file's
/// `init-config`). `max_minterms` of 0 selects the default limit.
///
/// # Safety
/// Pointers must be valid; `init` may be null.
#[no_mangle]
pub unsafe extern "C" fn iopv_check(
    p: *const IopvProtocol,
    init: *const c_char,
    max_minterms: usize,
    out: *mut *mut IopvVerdict,
) -> IopvStatus {
    guard(|| {
        out_check(out)?;
        let p = ref_arg(p, "protocol")?;
        let proto = &p.file.protocol;
        let init = if init.is_null() {
            p.file
                .init_config
                .as_ref()
                .map(|c| {
                    CountingConstraint::from_finite(proto.num_states(), &[c.counts().to_vec()])
                })
                .transpose()?
        } else {
            Some(parse_constraint(str_arg(init, "init")?, proto.states())?)
        };
        let verdict = decision::well_specified(proto, init.as_ref(), &options(max_minterms))?;
        *out = Box::into_raw(Box::new(IopvVerdict { verdict }));
        Ok(())
    })
}

/// Checks that the protocol computes `pred`, a constraint over the input
/// variables.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn iopv_correct(
    p: *const IopvProtocol,
    pred: *const c_char,
    max_minterms: usize,
    out: *mut *mut IopvVerdict,
) -> IopvStatus {
    guard(|| {
        out_check(out)?;
        let p = ref_arg(p, "protocol")?;
        let proto = &p.file.protocol;
        let pred = parse_constraint(str_arg(pred, "pred")?, &proto.input_vars())?;
        let verdict = decision::check_correct(proto, &pred, &options(max_minterms))?;
        *out = Box::into_raw(Box::new(IopvVerdict { verdict }));
        Ok(())
    })
}

/// Forward or backward reachability closure of `from`, serialized one
/// minterm per line (empty string for the empty set).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn iopv_closure(
    p: *const IopvProtocol,
    from: *const c_char,
    dir: IopvDirection,
    max_minterms: usize,
    out: *mut *mut c_char,
) -> IopvStatus {
    guard(|| {
        out_check(out)?;
        let p = ref_arg(p, "protocol")?;
        let proto = &p.file.protocol;
        let g = parse_constraint(str_arg(from, "from")?, proto.states())?;
        let opts = reach_options(max_minterms);
        let r = match dir {
            IopvDirection::Post => reach::post_star(&g, proto.scheme(), &opts)?,
            IopvDirection::Pre => reach::pre_star(&g, proto.scheme(), &opts)?,
        };
        *out = into_c(serialize_constraint(&r.closure, proto.states()));
        Ok(())
    })
}

/// Encodes a Turing machine file as a protocol file with an
/// `init-config`. `input` is a space-separated word, or null to use the
/// machine file's own input line.
///
/// # Safety
/// Pointers must be valid; `input` may be null.
#[no_mangle]
pub unsafe extern "C" fn iopv_tm_generate(
    tm_text: *const c_char,
    input: *const c_char,
    out: *mut *mut c_char,
) -> IopvStatus {
    guard(|| {
        out_check(out)?;
        let machine = format::parse_tm(str_arg(tm_text, "tm_text")?)?;
        let word: Vec<String> = if input.is_null() {
            machine.input.clone().unwrap_or_default()
        } else {
            str_arg(input, "input")?
                .split_whitespace()
                .map(String::from)
                .collect()
        };
        let gi = tm::encode_tm(&machine, &word)?;
        *out = into_c(format::print_protocol(&gi.protocol, Some(&gi.initial)));
        Ok(())
    })
}

/// # Safety
/// `v` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn iopv_verdict_free(v: *mut IopvVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// `v` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iopv_verdict_kind(v: *const IopvVerdict) -> IopvVerdictKind {
    match (*v).verdict.kind {
        VerdictKind::WellSpecified => IopvVerdictKind::WellSpecified,
        VerdictKind::IllSpecified => IopvVerdictKind::IllSpecified,
        VerdictKind::Correct => IopvVerdictKind::Correct,
        VerdictKind::Incorrect => IopvVerdictKind::Incorrect,
    }
}

/// # Safety
/// `v` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iopv_verdict_violation(v: *const IopvVerdict) -> IopvViolation {
    match (*v).verdict.violated {
        None => IopvViolation::None,
        Some(Violation::Condition1) => IopvViolation::Condition1,
        Some(Violation::Condition2) => IopvViolation::Condition2,
        Some(Violation::WrongValue0) => IopvViolation::WrongValue0,
        Some(Violation::WrongValue1) => IopvViolation::WrongValue1,
    }
}

/// Witness over the original states as `name:count` pairs, or null when
/// the verdict is positive.
///
/// # Safety
/// `v` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iopv_verdict_witness(v: *const IopvVerdict) -> *mut c_char {
    let v = &(*v).verdict;
    match v.original_witness() {
        Some(w) => into_c(
            v.original_states
                .iter()
                .zip(&w)
                .filter(|(_, &c)| c > 0)
                .map(|(s, c)| format!("{s}:{c}"))
                .collect::<Vec<_>>()
                .join(" "),
        ),
        None => ptr::null_mut(),
    }
}

/// Same text the command line prints, optionally with statistics.
///
/// # Safety
/// `v` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iopv_verdict_text(v: *const IopvVerdict, with_stats: bool) -> *mut c_char {
    into_c((*v).verdict.display_text(with_stats))
}

/// `key=value` rendering of the verdict.
///
/// # Safety
/// `v` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iopv_verdict_kv(v: *const IopvVerdict, with_stats: bool) -> *mut c_char {
    into_c((*v).verdict.display_kv(with_stats))
}
