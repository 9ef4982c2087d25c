//! C ABI for the gsn-forge assurance-case library.
//!
//! The surface is a small set of `gsnf_`-prefixed entry points over opaque
//! graph handles. Ownership rules:
//!
//! * Graphs written through `out_graph` pointers belong to the caller and
//!   must be released with [`gsnf_graph_free`].
//! * Strings returned as `*mut c_char` belong to the caller and must be
//!   released with [`gsnf_string_free`]. They are NUL-terminated UTF-8.
//!
//! Fallible entry points return a [`GsnfStatus`]; string-returning entry
//! points signal failure with a null pointer. In both cases
//! [`gsnf_last_error`] yields a thread-local message describing the most
//! recent failure. The message pointer stays valid until the next call
//! into this library on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Display;
use std::ptr;

use gsn_forge::instantiate::{instantiate, BindingPlan, InstantiateOptions};
use gsn_forge::metrics::score_all;
use gsn_forge::prose::{self, ProseMode};
use gsn_forge::validate::{validate, Profile};
use gsn_forge::{dot, predicate, GsnGraph};

/// Opaque assurance-case graph handle.
pub struct GsnfGraph(GsnGraph);

/// Result code for fallible entry points.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsnfStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An input string was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The input text could not be parsed.
    ParseFailed = 3,
    /// The graph could not be rendered in the requested format.
    RenderFailed = 4,
    /// The binding plan was malformed or did not fit the pattern.
    PlanFailed = 5,
}

/// Validation profile selector.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsnfProfile {
    /// Instantiated assurance case: pattern machinery is forbidden.
    Case = 0,
    /// Assurance-case pattern: pattern machinery is required.
    Pattern = 1,
}

/// Prose parser strictness.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsnfProseMode {
    /// Reject any deviation from the canonical prose shape.
    Strict = 0,
    /// Repair common deviations and record them as anomalies.
    Lenient = 1,
}

/// Similarity scores between two texts, each in [0, 1].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct GsnfScores {
    pub exact_match: f64,
    pub bleu: f64,
    pub tfidf_cosine: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn store_error(message: impl Display) {
    // NUL bytes are stripped so the CString conversion is total.
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(text).expect("NUL bytes were stripped"));
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn give_string(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .expect("NUL bytes were stripped")
        .into_raw()
}

/// Reads a caller string, recording the failure on null or invalid UTF-8.
///
/// # Safety
/// A non-null `text` must point to a NUL-terminated buffer that outlives
/// the call.
unsafe fn read_utf8<'a>(text: *const c_char, name: &str) -> Result<&'a str, GsnfStatus> {
    if text.is_null() {
        store_error(format!("{name} is null"));
        return Err(GsnfStatus::NullArgument);
    }
    match unsafe { CStr::from_ptr(text) }.to_str() {
        Ok(s) => Ok(s),
        Err(_) => {
            store_error(format!("{name} is not valid UTF-8"));
            Err(GsnfStatus::InvalidUtf8)
        }
    }
}

/// Message for the most recent failure on the calling thread, or null if
/// the last call succeeded. Do not free; the pointer is valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn gsnf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |message| message.as_ptr())
    })
}

/// Parses predicate text into a graph and writes the handle to
/// `out_graph`. Parser warnings are discarded at this boundary; use the
/// CLI when diagnostics matter.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out_graph` a valid
/// location to write one pointer.
#[no_mangle]
pub unsafe extern "C" fn gsnf_parse_predicate(
    text: *const c_char,
    out_graph: *mut *mut GsnfGraph,
) -> GsnfStatus {
    if out_graph.is_null() {
        store_error("out_graph is null");
        return GsnfStatus::NullArgument;
    }
    let text = match unsafe { read_utf8(text, "text") } {
        Ok(text) => text,
        Err(status) => return status,
    };
    match predicate::parse_document(text) {
        Ok(outcome) => {
            clear_error();
            unsafe { *out_graph = Box::into_raw(Box::new(GsnfGraph(outcome.graph))) };
            GsnfStatus::Ok
        }
        Err(error) => {
            store_error(error);
            GsnfStatus::ParseFailed
        }
    }
}

/// Parses prose text into a graph and writes the handle to `out_graph`.
/// Lenient-mode anomalies are discarded at this boundary.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out_graph` a valid
/// location to write one pointer.
#[no_mangle]
pub unsafe extern "C" fn gsnf_parse_prose(
    text: *const c_char,
    mode: GsnfProseMode,
    out_graph: *mut *mut GsnfGraph,
) -> GsnfStatus {
    if out_graph.is_null() {
        store_error("out_graph is null");
        return GsnfStatus::NullArgument;
    }
    let text = match unsafe { read_utf8(text, "text") } {
        Ok(text) => text,
        Err(status) => return status,
    };
    let mode = match mode {
        GsnfProseMode::Strict => ProseMode::Strict,
        GsnfProseMode::Lenient => ProseMode::Lenient,
    };
    match prose::parse_prose(text, mode) {
        Ok(outcome) => {
            clear_error();
            unsafe { *out_graph = Box::into_raw(Box::new(GsnfGraph(outcome.graph))) };
            GsnfStatus::Ok
        }
        Err(error) => {
            store_error(error);
            GsnfStatus::ParseFailed
        }
    }
}

/// Renders a graph as canonical predicate text. Returns null when `graph`
/// is null.
///
/// # Safety
/// A non-null `graph` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gsnf_serialize_predicate(graph: *const GsnfGraph) -> *mut c_char {
    let Some(graph) = (unsafe { graph.as_ref() }) else {
        store_error("graph is null");
        return ptr::null_mut();
    };
    clear_error();
    give_string(predicate::serialize(&graph.0))
}

/// Renders a graph as prose. Returns null when `graph` is null or the
/// graph has no prose form (for example, multiple roots).
///
/// # Safety
/// A non-null `graph` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gsnf_render_prose(graph: *const GsnfGraph) -> *mut c_char {
    let Some(graph) = (unsafe { graph.as_ref() }) else {
        store_error("graph is null");
        return ptr::null_mut();
    };
    match prose::render_prose(&graph.0) {
        Ok(text) => {
            clear_error();
            give_string(text)
        }
        Err(error) => {
            store_error(error);
            ptr::null_mut()
        }
    }
}

/// Renders a graph as Graphviz DOT. Returns null when `graph` is null.
///
/// # Safety
/// A non-null `graph` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gsnf_render_dot(graph: *const GsnfGraph) -> *mut c_char {
    let Some(graph) = (unsafe { graph.as_ref() }) else {
        store_error("graph is null");
        return ptr::null_mut();
    };
    clear_error();
    give_string(dot::render_dot(&graph.0))
}

/// Returns the graph's element, relationship, placeholder, and decorator
/// counts as a JSON document. Returns null when `graph` is null.
///
/// # Safety
/// A non-null `graph` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gsnf_count_summary_json(graph: *const GsnfGraph) -> *mut c_char {
    let Some(graph) = (unsafe { graph.as_ref() }) else {
        store_error("graph is null");
        return ptr::null_mut();
    };
    match serde_json::to_string_pretty(&graph.0.count_summary()) {
        Ok(json) => {
            clear_error();
            give_string(json)
        }
        Err(error) => {
            store_error(error);
            ptr::null_mut()
        }
    }
}

/// Validates a graph under the given profile and returns the full report
/// (profile, diagnostics, severities) as a JSON document. A report with
/// findings is still a successful call; inspect the JSON. Returns null
/// only when `graph` is null.
///
/// # Safety
/// A non-null `graph` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gsnf_validate_json(
    graph: *const GsnfGraph,
    profile: GsnfProfile,
) -> *mut c_char {
    let Some(graph) = (unsafe { graph.as_ref() }) else {
        store_error("graph is null");
        return ptr::null_mut();
    };
    let profile = match profile {
        GsnfProfile::Case => Profile::Case,
        GsnfProfile::Pattern => Profile::Pattern,
    };
    let report = validate(&graph.0, profile);
    match serde_json::to_string_pretty(&report) {
        Ok(json) => {
            clear_error();
            give_string(json)
        }
        Err(error) => {
            store_error(error);
            ptr::null_mut()
        }
    }
}

/// Expands a pattern into a case under a JSON binding plan and writes the
/// handle to `out_graph`.
///
/// # Safety
/// A non-null `pattern` must be a live handle from this library,
/// `plan_json` a valid NUL-terminated string, and `out_graph` a valid
/// location to write one pointer.
#[no_mangle]
pub unsafe extern "C" fn gsnf_instantiate(
    pattern: *const GsnfGraph,
    plan_json: *const c_char,
    out_graph: *mut *mut GsnfGraph,
) -> GsnfStatus {
    if out_graph.is_null() {
        store_error("out_graph is null");
        return GsnfStatus::NullArgument;
    }
    let Some(pattern) = (unsafe { pattern.as_ref() }) else {
        store_error("pattern is null");
        return GsnfStatus::NullArgument;
    };
    let plan_json = match unsafe { read_utf8(plan_json, "plan_json") } {
        Ok(text) => text,
        Err(status) => return status,
    };
    let plan = match BindingPlan::from_json(plan_json) {
        Ok(plan) => plan,
        Err(error) => {
            store_error(error);
            return GsnfStatus::PlanFailed;
        }
    };
    match instantiate(&pattern.0, &plan, &InstantiateOptions::default()) {
        Ok(case) => {
            clear_error();
            unsafe { *out_graph = Box::into_raw(Box::new(GsnfGraph(case))) };
            GsnfStatus::Ok
        }
        Err(error) => {
            store_error(error);
            GsnfStatus::PlanFailed
        }
    }
}

/// Scores `candidate` against `reference` and writes the three similarity
/// metrics to `out_scores`.
///
/// # Safety
/// `candidate` and `reference` must be valid NUL-terminated strings and
/// `out_scores` a valid location to write one [`GsnfScores`].
#[no_mangle]
pub unsafe extern "C" fn gsnf_score(
    candidate: *const c_char,
    reference: *const c_char,
    out_scores: *mut GsnfScores,
) -> GsnfStatus {
    if out_scores.is_null() {
        store_error("out_scores is null");
        return GsnfStatus::NullArgument;
    }
    let candidate = match unsafe { read_utf8(candidate, "candidate") } {
        Ok(text) => text,
        Err(status) => return status,
    };
    let reference = match unsafe { read_utf8(reference, "reference") } {
        Ok(text) => text,
        Err(status) => return status,
    };
    let scores = score_all(candidate, reference);
    clear_error();
    unsafe {
        *out_scores = GsnfScores {
            exact_match: scores.exact_match,
            bleu: scores.bleu,
            tfidf_cosine: scores.tfidf_cosine,
        };
    }
    GsnfStatus::Ok
}

/// Releases a graph handle. Null is a no-op.
///
/// # Safety
/// A non-null `graph` must be a live handle from this library; it must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gsnf_graph_free(graph: *mut GsnfGraph) {
    if !graph.is_null() {
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// A non-null `text` must have been returned by this library; it must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gsnf_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}
