// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! C ABI over a tracelight data directory.
//!
//! Every entry point returns a [`TlStatus`]. On failure a description is kept
//! per thread and can be read with [`tl_last_error_message`]. Strings handed
//! out by the library are NUL-terminated JSON and must be released with
//! [`tl_string_free`]; engines are released with [`tl_engine_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use tracelight::corpus::Corpus;
use tracelight::groups::GroupId;
use tracelight::parser::{self, FormatHint, RawReport};
use tracelight::store::{self, Store, StoreOptions};
use tracelight::view::{self, IngestResponse, StatsView};
use tracelight::{Error, SubsystemRule};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    InvalidArgument = 1,
    EmptyReport = 2,
    UnrecognizedFormat = 3,
    ParseError = 4,
    InvalidK = 5,
    UnknownGroup = 6,
    IndexOutOfRange = 7,
    Locked = 8,
    ReadOnly = 9,
    IoFailure = 10,
    Corrupt = 11,
    Panic = 99,
}

impl From<&Error> for TlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::EmptyReport => TlStatus::EmptyReport,
            Error::UnrecognizedFormat => TlStatus::UnrecognizedFormat,
            Error::Parse(_) => TlStatus::ParseError,
            Error::InvalidK(_) => TlStatus::InvalidK,
            Error::UnknownGroup(_) => TlStatus::UnknownGroup,
            Error::IndexOutOfRange { .. } => TlStatus::IndexOutOfRange,
            Error::Locked(_) => TlStatus::Locked,
            Error::CorruptSnapshot { .. } | Error::CorruptLog { .. } => TlStatus::Corrupt,
            Error::InvalidRules(_) => TlStatus::InvalidArgument,
            Error::Io { .. } => TlStatus::IoFailure,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlFormat {
    Auto = 0,
    Jvm = 1,
    Python = 2,
}

impl From<TlFormat> for FormatHint {
    fn from(f: TlFormat) -> Self {
        match f {
            TlFormat::Auto => FormatHint::Auto,
            TlFormat::Jvm => FormatHint::Jvm,
            TlFormat::Python => FormatHint::Python,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TlStats {
    pub n_groups: u64,
    pub n_reports: u64,
    pub distinct_frames: u64,
}

enum Backing {
    Writer(Store),
    Reader(Corpus),
}

/// Opaque handle to an opened data directory.
pub struct TlEngine {
    backing: Backing,
    rules: Vec<SubsystemRule>,
    k: usize,
}

impl TlEngine {
    fn corpus(&self) -> &Corpus {
        match &self.backing {
            Backing::Writer(store) => store.corpus(),
            Backing::Reader(corpus) => corpus,
        }
    }

    fn store_mut(&mut self) -> Result<&mut Store, Failure> {
        match &mut self.backing {
            Backing::Writer(store) => Ok(store),
            Backing::Reader(_) => Err(Failure::new(TlStatus::ReadOnly, "engine was opened read-only")),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: TlStatus,
    message: String,
}

impl Failure {
    fn new(status: TlStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(TlStatus::from(&e), e.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            TlStatus::Ok
        }
        Ok(Err(failure)) => {
            set_last_error(failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            TlStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be NULL or a valid NUL-terminated string.
unsafe fn opt_str<'a>(s: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if s.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(s)
        .to_str()
        .map(Some)
        .map_err(|_| Failure::new(TlStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn req_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    opt_str(s, what)?.ok_or_else(|| Failure::new(TlStatus::InvalidArgument, format!("{what} is NULL")))
}

/// Report text as raw bytes; invalid UTF-8 is replaced later, not rejected.
unsafe fn req_bytes<'a>(s: *const c_char, what: &str) -> Result<&'a [u8], Failure> {
    if s.is_null() {
        return Err(Failure::new(TlStatus::InvalidArgument, format!("{what} is NULL")));
    }
    Ok(CStr::from_ptr(s).to_bytes())
}

unsafe fn engine_mut<'a>(engine: *mut TlEngine) -> Result<&'a mut TlEngine, Failure> {
    engine
        .as_mut()
        .ok_or_else(|| Failure::new(TlStatus::InvalidArgument, "engine is NULL"))
}

unsafe fn write_json(out: *mut *mut c_char, value: &impl serde::Serialize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(TlStatus::InvalidArgument, "output pointer is NULL"));
    }
    let json = serde_json::to_string(value).map_err(|e| Failure::new(TlStatus::IoFailure, e.to_string()))?;
    let c = CString::new(json).map_err(|e| Failure::new(TlStatus::IoFailure, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn open_engine(
    data_dir: *const c_char,
    k: u32,
    rules_json: *const c_char,
    writer: bool,
    out: *mut *mut TlEngine,
) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(TlStatus::InvalidArgument, "output pointer is NULL"));
    }
    *out = ptr::null_mut();
    let dir = PathBuf::from(req_str(data_dir, "data_dir")?);
    if k == 0 {
        return Err(Error::InvalidK(0).into());
    }
    let rules = match opt_str(rules_json, "rules_json")? {
        Some(json) => tracelight::normalize::parse_rules(json.as_bytes())?,
        None => Vec::new(),
    };
    let backing = if writer {
        Backing::Writer(Store::open(dir, StoreOptions::default())?.0)
    } else {
        Backing::Reader(store::load_dir(&dir)?.0)
    };
    *out = Box::into_raw(Box::new(TlEngine {
        backing,
        rules,
        k: k as usize,
    }));
    Ok(())
}

/// Opens `data_dir` as its single writer, recovering its state.
///
/// `rules_json` is NULL or a JSON array of `{"prefix", "label"}` objects.
///
/// # Safety
/// `data_dir` must be a valid NUL-terminated string, `rules_json` NULL or a
/// valid NUL-terminated string, and `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn tl_engine_open(
    data_dir: *const c_char,
    k: u32,
    rules_json: *const c_char,
    out: *mut *mut TlEngine,
) -> TlStatus {
    guard(|| open_engine(data_dir, k, rules_json, true, out))
}

/// Opens `data_dir` for scoring and inspection only; takes no lock and
/// writes nothing.
///
/// # Safety
/// Same as [`tl_engine_open`].
#[no_mangle]
pub unsafe extern "C" fn tl_engine_open_readonly(
    data_dir: *const c_char,
    k: u32,
    rules_json: *const c_char,
    out: *mut *mut TlEngine,
) -> TlStatus {
    guard(|| open_engine(data_dir, k, rules_json, false, out))
}

/// # Safety
/// `engine` must be NULL or a handle returned by an open function that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn tl_engine_free(engine: *mut TlEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Ingests one report and writes the ingest result as JSON to `out_json`.
///
/// # Safety
/// `engine` must be a live writer handle, `text` a valid NUL-terminated
/// string, `product` NULL or a valid NUL-terminated string, `out_json` a valid
/// pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn tl_ingest(
    engine: *mut TlEngine,
    text: *const c_char,
    format: TlFormat,
    product: *const c_char,
    out_json: *mut *mut c_char,
) -> TlStatus {
    guard(|| {
        let engine = engine_mut(engine)?;
        let text = req_bytes(text, "text")?;
        let product = opt_str(product, "product")?.map(str::to_string);
        let report = RawReport::from_bytes(text, format.into(), product, tracelight::now())?;
        let (rules, k) = (engine.rules.clone(), engine.k);
        let store = engine.store_mut()?;
        let (outcome, trace) = store.ingest(&report)?;
        let corpus = store.corpus();
        let keys = tracelight::frame_keys(&trace);
        let set = corpus.suggest(&keys, k)?;
        let response = IngestResponse {
            frames: view::frame_views(&trace, &keys, &rules),
            suggestions: view::suggestion_views(&set),
            selection: corpus.selection(&outcome.group_id).into(),
            group_id: outcome.group_id,
            is_new_group: outcome.is_new,
            occurrence_count: outcome.occurrence_count,
        };
        write_json(out_json, &response)
    })
}

/// Scores a trace without recording it; JSON `{frames, suggestions}`.
///
/// # Safety
/// `engine` must be a live handle, `text` a valid NUL-terminated string,
/// `out_json` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn tl_score(
    engine: *mut TlEngine,
    text: *const c_char,
    format: TlFormat,
    out_json: *mut *mut c_char,
) -> TlStatus {
    guard(|| {
        let engine = engine_mut(engine)?;
        let text = req_bytes(text, "text")?;
        let report = RawReport::from_bytes(text, format.into(), None, tracelight::now())?;
        let trace = parser::parse(&report)?;
        let scored = view::score(engine.corpus(), &trace, &engine.rules, engine.k)?;
        write_json(out_json, &scored)
    })
}

/// Group detail JSON `{group, frames, suggestions, selection}`.
///
/// # Safety
/// `engine` must be a live handle, `group_id` a valid NUL-terminated string,
/// `out_json` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn tl_group(
    engine: *mut TlEngine,
    group_id: *const c_char,
    out_json: *mut *mut c_char,
) -> TlStatus {
    guard(|| {
        let engine = engine_mut(engine)?;
        let id = GroupId::new(req_str(group_id, "group_id")?);
        let corpus = engine.corpus();
        let group = corpus.group(&id).ok_or_else(|| Error::UnknownGroup(id.to_string()))?;
        write_json(out_json, &view::group_detail(corpus, group, &engine.rules, engine.k)?)
    })
}

/// Replaces the group's manual selection. `indices` may be NULL when `len`
/// is 0, which clears the selection.
///
/// # Safety
/// `engine` must be a live writer handle, `group_id` a valid NUL-terminated
/// string, `indices` valid for `len` reads, `author` NULL or a valid
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tl_save_selection(
    engine: *mut TlEngine,
    group_id: *const c_char,
    indices: *const u32,
    len: usize,
    author: *const c_char,
) -> TlStatus {
    guard(|| {
        let engine = engine_mut(engine)?;
        let id = GroupId::new(req_str(group_id, "group_id")?);
        let author = opt_str(author, "author")?.map(str::to_string);
        let indices: Vec<i64> = if len == 0 {
            Vec::new()
        } else if indices.is_null() {
            return Err(Failure::new(TlStatus::InvalidArgument, "indices is NULL"));
        } else {
            std::slice::from_raw_parts(indices, len)
                .iter()
                .map(|&i| i64::from(i))
                .collect()
        };
        engine
            .store_mut()?
            .save_selection(&id, &indices, author, tracelight::now())?;
        Ok(())
    })
}

/// # Safety
/// `engine` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_stats(engine: *mut TlEngine, out: *mut TlStats) -> TlStatus {
    guard(|| {
        let engine = engine_mut(engine)?;
        let out = out
            .as_mut()
            .ok_or_else(|| Failure::new(TlStatus::InvalidArgument, "output pointer is NULL"))?;
        let v = StatsView::of(engine.corpus());
        *out = TlStats {
            n_groups: v.n_groups,
            n_reports: v.n_reports,
            distinct_frames: v.distinct_frames as u64,
        };
        Ok(())
    })
}

/// Writes `snapshot.json` for a writer handle.
///
/// # Safety
/// `engine` must be a live writer handle.
#[no_mangle]
pub unsafe extern "C" fn tl_snapshot(engine: *mut TlEngine) -> TlStatus {
    guard(|| {
        engine_mut(engine)?.store_mut()?.write_snapshot()?;
        Ok(())
    })
}

/// Smoothed IDF `ln((1 + n_groups) / (1 + df)) + 1`.
#[no_mangle]
pub extern "C" fn tl_idf(n_groups: u64, df: u64) -> f64 {
    tracelight::idf(n_groups, df)
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn tl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
