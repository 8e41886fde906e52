// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Crash triage over raw stack traces.
//!
//! Reports are parsed into [`StackTrace`]s, normalized into [`FrameKey`]s,
//! deduplicated into [`TraceGroup`]s and counted into [`CorpusStats`]. For any
//! trace the rarest frames of the corpus (highest inverse document frequency)
//! are suggested as potentially important, while developers keep their own
//! manual [`FrameSelection`] per group.

pub mod api;
pub mod cli;
pub mod corpus;
mod error;
pub mod groups;
pub mod highlight;
pub mod idf;
pub mod normalize;
pub mod parser;
pub mod store;
pub mod view;

pub use crate::corpus::{Corpus, IngestOutcome};
pub use crate::error::{Error, Result};
pub use crate::groups::{GroupId, GroupIndex, TraceGroup};
pub use crate::highlight::{score_trace, suggest_top_k, FrameScore, SuggestionSet, DEFAULT_K};
pub use crate::idf::{idf, CorpusStats};
pub use crate::normalize::{
    assign_subsystems, fingerprint, frame_keys, normalize_frame, FrameKey, SubsystemRule, TraceFingerprint,
};
pub use crate::parser::{
    detect_format, parse, parse_jvm, parse_python, ExceptionSegment, FormatHint, RawReport, SegmentKind, SourceFormat,
    StackFrame, StackTrace,
};
pub use crate::store::{FrameSelection, Store, StoreOptions};

/// Timestamps are UTC with whole-second precision.
pub type Timestamp = chrono::DateTime<chrono::Utc>;

/// Current wall-clock time truncated to whole seconds.
pub fn now() -> Timestamp {
    truncate_to_seconds(chrono::Utc::now())
}

pub fn truncate_to_seconds(ts: Timestamp) -> Timestamp {
    chrono::DateTime::from_timestamp(ts.timestamp(), 0).unwrap_or(ts)
}
