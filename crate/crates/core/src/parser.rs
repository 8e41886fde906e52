// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Raw stack-trace text to [`StackTrace`].
//!
//! Two grammars are understood: JVM exception dumps (`Throwable.printStackTrace`
//! and the common logging-framework variants) and CPython tracebacks. Both are
//! parsed line by line; lines that fit neither grammar are skipped and counted,
//! never fatal.
//!
//! Frames are exposed innermost-first: `all_frames()[0]` is the point of
//! failure regardless of the source format. JVM dumps already print in that
//! order, Python prints outermost-first so its frames are reversed per segment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Timestamp};

/// Exception type used when a trace carries frames but no readable header.
pub const UNKNOWN_EXCEPTION: &str = "<unknown>";

const PY_TRACEBACK: &str = "Traceback (most recent call last):";
const PY_CONTEXT_SEPARATOR: &str = "During handling of the above exception, another exception occurred:";
const PY_CAUSE_SEPARATOR: &str = "The above exception was the direct cause of the following exception:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Jvm,
    Python,
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceFormat::Jvm => "jvm",
            SourceFormat::Python => "python",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatHint {
    #[default]
    Auto,
    Jvm,
    Python,
}

impl FromStr for FormatHint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(FormatHint::Auto),
            "jvm" => Ok(FormatHint::Jvm),
            "python" => Ok(FormatHint::Python),
            other => Err(format!("unknown format `{other}` (expected auto, jvm or python)")),
        }
    }
}

impl fmt::Display for FormatHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormatHint::Auto => "auto",
            FormatHint::Jvm => "jvm",
            FormatHint::Python => "python",
        })
    }
}

/// One incoming report as received.
#[derive(Debug, Clone, PartialEq)]
pub struct RawReport {
    text: String,
    pub format_hint: FormatHint,
    pub product: Option<String>,
    pub received_at: Timestamp,
}

impl RawReport {
    pub fn new(
        text: impl Into<String>,
        format_hint: FormatHint,
        product: Option<String>,
        received_at: Timestamp,
    ) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::EmptyReport);
        }
        Ok(RawReport {
            text,
            format_hint,
            product,
            received_at: crate::truncate_to_seconds(received_at),
        })
    }

    /// Builds a report from bytes, replacing invalid UTF-8 sequences with U+FFFD.
    pub fn from_bytes(
        bytes: &[u8],
        format_hint: FormatHint,
        product: Option<String>,
        received_at: Timestamp,
    ) -> Result<Self> {
        Self::new(
            String::from_utf8_lossy(bytes).into_owned(),
            format_hint,
            product,
            received_at,
        )
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackFrame {
    pub location: String,
    pub function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    pub raw: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Root,
    CausedBy,
    Suppressed,
    Chained,
}

/// One exception of a (possibly chained) trace. Its frames live in the owning
/// [`StackTrace`] as a contiguous range of `all_frames`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionSegment {
    pub kind: SegmentKind,
    pub exception_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub first_frame: usize,
    pub frame_count: usize,
    pub elided_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackTrace {
    pub segments: Vec<ExceptionSegment>,
    pub source_format: SourceFormat,
    frames: Vec<StackFrame>,
    /// Lines that fit no part of the grammar.
    pub skipped_lines: usize,
}

impl StackTrace {
    /// Every frame in canonical order, index 0 being the innermost frame.
    pub fn all_frames(&self) -> &[StackFrame] {
        &self.frames
    }

    pub fn segment_frames(&self, segment: &ExceptionSegment) -> &[StackFrame] {
        &self.frames[segment.first_frame..segment.first_frame + segment.frame_count]
    }

    pub fn root(&self) -> &ExceptionSegment {
        &self.segments[0]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Frames collected for one segment in printed order.
struct PendingSegment {
    kind: SegmentKind,
    exception_type: String,
    message: Option<String>,
    frames: Vec<StackFrame>,
    elided_count: u32,
}

impl PendingSegment {
    fn new(kind: SegmentKind, header: Option<(String, Option<String>)>) -> Self {
        let (exception_type, message) = header.unwrap_or_else(|| (UNKNOWN_EXCEPTION.to_string(), None));
        PendingSegment {
            kind,
            exception_type,
            message,
            frames: Vec::new(),
            elided_count: 0,
        }
    }
}

fn assemble(pending: Vec<PendingSegment>, format: SourceFormat, skipped_lines: usize) -> Result<StackTrace> {
    let mut frames = Vec::new();
    let mut segments = Vec::with_capacity(pending.len());
    for mut seg in pending {
        if format == SourceFormat::Python {
            seg.frames.reverse();
        }
        segments.push(ExceptionSegment {
            kind: seg.kind,
            exception_type: seg.exception_type,
            message: seg.message,
            first_frame: frames.len(),
            frame_count: seg.frames.len(),
            elided_count: seg.elided_count,
        });
        frames.append(&mut seg.frames);
    }
    if frames.is_empty() {
        return Err(Error::Parse("no stack frames found".to_string()));
    }
    Ok(StackTrace {
        segments,
        source_format: format,
        frames,
        skipped_lines,
    })
}

fn lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(|l| l.trim_end_matches('\r'))
}

/// Decides whether `text` is a Python traceback or a JVM dump.
pub fn detect_format(text: &str) -> Result<SourceFormat> {
    if text.trim().is_empty() {
        return Err(Error::EmptyReport);
    }
    let is_python = lines(text).any(|line| {
        let t = line.trim_start();
        t.starts_with(PY_TRACEBACK) || match_python_frame(t).is_some()
    });
    if is_python {
        return Ok(SourceFormat::Python);
    }
    if lines(text).any(|line| match_jvm_frame(line.trim()).is_some()) {
        return Ok(SourceFormat::Jvm);
    }
    Err(Error::UnrecognizedFormat)
}

pub fn parse(report: &RawReport) -> Result<StackTrace> {
    let format = match report.format_hint {
        FormatHint::Auto => detect_format(report.text())?,
        FormatHint::Jvm => SourceFormat::Jvm,
        FormatHint::Python => SourceFormat::Python,
    };
    parse_as(report.text(), format)
}

pub fn parse_as(text: &str, format: SourceFormat) -> Result<StackTrace> {
    match format {
        SourceFormat::Jvm => parse_jvm(text),
        SourceFormat::Python => parse_python(text),
    }
}

/// Identifier-ish exception name: letters, digits, `_`, `$`, `.`, not starting
/// with a digit or dot.
fn is_exception_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' || c == '$' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '$' | '.')) && !s.ends_with('.')
}

/// `Type` or `Type: message`, as it appears on a header line.
fn match_header(t: &str) -> Option<(String, Option<String>)> {
    let (name, message) = match t.split_once(':') {
        Some((name, rest)) => {
            let rest = rest.trim();
            (name, (!rest.is_empty()).then(|| rest.to_string()))
        }
        None => (t, None),
    };
    is_exception_name(name).then(|| (name.to_string(), message))
}

/// Header text following `Caused by:` / `Suppressed:`; always yields a type.
fn split_header(t: &str) -> (String, Option<String>) {
    let t = t.trim();
    if let Some(h) = match_header(t) {
        return h;
    }
    match t.split_once(": ") {
        Some((name, msg)) if !name.trim().is_empty() => (name.trim().to_string(), Some(msg.trim().to_string())),
        _ if t.is_empty() => (UNKNOWN_EXCEPTION.to_string(), None),
        _ => (t.to_string(), None),
    }
}

fn strip_thread_prefix(t: &str) -> &str {
    // Exception in thread "main" java.lang.IllegalStateException: ...
    if let Some(rest) = t.strip_prefix("Exception in thread \"") {
        if let Some(end) = rest.find("\" ") {
            return rest[end + 2..].trim_start();
        }
    }
    t
}

/// Parses a trimmed `at pkg.Class.method(Loc)` line.
fn match_jvm_frame(t: &str) -> Option<(String, String, Option<String>, Option<u32>)> {
    let body = t.strip_prefix("at ")?.trim_start();
    let open = body.find('(')?;
    let close = open + body[open..].find(')')?;
    let trailer = &body[close + 1..];
    if !trailer.is_empty() && !trailer.starts_with(char::is_whitespace) {
        return None;
    }
    let qualified = &body[..open];
    if qualified.is_empty() || qualified.contains(char::is_whitespace) {
        return None;
    }
    let qualified = strip_module_prefix(qualified);
    let (location, function) = qualified.rsplit_once('.')?;
    if location.is_empty() || function.is_empty() {
        return None;
    }

    let source = body[open + 1..close].trim();
    let (file, line) = match source {
        "Native Method" | "Unknown Source" | "" => (None, None),
        _ => match source.rsplit_once(':') {
            Some((file, line)) if !line.is_empty() && line.bytes().all(|b| b.is_ascii_digit()) => {
                let file = (!file.is_empty() && file != "Unknown Source").then(|| file.to_string());
                (file, line.parse::<u32>().ok().filter(|&n| n >= 1))
            }
            _ => (Some(source.to_string()), None),
        },
    };
    Some((location.to_string(), function.to_string(), file, line))
}

/// Drops a JPMS module or class-loader prefix: `java.base/java.lang.Thread.run`,
/// `app//com.example.Main.main`, `java.base@17/...`. Hidden-class suffixes such
/// as `Foo$$Lambda$17/0x0000a1b2` are not prefixes and are kept.
fn strip_module_prefix(qualified: &str) -> &str {
    match qualified.split_once('/') {
        Some((prefix, rest)) if !prefix.contains("$$Lambda") && !rest.is_empty() => {
            strip_module_prefix(rest.trim_start_matches('/'))
        }
        _ => qualified,
    }
}

fn match_elided(t: &str) -> Option<u32> {
    let rest = t.strip_prefix("...")?.trim_start();
    let digits_end = rest.find(|c: char| !c.is_ascii_digit())?;
    let count = rest[..digits_end].parse().ok()?;
    match rest[digits_end..].trim() {
        "more" | "common frames omitted" => Some(count),
        _ => None,
    }
}

/// Parses a JVM exception dump.
pub fn parse_jvm(text: &str) -> Result<StackTrace> {
    let mut segments: Vec<PendingSegment> = Vec::new();
    let mut pending_header: Option<(String, Option<String>)> = None;
    let mut skipped = 0usize;

    for line in lines(text) {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some((location, function, file, line_no)) = match_jvm_frame(t) {
            if segments.is_empty() {
                segments.push(PendingSegment::new(SegmentKind::Root, pending_header.take()));
            }
            let seg = segments.last_mut().expect("segment exists");
            seg.frames.push(StackFrame {
                location,
                function,
                file,
                line: line_no,
                raw: line.to_string(),
            });
        } else if let Some(rest) = t.strip_prefix("Caused by:") {
            open_nested(&mut segments, &mut pending_header, SegmentKind::CausedBy, rest);
        } else if let Some(rest) = t.strip_prefix("Suppressed:") {
            open_nested(&mut segments, &mut pending_header, SegmentKind::Suppressed, rest);
        } else if let Some(n) = match_elided(t) {
            match segments.last_mut() {
                Some(seg) => seg.elided_count = seg.elided_count.saturating_add(n),
                None => skipped += 1,
            }
        } else if segments.is_empty() {
            match match_header(strip_thread_prefix(t)) {
                Some(header) => {
                    if pending_header.replace(header).is_some() {
                        skipped += 1;
                    }
                }
                None => skipped += 1,
            }
        } else {
            skipped += 1;
        }
    }
    if pending_header.is_some() {
        skipped += 1;
    }

    // Nested segments that carry nothing are noise; the root always stays.
    let mut kept = Vec::with_capacity(segments.len());
    for (i, seg) in segments.into_iter().enumerate() {
        if i > 0 && seg.frames.is_empty() && seg.elided_count == 0 {
            skipped += 1;
        } else {
            kept.push(seg);
        }
    }
    assemble(kept, SourceFormat::Jvm, skipped)
}

fn open_nested(
    segments: &mut Vec<PendingSegment>,
    pending_header: &mut Option<(String, Option<String>)>,
    kind: SegmentKind,
    rest: &str,
) {
    let header = split_header(rest);
    if segments.is_empty() {
        match pending_header.take() {
            Some(root) => segments.push(PendingSegment::new(SegmentKind::Root, Some(root))),
            // A dump truncated above its first `Caused by:` starts there.
            None => {
                segments.push(PendingSegment::new(SegmentKind::Root, Some(header)));
                return;
            }
        }
    }
    segments.push(PendingSegment::new(kind, Some(header)));
}

/// Parses a trimmed `File "<path>", line <n>, in <name>` line.
fn match_python_frame(t: &str) -> Option<(String, u32, String)> {
    let rest = t.strip_prefix("File \"")?;
    let (path, rest) = rest.split_once("\", line ")?;
    let (line_no, rest) = rest.split_once(", in ")?;
    let line_no: u32 = line_no.trim().parse().ok()?;
    let name = rest.trim_end();
    if path.is_empty() || name.is_empty() || line_no == 0 {
        return None;
    }
    Some((path.to_string(), line_no, name.to_string()))
}

/// Parses a CPython traceback, including chained exceptions.
pub fn parse_python(text: &str) -> Result<StackTrace> {
    let mut done: Vec<PendingSegment> = Vec::new();
    let mut current: Option<PendingSegment> = None;
    let mut header_seen = false;
    let mut skipped = 0usize;

    fn finish(done: &mut Vec<PendingSegment>, current: &mut Option<PendingSegment>, skipped: &mut usize) {
        if let Some(mut seg) = current.take() {
            if seg.frames.is_empty() {
                *skipped += 1;
                return;
            }
            seg.kind = if done.is_empty() {
                SegmentKind::Root
            } else {
                SegmentKind::Chained
            };
            done.push(seg);
        }
    }

    for line in lines(text) {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let indented = line.starts_with(char::is_whitespace);
        if t.starts_with(PY_TRACEBACK) {
            finish(&mut done, &mut current, &mut skipped);
            current = Some(PendingSegment::new(SegmentKind::Chained, None));
            header_seen = false;
        } else if t == PY_CONTEXT_SEPARATOR || t == PY_CAUSE_SEPARATOR {
            finish(&mut done, &mut current, &mut skipped);
            header_seen = false;
        } else if let Some((path, line_no, name)) = match_python_frame(t) {
            if current.is_none() || header_seen {
                finish(&mut done, &mut current, &mut skipped);
                current = Some(PendingSegment::new(SegmentKind::Chained, None));
                header_seen = false;
            }
            let seg = current.as_mut().expect("segment exists");
            seg.frames.push(StackFrame {
                location: path,
                function: name,
                file: None,
                line: Some(line_no),
                raw: line.to_string(),
            });
        } else {
            let open_without_header = current
                .as_ref()
                .is_some_and(|seg| !seg.frames.is_empty() && !header_seen);
            if indented && open_without_header {
                // Source echo and caret lines below a frame.
                continue;
            }
            match (open_without_header, match_header(t)) {
                (true, Some((exception_type, message))) => {
                    let seg = current.as_mut().expect("segment exists");
                    seg.exception_type = exception_type;
                    seg.message = message;
                    header_seen = true;
                }
                _ => skipped += 1,
            }
        }
    }
    finish(&mut done, &mut current, &mut skipped);
    assemble(done, SourceFormat::Python, skipped)
}
