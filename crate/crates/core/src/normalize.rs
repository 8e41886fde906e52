// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Frame identities and whole-trace fingerprints.

use std::fmt;
use std::hash::Hasher;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::parser::{SourceFormat, StackFrame, StackTrace};
use crate::{Error, Result};

/// Normalized frame identity: `<class>.<method>` for JVM frames,
/// `<path>::<function>` for Python frames. Never contains a line number.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrameKey(Arc<str>);

impl FrameKey {
    pub fn new(key: impl AsRef<str>) -> Self {
        FrameKey(Arc::from(key.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FrameKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for FrameKey {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Location with run-to-run volatile parts removed.
pub fn normalize_location(location: &str, format: SourceFormat) -> String {
    match format {
        SourceFormat::Jvm => normalize_jvm_location(location),
        SourceFormat::Python => strip_python_prefix(location).to_string(),
    }
}

/// `Foo$$Lambda$17/0x0000a1b2` and `Foo$$Lambda/0x0000a1b2` both become
/// `Foo$$Lambda`. Numbered anonymous classes (`Foo$1`) are left alone.
fn normalize_jvm_location(location: &str) -> String {
    const MARKER: &str = "$$Lambda";
    let Some(pos) = location.find(MARKER) else {
        return location.to_string();
    };
    let head = &location[..pos + MARKER.len()];
    let mut tail = &location[pos + MARKER.len()..];

    if let Some(rest) = tail.strip_prefix('$') {
        let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
        // Only a complete counter, otherwise `$1$2` would shrink on every pass.
        if digits > 0 && (rest.len() == digits || rest.as_bytes()[digits] == b'/') {
            tail = &rest[digits..];
        }
    }
    if let Some(rest) = tail.strip_prefix('/') {
        let suffix = rest
            .strip_prefix("0x")
            .filter(|hex| !hex.is_empty() && hex.bytes().all(|b| b.is_ascii_hexdigit()))
            .or_else(|| (!rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit())).then_some(rest));
        if suffix.is_some() {
            tail = "";
        }
    }
    format!("{head}{tail}")
}

/// Cuts everything up to the last `site-packages/` or `lib/pythonX.Y/`
/// path component.
fn strip_python_prefix(path: &str) -> &str {
    let mut cut = 0;
    if let Some(i) = path.rfind("site-packages/") {
        cut = i + "site-packages/".len();
    }
    let mut from = 0;
    while let Some(i) = path[from..].find("lib/python") {
        let start = from + i;
        from = start + 1;
        if start > 0 && path.as_bytes()[start - 1] != b'/' {
            continue;
        }
        if let Some(len) = python_version_component(&path[start + "lib/python".len()..]) {
            cut = cut.max(start + "lib/python".len() + len);
        }
    }
    &path[cut..]
}

/// Length of `<digits>.<digits>/` at the start of `s`.
fn python_version_component(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let major = bytes.iter().take_while(|b| b.is_ascii_digit()).count();
    if major == 0 || bytes.get(major) != Some(&b'.') {
        return None;
    }
    let minor = bytes[major + 1..].iter().take_while(|b| b.is_ascii_digit()).count();
    if minor == 0 || bytes.get(major + 1 + minor) != Some(&b'/') {
        return None;
    }
    Some(major + 1 + minor + 1)
}

pub fn normalize_frame(frame: &StackFrame, format: SourceFormat) -> FrameKey {
    let location = normalize_location(&frame.location, format);
    match format {
        SourceFormat::Jvm => FrameKey::new(format!("{location}.{}", frame.function)),
        SourceFormat::Python => FrameKey::new(format!("{location}::{}", frame.function)),
    }
}

/// Keys aligned with `trace.all_frames()`.
pub fn frame_keys(trace: &StackTrace) -> Vec<FrameKey> {
    trace
        .all_frames()
        .iter()
        .map(|f| normalize_frame(f, trace.source_format))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFingerprint {
    pub hash64: u64,
    pub canonical_string: String,
}

impl TraceFingerprint {
    pub fn from_canonical(canonical_string: String) -> Self {
        let mut hasher = fnv::FnvHasher::default();
        hasher.write(canonical_string.as_bytes());
        TraceFingerprint {
            hash64: hasher.finish(),
            canonical_string,
        }
    }

    pub fn hex(&self) -> String {
        format!("{:016x}", self.hash64)
    }
}

/// Exception types of every segment, a `--` separator line, then every frame
/// key, all newline-joined and hashed with 64-bit FNV-1a.
pub fn fingerprint(trace: &StackTrace) -> TraceFingerprint {
    fingerprint_with_keys(trace, &frame_keys(trace))
}

pub fn fingerprint_with_keys(trace: &StackTrace, keys: &[FrameKey]) -> TraceFingerprint {
    let mut canonical = String::with_capacity(keys.iter().map(|k| k.as_str().len() + 1).sum::<usize>() + 64);
    for (i, segment) in trace.segments.iter().enumerate() {
        if i > 0 {
            canonical.push('\n');
        }
        canonical.push_str(&segment.exception_type);
    }
    canonical.push_str("\n--\n");
    for (i, key) in keys.iter().enumerate() {
        if i > 0 {
            canonical.push('\n');
        }
        canonical.push_str(key.as_str());
    }
    TraceFingerprint::from_canonical(canonical)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemRule {
    pub prefix: String,
    pub label: String,
}

impl SubsystemRule {
    pub fn new(prefix: impl Into<String>, label: impl Into<String>) -> Self {
        SubsystemRule {
            prefix: prefix.into(),
            label: label.into(),
        }
    }
}

/// Reads a JSON array of `{"prefix", "label"}` objects; order is preserved.
pub fn load_rules(path: &Path) -> Result<Vec<SubsystemRule>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_rules(&bytes)
}

pub fn parse_rules(json: &[u8]) -> Result<Vec<SubsystemRule>> {
    let rules: Vec<SubsystemRule> = serde_json::from_slice(json).map_err(|e| Error::InvalidRules(e.to_string()))?;
    if let Some(i) = rules.iter().position(|r| r.prefix.is_empty()) {
        return Err(Error::InvalidRules(format!("rule {i} has an empty prefix")));
    }
    Ok(rules)
}

/// First matching rule's label for each frame, matched on the normalized
/// location.
pub fn assign_subsystems(trace: &StackTrace, rules: &[SubsystemRule]) -> Vec<Option<String>> {
    trace
        .all_frames()
        .iter()
        .map(|frame| {
            if rules.is_empty() {
                return None;
            }
            let location = normalize_location(&frame.location, trace.source_format);
            rules
                .iter()
                .find(|r| location.starts_with(&r.prefix))
                .map(|r| r.label.clone())
        })
        .collect()
}
