// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Hand-labeled traces under `tests/fixtures/parser`.
//!
//! Each `<name>.txt` has a `<name>.expected` next to it:
//!
//! ```text
//! format jvm|python
//! segment <root|caused_by|suppressed|chained> <exception type>
//! message <text>                      (optional)
//! elided <n>                          (optional)
//! frame <location> | <function> | <file or -> | <line or ->
//! ```
//!
//! Frames are listed innermost first within each segment.

use std::path::{Path, PathBuf};

use tracelight::parser::{self, FormatHint, RawReport, SegmentKind, SourceFormat};

#[derive(Debug, Clone)]
pub struct ExpectedFrame {
    pub location: String,
    pub function: String,
    pub file: Option<String>,
    pub line: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct ExpectedSegment {
    pub kind: SegmentKind,
    pub exception_type: String,
    pub message: Option<String>,
    pub elided: u32,
    pub frames: Vec<ExpectedFrame>,
}

#[derive(Debug, Clone)]
pub struct Expected {
    pub format: SourceFormat,
    pub segments: Vec<ExpectedSegment>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub text: String,
    pub expected: Expected,
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/parser")
}

fn opt(field: &str) -> Option<&str> {
    (field != "-").then_some(field)
}

pub fn parse_expected(src: &str) -> Expected {
    let mut format = None;
    let mut segments: Vec<ExpectedSegment> = Vec::new();
    for line in src.lines().filter(|l| !l.trim().is_empty()) {
        let (word, rest) = line.split_once(' ').unwrap_or((line, ""));
        match word {
            "format" => {
                format = Some(match rest {
                    "jvm" => SourceFormat::Jvm,
                    "python" => SourceFormat::Python,
                    other => panic!("bad format `{other}`"),
                })
            }
            "segment" => {
                let (kind, ty) = rest.split_once(' ').expect("segment <kind> <type>");
                let kind = match kind {
                    "root" => SegmentKind::Root,
                    "caused_by" => SegmentKind::CausedBy,
                    "suppressed" => SegmentKind::Suppressed,
                    "chained" => SegmentKind::Chained,
                    other => panic!("bad segment kind `{other}`"),
                };
                segments.push(ExpectedSegment {
                    kind,
                    exception_type: ty.to_string(),
                    message: None,
                    elided: 0,
                    frames: Vec::new(),
                });
            }
            "message" => segments.last_mut().expect("message before segment").message = Some(rest.to_string()),
            "elided" => segments.last_mut().expect("elided before segment").elided = rest.parse().unwrap(),
            "frame" => {
                let parts: Vec<&str> = rest.split(" | ").collect();
                assert_eq!(parts.len(), 4, "frame needs 4 fields: `{line}`");
                segments
                    .last_mut()
                    .expect("frame before segment")
                    .frames
                    .push(ExpectedFrame {
                        location: parts[0].to_string(),
                        function: parts[1].to_string(),
                        file: opt(parts[2]).map(str::to_string),
                        line: opt(parts[3]).map(|l| l.parse().unwrap()),
                    });
            }
            other => panic!("unknown label `{other}`"),
        }
    }
    Expected {
        format: format.expect("missing format line"),
        segments,
    }
}

pub fn load_fixtures() -> Vec<Fixture> {
    let dir = fixture_dir();
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().into_string().unwrap();
            name.strip_suffix(".txt").map(str::to_string)
        })
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let text = std::fs::read_to_string(dir.join(format!("{name}.txt"))).unwrap();
            let labels = std::fs::read_to_string(dir.join(format!("{name}.expected"))).unwrap();
            Fixture {
                expected: parse_expected(&labels),
                name,
                text,
            }
        })
        .collect()
}

/// Every disagreement between the parser and the labels, one line each.
pub fn check_fixture(fixture: &Fixture) -> Vec<String> {
    let (name, text, expected) = (fixture.name.as_str(), fixture.text.as_str(), &fixture.expected);
    let mut problems = Vec::new();
    let report = RawReport::new(text, FormatHint::Auto, None, tracelight::now()).unwrap();
    let trace = match parser::parse(&report) {
        Ok(t) => t,
        Err(e) => return vec![format!("{name}: parse failed: {e}")],
    };
    if trace.source_format != expected.format {
        problems.push(format!(
            "{name}: format {:?} != {:?}",
            trace.source_format, expected.format
        ));
    }
    if trace.segments.len() != expected.segments.len() {
        problems.push(format!(
            "{name}: {} segments, expected {}",
            trace.segments.len(),
            expected.segments.len()
        ));
        return problems;
    }
    for (si, (seg, want)) in trace.segments.iter().zip(&expected.segments).enumerate() {
        let at = format!("{name} segment {si}");
        if seg.kind != want.kind {
            problems.push(format!("{at}: kind {:?} != {:?}", seg.kind, want.kind));
        }
        if seg.exception_type != want.exception_type {
            problems.push(format!(
                "{at}: type `{}` != `{}`",
                seg.exception_type, want.exception_type
            ));
        }
        if seg.message != want.message {
            problems.push(format!("{at}: message {:?} != {:?}", seg.message, want.message));
        }
        if seg.elided_count != want.elided {
            problems.push(format!("{at}: elided {} != {}", seg.elided_count, want.elided));
        }
        let frames = trace.segment_frames(seg);
        if frames.len() != want.frames.len() {
            problems.push(format!("{at}: {} frames, expected {}", frames.len(), want.frames.len()));
            continue;
        }
        for (fi, (got, want)) in frames.iter().zip(&want.frames).enumerate() {
            if got.location != want.location
                || got.function != want.function
                || got.file != want.file
                || got.line != want.line
            {
                problems.push(format!(
                    "{at} frame {fi}: got ({}, {}, {:?}, {:?}) want ({}, {}, {:?}, {:?})",
                    got.location, got.function, got.file, got.line, want.location, want.function, want.file, want.line
                ));
            }
            if !text.contains(got.raw.as_str()) {
                problems.push(format!("{at} frame {fi}: raw text is not a substring of the input"));
            }
        }
    }
    problems
}
