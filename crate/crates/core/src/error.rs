// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("report text is empty")]
    EmptyReport,

    #[error("unrecognized stack trace format")]
    UnrecognizedFormat,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("k must be at least 1, got {0}")]
    InvalidK(usize),

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("frame index {index} out of range for a trace with {len} frames")]
    IndexOutOfRange { index: i64, len: usize },

    #[error("corrupt snapshot {path}: {reason}")]
    CorruptSnapshot { path: PathBuf, reason: String },

    #[error("corrupt log {path} at line {line}: {reason}")]
    CorruptLog { path: PathBuf, line: usize, reason: String },

    #[error("data directory {0} is locked by another writer")]
    Locked(PathBuf),

    #[error("invalid subsystem rules: {0}")]
    InvalidRules(String),

    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable code, shared by the HTTP API and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyReport => "empty_report",
            Error::UnrecognizedFormat => "unrecognized_format",
            Error::Parse(_) => "parse_error",
            Error::InvalidK(_) => "invalid_k",
            Error::UnknownGroup(_) => "unknown_group",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::CorruptSnapshot { .. } => "corrupt_snapshot",
            Error::CorruptLog { .. } => "corrupt_log",
            Error::Locked(_) => "locked",
            Error::InvalidRules(_) => "invalid_rules",
            Error::Io { .. } => "io_failure",
        }
    }
}
