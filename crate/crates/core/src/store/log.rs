// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Append-only JSONL log of ingested reports and selection changes.
//!
//! Each record is one JSON object terminated by `\n`. A final line without
//! its terminator is the remains of an interrupted write and is discarded.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::groups::GroupId;
use crate::parser::SourceFormat;
use crate::{Error, Result, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub seq: u64,
    pub received_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<String>,
    pub format: SourceFormat,
    pub raw_text: String,
    pub group_id: GroupId,
    pub is_new_group: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub seq: u64,
    pub group_id: GroupId,
    pub selected_indices: Vec<usize>,
    pub updated_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogEntry {
    Report(LogRecord),
    Selection(SelectionRecord),
}

impl LogEntry {
    pub fn seq(&self) -> u64 {
        match self {
            LogEntry::Report(r) => r.seq,
            LogEntry::Selection(s) => s.seq,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogScan {
    /// Byte length of the complete records.
    pub valid_len: u64,
    pub last_seq: u64,
    pub records: usize,
    pub discarded_tail_bytes: u64,
}

/// Streams every complete record to `visit`, in file order. A missing file is
/// an empty log.
pub fn scan_log(path: &Path, mut visit: impl FnMut(LogEntry) -> Result<()>) -> Result<LogScan> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(LogScan::default()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut reader = BufReader::with_capacity(1 << 16, file);
    let mut scan = LogScan::default();
    let mut line = Vec::new();
    let mut line_no = 0usize;
    loop {
        line.clear();
        let n = reader.read_until(b'\n', &mut line).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        if line.last() != Some(&b'\n') {
            scan.discarded_tail_bytes = n as u64;
            break;
        }
        let entry: LogEntry = serde_json::from_slice(&line[..n - 1]).map_err(|e| Error::CorruptLog {
            path: path.to_path_buf(),
            line: line_no,
            reason: e.to_string(),
        })?;
        if entry.seq() <= scan.last_seq {
            return Err(Error::CorruptLog {
                path: path.to_path_buf(),
                line: line_no,
                reason: format!("seq {} does not follow {}", entry.seq(), scan.last_seq),
            });
        }
        scan.last_seq = entry.seq();
        scan.valid_len += n as u64;
        scan.records += 1;
        visit(entry)?;
    }
    Ok(scan)
}

pub struct LogWriter {
    path: PathBuf,
    file: File,
    len: u64,
    next_seq: u64,
    fsync: bool,
    buf: Vec<u8>,
}

impl LogWriter {
    /// Opens the log for appending, cutting it back to `valid_len` so a torn
    /// final record does not prefix the next one.
    pub fn open(path: &Path, valid_len: u64, next_seq: u64, fsync: bool) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .read(true)
            .write(true)
            .truncate(false)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let on_disk = file.metadata().map_err(|e| Error::io(path, e))?.len();
        if on_disk != valid_len {
            log::warn!(
                "{}: discarding {} bytes of incomplete trailing record",
                path.display(),
                on_disk.saturating_sub(valid_len)
            );
            file.set_len(valid_len).map_err(|e| Error::io(path, e))?;
            file.sync_all().map_err(|e| Error::io(path, e))?;
        }
        Ok(LogWriter {
            path: path.to_path_buf(),
            file,
            len: valid_len,
            next_seq,
            fsync,
            buf: Vec::with_capacity(4096),
        })
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    /// Writes one record and hands it to the OS (and to disk with `fsync`)
    /// before returning. On failure the file is cut back to its previous
    /// length and the sequence number is not consumed.
    pub fn append(&mut self, entry: &LogEntry) -> Result<()> {
        debug_assert_eq!(entry.seq(), self.next_seq);
        self.buf.clear();
        serde_json::to_writer(&mut self.buf, entry).expect("log entries always serialize");
        self.buf.push(b'\n');
        if let Err(e) = self.write_buf() {
            let _ = self.file.set_len(self.len);
            return Err(Error::io(&self.path, e));
        }
        self.len += self.buf.len() as u64;
        self.next_seq += 1;
        Ok(())
    }

    fn write_buf(&mut self) -> std::io::Result<()> {
        use std::io::{Seek, SeekFrom};
        self.file.seek(SeekFrom::Start(self.len))?;
        self.file.write_all(&self.buf)?;
        if self.fsync {
            self.file.sync_data()?;
        }
        Ok(())
    }
}
