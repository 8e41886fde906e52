// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Durable state under a data directory.
//!
//! ```text
//! <data>/ingest.log     append-only JSONL, one record per report or selection
//! <data>/snapshot.json  corpus image up to some log sequence number
//! <data>/.lock          held exclusively by the single writer
//! ```
//!
//! Recovery loads the snapshot, then replays every log record past its
//! `upto_seq`. Reports are re-parsed from their raw text, so the result is the
//! same as replaying the whole log from scratch.

pub mod log;
pub mod snapshot;

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, IngestOutcome};
use crate::groups::GroupId;
use crate::parser::{self, RawReport, StackTrace};
use crate::{Error, Result, Timestamp};

use self::log::{scan_log, LogEntry, LogRecord, LogWriter, SelectionRecord};
pub use self::snapshot::{load_snapshot, write_snapshot, Snapshot};

pub const LOG_FILE: &str = "ingest.log";
pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const LOCK_FILE: &str = ".lock";

/// Frames a developer marked as important for a group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSelection {
    pub group_id: GroupId,
    /// Sorted, without duplicates.
    pub selected_indices: Vec<usize>,
    pub updated_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StoreOptions {
    /// `fdatasync` after every record instead of only handing it to the OS.
    pub fsync: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecoveryReport {
    pub snapshot_seq: Option<u64>,
    pub replayed: usize,
    pub skipped: usize,
    pub discarded_tail_bytes: u64,
    pub warnings: Vec<String>,
}

struct Recovered {
    corpus: Corpus,
    report: RecoveryReport,
    log_valid_len: u64,
    log_last_seq: u64,
}

fn replay_entry(corpus: &mut Corpus, entry: LogEntry, report: &mut RecoveryReport) {
    let seq = entry.seq();
    match entry {
        LogEntry::Report(record) => match parser::parse_as(&record.raw_text, record.format) {
            Ok(trace) => {
                let prepared = corpus.prepare(trace);
                if prepared.resolution.group_id() != &record.group_id {
                    report.warnings.push(format!(
                        "record {seq}: logged group {} now resolves to {}",
                        record.group_id,
                        prepared.resolution.group_id()
                    ));
                }
                corpus.commit(prepared, record.received_at);
                report.replayed += 1;
            }
            Err(e) => {
                report.warnings.push(format!("record {seq}: {e}"));
                report.skipped += 1;
            }
        },
        LogEntry::Selection(sel) => {
            let indices: Vec<i64> = sel.selected_indices.iter().map(|&i| i as i64).collect();
            match corpus.validate_selection(&sel.group_id, &indices) {
                Ok(selected_indices) => {
                    corpus.apply_selection(FrameSelection {
                        group_id: sel.group_id,
                        selected_indices,
                        updated_at: sel.updated_at,
                        author: sel.author,
                    });
                    report.replayed += 1;
                }
                Err(e) => {
                    report.warnings.push(format!("record {seq}: {e}"));
                    report.skipped += 1;
                }
            }
        }
    }
    corpus.set_last_seq(seq);
}

fn recover_inner(log_path: &Path, snapshot_path: &Path) -> Result<Recovered> {
    let mut report = RecoveryReport::default();
    let mut corpus = match load_snapshot(snapshot_path) {
        Ok(Some(corpus)) => {
            report.snapshot_seq = Some(corpus.last_seq());
            corpus
        }
        Ok(None) => Corpus::new(),
        Err(e @ Error::CorruptSnapshot { .. }) => {
            report.warnings.push(format!("{e}; replaying the full log"));
            Corpus::new()
        }
        Err(e) => return Err(e),
    };
    let upto = corpus.last_seq();
    let scan = scan_log(log_path, |entry| {
        if entry.seq() > upto {
            replay_entry(&mut corpus, entry, &mut report);
        }
        Ok(())
    })?;
    report.discarded_tail_bytes = scan.discarded_tail_bytes;
    if scan.discarded_tail_bytes > 0 {
        report.warnings.push(format!(
            "{}: ignored {} bytes of incomplete trailing record",
            log_path.display(),
            scan.discarded_tail_bytes
        ));
    }
    for w in &report.warnings {
        ::log::warn!("{w}");
    }
    Ok(Recovered {
        corpus,
        report,
        log_valid_len: scan.valid_len,
        log_last_seq: scan.last_seq,
    })
}

/// Rebuilds state from the given files without modifying them. Either file
/// may be absent; a corrupt snapshot falls back to a full log replay.
pub fn recover(log_path: &Path, snapshot_path: &Path) -> Result<(Corpus, RecoveryReport)> {
    recover_inner(log_path, snapshot_path).map(|r| (r.corpus, r.report))
}

/// Read-only view of a data directory. A missing directory reads as empty.
pub fn load_dir(dir: &Path) -> Result<(Corpus, RecoveryReport)> {
    recover(&dir.join(LOG_FILE), &dir.join(SNAPSHOT_FILE))
}

/// The single writer of a data directory.
pub struct Store {
    dir: PathBuf,
    corpus: Corpus,
    log: LogWriter,
    _lock: File,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("dir", &self.dir)
            .field("last_seq", &self.corpus.last_seq())
            .finish_non_exhaustive()
    }
}

impl Store {
    /// Creates the directory if needed, takes the writer lock and recovers.
    pub fn open(dir: impl Into<PathBuf>, options: StoreOptions) -> Result<(Self, RecoveryReport)> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let lock = acquire_lock(&dir)?;
        let log_path = dir.join(LOG_FILE);
        let recovered = recover_inner(&log_path, &dir.join(SNAPSHOT_FILE))?;
        let next_seq = recovered.log_last_seq.max(recovered.corpus.last_seq()) + 1;
        let log = LogWriter::open(&log_path, recovered.log_valid_len, next_seq, options.fsync)?;
        Ok((
            Store {
                dir,
                corpus: recovered.corpus,
                log,
                _lock: lock,
            },
            recovered.report,
        ))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    /// Parses, dedups, registers and logs one report.
    pub fn ingest(&mut self, report: &RawReport) -> Result<(IngestOutcome, StackTrace)> {
        let trace = parser::parse(report)?;
        let outcome = self.ingest_parsed(trace.clone(), report)?;
        Ok((outcome, trace))
    }

    /// Records an already parsed trace. The log record is written before the
    /// in-memory state changes, so a failed write leaves no trace behind.
    pub fn ingest_parsed(&mut self, trace: StackTrace, report: &RawReport) -> Result<IngestOutcome> {
        let format = trace.source_format;
        let prepared = self.corpus.prepare(trace);
        let seq = self.log.next_seq();
        self.log.append(&LogEntry::Report(LogRecord {
            seq,
            received_at: report.received_at,
            product: report.product.clone(),
            format,
            raw_text: report.text().to_string(),
            group_id: prepared.resolution.group_id().clone(),
            is_new_group: prepared.resolution.is_new(),
        }))?;
        let outcome = self.corpus.commit(prepared, report.received_at);
        self.corpus.set_last_seq(seq);
        Ok(outcome)
    }

    /// Replaces the group's selection (last writer wins). An empty index set
    /// is an explicit clear.
    pub fn save_selection(
        &mut self,
        group_id: &GroupId,
        indices: &[i64],
        author: Option<String>,
        now: Timestamp,
    ) -> Result<FrameSelection> {
        let selected_indices = self.corpus.validate_selection(group_id, indices)?;
        let now = crate::truncate_to_seconds(now);
        let seq = self.log.next_seq();
        self.log.append(&LogEntry::Selection(SelectionRecord {
            seq,
            group_id: group_id.clone(),
            selected_indices: selected_indices.clone(),
            updated_at: now,
            author: author.clone(),
        }))?;
        let selection = FrameSelection {
            group_id: group_id.clone(),
            selected_indices,
            updated_at: now,
            author,
        };
        self.corpus.apply_selection(selection.clone());
        self.corpus.set_last_seq(seq);
        Ok(selection)
    }

    pub fn write_snapshot(&self) -> Result<Snapshot> {
        write_snapshot(&self.dir.join(SNAPSHOT_FILE), &self.corpus)
    }
}

fn acquire_lock(dir: &Path) -> Result<File> {
    let path = dir.join(LOCK_FILE);
    let file = File::options()
        .create(true)
        .truncate(false)
        .write(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    match file.try_lock() {
        Ok(()) => Ok(file),
        Err(std::fs::TryLockError::WouldBlock) => Err(Error::Locked(dir.to_path_buf())),
        Err(std::fs::TryLockError::Error(e)) => Err(Error::io(&path, e)),
    }
}

/// Whether another process currently holds the writer lock of `dir`.
pub fn is_locked(dir: &Path) -> bool {
    let Ok(file) = File::open(dir.join(LOCK_FILE)) else {
        return false;
    };
    matches!(file.try_lock_shared(), Err(std::fs::TryLockError::WouldBlock))
}
