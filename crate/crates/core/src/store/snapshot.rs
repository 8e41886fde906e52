// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Point-in-time image of the corpus, `snapshot.json`.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::groups::{GroupId, GroupIndex, TraceGroup};
use crate::idf::CorpusStats;
use crate::normalize::{FrameKey, TraceFingerprint};
use crate::parser::StackTrace;
use crate::store::FrameSelection;
use crate::{Error, Result, Timestamp};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub upto_seq: u64,
    pub n_groups: u64,
    pub n_reports: u64,
    /// Sorted by key.
    pub df_entries: Vec<(FrameKey, u64)>,
    /// Sorted by group id.
    pub groups: Vec<GroupRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub group_id: GroupId,
    pub hash64: u64,
    pub canonical_string: String,
    pub representative: StackTrace,
    pub frame_keys: Vec<FrameKey>,
    pub occurrence_count: u64,
    pub first_seen: Timestamp,
    pub last_seen: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<SavedSelection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedSelection {
    pub selected_indices: Vec<usize>,
    pub updated_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
}

impl Snapshot {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let stats = corpus.stats();
        let mut groups: Vec<GroupRecord> = corpus
            .groups()
            .iter()
            .map(|g| GroupRecord {
                group_id: g.group_id.clone(),
                hash64: g.fingerprint.hash64,
                canonical_string: g.fingerprint.canonical_string.clone(),
                representative: g.representative.clone(),
                frame_keys: g.frame_keys.clone(),
                occurrence_count: g.occurrence_count,
                first_seen: g.first_seen,
                last_seen: g.last_seen,
                selection: corpus.selection(&g.group_id).map(|s| SavedSelection {
                    selected_indices: s.selected_indices.clone(),
                    updated_at: s.updated_at,
                    author: s.author.clone(),
                }),
            })
            .collect();
        groups.sort_unstable_by(|a, b| a.group_id.cmp(&b.group_id));
        Snapshot {
            version: SNAPSHOT_VERSION,
            upto_seq: corpus.last_seq(),
            n_groups: stats.n_groups(),
            n_reports: stats.n_reports(),
            df_entries: stats.sorted_df_entries(),
            groups,
        }
    }

    /// Rebuilds the corpus, checking every derived quantity against the
    /// stored groups.
    pub fn into_corpus(self) -> Result<Corpus, String> {
        if self.version != SNAPSHOT_VERSION {
            return Err(format!("unsupported snapshot version {}", self.version));
        }
        if self.n_groups != self.groups.len() as u64 {
            return Err(format!(
                "n_groups is {} but {} groups are stored",
                self.n_groups,
                self.groups.len()
            ));
        }
        let stats = CorpusStats::from_parts(self.n_groups, self.n_reports, self.df_entries)?;
        let mut recount: HashMap<&FrameKey, u64> = HashMap::new();
        let mut index = GroupIndex::new();
        let mut selections = HashMap::new();
        let mut occurrences = 0u64;
        for g in self.groups {
            let fingerprint = TraceFingerprint::from_canonical(g.canonical_string);
            if fingerprint.hash64 != g.hash64 {
                return Err(format!("group {} hash does not match its canonical string", g.group_id));
            }
            if g.frame_keys.len() != g.representative.len() || g.representative.segments.is_empty() {
                return Err(format!("group {} frame keys do not match its trace", g.group_id));
            }
            if g.occurrence_count == 0 {
                return Err(format!("group {} has no occurrences", g.group_id));
            }
            occurrences += g.occurrence_count;
            if let Some(sel) = g.selection {
                if sel.selected_indices.iter().any(|&i| i >= g.frame_keys.len()) {
                    return Err(format!("group {} selection is out of range", g.group_id));
                }
                selections.insert(
                    g.group_id.clone(),
                    FrameSelection {
                        group_id: g.group_id.clone(),
                        selected_indices: sel.selected_indices,
                        updated_at: sel.updated_at,
                        author: sel.author,
                    },
                );
            }
            if index.get(&g.group_id).is_some() {
                return Err(format!("duplicate group {}", g.group_id));
            }
            index.insert(TraceGroup::new(
                g.group_id,
                fingerprint,
                g.representative,
                g.frame_keys,
                g.occurrence_count,
                g.first_seen,
                g.last_seen,
            ));
        }
        if occurrences != self.n_reports {
            return Err(format!(
                "occurrence counts sum to {occurrences}, n_reports is {}",
                self.n_reports
            ));
        }
        for group in index.iter() {
            let distinct: &HashSet<FrameKey> = &group.distinct_keys;
            for key in distinct {
                *recount.entry(key).or_insert(0) += 1;
            }
        }
        let (_, _, distinct_frames) = stats.corpus_size();
        if recount.len() != distinct_frames || recount.iter().any(|(key, &count)| stats.df(key) != count) {
            return Err("df entries disagree with the stored groups".to_string());
        }
        Ok(Corpus::from_parts(index, stats, selections, self.upto_seq))
    }
}

/// Writes `corpus` to `path` atomically: a sibling temp file is written,
/// synced and renamed over the target.
pub fn write_snapshot(path: &Path, corpus: &Corpus) -> Result<Snapshot> {
    let snapshot = Snapshot::from_corpus(corpus);
    let tmp = path.with_extension("json.tmp");
    let write = || -> std::io::Result<()> {
        let file = File::create(&tmp)?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer(&mut out, &snapshot)?;
        out.write_all(b"\n")?;
        let file = out.into_inner().map_err(|e| e.into_error())?;
        file.sync_all()?;
        std::fs::rename(&tmp, path)?;
        if let Some(dir) = path.parent() {
            if let Ok(d) = File::open(dir) {
                let _ = d.sync_all();
            }
        }
        Ok(())
    };
    write().map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })?;
    Ok(snapshot)
}

/// `Ok(None)` when no snapshot exists.
pub fn load_snapshot(path: &Path) -> Result<Option<Corpus>> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(path, e)),
    };
    let corrupt = |reason: String| Error::CorruptSnapshot {
        path: path.to_path_buf(),
        reason,
    };
    let snapshot: Snapshot = serde_json::from_slice(&bytes).map_err(|e| corrupt(e.to_string()))?;
    snapshot.into_corpus().map(Some).map_err(corrupt)
}
