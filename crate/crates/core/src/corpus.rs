// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! In-memory triage state: groups, corpus statistics and manual selections.
//!
//! Every mutation goes through [`Corpus::commit`] or
//! [`Corpus::apply_selection`], whether it comes from a live request or from
//! log replay, so both paths produce the same state.

use std::collections::HashMap;

use crate::groups::{GroupId, GroupIndex, Resolution, TraceGroup};
use crate::highlight::{score_trace, suggest_top_k, SuggestionSet};
use crate::idf::CorpusStats;
use crate::normalize::{fingerprint_with_keys, frame_keys, FrameKey, TraceFingerprint};
use crate::parser::StackTrace;
use crate::store::FrameSelection;
use crate::{Error, Result, Timestamp};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    groups: GroupIndex,
    stats: CorpusStats,
    selections: HashMap<GroupId, FrameSelection>,
    last_seq: u64,
}

/// A parsed trace with its keys, fingerprint and target group, computed
/// before anything is written.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub trace: StackTrace,
    pub keys: Vec<FrameKey>,
    pub fingerprint: TraceFingerprint,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestOutcome {
    pub group_id: GroupId,
    pub is_new: bool,
    pub occurrence_count: u64,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn from_parts(
        groups: GroupIndex,
        stats: CorpusStats,
        selections: HashMap<GroupId, FrameSelection>,
        last_seq: u64,
    ) -> Self {
        Corpus {
            groups,
            stats,
            selections,
            last_seq,
        }
    }

    pub fn prepare(&self, trace: StackTrace) -> Prepared {
        let keys = frame_keys(&trace);
        let fingerprint = fingerprint_with_keys(&trace, &keys);
        let resolution = self.groups.resolve(&fingerprint);
        Prepared {
            trace,
            keys,
            fingerprint,
            resolution,
        }
    }

    /// Dedups the prepared trace and, when it opens a new group, registers
    /// that group as a document.
    pub fn commit(&mut self, prepared: Prepared, now: Timestamp) -> IngestOutcome {
        let Prepared {
            trace,
            keys,
            fingerprint,
            ..
        } = prepared;
        let (group, is_new) = self.groups.dedup_ingest(trace, keys, fingerprint, now);
        if is_new {
            self.stats.register_group(&group.distinct_keys);
        }
        self.stats.record_report();
        IngestOutcome {
            group_id: group.group_id.clone(),
            is_new,
            occurrence_count: group.occurrence_count,
        }
    }

    pub fn ingest(&mut self, trace: StackTrace, now: Timestamp) -> IngestOutcome {
        let prepared = self.prepare(trace);
        self.commit(prepared, now)
    }

    /// Sorted, deduplicated indices if every one addresses a frame of the
    /// group's representative trace.
    pub fn validate_selection(&self, group_id: &GroupId, indices: &[i64]) -> Result<Vec<usize>> {
        let group = self
            .groups
            .get(group_id)
            .ok_or_else(|| Error::UnknownGroup(group_id.to_string()))?;
        let len = group.frame_count();
        let mut out = Vec::with_capacity(indices.len());
        for &index in indices {
            match usize::try_from(index) {
                Ok(i) if i < len => out.push(i),
                _ => return Err(Error::IndexOutOfRange { index, len }),
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    pub fn apply_selection(&mut self, selection: FrameSelection) {
        self.selections.insert(selection.group_id.clone(), selection);
    }

    pub fn selection(&self, group_id: &GroupId) -> Option<&FrameSelection> {
        self.selections.get(group_id)
    }

    pub fn selections(&self) -> impl Iterator<Item = &FrameSelection> {
        self.selections.values()
    }

    pub fn group(&self, group_id: &GroupId) -> Option<&TraceGroup> {
        self.groups.get(group_id)
    }

    pub fn groups(&self) -> &GroupIndex {
        &self.groups
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    /// Suggestions for the given keys against the current statistics.
    pub fn suggest(&self, keys: &[FrameKey], k: usize) -> Result<SuggestionSet> {
        suggest_top_k(&score_trace(keys, &self.stats), k)
    }

    /// Sequence number of the last log record reflected in this state.
    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    pub(crate) fn set_last_seq(&mut self, seq: u64) {
        self.last_seq = seq;
    }
}
