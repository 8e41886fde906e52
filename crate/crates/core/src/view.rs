// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON shapes shared by the HTTP API, `tracelight score --json` and the C ABI.

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::groups::{GroupId, TraceGroup};
use crate::highlight::SuggestionSet;
use crate::normalize::{assign_subsystems, FrameKey, SubsystemRule};
use crate::parser::StackTrace;
use crate::store::FrameSelection;
use crate::{Result, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameView {
    pub index: usize,
    pub location: String,
    pub function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsystem: Option<String>,
    pub key: FrameKey,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionView {
    pub index: usize,
    pub key: FrameKey,
    pub idf: f64,
    pub df: u64,
    /// Corpus size the score was computed against.
    pub n_groups: u64,
    /// 1 is the strongest suggestion.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SelectionView {
    pub selected_indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub updated_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
}

impl From<Option<&FrameSelection>> for SelectionView {
    fn from(sel: Option<&FrameSelection>) -> Self {
        sel.map(|s| SelectionView {
            selected_indices: s.selected_indices.clone(),
            updated_at: Some(s.updated_at),
            author: s.author.clone(),
        })
        .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group_id: GroupId,
    pub exception_type: String,
    pub top_frame_key: FrameKey,
    pub occurrence_count: u64,
    pub first_seen: Timestamp,
    pub last_seen: Timestamp,
    pub has_selection: bool,
}

impl GroupSummary {
    pub fn new(group: &TraceGroup, selection: Option<&FrameSelection>) -> Self {
        GroupSummary {
            group_id: group.group_id.clone(),
            exception_type: group.exception_type().to_string(),
            top_frame_key: group.frame_keys[0].clone(),
            occurrence_count: group.occurrence_count,
            first_seen: group.first_seen,
            last_seen: group.last_seen,
            has_selection: selection.is_some_and(|s| !s.selected_indices.is_empty()),
        }
    }
}

/// Frames and suggestions of one trace; the body of `score --json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTrace {
    pub frames: Vec<FrameView>,
    pub suggestions: Vec<SuggestionView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDetail {
    pub group: GroupSummary,
    pub frames: Vec<FrameView>,
    pub suggestions: Vec<SuggestionView>,
    pub selection: SelectionView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestResponse {
    pub group_id: GroupId,
    pub is_new_group: bool,
    pub occurrence_count: u64,
    pub frames: Vec<FrameView>,
    pub suggestions: Vec<SuggestionView>,
    pub selection: SelectionView,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsView {
    pub n_groups: u64,
    pub n_reports: u64,
    pub distinct_frames: usize,
}

impl StatsView {
    pub fn of(corpus: &Corpus) -> Self {
        let (n_groups, n_reports, distinct_frames) = corpus.stats().corpus_size();
        StatsView {
            n_groups,
            n_reports,
            distinct_frames,
        }
    }
}

pub fn frame_views(trace: &StackTrace, keys: &[FrameKey], rules: &[SubsystemRule]) -> Vec<FrameView> {
    let subsystems = assign_subsystems(trace, rules);
    trace
        .all_frames()
        .iter()
        .zip(keys)
        .zip(subsystems)
        .enumerate()
        .map(|(index, ((frame, key), subsystem))| FrameView {
            index,
            location: frame.location.clone(),
            function: frame.function.clone(),
            line: frame.line,
            subsystem,
            key: key.clone(),
        })
        .collect()
}

pub fn suggestion_views(set: &SuggestionSet) -> Vec<SuggestionView> {
    set.suggested
        .iter()
        .enumerate()
        .map(|(i, s)| SuggestionView {
            index: s.index,
            key: s.key.clone(),
            idf: s.idf,
            df: s.df,
            n_groups: s.n_groups_at_scoring,
            rank: i + 1,
        })
        .collect()
}

/// Scores a trace against the corpus without registering it.
pub fn score(corpus: &Corpus, trace: &StackTrace, rules: &[SubsystemRule], k: usize) -> Result<ScoredTrace> {
    let keys = crate::normalize::frame_keys(trace);
    let set = corpus.suggest(&keys, k)?;
    Ok(ScoredTrace {
        frames: frame_views(trace, &keys, rules),
        suggestions: suggestion_views(&set),
    })
}

pub fn group_detail(corpus: &Corpus, group: &TraceGroup, rules: &[SubsystemRule], k: usize) -> Result<GroupDetail> {
    let set = corpus.suggest(&group.frame_keys, k)?;
    let selection = corpus.selection(&group.group_id);
    Ok(GroupDetail {
        group: GroupSummary::new(group, selection),
        frames: frame_views(&group.representative, &group.frame_keys, rules),
        suggestions: suggestion_views(&set),
        selection: selection.into(),
    })
}

/// Groups ordered by `last_seen` descending, then `group_id` ascending.
pub fn group_summaries(corpus: &Corpus) -> Vec<GroupSummary> {
    let mut out: Vec<GroupSummary> = corpus
        .groups()
        .iter()
        .map(|g| GroupSummary::new(g, corpus.selection(&g.group_id)))
        .collect();
    out.sort_unstable_by(|a, b| b.last_seen.cmp(&a.last_seen).then_with(|| a.group_id.cmp(&b.group_id)));
    out
}
