// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Picks the rarest frames of a trace as suggestions.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::Serialize;

use crate::idf::CorpusStats;
use crate::normalize::FrameKey;
use crate::{Error, Result, Timestamp};

/// Number of frames suggested unless configured otherwise.
pub const DEFAULT_K: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameScore {
    pub index: usize,
    pub key: FrameKey,
    pub idf: f64,
    pub df: u64,
    pub n_groups_at_scoring: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuggestionSet {
    /// Best first.
    pub suggested: Vec<FrameScore>,
    pub k_requested: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub computed_at: Option<Timestamp>,
}

impl SuggestionSet {
    pub fn indices(&self) -> Vec<usize> {
        self.suggested.iter().map(|s| s.index).collect()
    }

    pub fn stamped(mut self, at: Timestamp) -> Self {
        self.computed_at = Some(at);
        self
    }
}

/// One score per distinct key, placed at the key's lowest index.
pub fn score_trace(frame_keys: &[FrameKey], stats: &CorpusStats) -> Vec<FrameScore> {
    let n_groups = stats.n_groups();
    let mut seen = HashSet::with_capacity(frame_keys.len());
    frame_keys
        .iter()
        .enumerate()
        .filter(|(_, key)| seen.insert(*key))
        .map(|(index, key)| {
            let df = stats.df(key);
            FrameScore {
                index,
                key: key.clone(),
                idf: crate::idf::idf(n_groups, df),
                df,
                n_groups_at_scoring: n_groups,
            }
        })
        .collect()
}

/// Rank order: higher idf, then lower index, then smaller key.
pub fn rank_order(a: &FrameScore, b: &FrameScore) -> Ordering {
    b.idf
        .total_cmp(&a.idf)
        .then(a.index.cmp(&b.index))
        .then_with(|| a.key.cmp(&b.key))
}

pub fn suggest_top_k(scores: &[FrameScore], k: usize) -> Result<SuggestionSet> {
    if k < 1 {
        return Err(Error::InvalidK(k));
    }
    let mut ranked = scores.to_vec();
    if k < ranked.len() {
        ranked.select_nth_unstable_by(k - 1, rank_order);
        ranked.truncate(k);
    }
    ranked.sort_unstable_by(rank_order);
    Ok(SuggestionSet {
        suggested: ranked,
        k_requested: k,
        computed_at: None,
    })
}
