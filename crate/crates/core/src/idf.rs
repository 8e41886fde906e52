// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Document-frequency statistics over trace groups.
//!
//! A "document" is a deduplicated trace group, not a raw report, so a single
//! bug reported a million times still counts once for each of its frames.

use std::collections::{HashMap, HashSet};

use crate::normalize::FrameKey;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    n_groups: u64,
    n_reports: u64,
    df: HashMap<FrameKey, u64>,
}

impl CorpusStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds stats from persisted counters. Entries with a zero or
    /// out-of-range frequency are rejected.
    pub fn from_parts(
        n_groups: u64,
        n_reports: u64,
        df: impl IntoIterator<Item = (FrameKey, u64)>,
    ) -> Result<Self, String> {
        if n_groups > n_reports {
            return Err(format!("n_groups {n_groups} exceeds n_reports {n_reports}"));
        }
        let mut map = HashMap::new();
        for (key, count) in df {
            if count == 0 || count > n_groups {
                return Err(format!("df of `{key}` is {count}, outside 1..={n_groups}"));
            }
            if map.insert(key.clone(), count).is_some() {
                return Err(format!("duplicate df entry for `{key}`"));
            }
        }
        Ok(CorpusStats {
            n_groups,
            n_reports,
            df: map,
        })
    }

    /// Adds one new document. Call once per newly created group, never for
    /// duplicates of an existing one.
    pub fn register_group(&mut self, distinct_keys: &HashSet<FrameKey>) {
        self.n_groups += 1;
        for key in distinct_keys {
            *self.df.entry(key.clone()).or_insert(0) += 1;
        }
    }

    pub fn record_report(&mut self) {
        self.n_reports += 1;
    }

    pub fn n_groups(&self) -> u64 {
        self.n_groups
    }

    pub fn n_reports(&self) -> u64 {
        self.n_reports
    }

    pub fn df(&self, key: &FrameKey) -> u64 {
        self.df.get(key).copied().unwrap_or(0)
    }

    pub fn idf(&self, key: &FrameKey) -> f64 {
        idf(self.n_groups, self.df(key))
    }

    /// `(n_groups, n_reports, distinct_frame_count)`.
    pub fn corpus_size(&self) -> (u64, u64, usize) {
        (self.n_groups, self.n_reports, self.df.len())
    }

    pub fn df_entries(&self) -> impl Iterator<Item = (&FrameKey, u64)> {
        self.df.iter().map(|(k, &v)| (k, v))
    }

    /// `(key, df)` sorted by key.
    pub fn sorted_df_entries(&self) -> Vec<(FrameKey, u64)> {
        let mut entries: Vec<_> = self.df.iter().map(|(k, &v)| (k.clone(), v)).collect();
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        entries
    }
}

/// Smoothed inverse document frequency, `ln((1 + N) / (1 + df)) + 1`.
///
/// Defined for unseen keys (`df = 0`), at least 1 whenever `df <= N`, and
/// strictly decreasing in `df`.
pub fn idf(n_groups: u64, df: u64) -> f64 {
    ((1 + n_groups) as f64 / (1 + df) as f64).ln() + 1.0
}
