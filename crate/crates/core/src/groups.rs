// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact-match deduplication of traces into groups.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::normalize::{FrameKey, TraceFingerprint};
use crate::parser::StackTrace;
use crate::Timestamp;

/// Fingerprint hash as 16 lowercase hex digits, plus `-<n>` for the n-th
/// group whose different canonical string hashed to the same value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupId(String);

impl GroupId {
    pub fn new(id: impl Into<String>) -> Self {
        GroupId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for GroupId {
    fn from(s: &str) -> Self {
        GroupId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceGroup {
    pub group_id: GroupId,
    pub fingerprint: TraceFingerprint,
    pub representative: StackTrace,
    /// Aligned with `representative.all_frames()`.
    pub frame_keys: Vec<FrameKey>,
    pub distinct_keys: HashSet<FrameKey>,
    pub occurrence_count: u64,
    pub first_seen: Timestamp,
    pub last_seen: Timestamp,
}

impl TraceGroup {
    pub fn new(
        group_id: GroupId,
        fingerprint: TraceFingerprint,
        representative: StackTrace,
        frame_keys: Vec<FrameKey>,
        occurrence_count: u64,
        first_seen: Timestamp,
        last_seen: Timestamp,
    ) -> Self {
        let distinct_keys = frame_keys.iter().cloned().collect();
        TraceGroup {
            group_id,
            fingerprint,
            representative,
            frame_keys,
            distinct_keys,
            occurrence_count,
            first_seen,
            last_seen,
        }
    }

    pub fn exception_type(&self) -> &str {
        &self.representative.root().exception_type
    }

    pub fn frame_count(&self) -> usize {
        self.frame_keys.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Existing(GroupId),
    New(GroupId),
}

impl Resolution {
    pub fn group_id(&self) -> &GroupId {
        match self {
            Resolution::Existing(id) | Resolution::New(id) => id,
        }
    }

    pub fn is_new(&self) -> bool {
        matches!(self, Resolution::New(_))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupIndex {
    groups: HashMap<GroupId, TraceGroup>,
    by_hash: HashMap<u64, Vec<GroupId>>,
}

impl GroupIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Where a trace with this fingerprint belongs, without changing anything.
    pub fn resolve(&self, fingerprint: &TraceFingerprint) -> Resolution {
        let bucket = self.by_hash.get(&fingerprint.hash64).map(Vec::as_slice).unwrap_or(&[]);
        for id in bucket {
            if self.groups[id].fingerprint.canonical_string == fingerprint.canonical_string {
                return Resolution::Existing(id.clone());
            }
        }
        let id = match bucket.len() {
            0 => fingerprint.hex(),
            n => format!("{}-{n}", fingerprint.hex()),
        };
        Resolution::New(GroupId(id))
    }

    /// Counts one more occurrence of an existing group.
    pub fn touch(&mut self, id: &GroupId, now: Timestamp) -> Option<&TraceGroup> {
        let group = self.groups.get_mut(id)?;
        group.occurrence_count += 1;
        group.last_seen = group.last_seen.max(now);
        Some(group)
    }

    pub fn insert(&mut self, group: TraceGroup) {
        let bucket = self.by_hash.entry(group.fingerprint.hash64).or_default();
        if !bucket.contains(&group.group_id) {
            bucket.push(group.group_id.clone());
        }
        self.groups.insert(group.group_id.clone(), group);
    }

    /// Groups `trace` with its exact duplicates, creating a group on first
    /// sight. Returns the group and whether it was created.
    pub fn dedup_ingest(
        &mut self,
        trace: StackTrace,
        frame_keys: Vec<FrameKey>,
        fingerprint: TraceFingerprint,
        now: Timestamp,
    ) -> (&TraceGroup, bool) {
        match self.resolve(&fingerprint) {
            Resolution::Existing(id) => (self.touch(&id, now).expect("resolved group exists"), false),
            Resolution::New(id) => {
                let group = TraceGroup::new(id.clone(), fingerprint, trace, frame_keys, 1, now, now);
                self.insert(group);
                (&self.groups[&id], true)
            }
        }
    }

    pub fn get(&self, id: &GroupId) -> Option<&TraceGroup> {
        self.groups.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TraceGroup> {
        self.groups.values()
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}
