// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! A scripted mix of reports and selections replayed against a store.

use std::path::Path;

use rand::Rng;
use tracelight::parser::{FormatHint, RawReport};
use tracelight::{Corpus, Error, GroupId, Store, StoreOptions, Timestamp};

use super::synth::{rng, Vocab, Workload};

pub fn t(secs: i64) -> Timestamp {
    chrono::DateTime::from_timestamp(1_700_000_000 + secs, 0).unwrap()
}

#[derive(Debug, Clone)]
pub enum Op {
    Report(String),
    /// Selection for the group of the `nth` distinct trace seen so far.
    Select {
        nth: usize,
        indices: Vec<i64>,
        author: Option<String>,
    },
}

/// Reports interleaved with selections on groups that already exist.
pub fn script(seed: u64, n_reports: usize) -> Vec<Op> {
    let vocab = Vocab::new(seed, 300);
    let mut r = rng(seed ^ 0x5eed);
    let work = Workload::new(&mut r, &vocab, n_reports, n_reports / 3, 1..=20);
    let mut ops = Vec::new();
    let mut distinct = std::collections::HashSet::new();
    for &i in &work.order {
        ops.push(Op::Report(work.traces[i].render(&vocab, &mut r)));
        distinct.insert(i);
        if r.gen_bool(0.2) {
            let n = r.gen_range(0..4);
            ops.push(Op::Select {
                nth: r.gen_range(0..distinct.len()),
                indices: (0..n).map(|_| r.gen_range(0..25)).collect(),
                author: r.gen_bool(0.5).then(|| format!("dev{}", r.gen_range(0..5))),
            });
        }
    }
    ops
}

/// Applies one op; selections that address a missing frame are rejected by
/// the store and leave no record, like an API 400.
pub fn apply(store: &mut Store, op: &Op, step: usize, groups: &mut Vec<GroupId>) {
    match op {
        Op::Report(text) => {
            let report = RawReport::new(text.as_str(), FormatHint::Auto, None, t(step as i64)).unwrap();
            let (out, _) = store.ingest(&report).unwrap();
            if out.is_new {
                groups.push(out.group_id);
            }
        }
        Op::Select { nth, indices, author } => {
            let id = &groups[*nth % groups.len()];
            match store.save_selection(id, indices, author.clone(), t(step as i64)) {
                Ok(_) | Err(Error::IndexOutOfRange { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

pub fn open(dir: &Path) -> Store {
    Store::open(dir, StoreOptions::default()).unwrap().0
}

/// Runs the script with a snapshot after `snapshot_at` ops (if any) and
/// returns the final in-memory corpus.
pub fn run(dir: &Path, ops: &[Op], snapshot_at: Option<usize>) -> Corpus {
    let mut store = open(dir);
    let mut groups = Vec::new();
    for (step, op) in ops.iter().enumerate() {
        if snapshot_at == Some(step) {
            store.write_snapshot().unwrap();
        }
        apply(&mut store, op, step, &mut groups);
    }
    if snapshot_at == Some(ops.len()) {
        store.write_snapshot().unwrap();
    }
    store.corpus().clone()
}
