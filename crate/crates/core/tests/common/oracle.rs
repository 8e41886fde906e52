// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Slow, obviously-correct reference implementations.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use tracelight::{CorpusStats, FrameKey};

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn canonical(exception_types: &[String], keys: &[String]) -> String {
    format!("{}\n--\n{}", exception_types.join("\n"), keys.join("\n"))
}

pub fn idf(n: u64, df: u64) -> f64 {
    (((1 + n) as f64) / ((1 + df) as f64)).ln() + 1.0
}

/// Document frequency by rescanning every document.
pub fn df_recount<'a>(documents: impl IntoIterator<Item = &'a [String]>) -> BTreeMap<String, u64> {
    let mut df = BTreeMap::new();
    for doc in documents {
        let distinct: HashSet<&String> = doc.iter().collect();
        for key in distinct {
            *df.entry(key.clone()).or_insert(0) += 1;
        }
    }
    df
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pick {
    pub index: usize,
    pub key: String,
    pub idf: f64,
}

/// Top-k by exhaustive comparison: keep each key's first index, then sort
/// everything by (idf desc, index asc, key asc) and cut.
pub fn top_k(keys: &[String], idf_of: impl Fn(&str) -> f64, k: usize) -> Vec<Pick> {
    let mut first: HashMap<&str, usize> = HashMap::new();
    for (i, key) in keys.iter().enumerate() {
        first.entry(key.as_str()).or_insert(i);
    }
    let mut all: Vec<Pick> = first
        .into_iter()
        .map(|(key, index)| Pick {
            index,
            key: key.to_string(),
            idf: idf_of(key),
        })
        .collect();
    // Bubble sort on purpose: no shared comparator code with the crate.
    let n = all.len();
    for i in 0..n {
        for j in 0..n - 1 - i {
            let (a, b) = (&all[j], &all[j + 1]);
            let b_first = b.idf > a.idf
                || (b.idf == a.idf && b.index < a.index)
                || (b.idf == a.idf && b.index == a.index && b.key < a.key);
            if b_first {
                all.swap(j, j + 1);
            }
        }
    }
    all.truncate(k);
    all
}

/// Groups report keys by canonical string, counting occurrences in first-seen
/// order.
pub fn dedup_counts(canonicals: &[String]) -> Vec<(String, u64)> {
    let mut order: Vec<(String, u64)> = Vec::new();
    let mut pos: HashMap<String, usize> = HashMap::new();
    for c in canonicals {
        match pos.get(c) {
            Some(&i) => order[i].1 += 1,
            None => {
                pos.insert(c.clone(), order.len());
                order.push((c.clone(), 1));
            }
        }
    }
    order
}

/// Keys from a small alphabet so lists repeat keys, plus stats whose df values
/// collide often so idf ties are common.
pub fn random_ranking_case(r: &mut rand_chacha::ChaCha8Rng) -> (Vec<String>, CorpusStats, usize) {
    let alphabet = r.gen_range(1..40);
    let len = r.gen_range(1..=40);
    let keys: Vec<String> = (0..len)
        .map(|_| format!("pkg.C{}.m", r.gen_range(0..alphabet)))
        .collect();
    let n_groups = r.gen_range(1..60u64);
    let df_levels = r.gen_range(1..4u64);
    let mut df = Vec::new();
    for a in 0..alphabet {
        if r.gen_bool(0.8) {
            let d = (r.gen_range(0..df_levels) * 7 % n_groups) + 1;
            df.push((FrameKey::new(format!("pkg.C{a}.m")), d.min(n_groups)));
        }
    }
    let stats = CorpusStats::from_parts(n_groups, n_groups + 5, df).unwrap();
    (keys, stats, r.gen_range(1..=6))
}
