// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic crash reports.
//!
//! A [`SynthTrace`] is a logical trace: exception types plus frames drawn from
//! a fixed [`Vocab`]. It knows its own normalized keys, so tests can build the
//! expected fingerprint without going through the parser. [`SynthTrace::render`]
//! prints it with fresh volatile details (line numbers, lambda counters,
//! interpreter prefixes, messages), so two renderings of one logical trace
//! differ as text but must land in the same group.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lang {
    Jvm,
    Python,
}

#[derive(Debug, Clone)]
struct JvmFrame {
    class: String,
    method: String,
    lambda: bool,
}

#[derive(Debug, Clone)]
struct PyFrame {
    rel: String,
    func: String,
    site: bool,
}

const ORGS: &[&str] = &["acme", "initech", "globex", "umbrella", "hooli", "vandelay"];
const MODS: &[&str] = &["billing", "auth", "search", "ingest", "render", "sync", "net", "store"];
const NOUNS: &[&str] = &[
    "Invoice", "Session", "Index", "Queue", "Parser", "Cache", "Socket", "Pool", "Worker",
];
const VERBS: &[&str] = &[
    "run", "load", "apply", "flush", "resolve", "visit", "emit", "handle", "merge",
];

const JVM_TYPES: &[&str] = &[
    "java.lang.IllegalStateException",
    "java.lang.NullPointerException",
    "java.io.IOException",
    "java.util.concurrent.TimeoutException",
    "com.acme.errors.ServiceException",
];
const PY_TYPES: &[&str] = &[
    "ValueError",
    "KeyError",
    "RuntimeError",
    "OSError",
    "app.errors.TaskFailed",
];

#[derive(Debug, Clone)]
pub struct Vocab {
    jvm: Vec<JvmFrame>,
    py: Vec<PyFrame>,
}

impl Vocab {
    pub fn new(seed: u64, size: usize) -> Self {
        let mut rng = rng(seed);
        let mut jvm = Vec::with_capacity(size);
        let mut py = Vec::with_capacity(size);
        let mut seen = HashSet::new();
        while jvm.len() < size {
            let class = format!(
                "com.{}.{}.{}{}",
                ORGS.choose(&mut rng).unwrap(),
                MODS.choose(&mut rng).unwrap(),
                NOUNS.choose(&mut rng).unwrap(),
                rng.gen_range(0..400)
            );
            let method = format!("{}{}", VERBS.choose(&mut rng).unwrap(), rng.gen_range(0..20));
            let lambda = rng.gen_bool(0.05);
            let f = JvmFrame { class, method, lambda };
            if seen.insert(jvm_key(&f)) {
                jvm.push(f);
            }
        }
        while py.len() < size {
            let rel = format!(
                "{}/{}_{}.py",
                MODS.choose(&mut rng).unwrap(),
                NOUNS.choose(&mut rng).unwrap().to_lowercase(),
                rng.gen_range(0..400)
            );
            let func = format!("{}_{}", VERBS.choose(&mut rng).unwrap(), rng.gen_range(0..20));
            let site = rng.gen_bool(0.4);
            let f = PyFrame { rel, func, site };
            if seen.insert(py_key(&f)) {
                py.push(f);
            }
        }
        Vocab { jvm, py }
    }

    pub fn len(&self) -> usize {
        self.jvm.len()
    }
}

fn jvm_key(f: &JvmFrame) -> String {
    if f.lambda {
        format!("{}$$Lambda.{}", f.class, f.method)
    } else {
        format!("{}.{}", f.class, f.method)
    }
}

fn py_key(f: &PyFrame) -> String {
    if f.site {
        format!("{}::{}", f.rel, f.func)
    } else {
        format!("/srv/app/{}::{}", f.rel, f.func)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SynthSegment {
    pub type_index: usize,
    /// Vocabulary indices, innermost first.
    pub frames: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SynthTrace {
    pub lang: Lang,
    pub segments: Vec<SynthSegment>,
}

/// Skewed pick: low indices are common, high indices rare.
fn pick_frame(rng: &mut ChaCha8Rng, size: usize) -> u32 {
    let u: f64 = rng.gen();
    ((u * u * size as f64) as usize).min(size - 1) as u32
}

impl SynthTrace {
    pub fn random(rng: &mut ChaCha8Rng, vocab: &Vocab, lang: Lang, n_frames: usize) -> Self {
        assert!(n_frames >= 1);
        let n_segments = match rng.gen_range(0..10) {
            0..=6 => 1,
            7..=8 => 2,
            _ => 3,
        }
        .min(n_frames);
        let n_types = match lang {
            Lang::Jvm => JVM_TYPES.len(),
            Lang::Python => PY_TYPES.len(),
        };
        let mut cuts: Vec<usize> = (1..n_frames).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<usize> = cuts.into_iter().take(n_segments - 1).collect();
        cuts.sort_unstable();
        cuts.push(n_frames);
        let mut start = 0;
        let segments = cuts
            .into_iter()
            .map(|end| {
                let seg = SynthSegment {
                    type_index: rng.gen_range(0..n_types),
                    frames: (start..end).map(|_| pick_frame(rng, vocab.len())).collect(),
                };
                start = end;
                seg
            })
            .collect();
        SynthTrace { lang, segments }
    }

    pub fn frame_count(&self) -> usize {
        self.segments.iter().map(|s| s.frames.len()).sum()
    }

    pub fn exception_types(&self) -> Vec<String> {
        let table = match self.lang {
            Lang::Jvm => JVM_TYPES,
            Lang::Python => PY_TYPES,
        };
        self.segments.iter().map(|s| table[s.type_index].to_string()).collect()
    }

    /// Normalized keys in canonical order.
    pub fn keys(&self, vocab: &Vocab) -> Vec<String> {
        self.segments
            .iter()
            .flat_map(|s| s.frames.iter())
            .map(|&i| match self.lang {
                Lang::Jvm => jvm_key(&vocab.jvm[i as usize]),
                Lang::Python => py_key(&vocab.py[i as usize]),
            })
            .collect()
    }

    pub fn canonical(&self, vocab: &Vocab) -> String {
        super::oracle::canonical(&self.exception_types(), &self.keys(vocab))
    }

    pub fn render(&self, vocab: &Vocab, rng: &mut ChaCha8Rng) -> String {
        match self.lang {
            Lang::Jvm => self.render_jvm(vocab, rng),
            Lang::Python => self.render_python(vocab, rng),
        }
    }

    fn render_jvm(&self, vocab: &Vocab, rng: &mut ChaCha8Rng) -> String {
        let mut out = String::new();
        let types = self.exception_types();
        for (si, seg) in self.segments.iter().enumerate() {
            if si == 0 {
                if rng.gen_bool(0.3) {
                    out.push_str(&format!("Exception in thread \"worker-{}\" ", rng.gen_range(0..64)));
                }
            } else {
                out.push_str("Caused by: ");
            }
            out.push_str(&types[si]);
            if rng.gen_bool(0.8) {
                out.push_str(&format!(": request {} failed", rng.gen::<u32>()));
            }
            out.push('\n');
            for &fi in &seg.frames {
                let f = &vocab.jvm[fi as usize];
                if f.lambda {
                    out.push_str(&format!(
                        "\tat {}$$Lambda${}/0x{:016x}.{}(Unknown Source)\n",
                        f.class,
                        rng.gen_range(1..5000),
                        rng.gen::<u64>(),
                        f.method
                    ));
                } else {
                    let file = f.class.rsplit('.').next().unwrap();
                    out.push_str(&format!(
                        "\tat {}.{}({file}.java:{})\n",
                        f.class,
                        f.method,
                        rng.gen_range(1..3000)
                    ));
                }
            }
            if si > 0 && rng.gen_bool(0.5) {
                out.push_str(&format!("\t... {} more\n", rng.gen_range(1..40)));
            }
        }
        out
    }

    fn render_python(&self, vocab: &Vocab, rng: &mut ChaCha8Rng) -> String {
        let mut out = String::new();
        let types = self.exception_types();
        let minor = rng.gen_range(8..14);
        let env = ["/venv", "/opt/conda/envs/prod", "/usr/local", "/home/ci/.local"][rng.gen_range(0..4)];
        for (si, seg) in self.segments.iter().enumerate() {
            if si > 0 {
                out.push_str(if rng.gen_bool(0.5) {
                    "\nDuring handling of the above exception, another exception occurred:\n\n"
                } else {
                    "\nThe above exception was the direct cause of the following exception:\n\n"
                });
            }
            out.push_str("Traceback (most recent call last):\n");
            for &fi in seg.frames.iter().rev() {
                let f = &vocab.py[fi as usize];
                let path = if f.site {
                    format!("{env}/lib/python3.{minor}/site-packages/{}", f.rel)
                } else {
                    format!("/srv/app/{}", f.rel)
                };
                out.push_str(&format!(
                    "  File \"{path}\", line {}, in {}\n    result = step({})\n",
                    rng.gen_range(1..3000),
                    f.func,
                    rng.gen_range(0..9)
                ));
            }
            out.push_str(&types[si]);
            if rng.gen_bool(0.8) {
                out.push_str(&format!(": job {} failed", rng.gen::<u32>()));
            }
            out.push('\n');
        }
        out
    }
}

/// Distinct logical traces plus an ingest order that repeats some of them.
#[derive(Debug, Clone)]
pub struct Workload {
    pub traces: Vec<SynthTrace>,
    /// Indices into `traces`; every trace appears at least once.
    pub order: Vec<usize>,
}

impl Workload {
    /// `n_reports` reports of which exactly `n_duplicates` repeat an earlier
    /// logical trace.
    pub fn new(
        rng: &mut ChaCha8Rng,
        vocab: &Vocab,
        n_reports: usize,
        n_duplicates: usize,
        frames: std::ops::RangeInclusive<usize>,
    ) -> Self {
        assert!(n_duplicates < n_reports);
        let n_distinct = n_reports - n_duplicates;
        let mut seen = HashSet::with_capacity(n_distinct);
        let mut traces = Vec::with_capacity(n_distinct);
        while traces.len() < n_distinct {
            let lang = if rng.gen_bool(0.5) { Lang::Jvm } else { Lang::Python };
            let n = rng.gen_range(frames.clone());
            let t = SynthTrace::random(rng, vocab, lang, n);
            // Segment boundaries are not part of the fingerprint, so judge
            // distinctness on the canonical form.
            if seen.insert(super::oracle::fnv1a64(t.canonical(vocab).as_bytes())) {
                traces.push(t);
            }
        }
        let mut order: Vec<usize> = (0..n_distinct).collect();
        order.extend((0..n_duplicates).map(|_| rng.gen_range(0..n_distinct)));
        order.shuffle(rng);
        Workload { traces, order }
    }
}
