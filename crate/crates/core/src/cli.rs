// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! `tracelight` command line.
//!
//! Exit codes: 0 success, 1 configuration / I/O / bind failure, 2 input that
//! could not be read or parsed.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::normalize::{load_rules, FrameKey, SubsystemRule};
use crate::parser::{self, FormatHint, RawReport, SegmentKind};
use crate::store::{self, Store, StoreOptions};
use crate::view::{self, ScoredTrace};
use crate::{Error, DEFAULT_K};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Separates reports inside one input file.
pub const REPORT_SEPARATOR: &str = "%%";

const STATS_TOP: usize = 20;

#[derive(Debug, Parser)]
#[command(
    name = "tracelight",
    version,
    about = "Crash triage: dedup stack traces and highlight rare frames"
)]
pub struct Cli {
    /// Data directory holding ingest.log and snapshot.json.
    #[arg(long, global = true, env = "TRACELIGHT_DATA", default_value = "./data")]
    pub data: PathBuf,

    /// Number of frames to suggest per trace.
    #[arg(long, global = true, env = "TRACELIGHT_K", default_value_t = DEFAULT_K as u32,
          value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,

    /// JSON file with ordered `{"prefix", "label"}` subsystem rules.
    #[arg(long, global = true, env = "TRACELIGHT_RULES")]
    pub rules: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API until interrupted.
    Serve {
        #[arg(long, env = "TRACELIGHT_ADDR", default_value = "127.0.0.1:8080")]
        addr: String,
        /// Allowed CORS origin for the web UI; any origin when unset.
        #[arg(long, env = "TRACELIGHT_CORS_ORIGIN")]
        cors_origin: Option<String>,
        /// fdatasync the log after every record.
        #[arg(long)]
        fsync: bool,
    },
    /// Ingest report files or directories of report files.
    Ingest {
        #[arg(long, default_value_t = FormatHint::Auto)]
        format: FormatHint,
        #[arg(long)]
        fsync: bool,
        paths: Vec<PathBuf>,
    },
    /// Score one trace against the corpus without recording it.
    Score {
        #[arg(long, default_value_t = FormatHint::Auto)]
        format: FormatHint,
        #[arg(long)]
        json: bool,
        /// Trace file, or `-` for stdin.
        #[arg(default_value = "-")]
        input: String,
    },
    /// Print corpus counters and the most and least frequent frames.
    Stats {
        #[arg(long)]
        json: bool,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli, stdin, out) {
        Ok(code) => code,
        Err((code, e)) => {
            let _ = writeln!(err, "tracelight: {e}");
            code
        }
    }
}

type CmdResult = Result<i32, (i32, Error)>;

fn fail(e: Error) -> (i32, Error) {
    (EXIT_FAILURE, e)
}

fn rules(cli: &Cli) -> Result<Vec<SubsystemRule>, (i32, Error)> {
    match &cli.rules {
        Some(path) => load_rules(path).map_err(fail),
        None => Ok(Vec::new()),
    }
}

fn execute(cli: Cli, stdin: &mut dyn Read, out: &mut dyn Write) -> CmdResult {
    let k = cli.k as usize;
    let rules = rules(&cli)?;
    match &cli.command {
        Command::Serve {
            addr,
            cors_origin,
            fsync,
        } => cmd_serve(&cli.data, addr, cors_origin.as_deref(), *fsync, rules, k, out),
        Command::Ingest { format, fsync, paths } => cmd_ingest(&cli.data, *format, *fsync, paths, out),
        Command::Score { format, json, input } => cmd_score(&cli.data, *format, *json, input, &rules, k, stdin, out),
        Command::Stats { json } => cmd_stats(&cli.data, *json, out),
    }
}

fn io_err(e: std::io::Error) -> (i32, Error) {
    fail(Error::io("<stdout>", e))
}

fn cmd_serve(
    data: &Path,
    addr: &str,
    cors_origin: Option<&str>,
    fsync: bool,
    rules: Vec<SubsystemRule>,
    k: usize,
    out: &mut dyn Write,
) -> CmdResult {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| fail(Error::io("<runtime>", e)))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| fail(Error::io(format!("bind {addr}"), e)))?;
        let (store, report) = Store::open(data, StoreOptions { fsync }).map_err(fail)?;
        ::log::info!(
            "recovered {} groups from {} (snapshot seq {:?}, {} records replayed)",
            store.corpus().stats().n_groups(),
            data.display(),
            report.snapshot_seq,
            report.replayed
        );
        let state = crate::api::AppState::new(store, rules, k).map_err(fail)?;
        let app = crate::api::router(state.clone(), cors_origin);
        let local = listener.local_addr().map_err(|e| fail(Error::io("bind", e)))?;
        writeln!(out, "tracelight listening on http://{local}").map_err(io_err)?;
        out.flush().map_err(io_err)?;

        crate::api::serve(listener, app, shutdown_signal())
            .await
            .map_err(|e| fail(Error::io("serve", e)))?;
        state.store().read().write_snapshot().map_err(fail)?;
        Ok(EXIT_OK)
    })
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub files: usize,
    pub reports: usize,
    pub new_groups: usize,
    pub duplicates: usize,
    pub parse_errors: usize,
    pub read_errors: usize,
}

/// Splits file contents into reports on lines consisting of `%%` alone.
pub fn split_reports(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut pos = 0;
    for line in text.split_inclusive('\n') {
        let bare = line.trim_end_matches(['\n', '\r']);
        if bare == REPORT_SEPARATOR {
            out.push(&text[start..pos]);
            start = pos + line.len();
        }
        pos += line.len();
    }
    out.push(&text[start..]);
    out.retain(|chunk| !chunk.trim().is_empty());
    out
}

fn collect_files(paths: &[PathBuf], err_count: &mut usize) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            for entry in walkdir::WalkDir::new(path).sort_by_file_name() {
                match entry {
                    Ok(e) if e.file_type().is_file() => files.push(e.into_path()),
                    Ok(_) => {}
                    Err(e) => {
                        ::log::error!("{e}");
                        *err_count += 1;
                    }
                }
            }
        } else {
            files.push(path.clone());
        }
    }
    files
}

fn cmd_ingest(data: &Path, format: FormatHint, fsync: bool, paths: &[PathBuf], out: &mut dyn Write) -> CmdResult {
    let (mut store, _) = Store::open(data, StoreOptions { fsync }).map_err(fail)?;
    let mut summary = IngestSummary::default();
    let files = collect_files(paths, &mut summary.read_errors);
    for file in files {
        let bytes = match std::fs::read(&file) {
            Ok(b) => b,
            Err(e) => {
                ::log::error!("{}: {e}", file.display());
                summary.read_errors += 1;
                continue;
            }
        };
        summary.files += 1;
        let text = String::from_utf8_lossy(&bytes);
        for chunk in split_reports(&text) {
            summary.reports += 1;
            let report = match RawReport::new(chunk, format, None, crate::now()) {
                Ok(r) => r,
                Err(_) => {
                    summary.parse_errors += 1;
                    continue;
                }
            };
            match store.ingest(&report) {
                Ok((outcome, _)) if outcome.is_new => summary.new_groups += 1,
                Ok(_) => summary.duplicates += 1,
                Err(Error::UnrecognizedFormat | Error::Parse(_) | Error::EmptyReport) => {
                    ::log::warn!("{}: unparseable report", file.display());
                    summary.parse_errors += 1;
                }
                Err(e) => return Err(fail(e)),
            }
        }
    }
    store.write_snapshot().map_err(fail)?;
    serde_json::to_writer(&mut *out, &summary).map_err(|e| io_err(e.into()))?;
    writeln!(out).map_err(io_err)?;
    if summary.parse_errors == 0 && summary.read_errors == 0 {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_INPUT)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_score(
    data: &Path,
    format: FormatHint,
    json: bool,
    input: &str,
    rules: &[SubsystemRule],
    k: usize,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
) -> CmdResult {
    let bytes = if input == "-" {
        let mut buf = Vec::new();
        stdin
            .read_to_end(&mut buf)
            .map_err(|e| (EXIT_INPUT, Error::io("<stdin>", e)))?;
        buf
    } else {
        std::fs::read(input).map_err(|e| (EXIT_INPUT, Error::io(input, e)))?
    };
    let trace = RawReport::from_bytes(&bytes, format, None, crate::now())
        .and_then(|r| parser::parse(&r))
        .map_err(|e| (EXIT_INPUT, e))?;
    let (corpus, _) = store::load_dir(data).map_err(fail)?;
    let scored = view::score(&corpus, &trace, rules, k).map_err(fail)?;
    if json {
        serde_json::to_writer(&mut *out, &scored).map_err(|e| io_err(e.into()))?;
        writeln!(out).map_err(io_err)?;
    } else {
        write_annotated(out, &trace, &scored).map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

/// One line per frame: index, suggestion marker, subsystem tag, raw text.
fn write_annotated(out: &mut dyn Write, trace: &parser::StackTrace, scored: &ScoredTrace) -> std::io::Result<()> {
    let frames = trace.all_frames();
    for segment in &trace.segments {
        let prefix = match segment.kind {
            SegmentKind::Root => "",
            SegmentKind::CausedBy => "Caused by: ",
            SegmentKind::Suppressed => "Suppressed: ",
            SegmentKind::Chained => "Chained: ",
        };
        match &segment.message {
            Some(m) => writeln!(out, "{prefix}{}: {m}", segment.exception_type)?,
            None => writeln!(out, "{prefix}{}", segment.exception_type)?,
        }
        for (index, frame) in frames
            .iter()
            .enumerate()
            .skip(segment.first_frame)
            .take(segment.frame_count)
        {
            let marker = match scored.suggestions.iter().find(|s| s.index == index) {
                Some(s) => format!("! #{} {:.4}", s.rank, s.idf),
                None => String::new(),
            };
            let subsystem = match &scored.frames[index].subsystem {
                Some(label) => format!("[{label}] "),
                None => String::new(),
            };
            writeln!(out, "{index:>4}  {marker:<14}  {subsystem}{}", frame.raw.trim())?;
        }
        if segment.elided_count > 0 {
            writeln!(out, "{:>4}  {:<14}  ... {} more", "", "", segment.elided_count)?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct KeyCount {
    key: FrameKey,
    df: u64,
}

#[derive(Debug, Serialize)]
struct StatsReport {
    n_groups: u64,
    n_reports: u64,
    distinct_frames: usize,
    most_frequent: Vec<KeyCount>,
    least_frequent: Vec<KeyCount>,
}

fn cmd_stats(data: &Path, json: bool, out: &mut dyn Write) -> CmdResult {
    if !data.is_dir() {
        return Err(fail(Error::io(
            data,
            std::io::Error::new(std::io::ErrorKind::NotFound, "data directory not found"),
        )));
    }
    std::fs::read_dir(data).map_err(|e| fail(Error::io(data, e)))?;
    let (corpus, _) = store::load_dir(data).map_err(fail)?;
    let stats = corpus.stats();
    let mut entries = stats.sorted_df_entries();

    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let most_frequent: Vec<KeyCount> = entries
        .iter()
        .take(STATS_TOP)
        .map(|(key, df)| KeyCount {
            key: key.clone(),
            df: *df,
        })
        .collect();
    entries.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let least_frequent: Vec<KeyCount> = entries
        .iter()
        .take(STATS_TOP)
        .map(|(key, df)| KeyCount {
            key: key.clone(),
            df: *df,
        })
        .collect();

    let (n_groups, n_reports, distinct_frames) = stats.corpus_size();
    let report = StatsReport {
        n_groups,
        n_reports,
        distinct_frames,
        most_frequent,
        least_frequent,
    };
    if json {
        serde_json::to_writer(&mut *out, &report).map_err(|e| io_err(e.into()))?;
        writeln!(out).map_err(io_err)?;
        return Ok(EXIT_OK);
    }
    let mut text = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(text, "n_groups: {n_groups}");
    let _ = writeln!(text, "n_reports: {n_reports}");
    let _ = writeln!(text, "distinct_frames: {distinct_frames}");
    let _ = writeln!(text, "most frequent frames:");
    for kc in &report.most_frequent {
        let _ = writeln!(text, "  {:>8}  {}", kc.df, kc.key);
    }
    let _ = writeln!(text, "least frequent frames:");
    for kc in &report.least_frequent {
        let _ = writeln!(text, "  {:>8}  {}", kc.df, kc.key);
    }
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(EXIT_OK)
}
