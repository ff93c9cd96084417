use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use regex::Regex;
use tempfile::TempDir;
use walkdir::WalkDir;

use crate::frontend::{parse_source, FrontendError};
use crate::matcher::{run_rules, SourceFile};
use crate::resources::{diff_snapshots, parse_snapshot, Snapshot, SnapshotLabel};
use crate::trace::{check_trace, parse_trace};

use super::process::{describe_status, run};
use super::report::{FeedbackItem, Location};
use super::{Assignment, PipelineError};

/// Output lines kept when a failure has no better diagnostic.
const TAIL_LINES: usize = 20;

fn is_hidden(entry: &walkdir::DirEntry) -> bool {
    entry.depth() > 0 && entry.file_name().to_string_lossy().starts_with('.')
}

/// Copies the submission tree (minus dot-directories such as `.git`) into
/// a fresh temporary directory, so evaluation never touches the original.
pub fn copy_submission(src: &Path) -> Result<TempDir, PipelineError> {
    if !src.is_dir() {
        return Err(PipelineError::io(
            src,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "submission is not a directory",
            ),
        ));
    }
    let dest = tempfile::Builder::new()
        .prefix("sysgrader-")
        .tempdir()
        .map_err(|e| PipelineError::io(&std::env::temp_dir(), e))?;
    for entry in WalkDir::new(src)
        .follow_links(true)
        .into_iter()
        .filter_entry(|e| !is_hidden(e))
    {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(src).to_path_buf();
            PipelineError::io(&path, e.into())
        })?;
        let rel = entry
            .path()
            .strip_prefix(src)
            .expect("walk stays under root");
        let target = dest.path().join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&target).map_err(|e| PipelineError::io(&target, e))?;
        } else if entry.file_type().is_file() {
            fs::copy(entry.path(), &target).map_err(|e| PipelineError::io(entry.path(), e))?;
        }
    }
    Ok(dest)
}

fn tail(text: &str) -> String {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    lines[lines.len().saturating_sub(TAIL_LINES)..].join("\n")
}

fn diagnostic_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^([^:\s][^:]*):(\d+):(?:(\d+):)?\s*(?:fatal )?error:\s*(.*)$")
            .expect("static regex")
    })
}

/// Compiler errors in `output` as located findings.
fn compiler_errors(output: &str, workdir: &Path) -> Vec<FeedbackItem> {
    output
        .lines()
        .filter_map(|line| {
            let caps = diagnostic_re().captures(line)?;
            let path = Path::new(&caps[1]);
            let file = path
                .strip_prefix(workdir)
                .unwrap_or(path)
                .display()
                .to_string();
            let line_no: u32 = caps[2].parse().ok()?;
            let col: u32 = caps
                .get(3)
                .and_then(|c| c.as_str().parse().ok())
                .unwrap_or(1);
            Some(
                FeedbackItem::new("compiler", format!("error: {}", &caps[4])).at(Location {
                    file,
                    start_line: line_no,
                    start_col: col,
                    end_line: line_no,
                    end_col: col,
                }),
            )
        })
        .collect()
}

/// Runs the build command; compiler errors become findings.
pub fn run_build(
    assignment: &Assignment,
    workdir: &Path,
) -> Result<Vec<FeedbackItem>, PipelineError> {
    let m = &assignment.manifest;
    let out = run(&m.build_cmd, workdir, assignment.timeout())?;
    let Some(status) = out.status else {
        return Ok(vec![FeedbackItem::new(
            "stall",
            format!("The build did not finish within {} s", m.timeout_secs),
        )]);
    };
    if status.success() {
        return Ok(Vec::new());
    }
    let combined = format!("{}\n{}", out.stdout, out.stderr);
    let mut findings = compiler_errors(&combined, workdir);
    if findings.is_empty() {
        let mut message = format!(
            "The build command `{}` {}",
            m.build_cmd,
            describe_status(status)
        );
        let detail = tail(&combined);
        if !detail.is_empty() {
            message.push('\n');
            message.push_str(&detail);
        }
        findings.push(FeedbackItem::new("compiler", message));
    }
    Ok(findings)
}

fn take_snapshot(
    assignment: &Assignment,
    label: SnapshotLabel,
) -> Result<Option<Snapshot>, PipelineError> {
    let Some(cmd) = &assignment.manifest.snapshot_cmd else {
        return Ok(None);
    };
    let out = run(cmd, &assignment.manifest.base_dir, assignment.timeout())?;
    match out.status {
        Some(s) if s.success() => {}
        Some(s) => {
            return Err(PipelineError::SnapshotCommand {
                command: cmd.clone(),
                message: format!("{}: {}", describe_status(s), tail(&out.stderr)),
            })
        }
        None => {
            return Err(PipelineError::SnapshotCommand {
                command: cmd.clone(),
                message: "timed out".into(),
            })
        }
    }
    parse_snapshot(&out.stdout, label)
        .map(Some)
        .map_err(|source| PipelineError::Snapshot {
            command: cmd.clone(),
            source,
        })
}

/// Runs the program between two resource snapshots, then checks how it
/// ended, what it left behind and what it printed.
pub fn run_execution(
    assignment: &Assignment,
    workdir: &Path,
) -> Result<Vec<FeedbackItem>, PipelineError> {
    let m = &assignment.manifest;
    let before = take_snapshot(assignment, SnapshotLabel::Before)?;
    let out = run(&m.run_cmd, workdir, assignment.timeout())?;
    let after = take_snapshot(assignment, SnapshotLabel::After)?;

    let mut findings = Vec::new();
    match out.status {
        None => findings.push(FeedbackItem::new(
            "stall",
            format!(
                "The program did not complete within {} s (stall/timeout); check for deadlocks",
                m.timeout_secs
            ),
        )),
        Some(status) if !status.success() => {
            let mut message = format!("The program crashed: it {}", describe_status(status));
            let detail = tail(&out.stderr);
            if !detail.is_empty() {
                message.push('\n');
                message.push_str(&detail);
            }
            findings.push(FeedbackItem::new("crash", message));
        }
        // Output of an interrupted run is incomplete by construction, so the
        // trace is only judged after a clean exit.
        Some(_) => match parse_trace(&out.stdout, &assignment.trace) {
            Ok(events) => {
                let verdict = check_trace(&events, &assignment.trace);
                findings.extend(
                    verdict
                        .errors
                        .into_iter()
                        .map(|e| FeedbackItem::new("trace", e.message).at_output_line(e.line_no)),
                );
            }
            Err(e) => findings.push(FeedbackItem::new("trace", e.to_string())),
        },
    }
    if let (Some(before), Some(after)) = (before, after) {
        for leak in diff_snapshots(&before, &after) {
            findings.push(FeedbackItem::new(
                "leak",
                format!(
                    "Resource leak: {} with key 0x{:08x} and id {} was not removed",
                    leak.kind, leak.key, leak.os_id
                ),
            ));
        }
    }
    Ok(findings)
}

fn source_files(workdir: &Path) -> Result<Vec<(PathBuf, PathBuf)>, PipelineError> {
    let mut files = Vec::new();
    for entry in WalkDir::new(workdir)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| !is_hidden(e))
    {
        let entry = entry.map_err(|e| PipelineError::io(workdir, e.into()))?;
        let is_c = entry
            .path()
            .extension()
            .is_some_and(|e| e == "c" || e == "h");
        if entry.file_type().is_file() && is_c {
            let rel = entry
                .path()
                .strip_prefix(workdir)
                .expect("under workdir")
                .to_path_buf();
            files.push((entry.path().to_path_buf(), rel));
        }
    }
    Ok(files)
}

fn parse_message(e: &FrontendError) -> String {
    match e {
        FrontendError::UnterminatedString { .. } => {
            "Cannot analyze this file: unterminated string or character literal".into()
        }
        FrontendError::UnterminatedComment { .. } => {
            "Cannot analyze this file: unterminated comment".into()
        }
        FrontendError::Parse {
            expected, found, ..
        } => {
            format!("Cannot analyze this file: expected {expected}, found {found}")
        }
    }
}

/// Parses every `.c` and `.h` file under `workdir` and applies the rule
/// pack. Unparsable files are findings themselves.
pub fn run_static(
    assignment: &Assignment,
    workdir: &Path,
) -> Result<Vec<FeedbackItem>, PipelineError> {
    let mut findings = Vec::new();
    let mut parsed = Vec::new();
    for (abs, rel) in source_files(workdir)? {
        let bytes = fs::read(&abs).map_err(|e| PipelineError::io(&abs, e))?;
        let text = String::from_utf8_lossy(&bytes);
        match parse_source(&text, &rel) {
            Ok(ast) => parsed.push(SourceFile { path: rel, ast }),
            Err(e) => {
                findings.push(FeedbackItem::new("parse", parse_message(&e)).at(e.span().into()))
            }
        }
    }
    for f in run_rules(&assignment.rules, &parsed) {
        findings.push(FeedbackItem::new(f.rule_id.clone(), f.message.clone()).at((&f.span).into()));
    }
    Ok(findings)
}
