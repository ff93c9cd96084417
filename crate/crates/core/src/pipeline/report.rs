use std::fmt::{self, Write as _};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::frontend::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Build,
    Execution,
    Static,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Build, Stage::Execution, Stage::Static];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Build => "build",
            Stage::Execution => "execution",
            Stage::Static => "static",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Pass,
    Fail,
    Skipped,
}

impl StageStatus {
    /// `P`, `F` or `S`.
    pub fn letter(self) -> char {
        match self {
            StageStatus::Pass => 'P',
            StageStatus::Fail => 'F',
            StageStatus::Skipped => 'S',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// A place in the submission's sources, with the path relative to the
/// submission's working directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl From<&Span> for Location {
    fn from(s: &Span) -> Self {
        Location {
            file: s.file.display().to_string(),
            start_line: s.start_line,
            start_col: s.start_col,
            end_line: s.end_line,
            end_col: s.end_col,
        }
    }
}

/// One piece of feedback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackItem {
    /// What produced it: `compiler`, `crash`, `stall`, `leak`, `trace`,
    /// `parse`, or the id of a rule.
    pub check: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
    /// Line of the program output the item is about.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_line: Option<usize>,
}

impl FeedbackItem {
    pub fn new(check: impl Into<String>, message: impl Into<String>) -> Self {
        FeedbackItem {
            check: check.into(),
            message: message.into(),
            location: None,
            output_line: None,
        }
    }

    pub fn at(mut self, location: Location) -> Self {
        self.location = Some(location);
        self
    }

    pub fn at_output_line(mut self, line: Option<usize>) -> Self {
        self.output_line = line;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageResult {
    pub stage: Stage,
    pub status: StageStatus,
    pub findings: Vec<FeedbackItem>,
    pub duration_ms: u64,
}

impl StageResult {
    pub fn skipped(stage: Stage) -> Self {
        StageResult {
            stage,
            status: StageStatus::Skipped,
            findings: Vec::new(),
            duration_ms: 0,
        }
    }

    pub fn finished(stage: Stage, findings: Vec<FeedbackItem>, elapsed: Duration) -> Self {
        let status = if findings.is_empty() {
            StageStatus::Pass
        } else {
            StageStatus::Fail
        };
        StageResult {
            stage,
            status,
            findings,
            duration_ms: elapsed.as_millis().try_into().unwrap_or(u64::MAX),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub submission_id: String,
    pub timestamp: DateTime<Utc>,
    pub verdict: Verdict,
    pub stages: Vec<StageResult>,
}

impl EvaluationReport {
    /// The verdict is a pass when no stage failed.
    pub fn new(submission_id: String, timestamp: DateTime<Utc>, stages: Vec<StageResult>) -> Self {
        let verdict = if stages.iter().any(|s| s.status == StageStatus::Fail) {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        EvaluationReport {
            submission_id,
            timestamp,
            verdict,
            stages,
        }
    }

    /// Stage statuses as letters, e.g. `PPF`.
    pub fn status_sequence(&self) -> String {
        self.stages.iter().map(|s| s.status.letter()).collect()
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageResult> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    /// Process exit code: 0 on pass, 1 on fail.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

/// Renders a report for the student.
///
/// Text: a `PASS`/`FAIL` header, one status line per stage, then every
/// finding of a failed stage as `STAGE file:line message`.
pub fn render_feedback(report: &EvaluationReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
            s.push('\n');
            s
        }
        OutputFormat::Text => render_text(report),
    }
}

fn render_text(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let header = match report.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
    };
    let _ = writeln!(out, "{header} {}", report.submission_id);
    for s in &report.stages {
        match s.status {
            StageStatus::Skipped => {
                let _ = writeln!(out, "  {:<9} skipped", s.stage.as_str());
            }
            st => {
                let word = if st == StageStatus::Pass {
                    "pass"
                } else {
                    "fail"
                };
                let _ = writeln!(
                    out,
                    "  {:<9} {word} ({} ms)",
                    s.stage.as_str(),
                    s.duration_ms
                );
            }
        }
    }
    for s in report
        .stages
        .iter()
        .filter(|s| s.status == StageStatus::Fail)
    {
        out.push('\n');
        for f in &s.findings {
            let _ = write!(out, "{}", s.stage);
            if let Some(loc) = &f.location {
                let _ = write!(out, " {}:{}", loc.file, loc.start_line);
            }
            let mut lines = f.message.lines();
            let _ = write!(out, " {}", lines.next().unwrap_or(""));
            if let Some(n) = f.output_line {
                let _ = write!(out, " (output line {n})");
            }
            out.push('\n');
            for rest in lines {
                let _ = writeln!(out, "    {rest}");
            }
        }
    }
    out
}
