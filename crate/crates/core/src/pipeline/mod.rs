//! The three-stage evaluation of a submission: build, execution, static
//! analysis. The first failing stage ends the evaluation.

mod manifest;
mod process;
mod report;
mod stages;

use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::Utc;
use thiserror::Error;

use crate::resources::SnapshotFormatError;
use crate::rules::{load_rule_pack_file, RuleError, RulePack};
use crate::trace::{TraceError, TraceSpec};

pub use manifest::{split_command, AssignmentManifest, DEFAULT_TIMEOUT_SECS, TIMEOUT_ENV};
pub use report::{
    render_feedback, EvaluationReport, FeedbackItem, Location, OutputFormat, Stage, StageResult,
    StageStatus, Verdict,
};
pub use stages::{copy_submission, run_build, run_execution, run_static};

/// A problem with the grading setup rather than with the submission.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("command not found: {command}")]
    CommandNotFound { command: String },
    #[error("cannot run `{command}`: {message}")]
    Spawn { command: String, message: String },
    #[error("rule pack {}: {source}", path.display())]
    Rules {
        path: PathBuf,
        #[source]
        source: RuleError,
    },
    #[error("trace spec {}: {source}", path.display())]
    TraceSpec {
        path: PathBuf,
        #[source]
        source: TraceError,
    },
    #[error("snapshot command `{command}` failed: {message}")]
    SnapshotCommand { command: String, message: String },
    #[error("snapshot from `{command}`: {source}")]
    Snapshot {
        command: String,
        #[source]
        source: SnapshotFormatError,
    },
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Everything an evaluation needs, loaded once and reusable across
/// submissions.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub manifest: AssignmentManifest,
    pub rules: RulePack,
    pub trace: TraceSpec,
}

impl Assignment {
    pub fn load(manifest: AssignmentManifest) -> Result<Self, PipelineError> {
        let rules_path = manifest.rule_pack_path();
        let rules = load_rule_pack_file(&rules_path).map_err(|source| PipelineError::Rules {
            path: rules_path,
            source,
        })?;
        let trace_path = manifest.trace_spec_path();
        let trace = TraceSpec::load(&trace_path).map_err(|source| PipelineError::TraceSpec {
            path: trace_path,
            source,
        })?;
        Ok(Assignment {
            manifest,
            rules,
            trace,
        })
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.manifest.timeout_secs)
    }
}

/// Evaluates the submission at `submission` on a private copy.
///
/// With `only`, that stage alone is run and the others are reported as
/// skipped; the execution stage still builds the program first, and a
/// failing build is reported as such.
pub fn evaluate(
    assignment: &Assignment,
    submission: &Path,
    only: Option<Stage>,
) -> Result<EvaluationReport, PipelineError> {
    let copy = copy_submission(submission)?;
    let workdir = copy.path().join(&assignment.manifest.workdir);
    let wanted = |s: Stage| match only {
        None => true,
        Some(Stage::Execution) => matches!(s, Stage::Build | Stage::Execution),
        Some(o) => o == s,
    };

    let mut stages = Vec::with_capacity(3);
    let mut failed = false;
    for stage in Stage::ALL {
        if failed || !wanted(stage) {
            stages.push(StageResult::skipped(stage));
            continue;
        }
        let started = Instant::now();
        let findings = match stage {
            Stage::Build => run_build(assignment, &workdir)?,
            Stage::Execution => run_execution(assignment, &workdir)?,
            Stage::Static => run_static(assignment, &workdir)?,
        };
        let result = StageResult::finished(stage, findings, started.elapsed());
        failed = result.status == StageStatus::Fail;
        stages.push(result);
    }

    let submission_id = submission
        .canonicalize()
        .ok()
        .as_deref()
        .and_then(Path::file_name)
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| submission.display().to_string());
    Ok(EvaluationReport::new(submission_id, Utc::now(), stages))
}
