use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;

pub const DEFAULT_TIMEOUT_SECS: u64 = 10;
/// Overrides `timeout_secs` of every manifest.
pub const TIMEOUT_ENV: &str = "SYSGRADER_TIMEOUT_SECS";

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_SECS
}

fn default_workdir() -> PathBuf {
    PathBuf::from(".")
}

/// How to build, run and check one assignment.
///
/// `rule_pack`, `trace_spec` are relative to the manifest's directory, which
/// is also where `snapshot_cmd` runs. `workdir` is relative to the
/// submission and is where `build_cmd` and `run_cmd` run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentManifest {
    pub build_cmd: String,
    pub run_cmd: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    pub rule_pack: PathBuf,
    pub trace_spec: PathBuf,
    #[serde(default)]
    pub snapshot_cmd: Option<String>,
    #[serde(default = "default_workdir")]
    pub workdir: PathBuf,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl AssignmentManifest {
    pub fn from_yaml(document: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut m: AssignmentManifest =
            serde_yaml::from_str(document).map_err(|e| PipelineError::Manifest(e.to_string()))?;
        m.base_dir = base_dir.to_path_buf();
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let base = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        Self::from_yaml(&text, base)
    }

    fn validate(&self) -> Result<(), PipelineError> {
        if self.timeout_secs == 0 {
            return Err(PipelineError::Manifest(
                "timeout_secs must be at least 1".into(),
            ));
        }
        for (name, cmd) in [("build_cmd", &self.build_cmd), ("run_cmd", &self.run_cmd)] {
            split_command(cmd).map_err(|m| PipelineError::Manifest(format!("{name}: {m}")))?;
        }
        if let Some(cmd) = &self.snapshot_cmd {
            split_command(cmd)
                .map_err(|m| PipelineError::Manifest(format!("snapshot_cmd: {m}")))?;
        }
        if self.workdir.is_absolute() {
            return Err(PipelineError::Manifest(
                "workdir must be relative to the submission".into(),
            ));
        }
        Ok(())
    }

    /// Applies the value of [`TIMEOUT_ENV`], if set.
    pub fn with_timeout_override(mut self, value: Option<&str>) -> Result<Self, PipelineError> {
        if let Some(v) = value {
            match v.trim().parse::<u64>() {
                Ok(n) if n >= 1 => self.timeout_secs = n,
                _ => {
                    return Err(PipelineError::Manifest(format!(
                        "{TIMEOUT_ENV} must be a positive integer, got `{v}`"
                    )))
                }
            }
        }
        Ok(self)
    }

    pub fn rule_pack_path(&self) -> PathBuf {
        self.base_dir.join(&self.rule_pack)
    }

    pub fn trace_spec_path(&self) -> PathBuf {
        self.base_dir.join(&self.trace_spec)
    }
}

/// Splits a command line with shell quoting rules (no expansion).
pub fn split_command(cmd: &str) -> Result<Vec<String>, String> {
    match shlex::split(cmd) {
        Some(argv) if !argv.is_empty() => Ok(argv),
        Some(_) => Err("empty command".into()),
        None => Err(format!("cannot split `{cmd}` (unbalanced quotes?)")),
    }
}
