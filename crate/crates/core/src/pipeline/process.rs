use std::io::{self, Read};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::Path;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use super::manifest::split_command;
use super::PipelineError;

const POLL: Duration = Duration::from_millis(5);

#[derive(Debug)]
pub(crate) struct Outcome {
    /// `None` when the process was killed at the deadline.
    pub status: Option<ExitStatus>,
    pub stdout: String,
    pub stderr: String,
}

/// How a finished process ended, in words.
pub(crate) fn describe_status(status: ExitStatus) -> String {
    if let Some(sig) = status.signal() {
        let name = match sig {
            libc::SIGSEGV => " (SIGSEGV, segmentation fault)",
            libc::SIGABRT => " (SIGABRT, aborted)",
            libc::SIGFPE => " (SIGFPE, arithmetic error)",
            libc::SIGBUS => " (SIGBUS, bus error)",
            libc::SIGKILL => " (SIGKILL)",
            libc::SIGTERM => " (SIGTERM)",
            _ => "",
        };
        format!("terminated by signal {sig}{name}")
    } else {
        format!("exited with status {}", status.code().unwrap_or(-1))
    }
}

fn reader(mut pipe: impl Read + Send + 'static) -> JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = pipe.read_to_end(&mut buf);
        buf
    })
}

fn kill_group(child: &Child) {
    // The child leads its own process group, so this reaches every process
    // it forked that has not moved elsewhere.
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
}

/// Runs `cmd` in `dir` in a fresh process group, capturing both output
/// streams. At the deadline the whole group is killed. Once the main
/// process has exited, leftover processes of the group are killed as well.
pub(crate) fn run(cmd: &str, dir: &Path, timeout: Duration) -> Result<Outcome, PipelineError> {
    let argv = split_command(cmd).map_err(PipelineError::Manifest)?;
    let program = if argv[0].contains('/') && Path::new(&argv[0]).is_relative() {
        dir.join(&argv[0])
    } else {
        argv[0].clone().into()
    };
    let started = Instant::now();
    let mut child = Command::new(&program)
        .args(&argv[1..])
        .current_dir(dir)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0)
        .spawn()
        .map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => PipelineError::CommandNotFound {
                command: cmd.to_string(),
            },
            _ => PipelineError::Spawn {
                command: cmd.to_string(),
                message: e.to_string(),
            },
        })?;
    let out = reader(child.stdout.take().expect("piped"));
    let err = reader(child.stderr.take().expect("piped"));

    let deadline = started + timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(s)) => break Some(s),
            Ok(None) if Instant::now() >= deadline => break None,
            Ok(None) => thread::sleep(POLL),
            Err(e) => {
                kill_group(&child);
                return Err(PipelineError::Spawn {
                    command: cmd.to_string(),
                    message: e.to_string(),
                });
            }
        }
    };
    kill_group(&child);
    if status.is_none() {
        let _ = child.wait();
    }
    let stdout = String::from_utf8_lossy(&out.join().unwrap_or_default()).into_owned();
    let stderr = String::from_utf8_lossy(&err.join().unwrap_or_default()).into_owned();
    Ok(Outcome {
        status,
        stdout,
        stderr,
    })
}
