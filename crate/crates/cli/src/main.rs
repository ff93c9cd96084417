use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use sysgrader_core::pipeline::TIMEOUT_ENV;
use sysgrader_core::trace::{check_trace, parse_trace};
use sysgrader_core::{
    evaluate, load_rule_pack_file, render_feedback, Assignment, AssignmentManifest, OutputFormat,
    Stage, TraceSpec,
};

/// Grades C systems-programming submissions.
#[derive(Debug, Parser)]
#[command(name = "sysgrader", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build, run and statically check a submission.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        submission: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Run a single stage (execution builds first).
        #[arg(long, value_enum)]
        stage: Option<StageArg>,
    },
    /// Validate a rule pack.
    CheckRules {
        #[arg(long)]
        rules: PathBuf,
    },
    /// Check captured program output against a trace spec.
    CheckTrace {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StageArg {
    Build,
    Execution,
    Static,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Build => Stage::Build,
            StageArg::Execution => Stage::Execution,
            StageArg::Static => Stage::Static,
        }
    }
}

const EXIT_INTERNAL: u8 = 2;

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Evaluate {
            manifest,
            submission,
            format,
            stage,
        } => {
            let timeout = std::env::var(TIMEOUT_ENV).ok();
            let manifest =
                AssignmentManifest::load(&manifest)?.with_timeout_override(timeout.as_deref())?;
            let assignment = Assignment::load(manifest)?;
            let report = evaluate(&assignment, &submission, stage.map(Stage::from))?;
            let format = match format {
                Format::Text => OutputFormat::Text,
                Format::Json => OutputFormat::Json,
            };
            print!("{}", render_feedback(&report, format));
            Ok(report.exit_code() as u8)
        }
        Command::CheckRules { rules } => {
            let pack = load_rule_pack_file(&rules)?;
            println!("{}: {} rules OK", rules.display(), pack.rules.len());
            Ok(0)
        }
        Command::CheckTrace { spec, trace } => {
            let spec = TraceSpec::load(&spec)?;
            let output = fs::read_to_string(&trace)
                .with_context(|| format!("reading {}", trace.display()))?;
            let events = match parse_trace(&output, &spec) {
                Ok(events) => events,
                Err(e) => {
                    println!("FAIL\n{e}");
                    return Ok(1);
                }
            };
            let verdict = check_trace(&events, &spec);
            if verdict.passed() {
                println!("PASS ({} events)", events.len());
                return Ok(0);
            }
            println!("FAIL");
            for e in &verdict.errors {
                match e.line_no {
                    Some(n) => println!("line {n}: {}", e.message),
                    None => println!("{}", e.message),
                }
            }
            Ok(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sysgrader: {e:#}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
