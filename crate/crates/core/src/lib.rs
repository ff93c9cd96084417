//! Automated evaluation of C systems-programming exercises: build, run with
//! resource-leak and output-trace checks, then assignment-specific static
//! analysis with Semgrep-style rule packs.

pub mod frontend;
pub mod matcher;
pub mod pipeline;
pub mod resources;
pub mod rules;
pub mod trace;

pub use frontend::{parse_source, AstNode, FrontendError, NodeKind, Span};
pub use matcher::{evaluate_rule, match_pattern, run_rules, Finding, SourceFile};
pub use pipeline::{
    evaluate, render_feedback, Assignment, AssignmentManifest, EvaluationReport, OutputFormat,
    PipelineError, Stage, StageStatus, Verdict,
};
pub use resources::{diff_snapshots, parse_snapshot, ResourceId, Snapshot, SnapshotLabel};
pub use rules::{load_rule_pack, load_rule_pack_file, Rule, RuleError, RulePack};
pub use trace::{
    check_trace, evaluate_prod_cons, parse_trace, TraceEvent, TraceSpec, TraceVerdict,
};
