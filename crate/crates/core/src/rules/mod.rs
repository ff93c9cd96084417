//! Assignment-specific rule packs and the code patterns they embed.

mod pack;
mod pattern;

use std::path::PathBuf;

use thiserror::Error;

pub use pack::{
    load_rule_pack, load_rule_pack_file, render_rule_pack, CompiledPattern, PatternClause, Rule,
    RulePack,
};
pub use pattern::{
    is_metavariable_name, parse_pattern, PatternAst, PatternNode, PatternSyntaxError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: rule `{rule_id}`: invalid pattern: {message}")]
    PatternSyntax {
        line: usize,
        rule_id: String,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl RuleError {
    pub fn line(&self) -> Option<usize> {
        match self {
            RuleError::Schema { line, .. } | RuleError::PatternSyntax { line, .. } => Some(*line),
            RuleError::Io { .. } => None,
        }
    }
}
