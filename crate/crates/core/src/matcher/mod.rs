//! Structural matching of compiled patterns against parsed C files, and
//! evaluation of rules into located findings.
//!
//! Matching is purely syntactic. A metavariable binds the first node it
//! meets and every later occurrence must be structurally equal to it. An
//! ellipsis absorbs zero or more siblings (statements of one block, call
//! arguments, parameters) and never crosses into a nested block; every way
//! of placing the ellipses is enumerated, shortest absorption first, so a
//! rule sees each candidate binding.

mod engine;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::frontend::{AstNode, Span};
use crate::rules::{PatternAst, PatternClause, Rule, RulePack};

pub use engine::match_pattern;

/// Metavariable name (with its `$`) to the node it matched.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding(BTreeMap<String, AstNode>);

impl Binding {
    pub fn get(&self, name: &str) -> Option<&AstNode> {
        self.0.get(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &AstNode)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Adds `name ↦ node`, or checks it against an existing binding.
    /// Returns `None` when unification fails.
    pub fn unify(&self, name: &str, node: &AstNode) -> Option<Binding> {
        match self.0.get(name) {
            Some(bound) => bound.same_shape(node).then(|| self.clone()),
            None => {
                let mut next = self.clone();
                next.0.insert(name.to_string(), node.clone());
                Some(next)
            }
        }
    }

    /// Union of two bindings, or `None` if they disagree on a shared name.
    pub fn merge(&self, other: &Binding) -> Option<Binding> {
        let mut out = self.clone();
        for (name, node) in &other.0 {
            out = out.unify(name, node)?;
        }
        Some(out)
    }

    /// Bound text per metavariable, for reports.
    pub fn texts(&self) -> BTreeMap<String, String> {
        self.0
            .iter()
            .map(|(k, v)| (k.clone(), v.text.clone()))
            .collect()
    }
}

/// One place where a pattern matched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub span: Span,
    pub binding: Binding,
}

/// A rule violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub rule_id: String,
    pub message: String,
    pub span: Span,
    pub bindings: Binding,
}

impl Finding {
    /// Pipeline stage that produces findings.
    pub const STAGE: &'static str = "static";

    pub fn file(&self) -> &Path {
        &self.span.file
    }
}

/// A parsed submission file.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: PathBuf,
    pub ast: AstNode,
}

struct RuleOutcome {
    findings: Vec<Finding>,
    positive_matched: bool,
}

/// Kept match plus the node a metavariable-pattern judged, if any.
struct Candidate {
    m: Match,
    focus: Option<Span>,
}

fn evaluate_clauses(clauses: &[PatternClause], scope: &AstNode) -> (Vec<Candidate>, bool) {
    let positives: Vec<&PatternAst> = clauses
        .iter()
        .filter_map(|c| match c {
            PatternClause::Pattern(p) => Some(&p.ast),
            _ => None,
        })
        .collect();

    let mut current: Vec<Match> = match positives.split_first() {
        // Inside a metavariable-pattern made only of negations the bound node
        // itself is the candidate.
        None => vec![Match {
            span: scope.span.clone(),
            binding: Binding::default(),
        }],
        Some((first, rest)) => {
            let mut acc = match_pattern(first, scope);
            for p in rest {
                let other = match_pattern(p, scope);
                acc = conjoin(&acc, &other);
            }
            acc
        }
    };
    let positive_matched = !current.is_empty();

    for c in clauses {
        if let PatternClause::PatternNot(p) = c {
            let negatives = match_pattern(&p.ast, scope);
            current.retain(|m| !negatives.iter().any(|n| n.span.contains(&m.span)));
        }
    }

    let mut out: Vec<Candidate> = current
        .into_iter()
        .map(|m| Candidate { m, focus: None })
        .collect();
    for c in clauses {
        if let PatternClause::MetavariablePattern {
            metavariable,
            clauses: inner,
        } = c
        {
            out.retain_mut(|cand| {
                let Some(bound) = cand.m.binding.get(metavariable) else {
                    return false;
                };
                let (kept, _) = evaluate_clauses(inner, bound);
                if kept.is_empty() {
                    return false;
                }
                if cand.focus.is_none() {
                    cand.focus = Some(bound.span.clone());
                }
                true
            });
        }
    }
    (out, positive_matched)
}

/// Pairs matches of two positive patterns whose regions nest and whose
/// bindings agree; the narrower region is kept.
fn conjoin(left: &[Match], right: &[Match]) -> Vec<Match> {
    let mut out = Vec::new();
    for l in left {
        for r in right {
            let span = if l.span.contains(&r.span) {
                &r.span
            } else if r.span.contains(&l.span) {
                &l.span
            } else {
                continue;
            };
            if let Some(binding) = l.binding.merge(&r.binding) {
                let m = Match {
                    span: span.clone(),
                    binding,
                };
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
    }
    out
}

fn evaluate(rule: &Rule, ast: &AstNode) -> RuleOutcome {
    let (kept, positive_matched) = evaluate_clauses(&rule.clauses, ast);
    let mut findings: Vec<Finding> = Vec::new();
    for Candidate { m, focus } in kept {
        let f = Finding {
            rule_id: rule.id.clone(),
            message: rule.message.clone(),
            span: focus.unwrap_or(m.span),
            bindings: m.binding,
        };
        if !findings
            .iter()
            .any(|g| g.rule_id == f.rule_id && g.span == f.span)
        {
            findings.push(f);
        }
    }
    RuleOutcome {
        findings,
        positive_matched,
    }
}

fn omission_finding(rule: &Rule, ast: &AstNode) -> Finding {
    Finding {
        rule_id: rule.id.clone(),
        message: rule.message.clone(),
        span: ast.span.clone(),
        bindings: Binding::default(),
    }
}

/// Findings of one rule on one translation unit.
///
/// Positive patterns are conjoined; a match is dropped when a `pattern-not`
/// match covers it, and when a `metavariable-pattern` finds the bound node
/// compliant (for a list of `pattern-not` values: the node equals one of
/// them). A finding that went through a metavariable-pattern is located at
/// the judged node. With `require_match`, a file where the positive
/// patterns match nowhere yields one finding spanning the file.
pub fn evaluate_rule(rule: &Rule, ast: &AstNode) -> Vec<Finding> {
    let outcome = evaluate(rule, ast);
    let mut findings = outcome.findings;
    if rule.require_match && !outcome.positive_matched {
        findings.push(omission_finding(rule, ast));
    }
    findings
}

/// Runs every rule of `pack` on every file.
///
/// `require_match` is judged across the submission: an omission is
/// reported once, against the first `.c` file in path order (or the first
/// file when there is none), only if no file matches.
///
/// Output is sorted by file, line and rule id; repeated (rule, span) pairs
/// are collapsed.
pub fn run_rules(pack: &RulePack, files: &[SourceFile]) -> Vec<Finding> {
    let mut findings = Vec::new();
    for rule in &pack.rules {
        let mut matched_anywhere = false;
        for file in files {
            let outcome = evaluate(rule, &file.ast);
            matched_anywhere |= outcome.positive_matched;
            findings.extend(outcome.findings);
        }
        if rule.require_match && !matched_anywhere {
            let target = files
                .iter()
                .filter(|f| f.path.extension().is_some_and(|e| e == "c"))
                .min_by(|a, b| a.path.cmp(&b.path))
                .or_else(|| files.iter().min_by(|a, b| a.path.cmp(&b.path)));
            if let Some(file) = target {
                findings.push(omission_finding(rule, &file.ast));
            }
        }
    }
    sort_findings(&mut findings);
    findings
}

fn sort_findings(findings: &mut Vec<Finding>) {
    findings.sort_by(|a, b| {
        (
            a.file(),
            a.span.start_line,
            &a.rule_id,
            a.span.start_col,
            a.span.end_byte,
        )
            .cmp(&(
                b.file(),
                b.span.start_line,
                &b.rule_id,
                b.span.start_col,
                b.span.end_byte,
            ))
    });
    findings.dedup_by(|a, b| a.rule_id == b.rule_id && a.span == b.span);
}

#[cfg(test)]
mod tests;
