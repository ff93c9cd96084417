use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::pattern::{is_metavariable_name, parse_pattern, PatternAst};
use super::RuleError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulePack {
    pub rules: Vec<Rule>,
    pub source_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    /// Student-facing feedback, reported verbatim.
    pub message: String,
    pub clauses: Vec<PatternClause>,
    /// Report the rule once per submission when its positive patterns match
    /// nowhere.
    pub require_match: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternClause {
    Pattern(CompiledPattern),
    PatternNot(CompiledPattern),
    MetavariablePattern {
        metavariable: String,
        clauses: Vec<PatternClause>,
    },
}

/// A snippet together with its compiled form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledPattern {
    pub source: String,
    pub ast: PatternAst,
}

impl CompiledPattern {
    pub fn compile(source: &str) -> Result<Self, super::PatternSyntaxError> {
        Ok(CompiledPattern {
            source: source.to_string(),
            ast: parse_pattern(source)?,
        })
    }
}

impl Rule {
    pub fn positive_patterns(&self) -> impl Iterator<Item = &CompiledPattern> {
        self.clauses.iter().filter_map(|c| match c {
            PatternClause::Pattern(p) => Some(p),
            _ => None,
        })
    }
}

// On-disk shape. Field names follow the Semgrep rule syntax so existing
// rule documents load unchanged.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPack {
    rules: Vec<RawRule>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    id: String,
    message: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    require_match: bool,
    patterns: Vec<RawClause>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClause {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pattern: Option<String>,
    #[serde(
        default,
        rename = "pattern-not",
        skip_serializing_if = "Option::is_none"
    )]
    pattern_not: Option<String>,
    #[serde(
        default,
        rename = "metavariable-pattern",
        skip_serializing_if = "Option::is_none"
    )]
    metavariable_pattern: Option<RawMetavariablePattern>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetavariablePattern {
    metavariable: String,
    patterns: Vec<RawClause>,
}

/// Locates lines of a YAML document for error messages; serde_yaml values
/// do not carry positions.
struct LineFinder<'a> {
    lines: Vec<&'a str>,
}

impl<'a> LineFinder<'a> {
    fn new(document: &'a str) -> Self {
        LineFinder {
            lines: document.lines().collect(),
        }
    }

    /// 1-based line of the `id:` key for rule `id`, or 1.
    fn rule_line(&self, id: &str) -> usize {
        self.lines
            .iter()
            .position(|l| {
                let l = l.trim_start().trim_start_matches('-').trim_start();
                l.strip_prefix("id:")
                    .is_some_and(|rest| rest.trim().trim_matches(|c| c == '"' || c == '\'') == id)
            })
            .map_or(1, |i| i + 1)
    }

    /// 1-based line where `snippet` starts, searching from `after`.
    fn snippet_line(&self, snippet: &str, after: usize) -> usize {
        let Some(first) = snippet.lines().map(str::trim).find(|l| !l.is_empty()) else {
            return after;
        };
        self.lines
            .iter()
            .enumerate()
            .skip(after.saturating_sub(1))
            .find(|(_, l)| l.contains(first))
            .map_or(after, |(i, _)| i + 1)
    }
}

/// Parses and validates a rule-pack document.
pub fn load_rule_pack(document: &str, source_path: &Path) -> Result<RulePack, RuleError> {
    let raw: RawPack = serde_yaml::from_str(document).map_err(|e| RuleError::Schema {
        line: e.location().map_or(1, |l| l.line()),
        message: e.to_string(),
    })?;
    let lines = LineFinder::new(document);
    let mut seen = HashSet::new();
    let mut rules = Vec::with_capacity(raw.rules.len());
    for r in raw.rules {
        let line = lines.rule_line(&r.id);
        let schema = |message: String| RuleError::Schema { line, message };
        if r.id.trim().is_empty() {
            return Err(schema("rule id must not be empty".to_string()));
        }
        if !seen.insert(r.id.clone()) {
            return Err(schema(format!("duplicate rule id `{}`", r.id)));
        }
        if r.message.trim().is_empty() {
            return Err(schema(format!("rule `{}` has an empty message", r.id)));
        }
        if r.patterns.is_empty() {
            return Err(schema(format!("rule `{}` has no patterns", r.id)));
        }
        let clauses = convert_clauses(&r.patterns, &r.id, line, &lines)?;
        let rule = Rule {
            id: r.id,
            message: r.message,
            clauses,
            require_match: r.require_match,
        };
        if rule.positive_patterns().next().is_none() {
            return Err(schema(format!(
                "rule `{}` needs at least one positive `pattern`",
                rule.id
            )));
        }
        check_metavariables(&rule.clauses, &BTreeSet::new())
            .map_err(|m| schema(format!("rule `{}`: {m}", rule.id)))?;
        rules.push(rule);
    }
    Ok(RulePack {
        rules,
        source_path: source_path.to_path_buf(),
    })
}

pub fn load_rule_pack_file(path: &Path) -> Result<RulePack, RuleError> {
    let document = fs::read_to_string(path).map_err(|e| RuleError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    load_rule_pack(&document, path)
}

fn convert_clauses(
    raw: &[RawClause],
    rule_id: &str,
    rule_line: usize,
    lines: &LineFinder<'_>,
) -> Result<Vec<PatternClause>, RuleError> {
    let compile = |snippet: &str| {
        CompiledPattern::compile(snippet).map_err(|e| {
            let start = lines.snippet_line(snippet, rule_line);
            RuleError::PatternSyntax {
                line: start + e.line as usize - 1,
                rule_id: rule_id.to_string(),
                message: e.message,
            }
        })
    };
    raw.iter()
        .map(
            |c| match (&c.pattern, &c.pattern_not, &c.metavariable_pattern) {
                (Some(p), None, None) => Ok(PatternClause::Pattern(compile(p)?)),
                (None, Some(p), None) => Ok(PatternClause::PatternNot(compile(p)?)),
                (None, None, Some(m)) => {
                    if m.patterns.is_empty() {
                        return Err(RuleError::Schema {
                            line: rule_line,
                            message: format!(
                                "rule `{rule_id}`: metavariable-pattern for {} has no patterns",
                                m.metavariable
                            ),
                        });
                    }
                    Ok(PatternClause::MetavariablePattern {
                        metavariable: m.metavariable.clone(),
                        clauses: convert_clauses(&m.patterns, rule_id, rule_line, lines)?,
                    })
                }
                _ => Err(RuleError::Schema {
                    line: rule_line,
                    message: format!(
                        "rule `{rule_id}`: each entry of `patterns` needs exactly one of \
                         `pattern`, `pattern-not`, `metavariable-pattern`"
                    ),
                }),
            },
        )
        .collect()
}

/// Every metavariable-pattern must name a metavariable bound by a positive
/// pattern at its own level or an enclosing one.
fn check_metavariables(clauses: &[PatternClause], outer: &BTreeSet<String>) -> Result<(), String> {
    let mut bound = outer.clone();
    for c in clauses {
        if let PatternClause::Pattern(p) = c {
            bound.extend(p.ast.metavariables());
        }
    }
    for c in clauses {
        if let PatternClause::MetavariablePattern {
            metavariable,
            clauses,
        } = c
        {
            if !is_metavariable_name(metavariable) {
                return Err(format!("`{metavariable}` is not a valid metavariable name"));
            }
            if !bound.contains(metavariable) {
                return Err(format!(
                    "metavariable-pattern refers to {metavariable}, which no pattern binds"
                ));
            }
            check_metavariables(clauses, &bound)?;
        }
    }
    Ok(())
}

/// Writes a pack back out in the document format accepted by
/// [`load_rule_pack`].
pub fn render_rule_pack(pack: &RulePack) -> String {
    fn raw_clauses(clauses: &[PatternClause]) -> Vec<RawClause> {
        clauses
            .iter()
            .map(|c| match c {
                PatternClause::Pattern(p) => RawClause {
                    pattern: Some(p.source.clone()),
                    ..Default::default()
                },
                PatternClause::PatternNot(p) => RawClause {
                    pattern_not: Some(p.source.clone()),
                    ..Default::default()
                },
                PatternClause::MetavariablePattern {
                    metavariable,
                    clauses,
                } => RawClause {
                    metavariable_pattern: Some(RawMetavariablePattern {
                        metavariable: metavariable.clone(),
                        patterns: raw_clauses(clauses),
                    }),
                    ..Default::default()
                },
            })
            .collect()
    }
    let raw = RawPack {
        rules: pack
            .rules
            .iter()
            .map(|r| RawRule {
                id: r.id.clone(),
                message: r.message.clone(),
                require_match: r.require_match,
                patterns: raw_clauses(&r.clauses),
            })
            .collect(),
    };
    serde_yaml::to_string(&raw).expect("rule packs always serialize")
}
