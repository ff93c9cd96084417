use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use crate::frontend::{tokenize, AstNode, FrontendError, NodeKind, Parser, TokenKind};

/// A node of a compiled code pattern: either concrete syntax mirroring
/// [`AstNode`], or one of the two holes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternNode {
    /// `$NAME`: binds any node; repeated names must bind equal subtrees.
    Metavar(String),
    /// `...`: zero or more statements or arguments, or any single node in
    /// expression position.
    Ellipsis,
    Node {
        kind: NodeKind,
        op: String,
        text: String,
        children: Vec<PatternNode>,
    },
}

impl PatternNode {
    pub fn kind(&self) -> Option<NodeKind> {
        match self {
            PatternNode::Node { kind, .. } => Some(*kind),
            _ => None,
        }
    }

    fn collect_metavars(&self, out: &mut BTreeSet<String>) {
        match self {
            PatternNode::Metavar(name) => {
                out.insert(name.clone());
            }
            PatternNode::Ellipsis => {}
            PatternNode::Node { children, .. } => {
                for c in children {
                    c.collect_metavars(out);
                }
            }
        }
    }
}

/// The shape a snippet compiles to, which decides where it can match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternAst {
    /// A lone expression; matches at any expression node.
    Expression(PatternNode),
    /// One or more statements; a run of statements inside a block.
    Statements(Vec<PatternNode>),
    /// A whole function definition.
    Function(PatternNode),
}

impl PatternAst {
    pub fn metavariables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        match self {
            PatternAst::Expression(n) | PatternAst::Function(n) => n.collect_metavars(&mut out),
            PatternAst::Statements(ns) => {
                for n in ns {
                    n.collect_metavars(&mut out);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSyntaxError {
    /// 1-based line within the snippet.
    pub line: u32,
    pub message: String,
}

impl fmt::Display for PatternSyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for PatternSyntaxError {}

impl From<FrontendError> for PatternSyntaxError {
    fn from(e: FrontendError) -> Self {
        let line = e.span().start_line;
        let message = match e {
            FrontendError::Parse {
                expected, found, ..
            } => format!("expected {expected}, found {found}"),
            other => other.to_string(),
        };
        PatternSyntaxError { line, message }
    }
}

fn metavar_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\$[A-Z_][A-Z0-9_]*$").expect("valid regex"))
}

pub fn is_metavariable_name(name: &str) -> bool {
    metavar_regex().is_match(name)
}

/// Compiles a C fragment containing `$NAME` and `...` holes.
///
/// A snippet that is exactly `...` is a statement sequence; otherwise the
/// first reading that consumes all input wins, in the order expression,
/// function definition, statement list.
pub fn parse_pattern(snippet: &str) -> Result<PatternAst, PatternSyntaxError> {
    let file = Path::new("<pattern>");
    let tokens = tokenize(snippet, file)?;
    if tokens.is_empty() {
        return Err(PatternSyntaxError {
            line: 1,
            message: "empty pattern".to_string(),
        });
    }
    if let Some(d) = tokens.iter().find(|t| t.kind == TokenKind::Directive) {
        return Err(PatternSyntaxError {
            line: d.span.start_line,
            message: "preprocessor lines are not allowed in patterns".to_string(),
        });
    }
    if tokens.len() == 1 && tokens[0].is_punct("...") {
        return Ok(PatternAst::Statements(vec![PatternNode::Ellipsis]));
    }

    let mut p = Parser::new(&tokens, file, true);
    if let Ok(expr) = p.expression() {
        if p.at_end() {
            return Ok(PatternAst::Expression(convert(&expr)?));
        }
    }

    let mut p = Parser::new(&tokens, file, true);
    if let Ok(tu) = p.translation_unit() {
        if let [f] = tu.children.as_slice() {
            if f.kind == NodeKind::FunctionDef {
                return Ok(PatternAst::Function(convert(f)?));
            }
        }
    }

    let mut p = Parser::new(&tokens, file, true);
    let mut stmts = Vec::new();
    while !p.at_end() {
        stmts.push(convert(&p.statement()?)?);
    }
    check_no_double_ellipsis(&stmts, 1)?;
    Ok(PatternAst::Statements(stmts))
}

fn convert(node: &AstNode) -> Result<PatternNode, PatternSyntaxError> {
    if node.kind == NodeKind::Identifier && node.text.starts_with('$') {
        if !is_metavariable_name(&node.text) {
            return Err(PatternSyntaxError {
                line: node.span.start_line,
                message: format!(
                    "invalid metavariable `{}`: names are `$` followed by uppercase letters, digits or `_`",
                    node.text
                ),
            });
        }
        return Ok(PatternNode::Metavar(node.text.clone()));
    }
    if node.kind == NodeKind::Other && node.is_leaf() && node.text == "..." {
        return Ok(PatternNode::Ellipsis);
    }
    let children = node
        .children
        .iter()
        .map(convert)
        .collect::<Result<Vec<_>, _>>()?;
    check_no_double_ellipsis(&children, node.span.start_line)?;
    Ok(PatternNode::Node {
        kind: node.kind,
        op: node.op.clone(),
        text: node.text.clone(),
        children,
    })
}

fn check_no_double_ellipsis(seq: &[PatternNode], line: u32) -> Result<(), PatternSyntaxError> {
    if seq
        .windows(2)
        .any(|w| w[0] == PatternNode::Ellipsis && w[1] == PatternNode::Ellipsis)
    {
        return Err(PatternSyntaxError {
            line,
            message: "two consecutive `...` holes".to_string(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call_name(n: &PatternNode) -> &str {
        match n {
            PatternNode::Node {
                kind: NodeKind::ExprStmt,
                children,
                ..
            } => call_name(&children[0]),
            PatternNode::Node {
                kind: NodeKind::Call,
                children,
                ..
            } => match &children[0] {
                PatternNode::Node { text, .. } => text,
                _ => "?",
            },
            _ => "?",
        }
    }

    #[test]
    fn semctl_statement_pattern() {
        let pat = parse_pattern("semctl($SEMID, $SEM, SETVAL, $INIT);").unwrap();
        let PatternAst::Statements(stmts) = &pat else {
            panic!("{pat:?}")
        };
        assert_eq!(stmts.len(), 1);
        let PatternNode::Node {
            kind: NodeKind::ExprStmt,
            children,
            ..
        } = &stmts[0]
        else {
            panic!()
        };
        let PatternNode::Node {
            kind: NodeKind::Call,
            children: call,
            ..
        } = &children[0]
        else {
            panic!()
        };
        assert_eq!(call.len() - 1, 4);
        assert_eq!(pat.metavariables().len(), 3);
        let metavar_args = call[1..]
            .iter()
            .filter(|a| matches!(a, PatternNode::Metavar(_)))
            .count();
        assert_eq!(metavar_args, 3);
    }

    #[test]
    fn call_expression_pattern_has_four_arguments() {
        let pat = parse_pattern("semctl($SEMID, $SEM, SETVAL, $INIT)").unwrap();
        let PatternAst::Expression(PatternNode::Node {
            kind: NodeKind::Call,
            children,
            ..
        }) = &pat
        else {
            panic!("{pat:?}")
        };
        assert_eq!(children.len(), 5);
        assert_eq!(
            pat.metavariables().into_iter().collect::<Vec<_>>(),
            ["$INIT", "$SEM", "$SEMID"]
        );
    }

    #[test]
    fn lone_ellipsis() {
        assert_eq!(
            parse_pattern("...").unwrap(),
            PatternAst::Statements(vec![PatternNode::Ellipsis])
        );
    }

    #[test]
    fn literal_patterns_are_expressions() {
        let pat = parse_pattern("4").unwrap();
        assert!(matches!(
            pat,
            PatternAst::Expression(PatternNode::Node {
                kind: NodeKind::IntLiteral,
                ..
            })
        ));
    }

    #[test]
    fn producer_synchronization_body() {
        let snippet = "void insert_request(...) {\n  ...\n  Wait_Sem(...,$SPACE_AVAILABLE);\n  Wait_Sem(...,$MUTEXP);\n  ...\n  Signal_Sem(...,$MUTEXP);\n  Signal_Sem(...,$MESSAGE_AVAILABLE);\n  ...\n}\n";
        let pat = parse_pattern(snippet).unwrap();
        let PatternAst::Function(PatternNode::Node { children, .. }) = &pat else {
            panic!("{pat:?}")
        };
        let PatternNode::Node {
            kind: NodeKind::Block,
            children: body,
            ..
        } = children.last().unwrap()
        else {
            panic!()
        };
        let shape: Vec<&str> = body
            .iter()
            .map(|n| match n {
                PatternNode::Ellipsis => "...",
                other => call_name(other),
            })
            .collect();
        assert_eq!(
            shape,
            [
                "...",
                "Wait_Sem",
                "Wait_Sem",
                "...",
                "Signal_Sem",
                "Signal_Sem",
                "..."
            ]
        );
        // parameters are a single hole
        let PatternNode::Node {
            children: params, ..
        } = &children[2]
        else {
            panic!()
        };
        assert_eq!(params, &[PatternNode::Ellipsis]);
    }

    #[test]
    fn function_with_pointer_return_type() {
        let pat = parse_pattern(
            "queue_requests* initialization(...) {\n  ...\n  semctl($SEMID, $SEM, SETVAL, $INIT);\n  ...\n}\n",
        )
        .unwrap();
        let PatternAst::Function(PatternNode::Node { children, .. }) = &pat else {
            panic!("{pat:?}")
        };
        let PatternNode::Node { text, .. } = &children[0] else {
            panic!()
        };
        assert_eq!(text, "queue_requests *");
    }

    #[test]
    fn statement_sequences() {
        let pat = parse_pattern("a = 1;\n...\nb = 2;").unwrap();
        let PatternAst::Statements(s) = pat else {
            panic!()
        };
        assert_eq!(s.len(), 3);
        assert_eq!(s[1], PatternNode::Ellipsis);
    }

    #[test]
    fn rejects_lowercase_metavariable() {
        let err = parse_pattern("foo($x);").unwrap_err();
        assert!(err.message.contains("invalid metavariable"), "{err}");
    }

    #[test]
    fn rejects_double_ellipsis() {
        assert!(parse_pattern("...\n...\nfoo();").is_err());
        assert!(parse_pattern("foo(..., ...)").is_err());
    }

    #[test]
    fn rejects_garbage() {
        let err = parse_pattern("foo(;").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(parse_pattern("").is_err());
        assert!(parse_pattern("#include <x.h>").is_err());
    }
}
