use crate::frontend::{AstNode, NodeKind};
use crate::rules::{PatternAst, PatternNode};

use super::{Binding, Match};

const STORAGE_WORDS: &[&str] = &[
    "static",
    "inline",
    "extern",
    "__inline",
    "__inline__",
    "register",
];

/// Every match of `pattern` inside `scope`, outermost first and in source
/// order. Identical (span, binding) pairs are reported once.
pub fn match_pattern(pattern: &PatternAst, scope: &AstNode) -> Vec<Match> {
    let mut out = Vec::new();
    match pattern {
        PatternAst::Expression(p) => {
            let holes_only = matches!(p, PatternNode::Metavar(_) | PatternNode::Ellipsis);
            for node in scope.walk() {
                if holes_only && !node.kind.is_expression() {
                    continue;
                }
                for binding in match_node(p, node, &Binding::default()) {
                    push_unique(&mut out, node.span.clone(), binding);
                }
            }
        }
        PatternAst::Function(p) => {
            for node in scope.walk().filter(|n| n.kind == NodeKind::FunctionDef) {
                for binding in match_node(p, node, &Binding::default()) {
                    push_unique(&mut out, node.span.clone(), binding);
                }
            }
        }
        PatternAst::Statements(ps) if ps.len() == 1 && ps[0] != PatternNode::Ellipsis => {
            for node in scope.walk() {
                if !node.kind.is_statement() {
                    continue;
                }
                for binding in match_node(&ps[0], node, &Binding::default()) {
                    push_unique(&mut out, node.span.clone(), binding);
                }
            }
        }
        PatternAst::Statements(ps) => {
            for block in scope.walk().filter(|n| n.kind == NodeKind::Block) {
                match_in_block(ps, block, &mut out);
            }
        }
    }
    out
}

fn push_unique(out: &mut Vec<Match>, span: crate::frontend::Span, binding: Binding) {
    let m = Match { span, binding };
    if !out.contains(&m) {
        out.push(m);
    }
}

/// Runs of statements in `block` matching the sequence `ps`. A leading
/// ellipsis anchors at the first statement and a trailing one extends the
/// run to the last statement.
fn match_in_block(ps: &[PatternNode], block: &AstNode, out: &mut Vec<Match>) {
    let stmts = &block.children;
    let leading = ps.first() == Some(&PatternNode::Ellipsis);
    let trailing = ps.last() == Some(&PatternNode::Ellipsis);
    let starts = if leading { 0..1 } else { 0..stmts.len() };
    for start in starts {
        let window = &stmts[start.min(stmts.len())..];
        let mut sols = Vec::new();
        match_seq(ps, window, &Binding::default(), !trailing, &mut sols);
        for (binding, consumed) in sols {
            let span = if consumed == 0 {
                block.span.clone()
            } else {
                window[0].span.to(&window[consumed - 1].span)
            };
            push_unique(out, span, binding);
        }
    }
}

/// Matches pattern sequence `ps` against `ns`, pushing every solution with
/// the number of nodes consumed. With `allow_rest`, nodes may remain after
/// the pattern is exhausted.
fn match_seq(
    ps: &[PatternNode],
    ns: &[AstNode],
    env: &Binding,
    allow_rest: bool,
    out: &mut Vec<(Binding, usize)>,
) {
    fn go(
        ps: &[PatternNode],
        ns: &[AstNode],
        env: &Binding,
        allow_rest: bool,
        consumed: usize,
        out: &mut Vec<(Binding, usize)>,
    ) {
        match ps.split_first() {
            None => {
                if allow_rest || ns.is_empty() {
                    out.push((env.clone(), consumed));
                }
            }
            Some((PatternNode::Ellipsis, rest)) => {
                if rest.is_empty() {
                    // A final hole takes everything that is left.
                    out.push((env.clone(), consumed + ns.len()));
                    return;
                }
                for skip in 0..=ns.len() {
                    go(rest, &ns[skip..], env, allow_rest, consumed + skip, out);
                }
            }
            Some((p, rest)) => {
                let Some((n, tail)) = ns.split_first() else {
                    return;
                };
                for next in match_node(p, n, env) {
                    go(rest, tail, &next, allow_rest, consumed + 1, out);
                }
            }
        }
    }
    go(ps, ns, env, allow_rest, 0, out);
}

fn match_seq_full(ps: &[PatternNode], ns: &[AstNode], env: &Binding) -> Vec<Binding> {
    let mut sols = Vec::new();
    match_seq(ps, ns, env, false, &mut sols);
    let mut out: Vec<Binding> = Vec::with_capacity(sols.len());
    for (b, _) in sols {
        if !out.contains(&b) {
            out.push(b);
        }
    }
    out
}

fn strip_storage(text: &str) -> String {
    text.split(' ')
        .filter(|w| !STORAGE_WORDS.contains(w))
        .collect::<Vec<_>>()
        .join(" ")
}

/// All ways `p` matches the node `n` under `env`.
pub(crate) fn match_node(p: &PatternNode, n: &AstNode, env: &Binding) -> Vec<Binding> {
    let (kind, op, text, children) = match p {
        PatternNode::Metavar(name) => return env.unify(name, n).into_iter().collect(),
        PatternNode::Ellipsis => return vec![env.clone()],
        PatternNode::Node {
            kind,
            op,
            text,
            children,
        } => (*kind, op, text, children),
    };

    // `x = f();` also matches the declaration `int x = f();`.
    if kind == NodeKind::ExprStmt && n.kind == NodeKind::DeclStmt {
        if let ([inner], [_, declarator]) = (children.as_slice(), n.children.as_slice()) {
            if declarator.kind == NodeKind::Assign {
                return match_node(inner, declarator, env);
            }
        }
        return Vec::new();
    }

    if kind != n.kind || *op != n.op {
        return Vec::new();
    }
    if kind == NodeKind::IntLiteral {
        let equal = match (crate::frontend::parse_int_literal(text), n.int_value()) {
            (Some(a), Some(b)) => a == b,
            _ => *text == n.text,
        };
        return if equal { vec![env.clone()] } else { Vec::new() };
    }
    if children.is_empty() {
        return if *text == n.text {
            vec![env.clone()]
        } else {
            Vec::new()
        };
    }

    match kind {
        NodeKind::FunctionDef => match_function(children, n, env),
        NodeKind::Call => {
            let (Some((pc, pargs)), Some((nc, nargs))) =
                (children.split_first(), n.children.split_first())
            else {
                return Vec::new();
            };
            match_node(pc, nc, env)
                .iter()
                .flat_map(|e| match_seq_full(pargs, nargs, e))
                .collect()
        }
        NodeKind::Block => match_seq_full(children, &n.children, env),
        _ => {
            if children.len() != n.children.len() {
                return Vec::new();
            }
            let mut envs = vec![env.clone()];
            for (pc, nc) in children.iter().zip(&n.children) {
                envs = envs.iter().flat_map(|e| match_node(pc, nc, e)).collect();
                if envs.is_empty() {
                    break;
                }
            }
            envs
        }
    }
}

/// Return type, name, parameters and body; attributes between the
/// parameter list and the body are ignored.
fn match_function(pc: &[PatternNode], n: &AstNode, env: &Binding) -> Vec<Binding> {
    let (Some(p_ret), Some(p_name), Some(p_params), Some(p_body)) =
        (pc.first(), pc.get(1), pc.get(2), pc.last())
    else {
        return Vec::new();
    };
    let (Some(n_ret), Some(n_name), Some(n_params), Some(n_body)) = (
        n.children.first(),
        n.children.get(1),
        n.function_params(),
        n.function_body(),
    ) else {
        return Vec::new();
    };
    if let PatternNode::Node { text, .. } = p_ret {
        if strip_storage(text) != strip_storage(&n_ret.text) {
            return Vec::new();
        }
    }
    let mut envs = match_node(p_name, n_name, env);
    envs = envs
        .iter()
        .flat_map(|e| match p_params {
            PatternNode::Node { children, .. } => match_seq_full(children, &n_params.children, e),
            other => match_node(other, n_params, e),
        })
        .collect();
    envs.iter()
        .flat_map(|e| match_node(p_body, n_body, e))
        .collect()
}
