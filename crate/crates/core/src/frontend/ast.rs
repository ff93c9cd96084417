use serde::{Deserialize, Serialize};

use super::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    TranslationUnit,
    FunctionDef,
    Block,
    DeclStmt,
    ExprStmt,
    If,
    While,
    For,
    Return,
    Call,
    Assign,
    Identifier,
    IntLiteral,
    StringLiteral,
    BinaryOp,
    UnaryOp,
    Member,
    Index,
    Other,
}

impl NodeKind {
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::Block
                | NodeKind::DeclStmt
                | NodeKind::ExprStmt
                | NodeKind::If
                | NodeKind::While
                | NodeKind::For
                | NodeKind::Return
        )
    }

    pub fn is_expression(self) -> bool {
        matches!(
            self,
            NodeKind::Call
                | NodeKind::Assign
                | NodeKind::Identifier
                | NodeKind::IntLiteral
                | NodeKind::StringLiteral
                | NodeKind::BinaryOp
                | NodeKind::UnaryOp
                | NodeKind::Member
                | NodeKind::Index
        )
    }
}

/// A node of the C syntax tree.
///
/// `text` holds the tokens covered by `span` joined with single spaces, for
/// every node (not only leaves), so subtrees compare and print
/// deterministically. `op` carries the operator for `Assign`, `BinaryOp`,
/// `UnaryOp` and `Member` (`=`, `+`, `post++`, `->`, a cast's `(type)`, ...)
/// and is empty elsewhere.
///
/// Child layout by kind:
/// - `FunctionDef`: return type (`Other`), name (`Identifier`), parameter
///   list (`Other`, one `Other` child per parameter), any trailing
///   attributes, then the `Block` body last.
/// - `DeclStmt`: specifiers (`Other`), then one child per declarator; an
///   initialised declarator is an `Assign` of the declarator to its value.
/// - `Call`: callee, then arguments. `Member`: object, field.
///   `Index`: array, subscript.
/// - `If`: condition, then-branch, optional else-branch. `While`: condition,
///   body. `For`: init, condition, step (empty `Other` when absent), body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstNode {
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub op: String,
    pub text: String,
    pub span: Span,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Name of a `FunctionDef`.
    pub fn function_name(&self) -> Option<&str> {
        if self.kind != NodeKind::FunctionDef {
            return None;
        }
        self.children.get(1).map(|n| n.text.as_str())
    }

    pub fn function_body(&self) -> Option<&AstNode> {
        if self.kind != NodeKind::FunctionDef {
            return None;
        }
        self.children.last().filter(|b| b.kind == NodeKind::Block)
    }

    pub fn function_params(&self) -> Option<&AstNode> {
        if self.kind != NodeKind::FunctionDef {
            return None;
        }
        self.children.get(2)
    }

    /// Pre-order traversal: a node is yielded before its descendants, and
    /// siblings in source order.
    pub fn walk(&self) -> Walk<'_> {
        Walk { stack: vec![self] }
    }

    /// Numeric value of an integer literal, ignoring `u`/`l` suffixes.
    pub fn int_value(&self) -> Option<u128> {
        if self.kind != NodeKind::IntLiteral {
            return None;
        }
        parse_int_literal(&self.text)
    }

    /// Structural equality: same kinds, operators and leaf text, ignoring
    /// spans. Integer literals compare by value so `0x0` equals `0`.
    pub fn same_shape(&self, other: &AstNode) -> bool {
        if self.kind != other.kind || self.op != other.op {
            return false;
        }
        if self.kind == NodeKind::IntLiteral {
            return match (self.int_value(), other.int_value()) {
                (Some(a), Some(b)) => a == b,
                _ => self.text == other.text,
            };
        }
        if self.is_leaf() || other.is_leaf() {
            return self.is_leaf() && other.is_leaf() && self.text == other.text;
        }
        self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.same_shape(b))
    }
}

pub struct Walk<'a> {
    stack: Vec<&'a AstNode>,
}

impl<'a> Iterator for Walk<'a> {
    type Item = &'a AstNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

pub fn parse_int_literal(text: &str) -> Option<u128> {
    let t = text.trim_end_matches(['u', 'U', 'l', 'L']);
    let t = t.replace('\'', "");
    if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u128::from_str_radix(hex, 16).ok()
    } else if let Some(bin) = t.strip_prefix("0b").or_else(|| t.strip_prefix("0B")) {
        u128::from_str_radix(bin, 2).ok()
    } else if t.len() > 1 && t.starts_with('0') {
        u128::from_str_radix(&t[1..], 8).ok()
    } else {
        t.parse().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_literals_by_value() {
        assert_eq!(parse_int_literal("0x0"), Some(0));
        assert_eq!(parse_int_literal("0"), Some(0));
        assert_eq!(parse_int_literal("010"), Some(8));
        assert_eq!(parse_int_literal("10UL"), Some(10));
        assert_eq!(parse_int_literal("0b101"), Some(5));
        assert_eq!(parse_int_literal("0xZZ"), None);
    }
}
