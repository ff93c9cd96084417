//! Tokenizer and parser for the subset of C used by the exercise templates.
//!
//! No preprocessing happens: directives survive as opaque tokens and every
//! branch of conditional compilation is parsed. Constructs outside the subset
//! (attributes, `asm`, statement expressions, exotic declarators) become
//! `Other` nodes with exact spans instead of errors.

mod ast;
mod lexer;
mod parser;
mod span;

use std::path::Path;

use thiserror::Error;

pub use ast::{parse_int_literal, AstNode, NodeKind, Walk};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;
pub(crate) use parser::Parser;
pub use span::Span;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{span}: unterminated string or character literal")]
    UnterminatedString { span: Span },
    #[error("{span}: unterminated comment")]
    UnterminatedComment { span: Span },
    #[error("{span}: expected {expected}, found {found}")]
    Parse {
        span: Span,
        expected: String,
        found: String,
    },
}

impl FrontendError {
    pub fn span(&self) -> &Span {
        match self {
            FrontendError::UnterminatedString { span }
            | FrontendError::UnterminatedComment { span }
            | FrontendError::Parse { span, .. } => span,
        }
    }
}

/// Tokenizes and parses one source file.
pub fn parse_source(source: &str, file: &Path) -> Result<AstNode, FrontendError> {
    let tokens = tokenize(source, file)?;
    parse(&tokens, file)
}

/// Function definitions named `name`, in source order.
pub fn find_functions<'a>(ast: &'a AstNode, name: &str) -> Vec<&'a AstNode> {
    ast.walk()
        .filter(|n| n.kind == NodeKind::FunctionDef && n.function_name() == Some(name))
        .collect()
}
