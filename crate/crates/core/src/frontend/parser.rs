use std::path::Path;
use std::sync::Arc;

use super::ast::{AstNode, NodeKind};
use super::lexer::{Token, TokenKind};
use super::span::Span;
use super::FrontendError;

const MAX_DEPTH: usize = 96;

const TYPE_KEYWORDS: &[&str] = &[
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "_Bool",
    "bool", "_Complex",
];

const QUALIFIERS: &[&str] = &[
    "const",
    "volatile",
    "static",
    "extern",
    "register",
    "auto",
    "inline",
    "restrict",
    "typedef",
    "_Atomic",
    "_Thread_local",
    "__thread",
    "__inline",
    "__inline__",
    "__restrict",
    "__restrict__",
    "__volatile__",
    "__const",
];

const ATTRIBUTE_KEYWORDS: &[&str] = &["__attribute__", "__attribute", "__declspec", "_Alignas"];

const STATEMENT_KEYWORDS: &[&str] = &[
    "if", "else", "while", "for", "do", "switch", "case", "default", "break", "continue", "return",
    "goto", "sizeof",
];

const ASSIGN_OPS: &[&str] = &[
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=",
];

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 4,
        "&&" => 5,
        "|" => 6,
        "^" => 7,
        "&" => 8,
        "==" | "!=" => 9,
        "<" | ">" | "<=" | ">=" => 10,
        "<<" | ">>" => 11,
        "+" | "-" => 12,
        "*" | "/" | "%" => 13,
        _ => return None,
    })
}

fn is_type_start(tok: &Token) -> bool {
    tok.kind == TokenKind::Ident
        && (TYPE_KEYWORDS.contains(&tok.text.as_str())
            || QUALIFIERS.contains(&tok.text.as_str())
            || ATTRIBUTE_KEYWORDS.contains(&tok.text.as_str())
            || matches!(
                tok.text.as_str(),
                "struct" | "union" | "enum" | "__extension__"
            ))
}

fn is_plain_ident(tok: &Token) -> bool {
    tok.kind == TokenKind::Ident
        && !is_type_start(tok)
        && !STATEMENT_KEYWORDS.contains(&tok.text.as_str())
}

type PResult<T> = Result<T, FrontendError>;

pub(crate) struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    file: Arc<Path>,
    depth: usize,
    /// Accept `...` in statement, expression and argument position.
    holes: bool,
}

/// Parses a token stream into a `TranslationUnit`.
pub fn parse(tokens: &[Token], file: &Path) -> Result<AstNode, FrontendError> {
    let mut p = Parser::new(tokens, file, false);
    p.translation_unit()
}

impl<'t> Parser<'t> {
    pub(crate) fn new(tokens: &'t [Token], file: &Path, holes: bool) -> Self {
        let file: Arc<Path> = tokens
            .first()
            .map(|t| t.span.file.clone())
            .unwrap_or_else(|| Arc::from(file));
        Parser {
            tokens,
            pos: 0,
            file,
            depth: 0,
            holes,
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.tokens.get(self.pos + n)
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn at_ident(&self, name: &str) -> bool {
        self.peek().is_some_and(|t| t.is_ident(name))
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn eof_span(&self) -> Span {
        match self.tokens.last() {
            Some(t) => t.span.end_point(),
            None => Span {
                file: self.file.clone(),
                start_line: 1,
                start_col: 1,
                end_line: 1,
                end_col: 1,
                start_byte: 0,
                end_byte: 0,
            },
        }
    }

    fn error(&self, expected: &str) -> FrontendError {
        match self.peek() {
            Some(t) => FrontendError::Parse {
                span: t.span.clone(),
                expected: expected.to_string(),
                found: format!("`{}`", t.text),
            },
            None => FrontendError::Parse {
                span: self.eof_span(),
                expected: expected.to_string(),
                found: "end of file".to_string(),
            },
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.at_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("`{p}`")))
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("shallower nesting"));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn span_of(&self, start: usize, end: usize) -> Span {
        if end > start {
            self.tokens[start].span.to(&self.tokens[end - 1].span)
        } else if let Some(t) = self.tokens.get(start) {
            t.span.start_point()
        } else {
            self.eof_span()
        }
    }

    fn text_of(&self, start: usize, end: usize) -> String {
        self.tokens[start..end]
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn node_range(
        &self,
        kind: NodeKind,
        op: impl Into<String>,
        start: usize,
        end: usize,
        children: Vec<AstNode>,
    ) -> AstNode {
        AstNode {
            kind,
            op: op.into(),
            text: self.text_of(start, end),
            span: self.span_of(start, end),
            children,
        }
    }

    /// Node covering the tokens from `start` up to the current position.
    fn node(
        &self,
        kind: NodeKind,
        op: impl Into<String>,
        start: usize,
        children: Vec<AstNode>,
    ) -> AstNode {
        self.node_range(kind, op, start, self.pos, children)
    }

    /// Skips a balanced `(..)`, `[..]` or `{..}` group starting at the
    /// current token.
    fn skip_group(&mut self) -> PResult<()> {
        let mut stack: Vec<&str> = Vec::new();
        loop {
            let Some(t) = self.peek() else {
                let want = stack.last().copied().unwrap_or(")");
                return Err(self.error(&format!("`{want}`")));
            };
            if t.kind == TokenKind::Punct {
                match t.text.as_str() {
                    "(" => stack.push(")"),
                    "[" => stack.push("]"),
                    "{" => stack.push("}"),
                    ")" | "]" | "}" => {
                        if stack.last() != Some(&t.text.as_str()) {
                            let want = stack.last().copied().unwrap_or("(");
                            return Err(self.error(&format!("`{want}`")));
                        }
                        stack.pop();
                    }
                    _ => {}
                }
            }
            self.pos += 1;
            if stack.is_empty() {
                return Ok(());
            }
        }
    }

    fn at_open_group(&self) -> bool {
        self.at_punct("(") || self.at_punct("[") || self.at_punct("{")
    }

    // ---------------------------------------------------------------- top level

    pub(crate) fn translation_unit(&mut self) -> PResult<AstNode> {
        let mut items = Vec::new();
        while !self.at_end() {
            items.push(self.external_declaration()?);
        }
        let end = self
            .tokens
            .last()
            .map(|t| t.span.clone())
            .unwrap_or_else(|| self.eof_span());
        let span = Span {
            file: self.file.clone(),
            start_line: 1,
            start_col: 1,
            start_byte: 0,
            end_line: end.end_line,
            end_col: end.end_col,
            end_byte: end.end_byte,
        };
        Ok(AstNode {
            kind: NodeKind::TranslationUnit,
            op: String::new(),
            text: self.text_of(0, self.tokens.len()),
            span,
            children: items,
        })
    }

    fn external_declaration(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let tok = self.peek().expect("caller checked for end of input");
        if tok.kind == TokenKind::Directive {
            self.pos += 1;
            return Ok(self.node(NodeKind::Other, "", start, vec![]));
        }
        if tok.is_punct(";") {
            self.pos += 1;
            return Ok(self.node(NodeKind::Other, "", start, vec![]));
        }
        if self.is_function_definition() {
            return self.function_definition();
        }
        self.declaration()
    }

    /// Looks ahead for `specifiers declarator(...) ... {` without consuming.
    fn is_function_definition(&mut self) -> bool {
        let save = self.pos;
        let result = (|| -> PResult<bool> {
            self.specifiers()?;
            let mut saw_params = false;
            loop {
                let Some(t) = self.peek() else {
                    return Ok(false);
                };
                if t.kind == TokenKind::Punct {
                    match t.text.as_str() {
                        "{" => return Ok(saw_params),
                        ";" | "=" | "," => return Ok(false),
                        "(" => {
                            let prev = self.pos.checked_sub(1).map(|i| &self.tokens[i]);
                            if prev.is_some_and(is_plain_ident) {
                                saw_params = true;
                            }
                            self.skip_group()?;
                            continue;
                        }
                        "[" => {
                            self.skip_group()?;
                            continue;
                        }
                        _ => {}
                    }
                }
                self.pos += 1;
            }
        })();
        self.pos = save;
        result.unwrap_or(false)
    }

    fn function_definition(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        self.specifiers()?;
        // Declarator tokens up to the identifier that precedes the parameter list.
        while !(self.peek().is_some_and(is_plain_ident)
            && self.peek_at(1).is_some_and(|t| t.is_punct("(")))
        {
            if self.at_end() {
                return Err(self.error("function name"));
            }
            if self.at_open_group() {
                self.skip_group()?;
            } else {
                self.pos += 1;
            }
        }
        let ret = self.node(NodeKind::Other, "", start, vec![]);
        let name_start = self.pos;
        self.pos += 1;
        let name = self.node(NodeKind::Identifier, "", name_start, vec![]);

        let params_start = self.pos;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        while !self.at_punct(")") {
            let p_start = self.pos;
            while !self.at_punct(",") && !self.at_punct(")") {
                if self.at_end() {
                    return Err(self.error("`)`"));
                }
                if self.at_open_group() {
                    self.skip_group()?;
                } else {
                    self.pos += 1;
                }
            }
            params.push(self.node(NodeKind::Other, "", p_start, vec![]));
            if self.at_punct(",") {
                self.pos += 1;
            }
        }
        self.expect_punct(")")?;
        let params = self.node(NodeKind::Other, "", params_start, params);

        let mut children = vec![ret, name, params];
        // Attributes, K&R leftovers or array suffixes between `)` and `{`.
        while !self.at_punct("{") {
            if self.at_end() {
                return Err(self.error("`{`"));
            }
            let s = self.pos;
            if self.at_open_group() {
                self.skip_group()?;
            } else {
                self.pos += 1;
                if self.at_punct("(") {
                    self.skip_group()?;
                }
            }
            children.push(self.node(NodeKind::Other, "", s, vec![]));
        }
        children.push(self.block()?);
        Ok(self.node(NodeKind::FunctionDef, "", start, children))
    }

    /// Declaration specifiers: storage classes, qualifiers, base types,
    /// struct/union/enum heads (with bodies), attributes and at most one
    /// typedef name.
    fn specifiers(&mut self) -> PResult<()> {
        let mut seen_type = false;
        while let Some(t) = self.peek() {
            if t.kind != TokenKind::Ident {
                break;
            }
            let word = t.text.as_str();
            if TYPE_KEYWORDS.contains(&word) {
                seen_type = true;
                self.pos += 1;
            } else if QUALIFIERS.contains(&word) || word == "__extension__" {
                self.pos += 1;
            } else if ATTRIBUTE_KEYWORDS.contains(&word) {
                self.pos += 1;
                if self.at_punct("(") {
                    self.skip_group()?;
                }
            } else if matches!(word, "struct" | "union" | "enum") {
                seen_type = true;
                self.pos += 1;
                if self.peek().is_some_and(|t| t.kind == TokenKind::Ident) {
                    self.pos += 1;
                }
                if self.at_punct("{") {
                    self.skip_group()?;
                }
            } else if !seen_type
                && is_plain_ident(t)
                && self
                    .peek_at(1)
                    .is_some_and(|n| n.is_punct("*") || is_plain_ident(n) || is_type_start(n))
            {
                seen_type = true;
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(())
    }

    /// `specifiers declarator [= init] {, declarator [= init]} ;`
    fn declaration(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        self.specifiers()?;
        let specs = self.node(NodeKind::Other, "", start, vec![]);
        let mut children = vec![specs];
        loop {
            if self.at_punct(";") {
                self.pos += 1;
                break;
            }
            let d_start = self.pos;
            while !(self.at_punct("=") || self.at_punct(",") || self.at_punct(";")) {
                if self.at_end() {
                    return Err(self.error("`;`"));
                }
                if self.at_punct("{") && self.pos == d_start {
                    return Err(self.error("declarator"));
                }
                if self.at_punct("}") || self.at_punct(")") || self.at_punct("]") {
                    return Err(self.error("`;`"));
                }
                if self.at_open_group() {
                    self.skip_group()?;
                } else {
                    self.pos += 1;
                }
            }
            if self.pos == d_start {
                if self.at_punct("=") {
                    return Err(self.error("declarator"));
                }
                if self.at_punct(",") {
                    self.pos += 1;
                    continue;
                }
                continue;
            }
            let declarator = if self.pos == d_start + 1 && is_plain_ident(&self.tokens[d_start]) {
                self.node(NodeKind::Identifier, "", d_start, vec![])
            } else {
                self.node(NodeKind::Other, "", d_start, vec![])
            };
            if self.at_punct("=") {
                self.pos += 1;
                let init = if self.at_punct("{") {
                    let s = self.pos;
                    self.skip_group()?;
                    self.node(NodeKind::Other, "", s, vec![])
                } else {
                    self.assignment()?
                };
                children.push(self.node(NodeKind::Assign, "=", d_start, vec![declarator, init]));
            } else {
                children.push(declarator);
            }
            if self.at_punct(",") {
                self.pos += 1;
            } else if !self.at_punct(";") {
                return Err(self.error("`;`"));
            }
        }
        Ok(self.node(NodeKind::DeclStmt, "", start, children))
    }

    fn looks_like_declaration(&self) -> bool {
        let Some(t) = self.peek() else { return false };
        if is_type_start(t) {
            return true;
        }
        if !is_plain_ident(t) {
            return false;
        }
        let mut i = 1;
        match self.peek_at(i) {
            Some(n) if is_plain_ident(n) || is_type_start(n) => return true,
            Some(n) if n.is_punct("*") => {}
            _ => return false,
        }
        while self.peek_at(i).is_some_and(|t| t.is_punct("*")) {
            i += 1;
        }
        if !self.peek_at(i).is_some_and(is_plain_ident) {
            return false;
        }
        self.peek_at(i + 1)
            .is_some_and(|t| ["=", ";", ",", "[", ")"].iter().any(|p| t.is_punct(p)))
    }

    // ------------------------------------------------------------- statements

    pub(crate) fn block(&mut self) -> PResult<AstNode> {
        self.enter()?;
        let start = self.pos;
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.at_punct("}") {
            if self.at_end() {
                return Err(self.error("`}`"));
            }
            stmts.push(self.statement()?);
        }
        self.pos += 1;
        self.leave();
        Ok(self.node(NodeKind::Block, "", start, stmts))
    }

    pub(crate) fn statement(&mut self) -> PResult<AstNode> {
        self.enter()?;
        let result = self.statement_inner();
        self.leave();
        result
    }

    fn statement_inner(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let Some(tok) = self.peek() else {
            return Err(self.error("statement"));
        };
        if tok.kind == TokenKind::Directive {
            self.pos += 1;
            return Ok(self.node(NodeKind::Other, "", start, vec![]));
        }
        if tok.kind == TokenKind::Punct {
            match tok.text.as_str() {
                "{" => return self.block(),
                ";" => {
                    self.pos += 1;
                    return Ok(self.node(NodeKind::Other, "", start, vec![]));
                }
                "..." if self.holes => {
                    self.pos += 1;
                    let hole = self.node(NodeKind::Other, "", start, vec![]);
                    if self.at_punct(";") {
                        self.pos += 1;
                    }
                    return Ok(hole);
                }
                _ => {}
            }
        }
        if tok.kind == TokenKind::Ident {
            match tok.text.as_str() {
                "if" => return self.if_statement(),
                "while" => {
                    self.pos += 1;
                    let cond = self.paren_condition()?;
                    let body = self.statement()?;
                    return Ok(self.node(NodeKind::While, "", start, vec![cond, body]));
                }
                "for" => return self.for_statement(),
                "return" => {
                    self.pos += 1;
                    let mut children = Vec::new();
                    if !self.at_punct(";") {
                        children.push(self.expression()?);
                    }
                    self.expect_punct(";")?;
                    return Ok(self.node(NodeKind::Return, "", start, children));
                }
                "do" => {
                    self.pos += 1;
                    let body = self.statement()?;
                    if !self.at_ident("while") {
                        return Err(self.error("`while`"));
                    }
                    self.pos += 1;
                    let cond = self.paren_condition()?;
                    self.expect_punct(";")?;
                    return Ok(self.node(NodeKind::Other, "do", start, vec![body, cond]));
                }
                "switch" => {
                    self.pos += 1;
                    let cond = self.paren_condition()?;
                    let body = self.statement()?;
                    return Ok(self.node(NodeKind::Other, "switch", start, vec![cond, body]));
                }
                "break" | "continue" => {
                    self.pos += 1;
                    self.expect_punct(";")?;
                    return Ok(self.node(NodeKind::Other, "", start, vec![]));
                }
                "goto" => {
                    self.pos += 1;
                    if !self.peek().is_some_and(is_plain_ident) {
                        return Err(self.error("label"));
                    }
                    self.pos += 1;
                    self.expect_punct(";")?;
                    return Ok(self.node(NodeKind::Other, "", start, vec![]));
                }
                "case" => {
                    self.pos += 1;
                    let value = self.conditional()?;
                    if self.at_punct("...") {
                        // GNU case ranges.
                        self.pos += 1;
                        self.conditional()?;
                    }
                    self.expect_punct(":")?;
                    return Ok(self.node(NodeKind::Other, "case", start, vec![value]));
                }
                "default" if self.peek_at(1).is_some_and(|t| t.is_punct(":")) => {
                    self.pos += 2;
                    return Ok(self.node(NodeKind::Other, "", start, vec![]));
                }
                "asm" | "__asm__" | "__asm" => {
                    while !self.at_punct(";") {
                        if self.at_end() {
                            return Err(self.error("`;`"));
                        }
                        if self.at_open_group() {
                            self.skip_group()?;
                        } else {
                            self.pos += 1;
                        }
                    }
                    self.pos += 1;
                    return Ok(self.node(NodeKind::Other, "", start, vec![]));
                }
                _ => {}
            }
            if is_plain_ident(tok) && self.peek_at(1).is_some_and(|t| t.is_punct(":")) {
                self.pos += 2;
                return Ok(self.node(NodeKind::Other, "", start, vec![]));
            }
        }
        if self.looks_like_declaration() {
            return self.declaration();
        }
        let expr = self.expression()?;
        self.expect_punct(";")?;
        Ok(self.node(NodeKind::ExprStmt, "", start, vec![expr]))
    }

    fn paren_condition(&mut self) -> PResult<AstNode> {
        self.expect_punct("(")?;
        let cond = self.expression()?;
        self.expect_punct(")")?;
        Ok(cond)
    }

    fn if_statement(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        self.pos += 1;
        let cond = self.paren_condition()?;
        let then = self.statement()?;
        let mut children = vec![cond, then];
        if self.at_ident("else") {
            self.pos += 1;
            children.push(self.statement()?);
        }
        Ok(self.node(NodeKind::If, "", start, children))
    }

    fn for_statement(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        self.pos += 1;
        self.expect_punct("(")?;
        let init = if self.at_punct(";") {
            let n = self.node_range(NodeKind::Other, "", self.pos, self.pos, vec![]);
            self.pos += 1;
            n
        } else if self.looks_like_declaration() {
            self.declaration()?
        } else {
            let e = self.expression()?;
            self.expect_punct(";")?;
            e
        };
        let cond = if self.at_punct(";") {
            self.node_range(NodeKind::Other, "", self.pos, self.pos, vec![])
        } else {
            self.expression()?
        };
        self.expect_punct(";")?;
        let step = if self.at_punct(")") {
            self.node_range(NodeKind::Other, "", self.pos, self.pos, vec![])
        } else {
            self.expression()?
        };
        self.expect_punct(")")?;
        let body = self.statement()?;
        Ok(self.node(NodeKind::For, "", start, vec![init, cond, step, body]))
    }

    // ------------------------------------------------------------ expressions

    /// Full expression including the comma operator.
    pub(crate) fn expression(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let mut lhs = self.assignment()?;
        while self.at_punct(",") {
            self.pos += 1;
            let rhs = self.assignment()?;
            lhs = self.node(NodeKind::BinaryOp, ",", start, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn assignment(&mut self) -> PResult<AstNode> {
        self.enter()?;
        let start = self.pos;
        let lhs = self.conditional()?;
        let result = match self.peek() {
            Some(t) if t.kind == TokenKind::Punct && ASSIGN_OPS.contains(&t.text.as_str()) => {
                let op = t.text.clone();
                self.pos += 1;
                let rhs = self.assignment()?;
                Ok(self.node(NodeKind::Assign, op, start, vec![lhs, rhs]))
            }
            _ => Ok(lhs),
        };
        self.leave();
        result
    }

    fn conditional(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let cond = self.binary(4)?;
        if !self.at_punct("?") {
            return Ok(cond);
        }
        self.pos += 1;
        let then = self.expression()?;
        self.expect_punct(":")?;
        let other = self.conditional()?;
        Ok(self.node(NodeKind::Other, "?:", start, vec![cond, then, other]))
    }

    fn binary(&mut self, min_prec: u8) -> PResult<AstNode> {
        let start = self.pos;
        let mut lhs = self.unary()?;
        while let Some(t) = self.peek() {
            if t.kind != TokenKind::Punct {
                break;
            }
            let Some(prec) = binary_precedence(&t.text) else {
                break;
            };
            if prec < min_prec {
                break;
            }
            let op = t.text.clone();
            self.pos += 1;
            let rhs = self.binary(prec + 1)?;
            lhs = self.node(NodeKind::BinaryOp, op, start, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<AstNode> {
        self.enter()?;
        let result = self.unary_inner();
        self.leave();
        result
    }

    fn unary_inner(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let Some(tok) = self.peek() else {
            return Err(self.error("expression"));
        };
        if tok.kind == TokenKind::Punct
            && matches!(
                tok.text.as_str(),
                "++" | "--" | "+" | "-" | "!" | "~" | "*" | "&"
            )
        {
            let op = tok.text.clone();
            self.pos += 1;
            let operand = self.unary()?;
            return Ok(self.node(NodeKind::UnaryOp, op, start, vec![operand]));
        }
        if tok.is_ident("sizeof") || tok.is_ident("_Alignof") || tok.is_ident("__alignof__") {
            let op = tok.text.clone();
            self.pos += 1;
            if self.at_punct("(") && self.is_type_in_parens() {
                let s = self.pos + 1;
                self.skip_group()?;
                let ty = self.node_range(NodeKind::Other, "", s, self.pos - 1, vec![]);
                return Ok(self.node(NodeKind::UnaryOp, op, start, vec![ty]));
            }
            let operand = self.unary()?;
            return Ok(self.node(NodeKind::UnaryOp, op, start, vec![operand]));
        }
        if tok.is_punct("(") && self.is_cast() {
            self.skip_group()?;
            let op = format!("({})", self.text_of(start + 1, self.pos - 1));
            let operand = self.unary()?;
            return Ok(self.node(NodeKind::UnaryOp, op, start, vec![operand]));
        }
        self.postfix()
    }

    /// Whether the `(` at the current position opens a type name.
    fn is_type_in_parens(&self) -> bool {
        let Some(first) = self.peek_at(1) else {
            return false;
        };
        if is_type_start(first) {
            return true;
        }
        if !is_plain_ident(first) {
            return false;
        }
        let mut i = 2;
        let mut stars = 0;
        while self.peek_at(i).is_some_and(|t| t.is_punct("*")) {
            i += 1;
            stars += 1;
        }
        self.peek_at(i).is_some_and(|t| t.is_punct(")")) && stars > 0
    }

    fn is_cast(&self) -> bool {
        if self.is_type_in_parens() {
            return true;
        }
        // `(name) operand` where operand cannot continue a binary expression.
        let (Some(first), Some(close), Some(after)) =
            (self.peek_at(1), self.peek_at(2), self.peek_at(3))
        else {
            return false;
        };
        let operand_follows = matches!(
            after.kind,
            TokenKind::Ident | TokenKind::Int | TokenKind::Float | TokenKind::Char | TokenKind::Str
        ) && !STATEMENT_KEYWORDS.contains(&after.text.as_str());
        is_plain_ident(first) && close.is_punct(")") && operand_follows
    }

    fn postfix(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let mut expr = self.primary()?;
        loop {
            if self.at_punct("(") {
                self.pos += 1;
                let mut children = vec![expr];
                while !self.at_punct(")") {
                    if self.holes && self.at_punct("...") {
                        let s = self.pos;
                        self.pos += 1;
                        children.push(self.node(NodeKind::Other, "", s, vec![]));
                    } else {
                        children.push(self.assignment()?);
                    }
                    if self.at_punct(",") {
                        self.pos += 1;
                        if self.at_punct(")") {
                            return Err(self.error("argument"));
                        }
                    } else if !self.at_punct(")") {
                        return Err(self.error("`,` or `)`"));
                    }
                }
                self.pos += 1;
                expr = self.node(NodeKind::Call, "", start, children);
            } else if self.at_punct("[") {
                self.pos += 1;
                let index = self.expression()?;
                self.expect_punct("]")?;
                expr = self.node(NodeKind::Index, "", start, vec![expr, index]);
            } else if self.at_punct(".") || self.at_punct("->") {
                let op = self.bump().text.clone();
                let f_start = self.pos;
                if !self.peek().is_some_and(|t| t.kind == TokenKind::Ident) {
                    return Err(self.error("member name"));
                }
                self.pos += 1;
                let field = self.node(NodeKind::Identifier, "", f_start, vec![]);
                expr = self.node(NodeKind::Member, op, start, vec![expr, field]);
            } else if self.at_punct("++") || self.at_punct("--") {
                let op = format!("post{}", self.bump().text);
                expr = self.node(NodeKind::UnaryOp, op, start, vec![expr]);
            } else {
                break;
            }
        }
        Ok(expr)
    }

    fn primary(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let Some(tok) = self.peek() else {
            return Err(self.error("expression"));
        };
        match tok.kind {
            TokenKind::Ident if is_type_start(tok) => {
                // Type names used as macro arguments, e.g. `va_arg(ap, int)`.
                while let Some(t) = self.peek().filter(|t| is_type_start(t) || t.is_punct("*")) {
                    self.pos += 1;
                    if ATTRIBUTE_KEYWORDS.contains(&t.text.as_str()) && self.at_punct("(") {
                        self.skip_group()?;
                    } else if matches!(t.text.as_str(), "struct" | "union" | "enum")
                        && self.peek().is_some_and(is_plain_ident)
                    {
                        self.pos += 1;
                    }
                }
                Ok(self.node(NodeKind::Other, "", start, vec![]))
            }
            TokenKind::Ident if !STATEMENT_KEYWORDS.contains(&tok.text.as_str()) => {
                self.pos += 1;
                Ok(self.node(NodeKind::Identifier, "", start, vec![]))
            }
            TokenKind::Int => {
                self.pos += 1;
                Ok(self.node(NodeKind::IntLiteral, "", start, vec![]))
            }
            TokenKind::Float | TokenKind::Char => {
                self.pos += 1;
                Ok(self.node(NodeKind::Other, "", start, vec![]))
            }
            TokenKind::Str => {
                while self.peek().is_some_and(|t| t.kind == TokenKind::Str) {
                    self.pos += 1;
                }
                Ok(self.node(NodeKind::StringLiteral, "", start, vec![]))
            }
            TokenKind::Punct if tok.text == "(" => {
                if self.peek_at(1).is_some_and(|t| t.is_punct("{")) {
                    // GNU statement expression.
                    self.skip_group()?;
                    return Ok(self.node(NodeKind::Other, "", start, vec![]));
                }
                self.pos += 1;
                self.enter()?;
                let inner = self.expression();
                self.leave();
                let inner = inner?;
                self.expect_punct(")")?;
                Ok(inner)
            }
            TokenKind::Punct if tok.text == "{" => {
                // Brace initialiser / compound literal body.
                self.skip_group()?;
                Ok(self.node(NodeKind::Other, "", start, vec![]))
            }
            TokenKind::Punct if tok.text == "..." && self.holes => {
                self.pos += 1;
                Ok(self.node(NodeKind::Other, "", start, vec![]))
            }
            _ => Err(self.error("expression")),
        }
    }
}
