use std::path::Path;
use std::sync::Arc;

use super::span::Span;
use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Int,
    Float,
    Char,
    Str,
    Punct,
    /// A whole preprocessor line (`#include`, `#define`, ...), kept opaque.
    Directive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punct && self.text == p
    }

    pub fn is_ident(&self, name: &str) -> bool {
        self.kind == TokenKind::Ident && self.text == name
    }
}

// Longest first so that maximal munch picks `>>=` over `>>` over `>`.
const PUNCTUATORS: &[&str] = &[
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "*=",
    "/=", "%=", "+=", "-=", "&=", "^=", "|=", "##",
];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    file: Arc<Path>,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, u32, u32) {
        (self.pos, self.line, self.col)
    }

    fn span_from(&self, mark: (usize, u32, u32)) -> Span {
        Span {
            file: self.file.clone(),
            start_line: mark.1,
            start_col: mark.2,
            end_line: self.line,
            end_col: self.col,
            start_byte: mark.0,
            end_byte: self.pos,
        }
    }
}

/// Splits C source into tokens. Comments are dropped; preprocessor lines
/// become single [`TokenKind::Directive`] tokens.
pub fn tokenize(source: &str, file: &Path) -> Result<Vec<Token>, FrontendError> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        col: 1,
        file: Arc::from(file),
    };
    let mut tokens = Vec::new();
    // True while only whitespace has been seen on the current line.
    let mut line_start = true;

    while let Some(c) = cur.peek() {
        if c == '\n' {
            cur.bump();
            line_start = true;
            continue;
        }
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let mark = cur.mark();
        if cur.rest().starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if cur.rest().starts_with("/*") {
            cur.bump();
            cur.bump();
            loop {
                if cur.rest().starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                if cur.bump().is_none() {
                    return Err(FrontendError::UnterminatedComment {
                        span: cur.span_from(mark),
                    });
                }
            }
            continue;
        }
        if c == '#' && line_start {
            lex_directive(&mut cur);
            tokens.push(Token {
                kind: TokenKind::Directive,
                text: normalize_directive(&source[mark.0..cur.pos]),
                span: cur.span_from(mark),
            });
            continue;
        }
        line_start = false;

        let kind = if c == '_' || c == '$' || c.is_alphabetic() {
            while matches!(cur.peek(), Some(c) if c == '_' || c == '$' || c.is_alphanumeric()) {
                cur.bump();
            }
            // Prefixed literals: L"..", u8"..", L'x'.
            let word = &source[mark.0..cur.pos];
            if matches!(word, "L" | "u" | "U" | "u8") && matches!(cur.peek(), Some('"' | '\'')) {
                let quote = cur.bump().unwrap_or('"');
                lex_quoted(&mut cur, quote, mark)?;
                if quote == '"' {
                    TokenKind::Str
                } else {
                    TokenKind::Char
                }
            } else {
                TokenKind::Ident
            }
        } else if c.is_ascii_digit()
            || (c == '.' && matches!(cur.peek_at(1), Some(d) if d.is_ascii_digit()))
        {
            lex_number(&mut cur)
        } else if c == '"' || c == '\'' {
            cur.bump();
            lex_quoted(&mut cur, c, mark)?;
            if c == '"' {
                TokenKind::Str
            } else {
                TokenKind::Char
            }
        } else {
            match PUNCTUATORS.iter().find(|p| cur.rest().starts_with(**p)) {
                Some(p) => {
                    for _ in 0..p.len() {
                        cur.bump();
                    }
                }
                None => {
                    cur.bump();
                }
            }
            TokenKind::Punct
        };
        tokens.push(Token {
            kind,
            text: source[mark.0..cur.pos].to_string(),
            span: cur.span_from(mark),
        });
    }
    Ok(tokens)
}

fn lex_directive(cur: &mut Cursor<'_>) {
    while let Some(c) = cur.peek() {
        if c == '\\' && matches!(cur.peek_at(1), Some('\n')) {
            cur.bump();
            cur.bump();
            continue;
        }
        if c == '\n' {
            break;
        }
        if cur.rest().starts_with("/*") {
            // A block comment may continue the directive across lines.
            cur.bump();
            cur.bump();
            while !cur.rest().is_empty() && !cur.rest().starts_with("*/") {
                cur.bump();
            }
            cur.bump();
            cur.bump();
            continue;
        }
        if cur.rest().starts_with("//") {
            while matches!(cur.peek(), Some(c) if c != '\n') {
                cur.bump();
            }
            break;
        }
        cur.bump();
    }
}

fn normalize_directive(raw: &str) -> String {
    raw.replace("\\\n", " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn lex_quoted(
    cur: &mut Cursor<'_>,
    quote: char,
    mark: (usize, u32, u32),
) -> Result<(), FrontendError> {
    loop {
        match cur.peek() {
            None | Some('\n') => {
                return Err(FrontendError::UnterminatedString {
                    span: cur.span_from(mark),
                })
            }
            Some('\\') => {
                cur.bump();
                cur.bump();
            }
            Some(c) => {
                cur.bump();
                if c == quote {
                    return Ok(());
                }
            }
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>) -> TokenKind {
    let mut kind = TokenKind::Int;
    let hex = cur.rest().starts_with("0x") || cur.rest().starts_with("0X");
    while let Some(c) = cur.peek() {
        let exponent = if hex {
            matches!(c, 'p' | 'P')
        } else {
            matches!(c, 'e' | 'E')
        };
        if exponent && matches!(cur.peek_at(1), Some('+' | '-')) {
            kind = TokenKind::Float;
            cur.bump();
            cur.bump();
        } else if c == '.' {
            kind = TokenKind::Float;
            cur.bump();
        } else if c.is_ascii_alphanumeric() || c == '_' {
            if exponent {
                kind = TokenKind::Float;
            }
            cur.bump();
        } else {
            break;
        }
    }
    kind
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(src: &str) -> Vec<Token> {
        tokenize(src, Path::new("t.c")).unwrap()
    }

    #[test]
    fn semctl_call_has_eleven_tokens() {
        let toks = lex("semctl(id, 0, SETVAL, 1);");
        assert_eq!(toks.len(), 11);
        assert!(toks.last().unwrap().is_punct(";"));
        assert_eq!(toks[4].kind, TokenKind::Int);
    }

    #[test]
    fn empty_input() {
        assert!(lex("").is_empty());
        assert!(lex("  \n\t /* c */ // x\n").is_empty());
    }

    #[test]
    fn directives_are_opaque() {
        let toks = lex("#include <stdio.h>\n#define N \\\n  10\nint x;");
        assert_eq!(toks[0].kind, TokenKind::Directive);
        assert_eq!(toks[0].text, "#include <stdio.h>");
        assert_eq!(toks[1].text, "#define N 10");
        assert_eq!(toks[2].span.start_line, 4);
    }

    #[test]
    fn hash_mid_line_is_punct() {
        let toks = lex("a # b");
        assert_eq!(toks[1].kind, TokenKind::Punct);
    }

    #[test]
    fn spans_are_one_based_and_exclusive() {
        let toks = lex("int\n  foo;");
        assert_eq!((toks[1].span.start_line, toks[1].span.start_col), (2, 3));
        assert_eq!((toks[1].span.end_line, toks[1].span.end_col), (2, 6));
    }

    #[test]
    fn maximal_munch() {
        let texts: Vec<_> = lex("a>>=b->c...").into_iter().map(|t| t.text).collect();
        assert_eq!(texts, ["a", ">>=", "b", "->", "c", "..."]);
    }

    #[test]
    fn numbers() {
        let toks = lex("0x1F 10UL 1.5e-3 .5 077");
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        use TokenKind::*;
        assert_eq!(kinds, [Int, Int, Float, Float, Int]);
        assert_eq!(toks[2].text, "1.5e-3");
    }

    #[test]
    fn metavariables_lex_as_identifiers() {
        let toks = lex("$NUM_SEM");
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].kind, TokenKind::Ident);
    }

    #[test]
    fn unterminated_string() {
        let err = tokenize("x = \"abc\n", Path::new("t.c")).unwrap_err();
        match err {
            FrontendError::UnterminatedString { span } => {
                assert_eq!((span.start_line, span.start_col), (1, 5))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unterminated_comment() {
        let err = tokenize("int x; /* open", Path::new("t.c")).unwrap_err();
        assert!(matches!(err, FrontendError::UnterminatedComment { .. }));
    }

    #[test]
    fn escaped_quotes() {
        let toks = lex(r#"printf("a\"b\n", '\'');"#);
        assert_eq!(toks[2].text, r#""a\"b\n""#);
        assert_eq!(toks[4].kind, TokenKind::Char);
    }
}
