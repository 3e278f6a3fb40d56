//! The procedure-composition language.
//!
//! Expressions are function calls, case-insensitive and whitespace-
//! insensitive:
//!
//! ```text
//! expr    := call
//! call    := NAME '(' args? ')'
//! args    := arg (',' arg)*
//! arg     := expr | NUMBER | 'alpha' | 'k=' INTEGER
//! ```
//!
//! Combinators: `union(e, e)`, `intersect(e, e)`, `diff(e, e)`,
//! `complement(e, NUMBER | alpha)`. Builtins: `bonferroni(a)`, `sidak_sd(a)`,
//! `sidak_su(a)`, `holm(a)`, `hochberg(a)`, `bh(a)`, `bh_sd(a)` with
//! `a := NUMBER | alpha`, and `topk(INTEGER)` (also `topk(k=INTEGER)`).

use crate::algebra::ProcedureExpr;
use crate::procedure::{spec_for, BuiltinError, BuiltinParam};
use crate::threshold::LevelSpec;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Byte range into the expression text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    fn new(start: usize, end: usize) -> Self {
        SourceSpan { start, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParseErrorKind {
    Syntax,
    UnknownBuiltin,
    Arity,
    ParamRange,
    UnresolvedAlpha,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind:?} error at {}..{}: {message}", span.start, span.end)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    fn new(kind: ParseErrorKind, span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            span,
            message: message.into(),
        }
    }
}

/// Nesting deeper than this is rejected instead of recursing further.
const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Name(String),
    Number(f64),
    LParen,
    RParen,
    Comma,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
struct Spanned {
    token: Token,
    span: SourceSpan,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match b {
            b'(' => {
                tokens.push(Spanned {
                    token: Token::LParen,
                    span: SourceSpan::new(start, start + 1),
                });
                i += 1;
            }
            b')' => {
                tokens.push(Spanned {
                    token: Token::RParen,
                    span: SourceSpan::new(start, start + 1),
                });
                i += 1;
            }
            b',' => {
                tokens.push(Spanned {
                    token: Token::Comma,
                    span: SourceSpan::new(start, start + 1),
                });
                i += 1;
            }
            b'=' => {
                tokens.push(Spanned {
                    token: Token::Eq,
                    span: SourceSpan::new(start, start + 1),
                });
                i += 1;
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let name = text[start..i].to_ascii_lowercase();
                tokens.push(Spanned {
                    token: Token::Name(name),
                    span: SourceSpan::new(start, i),
                });
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Optional exponent.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let span = SourceSpan::new(start, i);
                let value: f64 = text[start..i].parse().map_err(|_| {
                    ParseError::new(
                        ParseErrorKind::Syntax,
                        span,
                        format!("malformed number '{}'", &text[start..i]),
                    )
                })?;
                tokens.push(Spanned {
                    token: Token::Number(value),
                    span,
                });
            }
            _ => {
                // Advance over a whole UTF-8 scalar so the span stays on a
                // character boundary.
                let ch_len = text[start..].chars().next().map_or(1, |c| c.len_utf8());
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    SourceSpan::new(start, start + ch_len),
                    format!("unexpected character '{}'", &text[start..start + ch_len]),
                ));
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [Spanned],
    pos: usize,
    text_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&Spanned> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_span(&self) -> SourceSpan {
        SourceSpan::new(self.text_len, self.text_len)
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<SourceSpan, ParseError> {
        match self.next() {
            Some(t) if t.token == want => Ok(t.span),
            Some(t) => Err(ParseError::new(
                ParseErrorKind::Syntax,
                t.span,
                format!("expected {what}"),
            )),
            None => Err(ParseError::new(
                ParseErrorKind::Syntax,
                self.end_span(),
                format!("expected {what}, found end of input"),
            )),
        }
    }

    fn parse_expr(&mut self, depth: usize) -> Result<ProcedureExpr, ParseError> {
        let (name, name_span) = match self.next() {
            Some(Spanned {
                token: Token::Name(name),
                span,
            }) => (name.clone(), *span),
            Some(t) => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    t.span,
                    "expected a procedure call",
                ))
            }
            None => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    self.end_span(),
                    "expected a procedure call, found end of input",
                ))
            }
        };
        if depth >= MAX_DEPTH {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                name_span,
                "expression nests too deeply",
            ));
        }
        match name.as_str() {
            "union" | "intersect" | "diff" => {
                self.expect(Token::LParen, "'('")?;
                let a = self.parse_expr(depth + 1)?;
                self.comma_or_arity(&name, 2)?;
                let b = self.parse_expr(depth + 1)?;
                self.close_or_arity(&name, 2)?;
                Ok(match name.as_str() {
                    "union" => ProcedureExpr::union(a, b),
                    "intersect" => ProcedureExpr::intersect(a, b),
                    _ => ProcedureExpr::diff(a, b),
                })
            }
            "complement" => {
                self.expect(Token::LParen, "'('")?;
                let child = self.parse_expr(depth + 1)?;
                self.comma_or_arity(&name, 2)?;
                let level = self.parse_level("complement")?;
                self.close_or_arity(&name, 2)?;
                Ok(ProcedureExpr::complement(child, level))
            }
            "alpha" => Err(ParseError::new(
                ParseErrorKind::Syntax,
                name_span,
                "'alpha' is a level parameter, not a procedure",
            )),
            _ => self.parse_builtin(&name, name_span, depth),
        }
    }

    fn comma_or_arity(&mut self, name: &str, want: usize) -> Result<(), ParseError> {
        match self.next() {
            Some(t) if t.token == Token::Comma => Ok(()),
            Some(t) if t.token == Token::RParen => Err(ParseError::new(
                ParseErrorKind::Arity,
                t.span,
                format!("'{name}' takes {want} arguments"),
            )),
            Some(t) => Err(ParseError::new(
                ParseErrorKind::Syntax,
                t.span,
                "expected ','",
            )),
            None => Err(ParseError::new(
                ParseErrorKind::Syntax,
                self.end_span(),
                "expected ',', found end of input",
            )),
        }
    }

    fn close_or_arity(&mut self, name: &str, want: usize) -> Result<(), ParseError> {
        match self.next() {
            Some(t) if t.token == Token::RParen => Ok(()),
            Some(t) if t.token == Token::Comma => Err(ParseError::new(
                ParseErrorKind::Arity,
                t.span,
                format!("'{name}' takes {want} arguments"),
            )),
            Some(t) => Err(ParseError::new(
                ParseErrorKind::Syntax,
                t.span,
                "expected ')'",
            )),
            None => Err(ParseError::new(
                ParseErrorKind::Syntax,
                self.end_span(),
                "expected ')', found end of input",
            )),
        }
    }

    fn parse_level(&mut self, owner: &str) -> Result<LevelSpec, ParseError> {
        match self.next() {
            Some(Spanned {
                token: Token::Number(value),
                span,
            }) => {
                if !(0.0..=1.0).contains(value) {
                    return Err(ParseError::new(
                        ParseErrorKind::ParamRange,
                        *span,
                        format!("level {value} is outside [0, 1]"),
                    ));
                }
                Ok(LevelSpec::Literal(*value))
            }
            Some(Spanned {
                token: Token::Name(n),
                span,
            }) if n == "alpha" => {
                let _ = span;
                Ok(LevelSpec::Symbolic)
            }
            Some(t) => Err(ParseError::new(
                ParseErrorKind::Syntax,
                t.span,
                format!("'{owner}' expects a numeric level or 'alpha'"),
            )),
            None => Err(ParseError::new(
                ParseErrorKind::Syntax,
                self.end_span(),
                format!("'{owner}' expects a level, found end of input"),
            )),
        }
    }

    fn parse_builtin(
        &mut self,
        name: &str,
        name_span: SourceSpan,
        _depth: usize,
    ) -> Result<ProcedureExpr, ParseError> {
        // Resolve the name first so unknown builtins are reported on the
        // name, not on their arguments.
        let known = [
            "bonferroni",
            "sidak_sd",
            "sidak_su",
            "holm",
            "hochberg",
            "bh",
            "bh_sd",
            "topk",
        ];
        if !known.contains(&name) {
            return Err(ParseError::new(
                ParseErrorKind::UnknownBuiltin,
                name_span,
                format!("unknown builtin '{name}'"),
            ));
        }
        self.expect(Token::LParen, "'('")?;
        let param = if name == "topk" {
            self.parse_k()?
        } else {
            BuiltinParam::Level(self.parse_level(name)?)
        };
        self.close_or_arity(name, 1)?;
        match spec_for(name, param) {
            Ok(spec) => Ok(ProcedureExpr::Builtin(spec)),
            Err(BuiltinError::LevelOutOfRange(v)) => Err(ParseError::new(
                ParseErrorKind::ParamRange,
                name_span,
                format!("level {v} is outside [0, 1]"),
            )),
            Err(e) => Err(ParseError::new(
                ParseErrorKind::Syntax,
                name_span,
                e.to_string(),
            )),
        }
    }

    fn parse_k(&mut self) -> Result<BuiltinParam, ParseError> {
        // Accept `topk(3)` and `topk(k=3)`.
        if let Some(Spanned {
            token: Token::Name(n),
            span,
        }) = self.peek()
        {
            let span = *span;
            if n == "k" {
                self.next();
                self.expect(Token::Eq, "'='")?;
            } else if n == "alpha" {
                return Err(ParseError::new(
                    ParseErrorKind::UnresolvedAlpha,
                    span,
                    "'topk' takes a concrete integer, not 'alpha'",
                ));
            }
        }
        match self.next() {
            Some(Spanned {
                token: Token::Number(value),
                span,
            }) => {
                let k = *value;
                if k.fract() != 0.0 || k < 1.0 || k > usize::MAX as f64 {
                    return Err(ParseError::new(
                        ParseErrorKind::ParamRange,
                        *span,
                        format!("k must be a positive integer, got {k}"),
                    ));
                }
                Ok(BuiltinParam::K(k as usize))
            }
            Some(t) => Err(ParseError::new(
                ParseErrorKind::Syntax,
                t.span,
                "'topk' expects an integer",
            )),
            None => Err(ParseError::new(
                ParseErrorKind::Syntax,
                self.end_span(),
                "'topk' expects an integer, found end of input",
            )),
        }
    }
}

/// Parses an expression into its tree form.
pub fn parse(text: &str) -> Result<ProcedureExpr, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        text_len: text.len(),
    };
    let expr = parser.parse_expr(0)?;
    if let Some(t) = parser.peek() {
        return Err(ParseError::new(
            ParseErrorKind::Syntax,
            t.span,
            "unexpected trailing input",
        ));
    }
    Ok(expr)
}

/// Canonical text form; `parse(&format(e))` reproduces `e` exactly.
pub fn format(expr: &ProcedureExpr) -> String {
    let mut out = String::new();
    write_expr(expr, &mut out);
    out
}

fn write_expr(expr: &ProcedureExpr, out: &mut String) {
    use fmt::Write;
    match expr {
        ProcedureExpr::Builtin(spec) => {
            let _ = match spec.level() {
                Some(level) => write!(out, "{}({level})", spec.name()),
                None => match spec {
                    crate::procedure::BuiltinSpec::TopK(k) => write!(out, "topk({k})"),
                    _ => unreachable!("level-less builtin other than topk"),
                },
            };
        }
        ProcedureExpr::Union(a, b) => {
            out.push_str("union(");
            write_expr(a, out);
            out.push_str(", ");
            write_expr(b, out);
            out.push(')');
        }
        ProcedureExpr::Intersect(a, b) => {
            out.push_str("intersect(");
            write_expr(a, out);
            out.push_str(", ");
            write_expr(b, out);
            out.push(')');
        }
        ProcedureExpr::Diff(a, b) => {
            out.push_str("diff(");
            write_expr(a, out);
            out.push_str(", ");
            write_expr(b, out);
            out.push(')');
        }
        ProcedureExpr::Complement(child, level) => {
            use fmt::Write;
            out.push_str("complement(");
            write_expr(child, out);
            let _ = write!(out, ", {level}");
            out.push(')');
        }
    }
}
