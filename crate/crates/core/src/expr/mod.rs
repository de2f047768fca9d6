//! Lexing, parsing, and canonical printing of DataFlow call expressions.
//!
//! The surface syntax is a flat call language:
//!
//! ```text
//! program := call (';' call)* ';'?
//! call    := IDENT '(' (arg (',' arg)*)? ')'
//! arg     := IDENT '=' value | value
//! value   := call | INTEGER | STRING | 'true' | 'false'
//! ```
//!
//! Positional arguments must come before named ones, and a call may not
//! repeat a named argument. The canonical form (see [`canonicalize`]) is what
//! Exact Match compares.

mod ast;
mod lexer;
mod parser;

use std::fmt::Write as _;

use thiserror::Error;

use self::lexer::Token;

pub use self::ast::{ExprKind, ExprNode, NamedArg, Program};
pub use self::lexer::{tokenize, SourceSpan, Token as LexToken, TokenKind};
pub use self::parser::parse_program;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unexpected character '{ch}' at offset {}", span.start)]
    UnexpectedChar { ch: char, span: SourceSpan },
    #[error("unterminated string literal starting at offset {}", span.start)]
    UnterminatedString { span: SourceSpan },
    #[error("invalid escape sequence at offset {}", span.start)]
    BadEscape { span: SourceSpan },
}

impl LexError {
    pub fn span(&self) -> SourceSpan {
        match self {
            LexError::UnexpectedChar { span, .. }
            | LexError::UnterminatedString { span }
            | LexError::BadEscape { span } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("empty program")]
    Empty { span: SourceSpan },
    #[error("expected {} but found '{found}' at offset {}", expected.join(" or "), span.start)]
    Unexpected {
        found: String,
        expected: Vec<String>,
        span: SourceSpan,
    },
    #[error("expected {} but the input ended", expected.join(" or "))]
    UnexpectedEnd {
        expected: Vec<String>,
        span: SourceSpan,
    },
    #[error("positional argument after named argument at offset {}", span.start)]
    PositionalAfterNamed { span: SourceSpan },
    #[error("duplicate named argument {name}")]
    DuplicateNamedArg { name: String, span: SourceSpan },
    #[error("top-level expression must be a call (offset {})", span.start)]
    TopLevelNotCall { span: SourceSpan },
    #[error("integer literal out of range at offset {}", span.start)]
    IntegerOverflow { span: SourceSpan },
}

impl ParseError {
    fn unexpected(tok: &Token, expected: &[TokenKind]) -> Self {
        ParseError::Unexpected {
            found: tok.text.clone(),
            expected: expected.iter().map(|k| k.describe().to_string()).collect(),
            span: tok.span,
        }
    }

    pub fn span(&self) -> SourceSpan {
        match self {
            ParseError::Lex(e) => e.span(),
            ParseError::Empty { span }
            | ParseError::Unexpected { span, .. }
            | ParseError::UnexpectedEnd { span, .. }
            | ParseError::PositionalAfterNamed { span }
            | ParseError::DuplicateNamedArg { span, .. }
            | ParseError::TopLevelNotCall { span }
            | ParseError::IntegerOverflow { span } => *span,
        }
    }

    /// Token kinds that would have been accepted at the error position.
    pub fn expected(&self) -> Vec<String> {
        match self {
            ParseError::Unexpected { expected, .. } | ParseError::UnexpectedEnd { expected, .. } => {
                expected.clone()
            }
            ParseError::Empty { .. } => vec![TokenKind::Identifier.describe().to_string()],
            _ => Vec::new(),
        }
    }
}

/// Deterministic text for a program: no whitespace, named arguments sorted by
/// name, expressions joined with `;`.
pub fn canonicalize(program: &Program) -> String {
    let mut out = String::new();
    for (i, expr) in program.expressions.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        write_canonical(expr, &mut out);
    }
    out
}

/// Canonical text of a single expression.
pub fn canonicalize_expr(expr: &ExprNode) -> String {
    let mut out = String::new();
    write_canonical(expr, &mut out);
    out
}

fn write_canonical(expr: &ExprNode, out: &mut String) {
    match &expr.kind {
        ExprKind::Int(n) => {
            let _ = write!(out, "{n}");
        }
        ExprKind::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        ExprKind::Str(s) => write_string_literal(s, out),
        ExprKind::Call {
            function,
            positional,
            named,
        } => {
            out.push_str(function);
            out.push('(');
            let mut sorted: Vec<&NamedArg> = named.iter().collect();
            sorted.sort_by(|a, b| a.name.cmp(&b.name));
            let mut first = true;
            for arg in positional {
                if !first {
                    out.push(',');
                }
                first = false;
                write_canonical(arg, out);
            }
            for arg in sorted {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&arg.name);
                out.push('=');
                write_canonical(&arg.value, out);
            }
            out.push(')');
        }
    }
}

pub(crate) fn write_string_literal(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Exact Match between two parsed programs.
pub fn exact_equal(a: &Program, b: &Program) -> bool {
    canonicalize(a) == canonicalize(b)
}
