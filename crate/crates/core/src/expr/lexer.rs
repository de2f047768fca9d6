use std::fmt;

use serde::{Deserialize, Serialize};

use super::LexError;

/// Half-open range of character offsets into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn point(at: usize) -> Self {
        Self { start: at, end: at }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Smallest span covering both.
    pub fn join(self, other: SourceSpan) -> SourceSpan {
        SourceSpan::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Integer,
    StringLiteral,
    BooleanLiteral,
    LParen,
    RParen,
    Comma,
    Equals,
    Semicolon,
}

impl TokenKind {
    pub fn describe(self) -> &'static str {
        match self {
            TokenKind::Identifier => "identifier",
            TokenKind::Integer => "integer",
            TokenKind::StringLiteral => "string literal",
            TokenKind::BooleanLiteral => "boolean literal",
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::Comma => "','",
            TokenKind::Equals => "'='",
            TokenKind::Semicolon => "';'",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

/// A lexed token. `text` is the raw source slice, quotes and escapes included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: SourceSpan,
}

/// Splits `source` into tokens. Offsets in spans count characters, not bytes.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut pos = 0;

    while pos < chars.len() {
        let c = chars[pos];
        if c.is_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        let kind = match c {
            '(' => {
                pos += 1;
                TokenKind::LParen
            }
            ')' => {
                pos += 1;
                TokenKind::RParen
            }
            ',' => {
                pos += 1;
                TokenKind::Comma
            }
            '=' => {
                pos += 1;
                TokenKind::Equals
            }
            ';' => {
                pos += 1;
                TokenKind::Semicolon
            }
            '"' => {
                pos = scan_string(&chars, pos)?;
                TokenKind::StringLiteral
            }
            '-' | '0'..='9' => {
                if c == '-' {
                    pos += 1;
                    if !chars.get(pos).is_some_and(char::is_ascii_digit) {
                        return Err(LexError::UnexpectedChar {
                            ch: '-',
                            span: SourceSpan::new(start, start + 1),
                        });
                    }
                }
                while chars.get(pos).is_some_and(char::is_ascii_digit) {
                    pos += 1;
                }
                TokenKind::Integer
            }
            c if c.is_ascii_alphabetic() => {
                while chars
                    .get(pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
                {
                    pos += 1;
                }
                let word: String = chars[start..pos].iter().collect();
                if word == "true" || word == "false" {
                    TokenKind::BooleanLiteral
                } else {
                    TokenKind::Identifier
                }
            }
            other => {
                return Err(LexError::UnexpectedChar {
                    ch: other,
                    span: SourceSpan::new(start, start + 1),
                })
            }
        };
        tokens.push(Token {
            kind,
            text: chars[start..pos].iter().collect(),
            span: SourceSpan::new(start, pos),
        });
    }
    Ok(tokens)
}

/// Returns the offset just past the closing quote.
fn scan_string(chars: &[char], open: usize) -> Result<usize, LexError> {
    let mut pos = open + 1;
    while pos < chars.len() {
        match chars[pos] {
            '"' => return Ok(pos + 1),
            '\\' => {
                match chars.get(pos + 1) {
                    Some('"' | '\\' | 'n' | 't') => {}
                    Some(_) => {
                        return Err(LexError::BadEscape {
                            span: SourceSpan::new(pos, pos + 2),
                        })
                    }
                    None => break,
                }
                pos += 2;
            }
            _ => pos += 1,
        }
    }
    Err(LexError::UnterminatedString {
        span: SourceSpan::new(open, chars.len()),
    })
}

/// Decodes the body of a string token (including its surrounding quotes).
pub(crate) fn unescape(raw: &str) -> String {
    let inner = &raw[1..raw.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut it = inner.chars();
    while let Some(c) = it.next() {
        if c == '\\' {
            match it.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}
