use super::ast::{ExprKind, ExprNode, NamedArg, Program};
use super::lexer::{tokenize, unescape, Token, TokenKind};
use super::{ParseError, SourceSpan};

/// Parses a turn's program text.
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source)?;
    let end = source.chars().count();
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end,
    };
    if tokens.is_empty() {
        return Err(ParseError::Empty {
            span: SourceSpan::point(end),
        });
    }

    let mut expressions = Vec::new();
    loop {
        let expr = parser.value()?;
        if !expr.is_call() {
            return Err(ParseError::TopLevelNotCall { span: expr.span });
        }
        expressions.push(expr);
        match parser.peek() {
            None => break,
            Some(tok) if tok.kind == TokenKind::Semicolon => {
                parser.pos += 1;
                if parser.peek().is_none() {
                    break;
                }
            }
            Some(tok) => {
                return Err(ParseError::unexpected(tok, &[TokenKind::Semicolon]));
            }
        }
    }

    Ok(Program {
        expressions,
        source: source.to_string(),
    })
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
}

const VALUE_START: &[TokenKind] = &[
    TokenKind::Identifier,
    TokenKind::Integer,
    TokenKind::StringLiteral,
    TokenKind::BooleanLiteral,
];

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self, offset: usize) -> Option<TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| t.kind)
    }

    fn next(&mut self, expected: &[TokenKind]) -> Result<&'a Token, ParseError> {
        match self.tokens.get(self.pos) {
            Some(tok) => {
                self.pos += 1;
                Ok(tok)
            }
            None => Err(ParseError::UnexpectedEnd {
                expected: expected.iter().map(|k| k.describe().to_string()).collect(),
                span: SourceSpan::point(self.end),
            }),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&'a Token, ParseError> {
        let tok = self.next(&[kind])?;
        if tok.kind == kind {
            Ok(tok)
        } else {
            Err(ParseError::unexpected(tok, &[kind]))
        }
    }

    fn value(&mut self) -> Result<ExprNode, ParseError> {
        let tok = self.next(VALUE_START)?;
        match tok.kind {
            TokenKind::Integer => {
                let value = tok
                    .text
                    .parse::<i64>()
                    .map_err(|_| ParseError::IntegerOverflow { span: tok.span })?;
                Ok(ExprNode {
                    kind: ExprKind::Int(value),
                    span: tok.span,
                })
            }
            TokenKind::StringLiteral => Ok(ExprNode {
                kind: ExprKind::Str(unescape(&tok.text)),
                span: tok.span,
            }),
            TokenKind::BooleanLiteral => Ok(ExprNode {
                kind: ExprKind::Bool(tok.text == "true"),
                span: tok.span,
            }),
            TokenKind::Identifier => self.call_after_name(tok),
            _ => Err(ParseError::unexpected(tok, VALUE_START)),
        }
    }

    fn call_after_name(&mut self, name: &'a Token) -> Result<ExprNode, ParseError> {
        self.expect(TokenKind::LParen)?;
        let mut positional = Vec::new();
        let mut named: Vec<NamedArg> = Vec::new();

        if self.peek_kind(0) == Some(TokenKind::RParen) {
            let close = self.next(&[TokenKind::RParen])?;
            return Ok(ExprNode {
                kind: ExprKind::Call {
                    function: name.text.clone(),
                    positional,
                    named,
                },
                span: name.span.join(close.span),
            });
        }

        loop {
            let is_named = self.peek_kind(0) == Some(TokenKind::Identifier)
                && self.peek_kind(1) == Some(TokenKind::Equals);
            if is_named {
                let arg_name = self.next(&[TokenKind::Identifier])?;
                self.pos += 1;
                if named.iter().any(|a| a.name == arg_name.text) {
                    return Err(ParseError::DuplicateNamedArg {
                        name: arg_name.text.clone(),
                        span: arg_name.span,
                    });
                }
                let value = self.value()?;
                named.push(NamedArg {
                    name: arg_name.text.clone(),
                    value,
                });
            } else {
                let value = self.value()?;
                if !named.is_empty() {
                    return Err(ParseError::PositionalAfterNamed { span: value.span });
                }
                positional.push(value);
            }

            let sep = self.next(&[TokenKind::Comma, TokenKind::RParen])?;
            match sep.kind {
                TokenKind::Comma => continue,
                TokenKind::RParen => {
                    return Ok(ExprNode {
                        kind: ExprKind::Call {
                            function: name.text.clone(),
                            positional,
                            named,
                        },
                        span: name.span.join(sep.span),
                    })
                }
                _ => return Err(ParseError::unexpected(sep, &[TokenKind::Comma, TokenKind::RParen])),
            }
        }
    }
}
