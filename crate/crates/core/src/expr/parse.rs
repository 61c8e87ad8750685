//! Expression parser.
//!
//! Grammar (whitespace insensitive, implicit multiplication disallowed):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          // exponent must fold to a constant
//! atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! ```
//!
//! Precedence: `^` > unary minus > `*`,`/` > `+`,`-`, so `-x^2` reads as
//! `-(x^2)` and `x^-2` is accepted. Identifiers are the variables
//! `x, y, p1, p2`, the function names, and a configurable set of parameter
//! names (see [`DEFAULT_PARAMS`]).

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{Bindings, Expr, Var};

/// Parameter names accepted by [`parse`].
pub const DEFAULT_PARAMS: &[&str] = &[
    "a", "b", "c", "D", "omega", "t", "lambda", "theta", "phi", "psi", "c1", "c2", "c3", "c4",
    "a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4", "C1", "C2", "C3",
];

const FUNCTIONS: &[&str] = &["sin", "cos", "tan", "exp", "ln", "abs"];

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    UnexpectedToken {
        found: String,
        expected: &'static str,
    },
    UnknownIdentifier {
        name: String,
        permitted: Vec<String>,
    },
    NonConstantExponent,
    BadNumber,
}

/// Syntax or identifier error, with the byte offset into the input.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => {
                write!(f, "unexpected character `{c}` at byte {}", self.offset)
            }
            ParseErrorKind::UnexpectedEnd => {
                write!(f, "unexpected end of input at byte {}", self.offset)
            }
            ParseErrorKind::UnexpectedToken { found, expected } => write!(
                f,
                "expected {expected}, found `{found}` at byte {}",
                self.offset
            ),
            ParseErrorKind::UnknownIdentifier { name, permitted } => {
                write!(
                    f,
                    "unknown identifier `{name}` at byte {}; permitted names: {}",
                    self.offset,
                    permitted.join(", ")
                )
            }
            ParseErrorKind::NonConstantExponent => {
                write!(
                    f,
                    "exponent at byte {} does not fold to a constant",
                    self.offset
                )
            }
            ParseErrorKind::BadNumber => write!(f, "malformed number at byte {}", self.offset),
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => v.to_string(),
            Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".to_string(),
            Tok::Minus => "-".to_string(),
            Tok::Star => "*".to_string(),
            Tok::Slash => "/".to_string(),
            Tok::Caret => "^".to_string(),
            Tok::LParen => "(".to_string(),
            Tok::RParen => ")".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
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
                let v: f64 = text[start..i].parse().map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::BadNumber,
                })?;
                toks.push((start, Tok::Num(v)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((start, Tok::Ident(text[start..i].to_string())));
            }
            other => {
                return Err(ParseError {
                    offset: i,
                    kind: ParseErrorKind::UnexpectedChar(other),
                })
            }
        }
    }
    toks.push((text.len(), Tok::Eof));
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    params: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(ParseError {
                offset: self.offset(),
                kind: ParseErrorKind::UnexpectedToken {
                    found: self.peek().describe(),
                    expected,
                },
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    acc = acc.div(self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            Ok(-self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exp_offset = self.offset();
        let exponent = self.unary()?;
        let value = exponent.eval(&Bindings::new()).map_err(|_| ParseError {
            offset: exp_offset,
            kind: ParseErrorKind::NonConstantExponent,
        })?;
        Ok(base.powf(value))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if FUNCTIONS.contains(&name.as_str()) {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(match name.as_str() {
                        "sin" => arg.sin(),
                        "cos" => arg.cos(),
                        "tan" => arg.tan(),
                        "exp" => arg.exp(),
                        "ln" => arg.ln(),
                        "abs" => arg.abs(),
                        _ => unreachable!(),
                    });
                }
                match name.as_str() {
                    "x" => Ok(Expr::var(Var::X)),
                    "y" => Ok(Expr::var(Var::Y)),
                    "p1" => Ok(Expr::var(Var::P1)),
                    "p2" => Ok(Expr::var(Var::P2)),
                    other if self.params.contains(&other) => Ok(Expr::param(other)),
                    other => {
                        let mut permitted: Vec<String> = ["x", "y", "p1", "p2"]
                            .iter()
                            .map(|s| s.to_string())
                            .collect();
                        permitted.extend(FUNCTIONS.iter().map(|s| s.to_string()));
                        permitted.extend(self.params.iter().map(|s| s.to_string()));
                        Err(ParseError {
                            offset,
                            kind: ParseErrorKind::UnknownIdentifier {
                                name: other.to_string(),
                                permitted,
                            },
                        })
                    }
                }
            }
            Tok::Eof => Err(ParseError {
                offset,
                kind: ParseErrorKind::UnexpectedEnd,
            }),
            other => Err(ParseError {
                offset,
                kind: ParseErrorKind::UnexpectedToken {
                    found: other.describe(),
                    expected: "a number, identifier or `(`",
                },
            }),
        }
    }
}

/// Parse with the default parameter set.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    parse_with_params(text, DEFAULT_PARAMS)
}

/// Parse, accepting exactly the given parameter names.
pub fn parse_with_params(text: &str, params: &[&str]) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        params,
    };
    let e = parser.expr()?;
    if *parser.peek() != Tok::Eof {
        return Err(ParseError {
            offset: parser.offset(),
            kind: ParseErrorKind::UnexpectedToken {
                found: parser.peek().describe(),
                expected: "end of input",
            },
        });
    }
    Ok(e)
}

#[allow(unused_imports)]
pub(crate) use parse as parse_expr;
