//! Small recursive-descent parser for sums of products, shared by the
//! polynomial and shift-operator text formats.
//!
//! Grammar:
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := number ['/' number] | ident ['^' ['-'] int] | '(' expr ')' ['^' int]
//! ```

use num_bigint::BigInt;
use thiserror::Error;

use super::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(pos: usize, msg: impl Into<String>) -> Self {
        Self {
            pos,
            msg: msg.into(),
        }
    }
}

/// Ring operations the parser needs to build a value.
pub trait ExprBuilder {
    type Value: Clone;

    fn constant(&self, c: Rational) -> Self::Value;
    /// Resolve `name^exp`; negative exponents are only meaningful for
    /// invertible atoms and the builder decides.
    fn atom(&self, name: &str, exp: i64) -> Result<Self::Value, String>;
    fn add(&self, a: Self::Value, b: Self::Value) -> Self::Value;
    fn neg(&self, a: Self::Value) -> Self::Value;
    fn mul(&self, a: Self::Value, b: Self::Value) -> Self::Value;
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            d if d.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits");
                out.push((start, Tok::Num(n)));
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => return Err(ParseError::new(start, format!("unexpected character '{other}'"))),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a, B: ExprBuilder> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    builder: &'a B,
}

impl<'a, B: ExprBuilder> Parser<'a, B> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn expr(&mut self) -> Result<B::Value, ParseError> {
        let negate = match self.peek() {
            Some(Tok::Plus) => {
                self.bump();
                false
            }
            Some(Tok::Minus) => {
                self.bump();
                true
            }
            _ => false,
        };
        let first = self.term()?;
        let mut acc = if negate { self.builder.neg(first) } else { first };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let t = self.term()?;
                    acc = self.builder.add(acc, t);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let t = self.term()?;
                    acc = self.builder.add(acc, self.builder.neg(t));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<B::Value, ParseError> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.bump();
            let f = self.factor()?;
            acc = self.builder.mul(acc, f);
        }
        Ok(acc)
    }

    fn exponent(&mut self, allow_negative: bool) -> Result<i64, ParseError> {
        let pos = self.pos();
        let negative = if let Some(Tok::Minus) = self.peek() {
            if !allow_negative {
                return Err(ParseError::new(pos, "negative exponent not allowed here"));
            }
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Some(Tok::Num(n)) => {
                let v: i64 = n
                    .try_into()
                    .map_err(|_| ParseError::new(pos, "exponent too large"))?;
                Ok(if negative { -v } else { v })
            }
            _ => Err(ParseError::new(pos, "expected integer exponent")),
        }
    }

    fn factor(&mut self) -> Result<B::Value, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(n)) => {
                if let Some(Tok::Slash) = self.peek() {
                    self.bump();
                    let dpos = self.pos();
                    match self.bump() {
                        Some(Tok::Num(d)) if d != BigInt::from(0) => {
                            Ok(self.builder.constant(Rational::new(n, d)))
                        }
                        _ => Err(ParseError::new(dpos, "expected nonzero denominator")),
                    }
                } else {
                    Ok(self.builder.constant(Rational::from_integer(n)))
                }
            }
            Some(Tok::Ident(name)) => {
                let exp = if let Some(Tok::Caret) = self.peek() {
                    self.bump();
                    self.exponent(true)?
                } else {
                    1
                };
                self.builder
                    .atom(&name, exp)
                    .map_err(|msg| ParseError::new(pos, msg))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                let cpos = self.pos();
                match self.bump() {
                    Some(Tok::RParen) => {}
                    _ => return Err(ParseError::new(cpos, "expected ')'")),
                }
                if let Some(Tok::Caret) = self.peek() {
                    self.bump();
                    let k = self.exponent(false)?;
                    let mut acc = self.builder.constant(Rational::from_integer(1.into()));
                    for _ in 0..k {
                        acc = self.builder.mul(acc, inner.clone());
                    }
                    Ok(acc)
                } else {
                    Ok(inner)
                }
            }
            Some(t) => Err(ParseError::new(pos, format!("unexpected token {t:?}"))),
            None => Err(ParseError::new(pos, "unexpected end of input")),
        }
    }
}

pub fn parse_expr<B: ExprBuilder>(text: &str, builder: &B) -> Result<B::Value, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::new(0, "empty expression"));
    }
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
        builder,
    };
    let v = p.expr()?;
    if p.at < p.toks.len() {
        return Err(ParseError::new(p.pos(), "trailing input"));
    }
    Ok(v)
}
