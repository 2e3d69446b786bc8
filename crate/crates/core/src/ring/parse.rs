use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use super::{Polynomial, Ring, RingError};
use crate::field::Scalar;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn err(column: usize, message: impl Into<String>) -> RingError {
    RingError::Parse { column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, RingError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().expect("digits")), col));
            continue;
        }
        if c.is_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        let t = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => return Err(err(col, format!("unexpected character `{c}`"))),
        };
        out.push((t, col));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a, F> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    ring: &'a Arc<Ring>,
    end_col: usize,
    _f: std::marker::PhantomData<F>,
}

impl<F: Scalar> Parser<'_, F> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Polynomial<F>, RingError> {
        let mut acc = if self.peek() == Some(&Tok::Minus) {
            self.bump();
            -self.term()?
        } else {
            if self.peek() == Some(&Tok::Plus) {
                self.bump();
            }
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial<F>, RingError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.bump();
            acc = &acc * &self.factor()?;
        }
        if self.peek() == Some(&Tok::Slash) {
            return Err(err(self.col(), "division is only allowed inside rational literals like 3/4"));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial<F>, RingError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            let col = self.col();
            match self.bump() {
                Some(Tok::Int(n)) => {
                    let e: u32 = n.try_into().map_err(|_| err(col, "exponent too large"))?;
                    return Ok(base.pow(e));
                }
                _ => return Err(err(col, "expected a natural-number exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial<F>, RingError> {
        let col = self.col();
        match self.bump() {
            Some(Tok::Int(n)) => {
                let mut den = BigInt::one();
                if self.peek() == Some(&Tok::Slash) {
                    self.bump();
                    let dcol = self.col();
                    match self.bump() {
                        Some(Tok::Int(d)) => den = d,
                        _ => return Err(err(dcol, "expected an integer denominator")),
                    }
                }
                let c = F::from_ratio(&self.ring.field(), &n, &den).map_err(|e| err(col, e.to_string()))?;
                Ok(Polynomial::constant(self.ring, c))
            }
            Some(Tok::Ident(name)) => {
                let i = self.ring.index_of(&name).map_err(|_| err(col, format!("unknown variable `{name}`")))?;
                Ok(Polynomial::var(self.ring, i))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                let c = self.col();
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(err(c, "expected `)`")),
                }
            }
            Some(Tok::Slash) => Err(err(col, "division is only allowed inside rational literals like 3/4")),
            Some(t) => Err(err(col, format!("unexpected token {t:?}"))),
            None => Err(err(col, "unexpected end of input")),
        }
    }
}

/// Parses `text` into a polynomial of `ring`.
///
/// Grammar: sums of products of integer or rational literals, variables,
/// natural powers and parenthesized subexpressions. Whitespace is ignored.
pub fn parse_poly<F: Scalar>(text: &str, ring: &Arc<Ring>) -> Result<Polynomial<F>, RingError> {
    if !F::supports(&ring.field()) {
        return Err(RingError::Field(crate::field::FieldError::Mismatch(ring.field())));
    }
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(err(1, "empty polynomial"));
    }
    let mut p = Parser { toks, pos: 0, ring, end_col: text.chars().count() + 1, _f: std::marker::PhantomData };
    let out = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(err(p.col(), "trailing input"));
    }
    Ok(out)
}
