use std::fmt;

use thiserror::Error;

use super::{Expr, Func, Node, Var};
use crate::scalar::parse_decimal;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    UnknownIdentifier(String),
    BadNumber(String),
    BadExponent,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected '{t}'"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier '{s}'"),
            ParseErrorKind::BadNumber(s) => write!(f, "malformed number '{s}'"),
            ParseErrorKind::BadExponent => {
                write!(f, "exponent must be a non-negative integer literal")
            }
        }
    }
}

/// A syntax error at a byte offset into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> ParseErrorKind {
        match self {
            Tok::Num(s) | Tok::Ident(s) => ParseErrorKind::UnexpectedToken(s.clone()),
            Tok::Sym(c) => ParseErrorKind::UnexpectedToken(c.to_string()),
            Tok::End => ParseErrorKind::UnexpectedEnd,
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // Exponent part only when digits follow, so "2e" stays an error.
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            out.push((start, Tok::Num(text[start..i].to_string())));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if b"+-*/^()".contains(&c) {
            out.push((i, Tok::Sym(c as char)));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(ParseError {
                offset: i,
                kind: ParseErrorKind::UnexpectedChar(ch),
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind: self.peek().describe(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Expr::new(Node::Add(lhs, self.product()?));
            } else if self.eat('-') {
                lhs = Expr::new(Node::Sub(lhs, self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::new(Node::Mul(lhs, self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::new(Node::Div(lhs, self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::new(Node::Neg(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.atom()?;
        while self.eat('^') {
            let offset = self.offset();
            let bad = ParseError {
                offset,
                kind: ParseErrorKind::BadExponent,
            };
            match self.bump().1 {
                Tok::Num(s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                    let n: u32 = s.parse().map_err(|_| bad)?;
                    base = Expr::new(Node::Pow(base, n));
                }
                _ => return Err(bad),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                let q = parse_decimal(&s).ok_or(ParseError {
                    offset,
                    kind: ParseErrorKind::BadNumber(s),
                })?;
                Ok(Expr::constant(q))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(v) = Var::ALL.into_iter().find(|v| v.name() == name) {
                    return Ok(Expr::var(v));
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError {
                        offset,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    });
                };
                if !self.eat('(') {
                    return Err(self.error());
                }
                let arg = self.sum()?;
                if !self.eat(')') {
                    return Err(self.error());
                }
                Ok(Expr::new(Node::Call(func, arg)))
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.sum()?;
                if !self.eat(')') {
                    return Err(self.error());
                }
                Ok(inner)
            }
            _ => Err(self.error()),
        }
    }
}

/// Parses an expression. Precedence from tightest: `^`, unary `-`,
/// `* /`, `+ -`; binary operators associate to the left.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.error());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Rational, Scalar};

    fn var(v: Var) -> Expr {
        Expr::var(v)
    }

    #[test]
    fn product_of_variables() {
        assert_eq!(
            parse("u*v").unwrap(),
            Expr::new(Node::Mul(var(Var::U), var(Var::V)))
        );
    }

    #[test]
    fn precedence_and_association() {
        assert_eq!(parse("u+v*t").unwrap(), parse("u+(v*t)").unwrap());
        assert_eq!(parse("u-v-t").unwrap(), parse("(u-v)-t").unwrap());
        assert_eq!(parse("u/v/t").unwrap(), parse("(u/v)/t").unwrap());
        assert_eq!(parse("-u^2").unwrap(), parse("-(u^2)").unwrap());
        assert_eq!(parse("-u*v").unwrap(), parse("(-u)*v").unwrap());
        assert_eq!(parse("2^3^2").unwrap(), parse("(2^3)^2").unwrap());
    }

    #[test]
    fn literals_are_exact() {
        assert_eq!(
            parse("0.1").unwrap(),
            Expr::constant(Rational::from_ratio(1, 10))
        );
        assert_eq!(
            parse("2.5e-1").unwrap(),
            Expr::constant(Rational::from_ratio(1, 4))
        );
    }

    #[test]
    fn error_offsets() {
        let err = parse("u +").unwrap_err();
        assert_eq!(err.offset, 3);
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        let err = parse("2u").unwrap_err();
        assert_eq!(err.offset, 1);
        let err = parse("u + w").unwrap_err();
        assert_eq!(
            err,
            ParseError {
                offset: 4,
                kind: ParseErrorKind::UnknownIdentifier("w".into())
            }
        );
        assert_eq!(parse("u^v").unwrap_err().kind, ParseErrorKind::BadExponent);
        assert_eq!(parse("u^-1").unwrap_err().kind, ParseErrorKind::BadExponent);
        assert_eq!(parse("u^1.5").unwrap_err().kind, ParseErrorKind::BadExponent);
        assert_eq!(parse("(u").unwrap_err().offset, 2);
        assert_eq!(parse("sin u").unwrap_err().offset, 4);
        assert_eq!(
            parse("u # v").unwrap_err().kind,
            ParseErrorKind::UnexpectedChar('#')
        );
        assert_eq!(parse("").unwrap_err().offset, 0);
        assert!(matches!(parse("1.2.3").unwrap_err().kind, ParseErrorKind::BadNumber(_)));
    }
}
