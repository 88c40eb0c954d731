//! Tiny infix expression language for planar profile fields.
//!
//! Grammar (documented in the README): arithmetic over the two planar
//! variables `x` (the t-coordinate) and `y` (the |z|²-coordinate) with the
//! named constants `pi` and `e`, operators `+ - * /`, unary minus, and `^`
//! restricted to non-negative integer exponents.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{BoundingBox, PlanarField, ScalarField};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// 0 = x, 1 = y.
    Var(u8),
    Pi,
    E,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(0) => x,
            Expr::Var(_) => y,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Neg(a) => -a.eval(x, y),
            Expr::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Expr::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Expr::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Expr::Div(a, b) => a.eval(x, y) / b.eval(x, y),
            Expr::Pow(a, k) => a.eval(x, y).powi(*k as i32),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(0) => write!(f, "x"),
            Expr::Var(_) => write!(f, "y"),
            Expr::Pi => write!(f, "pi"),
            Expr::E => write!(f, "e"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) => write!(f, "({a} ^ {k})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
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
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        pos,
        msg: msg.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == b'.'
                        || bytes[i] == b'e'
                        || bytes[i] == b'E'
                        || ((bytes[i] == b'+' || bytes[i] == b'-')
                            && i > start
                            && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E')))
                {
                    i += 1;
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| err(start, format!("invalid number `{text}`")))?;
                out.push((start, Tok::Num(v)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => return Err(err(i, format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let pos = self.here();
            match self.bump() {
                Some(Tok::Num(v)) => {
                    if v.fract() != 0.0 || *v < 0.0 || *v > u32::MAX as f64 {
                        return Err(err(pos, "exponent must be a non-negative integer"));
                    }
                    return Ok(Expr::Pow(Box::new(base), *v as u32));
                }
                _ => return Err(err(pos, "exponent must be a non-negative integer literal")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(*v)),
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => Ok(Expr::Var(0)),
                "y" => Ok(Expr::Var(1)),
                "pi" => Ok(Expr::Pi),
                "e" => Ok(Expr::E),
                other => Err(err(
                    pos,
                    format!("unknown identifier `{other}` (allowed: x, y, pi, e)"),
                )),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(err(pos, "unbalanced parenthesis")),
                }
            }
            _ => Err(err(pos, "expected a number, variable or `(`")),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: src.len(),
    };
    let e = p.expr()?;
    if p.pos != toks.len() {
        return Err(err(p.here(), "trailing input after expression"));
    }
    Ok(e)
}

/// Build a planar field from an expression string; derivatives go through
/// the standard finite-difference dispatch.
pub fn planar_field_from_expr(src: &str, bounds: BoundingBox<2>) -> Result<PlanarField> {
    let ast = parse(src)?;
    let name = format!("expr:{src}");
    Ok(ScalarField::new(name, bounds, move |w: &[f64; 2]| {
        ast.eval(w[0], w[1])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_disc_expression() {
        let e = parse("(x - 1)^2 + (y - 2)^2 - 1").unwrap();
        assert_eq!(e.eval(1.0, 3.0), 0.0);
        assert_eq!(e.eval(1.0, 2.0), -1.0);
        assert_eq!(e.eval(2.0, 2.0), 0.0);
    }

    #[test]
    fn precedence_and_unary() {
        let e = parse("2 + 3 * 4").unwrap();
        assert_eq!(e.eval(0.0, 0.0), 14.0);
        let e = parse("-x^2").unwrap();
        assert_eq!(e.eval(3.0, 0.0), -9.0);
        let e = parse("2 * pi").unwrap();
        assert!((e.eval(0.0, 0.0) - std::f64::consts::TAU).abs() < 1e-15);
        let e = parse("1 - 2 - 3").unwrap();
        assert_eq!(e.eval(0.0, 0.0), -4.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse("x ^ 1.5"), Err(Error::Parse { .. })));
        assert!(matches!(parse("x ^ y"), Err(Error::Parse { .. })));
        assert!(matches!(parse("foo + 1"), Err(Error::Parse { .. })));
        assert!(matches!(parse("(x + 1"), Err(Error::Parse { .. })));
        assert!(matches!(parse("1 + + 2 )"), Err(Error::Parse { .. })));
        assert!(matches!(parse(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "(x - 1)^2 + (y - 2)^2 - 1",
            "x * y / 3 - -y",
            "2e-3 * x ^ 4 + pi",
        ] {
            let a = parse(src).unwrap();
            let b = parse(&a.to_string()).unwrap();
            for (x, y) in [(0.3, 0.8), (-1.2, 2.5), (4.0, 0.1)] {
                let va = a.eval(x, y);
                let vb = b.eval(x, y);
                assert_eq!(va.to_bits(), vb.to_bits(), "{src} at ({x},{y})");
            }
        }
    }
}
