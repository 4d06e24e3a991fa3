//! Recursive-descent parser for the expression DSL.
//!
//! Precedence, loosest first: `+ -` (left), `* /` (left), unary minus,
//! `^` (right). A minus directly in front of a numeric literal that is not
//! the base of a power is read as a negative literal.

use std::fmt;

use super::{binary, BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndeclaredVariable(String),
    NonSmooth(String),
    UnknownFunction(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UndeclaredVariable(v) => write!(f, "undeclared variable `{v}`"),
            ParseErrorKind::NonSmooth(n) => {
                write!(f, "`{n}` is not a smooth primitive and is not supported")
            }
            ParseErrorKind::UnknownFunction(n) => write!(f, "unknown function `{n}`"),
        }
    }
}

const NON_SMOOTH: &[&str] = &[
    "abs",
    "max",
    "min",
    "floor",
    "ceil",
    "round",
    "sign",
    "sgn",
    "trunc",
    "mod",
    "fract",
    "step",
    "heaviside",
];

/// Parses `src` with `vars[i]` bound to `Var(i)`.
pub fn parse_expr(src: &str, vars: &[String]) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.error_at(
            p.pos,
            ParseErrorKind::Syntax(format!("unexpected `{}`", p.peek_char())),
        ));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn error_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError { line, column, kind }
    }

    fn peek_char(&self) -> char {
        self.src[self.pos..].chars().next().unwrap_or('\0')
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            let found = if self.pos < self.bytes.len() {
                format!("`{}`", self.peek_char())
            } else {
                "end of input".to_string()
            };
            Err(self.error_at(
                self.pos,
                ParseErrorKind::Syntax(format!("expected `{}`, found {found}", b as char)),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let save = self.pos;
            if matches!(self.peek(), Some(b'0'..=b'9' | b'.')) {
                let v = self.number()?;
                if self.peek() != Some(b'^') {
                    return Ok(Expr::Const(-v));
                }
                self.pos = save;
            }
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let b = self.bytes;
        let mut i = self.pos;
        while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
            i += 1;
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                j += 1;
            }
            if j < b.len() && b[j].is_ascii_digit() {
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        let v: f64 = text.parse().map_err(|_| {
            self.error_at(
                start,
                ParseErrorKind::Syntax(format!("bad number `{text}`")),
            )
        })?;
        self.pos = i;
        Ok(v)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'0'..=b'9' | b'.') => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric()
                        || matches!(self.bytes[self.pos], b'_' | b'\''))
                {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                if self.peek() == Some(b'(') {
                    if NON_SMOOTH.contains(&name) {
                        return Err(self.error_at(start, ParseErrorKind::NonSmooth(name.into())));
                    }
                    let Some(func) = Func::from_name(name) else {
                        return Err(
                            self.error_at(start, ParseErrorKind::UnknownFunction(name.into()))
                        );
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(b')')?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if let Some(i) = self.vars.iter().position(|v| v == name) {
                    return Ok(Expr::Var(i));
                }
                if name == "pi" {
                    return Ok(Expr::Const(std::f64::consts::PI));
                }
                if NON_SMOOTH.contains(&name) {
                    return Err(self.error_at(start, ParseErrorKind::NonSmooth(name.into())));
                }
                Err(self.error_at(start, ParseErrorKind::UndeclaredVariable(name.into())))
            }
            Some(_) => Err(self.error_at(
                self.pos,
                ParseErrorKind::Syntax(format!("unexpected `{}`", self.peek_char())),
            )),
            None => Err(self.error_at(
                self.pos,
                ParseErrorKind::Syntax("unexpected end of input".into()),
            )),
        }
    }
}
