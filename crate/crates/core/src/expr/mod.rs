//! Closed-form expressions over smooth primitives.
//!
//! Variables are referenced by position; names live with whoever owns the
//! expression (a map, a chart, a graph function) and are only needed for
//! parsing and printing.

mod parse;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::taylor::Jet;

pub use parse::{parse_expr, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// Arithmetic needed to evaluate an [`Expr`].
pub trait Scalar: Clone {
    /// A constant living in the same space as `self`.
    fn lift(&self, c: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn pow(&self, o: &Self) -> Result<Self>;
    fn call(&self, f: Func) -> Result<Self>;
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> f64 {
        c
    }
    fn add(&self, o: &f64) -> f64 {
        self + o
    }
    fn sub(&self, o: &f64) -> f64 {
        self - o
    }
    fn mul(&self, o: &f64) -> f64 {
        self * o
    }
    fn neg(&self) -> f64 {
        -self
    }
    fn div(&self, o: &f64) -> Result<f64> {
        if o.abs() < 1e-300 {
            return Err(Error::DivisionByZero);
        }
        Ok(self / o)
    }
    fn pow(&self, o: &f64) -> Result<f64> {
        if o.fract() == 0.0 && o.abs() <= 64.0 {
            if *o < 0.0 && self.abs() < 1e-300 {
                return Err(Error::DivisionByZero);
            }
            return Ok(self.powi(*o as i32));
        }
        if *self <= 0.0 {
            return Err(Error::NonPositiveArgument("real power"));
        }
        Ok(self.powf(*o))
    }
    fn call(&self, f: Func) -> Result<f64> {
        Ok(match f {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Exp => self.exp(),
            Func::Log => {
                if *self <= 0.0 {
                    return Err(Error::NonPositiveArgument("log"));
                }
                self.ln()
            }
            Func::Sqrt => {
                if *self < 0.0 {
                    return Err(Error::NonPositiveArgument("sqrt"));
                }
                self.sqrt()
            }
        })
    }
}

impl Scalar for Jet {
    fn lift(&self, c: f64) -> Jet {
        Jet::lift(self, c)
    }
    fn add(&self, o: &Jet) -> Jet {
        self + o
    }
    fn sub(&self, o: &Jet) -> Jet {
        self - o
    }
    fn mul(&self, o: &Jet) -> Jet {
        self * o
    }
    fn neg(&self) -> Jet {
        -self
    }
    fn div(&self, o: &Jet) -> Result<Jet> {
        Jet::div(self, o)
    }
    fn pow(&self, o: &Jet) -> Result<Jet> {
        Jet::pow(self, o)
    }
    fn call(&self, f: Func) -> Result<Jet> {
        match f {
            Func::Sin => Ok(self.sin()),
            Func::Cos => Ok(self.cos()),
            Func::Exp => Ok(self.exp()),
            Func::Log => self.ln(),
            Func::Sqrt => self.sqrt(),
        }
    }
}

pub fn c(v: f64) -> Expr {
    Expr::Const(v)
}

pub fn var(i: usize) -> Expr {
    Expr::Var(i)
}

impl Expr {
    pub fn is_const(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    pub fn const_value(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// Evaluates with `inputs[i]` bound to `Var(i)`. `proto` fixes the shape
    /// of constants (relevant for jets).
    pub fn eval_with<S: Scalar>(&self, inputs: &[S], proto: &S) -> Result<S> {
        Ok(match self {
            Expr::Const(v) => proto.lift(*v),
            Expr::Var(i) => inputs
                .get(*i)
                .cloned()
                .ok_or_else(|| Error::UnknownSymbol(format!("#{i}")))?,
            Expr::Neg(a) => a.eval_with(inputs, proto)?.neg(),
            Expr::Call(f, a) => a.eval_with(inputs, proto)?.call(*f)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval_with(inputs, proto)?;
                // constant exponents stay constants so integer powers of
                // negative bases keep working
                let b = b.eval_with(inputs, proto)?;
                match op {
                    BinOp::Add => a.add(&b),
                    BinOp::Sub => a.sub(&b),
                    BinOp::Mul => a.mul(&b),
                    BinOp::Div => a.div(&b)?,
                    BinOp::Pow => a.pow(&b)?,
                }
            }
        })
    }

    pub fn eval(&self, inputs: &[f64]) -> Result<f64> {
        let v = self.eval_with(inputs, &0.0)?;
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(v)
    }

    /// Jet evaluation; all inputs must share one layout.
    pub fn eval_jet(&self, inputs: &[Jet]) -> Result<Jet> {
        let proto = inputs
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no input jets".into()))?;
        let v = self.eval_with(inputs, proto)?;
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(v)
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// Replaces `Var(i)` by `subs[i]`.
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Var(i) => subs[*i].clone(),
            Expr::Neg(a) => neg(a.substitute(subs)),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute(subs))),
            Expr::Binary(op, a, b) => binary(*op, a.substitute(subs), b.substitute(subs)),
        }
    }

    /// Shifts every variable index by `offset`.
    pub fn shift_vars(&self, offset: usize) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Var(i) => Expr::Var(i + offset),
            Expr::Neg(a) => Expr::Neg(Box::new(a.shift_vars(offset))),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.shift_vars(offset))),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.shift_vars(offset)),
                Box::new(b.shift_vars(offset)),
            ),
        }
    }

    /// Symbolic partial derivative with respect to `Var(v)`.
    pub fn derivative(&self, v: usize) -> Expr {
        match self {
            Expr::Const(_) => c(0.0),
            Expr::Var(i) => c(if *i == v { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.derivative(v)),
            Expr::Call(f, a) => {
                let da = a.derivative(v);
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::Call(Func::Cos, Box::new(inner)),
                    Func::Cos => neg(Expr::Call(Func::Sin, Box::new(inner))),
                    Func::Exp => self.clone(),
                    Func::Log => binary(BinOp::Div, c(1.0), inner),
                    Func::Sqrt => binary(BinOp::Div, c(0.5), self.clone()),
                };
                mul(outer, da)
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (&**a, &**b);
                match op {
                    BinOp::Add => add(a.derivative(v), b.derivative(v)),
                    BinOp::Sub => sub(a.derivative(v), b.derivative(v)),
                    BinOp::Mul => add(
                        mul(a.derivative(v), b.clone()),
                        mul(a.clone(), b.derivative(v)),
                    ),
                    BinOp::Div => {
                        // (a' b - a b') / b^2
                        let num = sub(
                            mul(a.derivative(v), b.clone()),
                            mul(a.clone(), b.derivative(v)),
                        );
                        binary(BinOp::Div, num, binary(BinOp::Pow, b.clone(), c(2.0)))
                    }
                    BinOp::Pow => {
                        if let Some(p) = b.const_value() {
                            // p a^(p-1) a'
                            let lowered = if p == 1.0 {
                                c(1.0)
                            } else {
                                binary(BinOp::Pow, a.clone(), c(p - 1.0))
                            };
                            mul(mul(c(p), lowered), a.derivative(v))
                        } else {
                            // a^b (b' log a + b a'/a)
                            let log_a = Expr::Call(Func::Log, Box::new(a.clone()));
                            let t1 = mul(b.derivative(v), log_a);
                            let t2 = binary(BinOp::Div, mul(b.clone(), a.derivative(v)), a.clone());
                            mul(self.clone(), add(t1, t2))
                        }
                    }
                }
            }
        }
    }

    /// Renders with the given variable names in a form [`parse_expr`] reads
    /// back to the identical tree.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }

    pub fn to_source(&self, names: &[String]) -> String {
        self.display(names).to_string()
    }
}

// Builders with constant folding of neutral elements. The folding only
// touches literal 0 and 1 so generated formulas stay readable.

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(v) => Expr::Const(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (a.const_value(), b.const_value()) {
        (Some(x), Some(y)) => c(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => binary(BinOp::Add, a, b),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a.const_value(), b.const_value()) {
        (Some(x), Some(y)) => c(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => binary(BinOp::Sub, a, b),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a.const_value(), b.const_value()) {
        (Some(x), Some(y)) => c(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => c(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        _ => binary(BinOp::Mul, a, b),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match b.const_value() {
        Some(y) if y == 1.0 => a,
        _ => binary(BinOp::Div, a, b),
    }
}

pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Binary(op, Box::new(a), Box::new(b))
}

pub fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
    terms.into_iter().fold(c(0.0), add)
}

/// `Σ vars[i]^2` over the given indices.
pub fn norm_sq(indices: impl IntoIterator<Item = usize>) -> Expr {
    sum(indices
        .into_iter()
        .map(|i| binary(BinOp::Pow, var(i), c(2.0))))
}

/// Name table helper: `prefix1 .. prefixN`.
pub fn numbered_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

// Precedence levels used by the printer and the parser.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_PRIMARY: u8 = 5;

fn render(e: &Expr, names: &[String]) -> (String, u8) {
    match e {
        Expr::Const(v) => {
            let s = format_number(*v);
            if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                (s, PREC_UNARY)
            } else {
                (s, PREC_PRIMARY)
            }
        }
        Expr::Var(i) => (
            names.get(*i).cloned().unwrap_or_else(|| format!("_v{i}")),
            PREC_PRIMARY,
        ),
        Expr::Neg(a) => {
            let (s, p) = render(a, names);
            let wrapped = if a.is_const() || p < PREC_UNARY {
                format!("({s})")
            } else {
                s
            };
            (format!("-{wrapped}"), PREC_UNARY)
        }
        Expr::Call(f, a) => {
            let (s, _) = render(a, names);
            (format!("{}({s})", f.name()), PREC_PRIMARY)
        }
        Expr::Binary(op, a, b) => {
            let (sym, prec, left_min, right_min) = match op {
                BinOp::Add => ("+", PREC_ADD, PREC_ADD, PREC_MUL),
                BinOp::Sub => ("-", PREC_ADD, PREC_ADD, PREC_MUL),
                BinOp::Mul => ("*", PREC_MUL, PREC_MUL, PREC_UNARY),
                BinOp::Div => ("/", PREC_MUL, PREC_MUL, PREC_UNARY),
                BinOp::Pow => ("^", 4, PREC_PRIMARY, PREC_UNARY),
            };
            let (ls, lp) = render(a, names);
            let (rs, rp) = render(b, names);
            let ls = if lp < left_min { format!("({ls})") } else { ls };
            let rs = if rp < right_min {
                format!("({rs})")
            } else {
                rs
            };
            (format!("{ls}{sym}{rs}"), prec)
        }
    }
}

/// Shortest round-trip decimal form.
fn format_number(v: f64) -> String {
    let s = format!("{v:?}");
    match s.strip_suffix(".0") {
        Some(stripped) => stripped.to_string(),
        None => s,
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self.expr, self.names).0)
    }
}

/// Looks up variable positions by name.
pub fn name_index(names: &[String]) -> HashMap<&str, usize> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect()
}
