//! A small arithmetic language for map components and normals.
//!
//! Expressions form a DAG: children sit behind `Arc`, so substitution shares
//! subtrees instead of copying them, and evaluators memoize per node.

mod eval;
mod parse;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::{Rational, Scalar};

pub use eval::{EvalError, JetBindings};
pub use parse::{parse, ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    U,
    V,
    T,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::U, Var::V, Var::T];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["u", "v", "t"][self.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        [Func::Sqrt, Func::Sin, Func::Cos, Func::Exp]
            .into_iter()
            .find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Var(Var),
    Const(Rational),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, u32),
    Call(Func, Expr),
}

/// Immutable, cheaply clonable expression handle.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn var(v: Var) -> Self {
        Expr::new(Node::Var(v))
    }

    pub fn u() -> Self {
        Expr::var(Var::U)
    }

    pub fn v() -> Self {
        Expr::var(Var::V)
    }

    pub fn t() -> Self {
        Expr::var(Var::T)
    }

    pub fn int(n: i64) -> Self {
        Expr::new(Node::Const(Rational::from_i64(n)))
    }

    pub fn constant(q: Rational) -> Self {
        Expr::new(Node::Const(q))
    }

    pub fn pow(&self, n: u32) -> Self {
        Expr::new(Node::Pow(self.clone(), n))
    }

    pub fn call(&self, f: Func) -> Self {
        Expr::new(Node::Call(f, self.clone()))
    }

    pub fn sqrt(&self) -> Self {
        self.call(Func::Sqrt)
    }

    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self.node(), Node::Const(q) if q.is_zero())
    }

    /// Variables occurring anywhere in the expression.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = [false; 3];
        let mut stack = vec![self.clone()];
        let mut visited = std::collections::HashSet::new();
        while let Some(e) = stack.pop() {
            if !visited.insert(e.key()) {
                continue;
            }
            match e.node() {
                Node::Var(v) => seen[v.index()] = true,
                Node::Const(_) => {}
                Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => stack.push(a.clone()),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
            }
        }
        Var::ALL.into_iter().filter(|v| seen[v.index()]).collect()
    }

    /// Replaces variables by expressions; unmapped variables stay.
    /// Shared subtrees of `self` stay shared in the result.
    pub fn substitute(&self, map: &[Option<Expr>; 3]) -> Expr {
        let mut memo = std::collections::HashMap::new();
        self.subst_memo(map, &mut memo)
    }

    fn subst_memo(
        &self,
        map: &[Option<Expr>; 3],
        memo: &mut std::collections::HashMap<usize, Expr>,
    ) -> Expr {
        if let Some(e) = memo.get(&self.key()) {
            return e.clone();
        }
        let mut go = |e: &Expr| e.subst_memo(map, memo);
        let out = match self.node() {
            Node::Var(v) => map[v.index()].clone().unwrap_or_else(|| self.clone()),
            Node::Const(_) => self.clone(),
            Node::Neg(a) => Expr::new(Node::Neg(go(a))),
            Node::Add(a, b) => Expr::new(Node::Add(go(a), go(b))),
            Node::Sub(a, b) => Expr::new(Node::Sub(go(a), go(b))),
            Node::Mul(a, b) => Expr::new(Node::Mul(go(a), go(b))),
            Node::Div(a, b) => Expr::new(Node::Div(go(a), go(b))),
            Node::Pow(a, n) => Expr::new(Node::Pow(go(a), *n)),
            Node::Call(f, a) => Expr::new(Node::Call(*f, go(a))),
        };
        memo.insert(self.key(), out.clone());
        out
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::var(v)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $node:ident) => {
        impl $trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::new(Node::$node(self, rhs))
            }
        }
        impl $trait for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::new(Node::$node(self.clone(), rhs.clone()))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::new(Node::Neg(self))
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::new(Node::Neg(self.clone()))
    }
}

// Binding strength used by the printer; matches the parser.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

/// Decimal text when the denominator divides a power of ten.
fn decimal_text(q: &Rational) -> Option<String> {
    let mut den = q.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0u32, 0u32);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let digits = twos.max(fives) as usize;
    let scaled = q.numer() * num_traits::pow(BigInt::from(10), digits) / q.denom();
    let negative = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = format!("{}{s}", "0".repeat(digits - s.len() + 1));
        }
        s.insert(s.len() - digits, '.');
    }
    Some(if negative { format!("-{s}") } else { s })
}

fn const_prec(q: &Rational) -> u8 {
    if q.is_negative() {
        PREC_UNARY
    } else if q.is_integer() || decimal_text(q).is_some() {
        PREC_ATOM
    } else {
        PREC_PRODUCT
    }
}

fn prec(node: &Node) -> u8 {
    match node {
        Node::Var(_) | Node::Call(..) => PREC_ATOM,
        Node::Const(q) => const_prec(q),
        Node::Neg(_) => PREC_UNARY,
        Node::Add(..) | Node::Sub(..) => PREC_SUM,
        Node::Mul(..) | Node::Div(..) => PREC_PRODUCT,
        Node::Pow(..) => PREC_POWER,
    }
}

fn write_prec(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(e.node()) < min {
        write!(f, "(")?;
        write_node(e, f)?;
        write!(f, ")")
    } else {
        write_node(e, f)
    }
}

fn write_node(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.node() {
        Node::Var(v) => write!(f, "{}", v.name()),
        Node::Const(q) => match decimal_text(q) {
            Some(s) => write!(f, "{s}"),
            None => write!(f, "{}/{}", q.numer(), q.denom()),
        },
        Node::Neg(a) => {
            write!(f, "-")?;
            write_prec(a, PREC_UNARY, f)
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            write_prec(a, PREC_SUM, f)?;
            write!(f, " {} ", if matches!(e.node(), Node::Add(..)) { "+" } else { "-" })?;
            write_prec(b, PREC_PRODUCT, f)
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            write_prec(a, PREC_PRODUCT, f)?;
            write!(f, "{}", if matches!(e.node(), Node::Mul(..)) { "*" } else { "/" })?;
            write_prec(b, PREC_UNARY, f)
        }
        Node::Pow(a, n) => {
            write_prec(a, PREC_ATOM, f)?;
            write!(f, "^{n}")
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(a, f)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_reparses_to_same_value() {
        let cases = [
            "u^2*(1+v)+v^2*(3+v)",
            "-u^2",
            "(-u)^2",
            "u-(v-t)",
            "u/(v*t)",
            "-2/sqrt(4*u^2+v^2+4)",
            "0.125*u - -3",
            "sin(u)*cos(v)^3",
        ];
        for text in cases {
            let e = parse(text).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{text} printed as {e}");
        }
    }

    #[test]
    fn rational_constants_print_exactly() {
        let third = Expr::constant(Rational::from_ratio(1, 3));
        let e = Expr::u() * third;
        assert_eq!(e.to_string(), "u*(1/3)");
        assert_eq!(Expr::constant(Rational::from_ratio(-3, 8)).to_string(), "-0.375");
        let value = parse(&e.to_string()).unwrap().eval_scalar(&[3.0, 0.0]).unwrap();
        assert!((value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn substitution_shares_subtrees() {
        let e = parse("u*u + v").unwrap();
        let x = parse("t + 1").unwrap();
        let s = e.substitute(&[Some(x.clone()), None, None]);
        assert_eq!(s.to_string(), "(t + 1)*(t + 1) + v");
        if let Node::Add(prod, _) = s.node() {
            if let Node::Mul(a, b) = prod.node() {
                assert_eq!(a.key(), b.key());
            }
        }
        assert_eq!(s.vars(), vec![Var::V, Var::T]);
    }
}
