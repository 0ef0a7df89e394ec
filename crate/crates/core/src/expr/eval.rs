use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::{Expr, Func, Node, Var};
use crate::jets::{Jet, JetError};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable '{0}' has no value")]
    UnboundVariable(&'static str),
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a non-positive value")]
    SqrtDomain,
    #[error("value is not finite")]
    NotFinite,
    #[error("result is not representable exactly ({0})")]
    NotExact(&'static str),
    #[error(transparent)]
    Jet(JetError),
}

impl From<JetError> for EvalError {
    fn from(e: JetError) -> Self {
        match e {
            JetError::ZeroConstant => EvalError::DivisionByZero,
            JetError::NegativeConstant => EvalError::SqrtDomain,
            JetError::NotExact(what) => EvalError::NotExact(what),
            other => EvalError::Jet(other),
        }
    }
}

trait Algebra {
    type Value: Clone;
    fn var(&self, v: Var) -> Result<Self::Value, EvalError>;
    fn constant(&self, q: &Rational) -> Result<Self::Value, EvalError>;
    fn neg(&self, a: &Self::Value) -> Result<Self::Value, EvalError>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, EvalError>;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, EvalError>;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, EvalError>;
    fn div(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, EvalError>;
    fn powi(&self, a: &Self::Value, n: u32) -> Result<Self::Value, EvalError>;
    fn call(&self, f: Func, a: &Self::Value) -> Result<Self::Value, EvalError>;
}

fn fold<A: Algebra>(
    e: &Expr,
    alg: &A,
    memo: &mut HashMap<usize, A::Value>,
) -> Result<A::Value, EvalError> {
    if let Some(v) = memo.get(&e.key()) {
        return Ok(v.clone());
    }
    let value = match e.node() {
        Node::Var(v) => alg.var(*v)?,
        Node::Const(q) => alg.constant(q)?,
        Node::Neg(a) => {
            let a = fold(a, alg, memo)?;
            alg.neg(&a)?
        }
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            let x = fold(a, alg, memo)?;
            let y = fold(b, alg, memo)?;
            match e.node() {
                Node::Add(..) => alg.add(&x, &y)?,
                Node::Sub(..) => alg.sub(&x, &y)?,
                Node::Mul(..) => alg.mul(&x, &y)?,
                _ => alg.div(&x, &y)?,
            }
        }
        Node::Pow(a, n) => {
            let a = fold(a, alg, memo)?;
            alg.powi(&a, *n)?
        }
        Node::Call(f, a) => {
            let a = fold(a, alg, memo)?;
            alg.call(*f, &a)?
        }
    };
    memo.insert(e.key(), value.clone());
    Ok(value)
}

struct Plain<'a>(&'a [f64]);

fn finite(x: f64) -> Result<f64, EvalError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(EvalError::NotFinite)
    }
}

impl Algebra for Plain<'_> {
    type Value = f64;
    fn var(&self, v: Var) -> Result<f64, EvalError> {
        self.0
            .get(v.index())
            .copied()
            .ok_or(EvalError::UnboundVariable(v.name()))
    }
    fn constant(&self, q: &Rational) -> Result<f64, EvalError> {
        Ok(f64::from_rational(q))
    }
    fn neg(&self, a: &f64) -> Result<f64, EvalError> {
        Ok(-a)
    }
    fn add(&self, a: &f64, b: &f64) -> Result<f64, EvalError> {
        finite(a + b)
    }
    fn sub(&self, a: &f64, b: &f64) -> Result<f64, EvalError> {
        finite(a - b)
    }
    fn mul(&self, a: &f64, b: &f64) -> Result<f64, EvalError> {
        finite(a * b)
    }
    fn div(&self, a: &f64, b: &f64) -> Result<f64, EvalError> {
        if *b == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        finite(a / b)
    }
    fn powi(&self, a: &f64, n: u32) -> Result<f64, EvalError> {
        finite(a.powi(n as i32))
    }
    fn call(&self, f: Func, a: &f64) -> Result<f64, EvalError> {
        match f {
            Func::Sqrt if *a < 0.0 => Err(EvalError::SqrtDomain),
            Func::Sqrt => Ok(f64::sqrt(*a)),
            Func::Sin => Ok(f64::sin(*a)),
            Func::Cos => Ok(f64::cos(*a)),
            Func::Exp => finite(f64::exp(*a)),
        }
    }
}

/// Jet-valued evaluation context: each variable is either bound to a jet or
/// defaults to the coordinate jet of the base point. Results are memoized
/// across calls, so expressions sharing subtrees are expanded once.
pub struct JetBindings<S: Scalar> {
    base: Arc<[S]>,
    order: usize,
    bound: [Option<Jet<S>>; 3],
    memo: HashMap<usize, Jet<S>>,
    // Keeps memoized expressions alive so their addresses stay unique.
    pinned: Vec<Expr>,
}

struct JetAlgebra<'a, S: Scalar> {
    base: &'a Arc<[S]>,
    order: usize,
    bound: &'a [Option<Jet<S>>; 3],
}

impl<S: Scalar> Algebra for JetAlgebra<'_, S> {
    type Value = Jet<S>;
    fn var(&self, v: Var) -> Result<Jet<S>, EvalError> {
        if let Some(j) = &self.bound[v.index()] {
            return Ok(j.truncate(self.order));
        }
        if v.index() >= self.base.len() {
            return Err(EvalError::UnboundVariable(v.name()));
        }
        Ok(Jet::variable(self.base.clone(), self.order, v.index())?)
    }
    fn constant(&self, q: &Rational) -> Result<Jet<S>, EvalError> {
        Ok(Jet::constant(self.base.clone(), self.order, S::from_rational(q))?)
    }
    fn neg(&self, a: &Jet<S>) -> Result<Jet<S>, EvalError> {
        Ok(a.neg())
    }
    fn add(&self, a: &Jet<S>, b: &Jet<S>) -> Result<Jet<S>, EvalError> {
        Ok(a.try_add(b)?)
    }
    fn sub(&self, a: &Jet<S>, b: &Jet<S>) -> Result<Jet<S>, EvalError> {
        Ok(a.try_sub(b)?)
    }
    fn mul(&self, a: &Jet<S>, b: &Jet<S>) -> Result<Jet<S>, EvalError> {
        Ok(a.try_mul(b)?)
    }
    fn div(&self, a: &Jet<S>, b: &Jet<S>) -> Result<Jet<S>, EvalError> {
        Ok(a.try_div(b)?)
    }
    fn powi(&self, a: &Jet<S>, n: u32) -> Result<Jet<S>, EvalError> {
        Ok(a.powi(n))
    }
    fn call(&self, f: Func, a: &Jet<S>) -> Result<Jet<S>, EvalError> {
        let r = match f {
            Func::Sqrt => a.sqrt().map_err(|e| match e {
                JetError::ZeroConstant => EvalError::SqrtDomain,
                other => other.into(),
            })?,
            Func::Sin => a.sin()?,
            Func::Cos => a.cos()?,
            Func::Exp => a.exp()?,
        };
        Ok(r)
    }
}

impl<S: Scalar> JetBindings<S> {
    pub fn new(base: Arc<[S]>, order: usize) -> Self {
        JetBindings {
            base,
            order,
            bound: [None, None, None],
            memo: HashMap::new(),
            pinned: Vec::new(),
        }
    }

    /// Binds a variable to a jet over the same base point; clears the memo.
    pub fn bind(mut self, var: Var, value: Jet<S>) -> Self {
        self.bound[var.index()] = Some(value);
        self.memo.clear();
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> &Arc<[S]> {
        &self.base
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Jet<S>, EvalError> {
        let alg = JetAlgebra {
            base: &self.base,
            order: self.order,
            bound: &self.bound,
        };
        self.pinned.push(e.clone());
        fold(e, &alg, &mut self.memo)
    }
}

impl Expr {
    /// Plain floating-point value at `point = (u, v, t)` (trailing
    /// coordinates may be omitted when unused).
    pub fn eval_scalar(&self, point: &[f64]) -> Result<f64, EvalError> {
        fold(self, &Plain(point), &mut HashMap::new())
    }

    /// Truncated Taylor expansion at `base`; the number of variables is
    /// `base.len()`.
    pub fn eval_jet<S: Scalar>(&self, base: &Arc<[S]>, order: usize) -> Result<Jet<S>, EvalError> {
        JetBindings::new(base.clone(), order).eval(self)
    }
}
