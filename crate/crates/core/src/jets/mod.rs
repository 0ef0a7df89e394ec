//! Truncated multivariate Taylor series ("jets") in one to three variables.
//!
//! Coefficients are stored densely in graded order: all monomials of degree
//! 0, then degree 1, and so on. Inside a degree block monomials run in
//! lexicographically decreasing order, so the first nonzero entry of a
//! block is its leading term. The index of a monomial does not depend on
//! the truncation order, which makes truncation a prefix operation.

mod factor;
mod series;
mod vector;

use std::sync::{Arc, OnceLock};

use num_traits::Zero;
use thiserror::Error;

use crate::scalar::Scalar;

pub use factor::{series_div, sqrt_factor, SqrtFactor};
pub use vector::{cross, JetVector};

/// Largest truncation order the basis tables are built for.
pub const MAX_ORDER: usize = 16;
pub const MAX_VARS: usize = 3;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 4;

/// Exponent vector; unused trailing slots stay zero.
pub type MultiIndex = [u8; MAX_VARS];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jets have different numbers of variables ({0} vs {1})")]
    VarsMismatch(usize, usize),
    #[error("jets are expanded at different base points")]
    BaseMismatch,
    #[error("unsupported number of variables: {0}")]
    BadVars(usize),
    #[error("truncation order {0} exceeds the supported maximum {MAX_ORDER}")]
    OrderTooLarge(usize),
    #[error("multi-index of degree {degree} exceeds truncation order {order}")]
    OrderExceeded { degree: usize, order: usize },
    #[error("constant term is zero")]
    ZeroConstant,
    #[error("constant term is negative")]
    NegativeConstant,
    #[error("result is not representable exactly ({0})")]
    NotExact(&'static str),
    #[error("lowest-order part (degree {degree}) is not a perfect square")]
    NotSquare { degree: usize },
    #[error("series is not divisible (residual at degree {degree})")]
    NotDivisible { degree: usize },
    #[error("series vanishes up to truncation order {0}")]
    Vanishes(usize),
    #[error("jet vectors have inconsistent lengths")]
    LengthMismatch,
}

/// Number of monomials of degree strictly less than `degree`.
fn block_offset(nvars: usize, degree: usize) -> usize {
    match nvars {
        1 => degree,
        2 => degree * (degree + 1) / 2,
        3 => degree * (degree + 1) * (degree + 2) / 6,
        _ => unreachable!("nvars validated at construction"),
    }
}

/// Number of coefficients of a jet of the given order.
pub fn coeff_count(nvars: usize, order: usize) -> usize {
    block_offset(nvars, order + 1)
}

fn degree_of(alpha: &MultiIndex) -> usize {
    alpha.iter().map(|&a| a as usize).sum()
}

/// Position of a monomial in the graded layout.
pub fn index_of(nvars: usize, alpha: &MultiIndex) -> usize {
    let d = degree_of(alpha);
    let within = match nvars {
        1 => 0,
        2 => alpha[1] as usize,
        3 => {
            let s = alpha[1] as usize + alpha[2] as usize;
            s * (s + 1) / 2 + alpha[2] as usize
        }
        _ => unreachable!("nvars validated at construction"),
    };
    block_offset(nvars, d) + within
}

struct Tables {
    exps: Vec<MultiIndex>,
    /// `mul[order][i]` lists `(j, k)` with `x^i * x^j = x^k`, degree <= order.
    mul: Vec<Vec<Vec<(u16, u16)>>>,
}

fn build_tables(nvars: usize) -> Tables {
    let total = coeff_count(nvars, MAX_ORDER);
    let mut exps = vec![[0u8; MAX_VARS]; total];
    for d in 0..=MAX_ORDER {
        match nvars {
            1 => exps[block_offset(1, d)] = [d as u8, 0, 0],
            2 => {
                for a1 in 0..=d {
                    let alpha = [(d - a1) as u8, a1 as u8, 0];
                    exps[index_of(2, &alpha)] = alpha;
                }
            }
            _ => {
                for s in 0..=d {
                    for a2 in 0..=s {
                        let alpha = [(d - s) as u8, (s - a2) as u8, a2 as u8];
                        exps[index_of(3, &alpha)] = alpha;
                    }
                }
            }
        }
    }
    let degrees: Vec<usize> = exps.iter().map(degree_of).collect();
    let mut mul = Vec::with_capacity(MAX_ORDER + 1);
    for order in 0..=MAX_ORDER {
        let n = coeff_count(nvars, order);
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::new();
            for j in 0..coeff_count(nvars, order - degrees[i]) {
                let mut sum = exps[i];
                for v in 0..MAX_VARS {
                    sum[v] += exps[j][v];
                }
                row.push((j as u16, index_of(nvars, &sum) as u16));
            }
            rows.push(row);
        }
        mul.push(rows);
    }
    Tables { exps, mul }
}

fn tables(nvars: usize) -> &'static Tables {
    static CACHE: [OnceLock<Tables>; MAX_VARS] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[nvars - 1].get_or_init(|| build_tables(nvars))
}

/// Exponent vector of the coefficient at `index`.
pub fn exponents(nvars: usize, index: usize) -> MultiIndex {
    tables(nvars).exps[index]
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// A truncated Taylor polynomial centred at `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S> {
    nvars: usize,
    order: usize,
    base: Arc<[S]>,
    coeffs: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    fn check_shape(nvars: usize, order: usize) -> Result<(), JetError> {
        if !(1..=MAX_VARS).contains(&nvars) {
            return Err(JetError::BadVars(nvars));
        }
        if order > MAX_ORDER {
            return Err(JetError::OrderTooLarge(order));
        }
        Ok(())
    }

    /// The zero jet at `base`; the number of variables is `base.len()`.
    pub fn zero(base: Arc<[S]>, order: usize) -> Result<Self, JetError> {
        let nvars = base.len();
        Self::check_shape(nvars, order)?;
        Ok(Jet {
            nvars,
            order,
            base,
            coeffs: vec![S::zero(); coeff_count(nvars, order)],
        })
    }

    pub fn constant(base: Arc<[S]>, order: usize, value: S) -> Result<Self, JetError> {
        let mut jet = Self::zero(base, order)?;
        jet.coeffs[0] = value;
        Ok(jet)
    }

    /// The coordinate function `x_var`, i.e. `base[var] + (x_var - base[var])`.
    pub fn variable(base: Arc<[S]>, order: usize, var: usize) -> Result<Self, JetError> {
        let value = base
            .get(var)
            .cloned()
            .ok_or(JetError::BadVars(var + 1))?;
        let mut jet = Self::constant(base, order, value)?;
        if order >= 1 {
            let mut alpha = [0u8; MAX_VARS];
            alpha[var] = 1;
            jet.coeffs[index_of(jet.nvars, &alpha)] = S::one();
        }
        Ok(jet)
    }

    /// Builds a jet from `(multi-index, coefficient)` pairs; repeated
    /// indices accumulate and terms above `order` are dropped.
    pub fn from_terms(
        base: Arc<[S]>,
        order: usize,
        terms: impl IntoIterator<Item = (MultiIndex, S)>,
    ) -> Result<Self, JetError> {
        let mut jet = Self::zero(base, order)?;
        for (alpha, c) in terms {
            if degree_of(&alpha) <= order {
                let i = index_of(jet.nvars, &alpha);
                jet.coeffs[i] = jet.coeffs[i].clone() + c;
            }
        }
        Ok(jet)
    }

    pub(crate) fn from_raw(nvars: usize, order: usize, base: Arc<[S]>, coeffs: Vec<S>) -> Self {
        debug_assert_eq!(coeffs.len(), coeff_count(nvars, order));
        Jet {
            nvars,
            order,
            base,
            coeffs,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> &Arc<[S]> {
        &self.base
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Iterates `(multi-index, coefficient)` over every stored coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, &S)> + '_ {
        let t = tables(self.nvars);
        self.coeffs.iter().enumerate().map(move |(i, c)| (t.exps[i], c))
    }

    /// Coefficient of `x^alpha`; zero above the truncation order.
    pub fn coeff(&self, alpha: &MultiIndex) -> S {
        if degree_of(alpha) > self.order {
            return S::zero();
        }
        self.coeffs[index_of(self.nvars, alpha)].clone()
    }

    pub fn value(&self) -> S {
        self.coeffs[0].clone()
    }

    /// Coefficients of the homogeneous part of the given degree.
    pub fn block(&self, degree: usize) -> &[S] {
        &self.coeffs[block_offset(self.nvars, degree)..block_offset(self.nvars, degree + 1)]
    }

    pub(crate) fn block_mut(&mut self, degree: usize) -> &mut [S] {
        let (lo, hi) = (
            block_offset(self.nvars, degree),
            block_offset(self.nvars, degree + 1),
        );
        &mut self.coeffs[lo..hi]
    }

    /// `∂^alpha a(base) = alpha! · coeff(alpha)`.
    pub fn derivative(&self, alpha: &MultiIndex) -> Result<S, JetError> {
        let degree = degree_of(alpha);
        if degree > self.order {
            return Err(JetError::OrderExceeded {
                degree,
                order: self.order,
            });
        }
        let weight: i64 = alpha.iter().map(|&a| factorial(a as usize)).product();
        Ok(S::from_i64(weight) * self.coeffs[index_of(self.nvars, alpha)].clone())
    }

    /// Partial derivative in variable `var`; the result has one order less.
    pub fn partial(&self, var: usize) -> Self {
        assert!(var < self.nvars, "variable {var} out of range");
        let order = self.order.saturating_sub(1);
        let n = coeff_count(self.nvars, order);
        let t = tables(self.nvars);
        let coeffs = (0..n)
            .map(|i| {
                if self.order == 0 {
                    return S::zero();
                }
                let mut alpha = t.exps[i];
                alpha[var] += 1;
                S::from_i64(alpha[var] as i64) * self.coeffs[index_of(self.nvars, &alpha)].clone()
            })
            .collect();
        Jet::from_raw(self.nvars, order, self.base.clone(), coeffs)
    }

    /// Directional derivative along a constant vector field.
    pub fn directional(&self, direction: &[S]) -> Self {
        let mut out = Jet::from_raw(
            self.nvars,
            self.order.saturating_sub(1),
            self.base.clone(),
            vec![S::zero(); coeff_count(self.nvars, self.order.saturating_sub(1))],
        );
        for (var, w) in direction.iter().enumerate().take(self.nvars) {
            if w.is_zero() {
                continue;
            }
            let p = self.partial(var);
            for (o, c) in out.coeffs.iter_mut().zip(p.coeffs) {
                *o = o.clone() + w.clone() * c;
            }
        }
        out
    }

    /// Drops every term above `order` (no-op when already lower).
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet::from_raw(
            self.nvars,
            order,
            self.base.clone(),
            self.coeffs[..coeff_count(self.nvars, order)].to_vec(),
        )
    }

    /// Pads with zero coefficients up to `order`. Only meaningful when the
    /// caller knows the missing terms do not influence the result it needs.
    pub fn zero_extend(&self, order: usize) -> Result<Self, JetError> {
        Self::check_shape(self.nvars, order)?;
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(coeff_count(self.nvars, order.max(self.order)), S::zero());
        Ok(Jet::from_raw(
            self.nvars,
            order.max(self.order),
            self.base.clone(),
            coeffs,
        ))
    }

    fn compatible(&self, other: &Self) -> Result<(), JetError> {
        if self.nvars != other.nvars {
            return Err(JetError::VarsMismatch(self.nvars, other.nvars));
        }
        if !Arc::ptr_eq(&self.base, &other.base) && self.base != other.base {
            return Err(JetError::BaseMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, JetError> {
        self.compatible(other)?;
        let order = self.order.min(other.order);
        let coeffs = self.coeffs[..coeff_count(self.nvars, order)]
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(Jet::from_raw(self.nvars, order, self.base.clone(), coeffs))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, JetError> {
        self.compatible(other)?;
        let order = self.order.min(other.order);
        let coeffs = self.coeffs[..coeff_count(self.nvars, order)]
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Ok(Jet::from_raw(self.nvars, order, self.base.clone(), coeffs))
    }

    /// Truncated Cauchy product.
    pub fn try_mul(&self, other: &Self) -> Result<Self, JetError> {
        self.compatible(other)?;
        let order = self.order.min(other.order);
        let t = tables(self.nvars);
        let n = coeff_count(self.nvars, order);
        let mut coeffs = vec![S::zero(); n];
        for (i, row) in t.mul[order].iter().enumerate() {
            let a = &self.coeffs[i];
            if a.is_zero() {
                continue;
            }
            for &(j, k) in row {
                let b = &other.coeffs[j as usize];
                if b.is_zero() {
                    continue;
                }
                let k = k as usize;
                coeffs[k] = coeffs[k].clone() + a.clone() * b.clone();
            }
        }
        Ok(Jet::from_raw(self.nvars, order, self.base.clone(), coeffs))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, JetError> {
        self.try_mul(&other.recip()?)
    }

    pub fn scale(&self, factor: &S) -> Self {
        Jet::from_raw(
            self.nvars,
            self.order,
            self.base.clone(),
            self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect(),
        )
    }

    pub fn add_scalar(&self, value: &S) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].clone() + value.clone();
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, exponent: u32) -> Self {
        let mut result = Jet::from_raw(
            self.nvars,
            self.order,
            self.base.clone(),
            vec![S::zero(); self.coeffs.len()],
        );
        result.coeffs[0] = S::one();
        let mut square = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = result.try_mul(&square).expect("same base");
            }
            e >>= 1;
            if e > 0 {
                square = square.try_mul(&square).expect("same base");
            }
        }
        result
    }

    /// Evaluates the truncated polynomial at `base + offset`.
    pub fn eval_offset(&self, offset: &[S]) -> S {
        let t = tables(self.nvars);
        let mut total = S::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut term = c.clone();
            for (v, x) in offset.iter().enumerate().take(self.nvars) {
                for _ in 0..t.exps[i][v] {
                    term = term * x.clone();
                }
            }
            total = total + term;
        }
        total
    }

    /// Largest coefficient magnitude, as `f64`.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Lowest degree with a non-negligible coefficient, if any.
    pub fn valuation(&self, rel_tol: f64) -> Option<usize> {
        let tol = rel_tol * self.sup_norm();
        (0..=self.order).find(|&d| self.block(d).iter().any(|c| !c.is_negligible(tol)))
    }

    /// True when all coefficients of degree `<= degree` are negligible.
    pub fn vanishes_to(&self, degree: usize, tol: f64) -> bool {
        (0..=degree.min(self.order)).all(|d| self.block(d).iter().all(|c| c.is_negligible(tol)))
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Jet<T> {
        let base: Arc<[T]> = self.base.iter().map(&f).collect();
        Jet::from_raw(
            self.nvars,
            self.order,
            base,
            self.coeffs.iter().map(f).collect(),
        )
    }

    pub fn to_f64(&self) -> Jet<f64> {
        self.map_scalar(|c| c.to_f64())
    }
}

impl<S: Scalar> Jet<S> {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn one_like(&self) -> Self {
        let mut out = Jet::from_raw(
            self.nvars,
            self.order,
            self.base.clone(),
            vec![S::zero(); self.coeffs.len()],
        );
        out.coeffs[0] = S::one();
        out
    }
}

/// Adds `scale · a · b` into `out`, where `a`, `b`, `out` are homogeneous
/// blocks of degrees `da`, `db`, `da + db`.
pub(crate) fn hom_mul_acc<S: Scalar>(
    nvars: usize,
    a: &[S],
    da: usize,
    b: &[S],
    db: usize,
    out: &mut [S],
    scale: &S,
) {
    let t = tables(nvars);
    let (oa, ob, oo) = (
        block_offset(nvars, da),
        block_offset(nvars, db),
        block_offset(nvars, da + db),
    );
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        let ea = t.exps[oa + i];
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            let eb = t.exps[ob + j];
            let sum = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
            let k = index_of(nvars, &sum) - oo;
            out[k] = out[k].clone() + scale.clone() * ai.clone() * bj.clone();
        }
    }
}

pub(crate) fn block_exponents(nvars: usize, degree: usize, i: usize) -> MultiIndex {
    tables(nvars).exps[block_offset(nvars, degree) + i]
}

pub(crate) fn block_index(nvars: usize, alpha: &MultiIndex) -> usize {
    index_of(nvars, alpha) - block_offset(nvars, degree_of(alpha))
}

pub(crate) fn block_len(nvars: usize, degree: usize) -> usize {
    block_offset(nvars, degree + 1) - block_offset(nvars, degree)
}

/// Convenience: a shared base point.
pub fn base_point<S: Scalar>(coords: &[S]) -> Arc<[S]> {
    coords.to_vec().into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn origin2() -> Arc<[Rational]> {
        base_point(&[q(0), q(0)])
    }

    #[test]
    fn layout_matches_formula() {
        for nvars in 1..=3 {
            for i in 0..coeff_count(nvars, 6) {
                assert_eq!(index_of(nvars, &exponents(nvars, i)), i);
            }
        }
        assert_eq!(coeff_count(3, 4), 35);
        assert_eq!(coeff_count(2, 4), 15);
    }

    #[test]
    fn blocks_are_lex_descending() {
        let e: Vec<_> = (0..3).map(|i| block_exponents(2, 2, i)).collect();
        assert_eq!(e, vec![[2, 0, 0], [1, 1, 0], [0, 2, 0]]);
        let e: Vec<_> = (0..6).map(|i| block_exponents(3, 2, i)).collect();
        assert_eq!(
            e,
            vec![[2, 0, 0], [1, 1, 0], [1, 0, 1], [0, 2, 0], [0, 1, 1], [0, 0, 2]]
        );
    }

    #[test]
    fn add_and_mul_basics() {
        let b = origin2();
        let u = Jet::variable(b.clone(), 4, 0).unwrap();
        let v = Jet::variable(b.clone(), 4, 1).unwrap();
        let s = u.try_add(&v).unwrap();
        assert_eq!(s.coeff(&[1, 0, 0]), q(1));
        assert_eq!(s.coeff(&[0, 1, 0]), q(1));
        assert_eq!(s.coeff(&[0, 0, 0]), q(0));
        let zero = Jet::zero(b.clone(), 4).unwrap();
        assert_eq!(u.try_add(&zero).unwrap(), u);

        let uv = u.try_mul(&v).unwrap();
        assert_eq!(uv.coeff(&[1, 1, 0]), q(1));
        let diff = u.try_sub(&v).unwrap();
        let prod = s.try_mul(&diff).unwrap();
        assert_eq!(prod.coeff(&[2, 0, 0]), q(1));
        assert_eq!(prod.coeff(&[0, 2, 0]), q(-1));
        assert_eq!(prod.coeff(&[1, 1, 0]), q(0));

        let u2v = u.powi(2).try_mul(&v).unwrap();
        assert_eq!(u2v.coeff(&[2, 1, 0]), q(1));
        let u2v_low = u.truncate(2).powi(2).try_mul(&v.truncate(2)).unwrap();
        assert!(u2v_low.is_zero());
    }

    #[test]
    fn normal_form_component_sum() {
        let b = origin2();
        let u = Jet::variable(b.clone(), 4, 0).unwrap();
        let v = Jet::variable(b, 4, 1).unwrap();
        let sum = u.powi(2).try_add(&v.powi(2).scale(&q(3))).unwrap();
        assert_eq!(sum.coeff(&[2, 0, 0]), q(1));
        assert_eq!(sum.coeff(&[0, 2, 0]), q(3));
        assert_eq!(sum.coeffs().iter().filter(|c| !c.is_zero()).count(), 2);
    }

    #[test]
    fn derivative_uses_factorials() {
        let b = origin2();
        let u = Jet::variable(b.clone(), 4, 0).unwrap();
        let v = Jet::variable(b.clone(), 4, 1).unwrap();
        let a = u.powi(2).try_mul(&v).unwrap();
        assert_eq!(a.derivative(&[2, 1, 0]).unwrap(), q(2));
        let c = Jet::constant(b, 4, q(7)).unwrap();
        assert_eq!(c.derivative(&[0, 0, 0]).unwrap(), q(7));
        assert!(matches!(
            c.derivative(&[3, 2, 0]),
            Err(JetError::OrderExceeded { degree: 5, order: 4 })
        ));
    }

    #[test]
    fn mismatched_operands_are_rejected() {
        let a = Jet::variable(origin2(), 3, 0).unwrap();
        let b = Jet::variable(base_point(&[q(1), q(0)]), 3, 0).unwrap();
        assert_eq!(a.try_add(&b), Err(JetError::BaseMismatch));
        let c = Jet::variable(base_point(&[q(0), q(0), q(0)]), 3, 0).unwrap();
        assert_eq!(a.try_mul(&c), Err(JetError::VarsMismatch(2, 3)));
    }

    #[test]
    fn partial_lowers_order() {
        let b = origin2();
        let u = Jet::variable(b.clone(), 4, 0).unwrap();
        let v = Jet::variable(b, 4, 1).unwrap();
        let a = u.powi(3).try_mul(&v).unwrap();
        let du = a.partial(0);
        assert_eq!(du.order(), 3);
        assert_eq!(du.coeff(&[2, 1, 0]), q(3));
    }

    #[test]
    fn result_order_is_minimum() {
        let b = origin2();
        let u = Jet::variable(b.clone(), 4, 0).unwrap();
        let v = Jet::variable(b, 2, 1).unwrap();
        assert_eq!(u.try_mul(&v).unwrap().order(), 2);
        assert_eq!(u.try_add(&v).unwrap().order(), 2);
    }
}
