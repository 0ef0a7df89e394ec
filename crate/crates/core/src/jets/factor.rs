//! Division and square roots of power series, computed one homogeneous block
//! at a time with lexicographic leading terms.

use super::{block_exponents, block_index, block_len, hom_mul_acc, Jet, JetError, MultiIndex};
use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

/// A square root `root` of a series, `root^2 = s` up to the order of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtFactor<S> {
    pub root: Jet<S>,
    /// Degree of the lowest nonzero block of `root`.
    pub valuation: usize,
    /// True when `root` vanishes at the base point, so the sign was fixed
    /// by the leading coefficient of its lowest block rather than by its value.
    pub sign_ambiguous: bool,
}

fn lead<S: Scalar>(block: &[S], tol: f64) -> Option<usize> {
    block.iter().position(|c| !c.is_negligible(tol))
}

fn block_sup<S: Scalar>(block: &[S]) -> f64 {
    block.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
}

fn exp_diff(a: &MultiIndex, b: &MultiIndex) -> Option<MultiIndex> {
    let mut out = [0u8; 3];
    for v in 0..3 {
        out[v] = a[v].checked_sub(b[v])?;
    }
    Some(out)
}

fn exp_sum(a: &MultiIndex, b: &MultiIndex) -> MultiIndex {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Exact quotient of homogeneous blocks `a` (degree `da`) by `b` (degree
/// `db`). Entries of the running remainder at most `tol` in magnitude count
/// as zero; `b`'s leading term is located relative to `b` itself.
pub(crate) fn hdiv<S: Scalar>(
    nvars: usize,
    a: &[S],
    da: usize,
    b: &[S],
    db: usize,
    tol: f64,
) -> Option<Vec<S>> {
    if da < db {
        return None;
    }
    if !S::EXACT {
        return hdiv_lsq(nvars, a, da, b, db, tol);
    }
    let lb = lead(b, 1e-12 * block_sup(b))?;
    let eb = block_exponents(nvars, db, lb);
    let dq = da - db;
    let mut q = vec![S::zero(); block_len(nvars, dq)];
    let mut r = a.to_vec();
    // The leading exponent of `r` strictly decreases every step.
    for _ in 0..=r.len() {
        let Some(lr) = lead(&r, tol) else {
            return Some(q);
        };
        let er = block_exponents(nvars, da, lr);
        let gamma = exp_diff(&er, &eb)?;
        let c = r[lr].clone() / b[lb].clone();
        let qi = block_index(nvars, &gamma);
        q[qi] = q[qi].clone() + c.clone();
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            let k = block_index(nvars, &exp_sum(&gamma, &block_exponents(nvars, db, j)));
            r[k] = r[k].clone() - c.clone() * bj.clone();
        }
        r[lr] = S::zero();
    }
    None
}

/// Float version of [`hdiv`]. Eliminating the lexicographic leading term
/// divides by one coefficient of `b` per step, which blows up rounding
/// errors when that coefficient is small against the others; solving
/// `b * q = a` in the least-squares sense over all coefficients does not.
fn hdiv_lsq<S: Scalar>(nvars: usize, a: &[S], da: usize, b: &[S], db: usize, tol: f64) -> Option<Vec<S>> {
    let dq = da - db;
    let (rows, cols) = (a.len(), block_len(nvars, dq));
    let mut m = DMatrix::<f64>::zeros(rows, cols);
    for qi in 0..cols {
        let gamma = block_exponents(nvars, dq, qi);
        for (j, bj) in b.iter().enumerate() {
            let k = block_index(nvars, &exp_sum(&gamma, &block_exponents(nvars, db, j)));
            m[(k, qi)] += bj.to_f64();
        }
    }
    let rhs = DVector::from_iterator(rows, a.iter().map(|x| x.to_f64()));
    let q = m.clone().svd(true, true).solve(&rhs, 1e-14).ok()?;
    let residual = (&rhs - &m * &q).amax();
    if !(residual <= tol) {
        return None;
    }
    q.iter().map(|&x| S::from_f64(x)).collect()
}

/// Homogeneous square root of `s` (degree `ds`) with positive leading
/// coefficient.
pub(crate) fn hsqrt<S: Scalar>(
    nvars: usize,
    s: &[S],
    ds: usize,
    tol: f64,
) -> Result<Vec<S>, JetError> {
    let not_square = JetError::NotSquare { degree: ds };
    if ds % 2 == 1 {
        return Err(not_square);
    }
    let dm = ds / 2;
    let ls = lead(s, tol).ok_or(not_square.clone())?;
    let es = block_exponents(nvars, ds, ls);
    if es.iter().any(|e| e % 2 == 1) || s[ls] < S::zero() {
        return Err(not_square);
    }
    let gamma = [es[0] / 2, es[1] / 2, es[2] / 2];
    let lm = block_index(nvars, &gamma);
    let mut mu = vec![S::zero(); block_len(nvars, dm)];
    mu[lm] = s[ls].sqrt().ok_or(JetError::NotExact("square root"))?;
    let two_lead = S::from_i64(2) * mu[lm].clone();
    for _ in 0..=mu.len() {
        let mut r = s.to_vec();
        hom_mul_acc(nvars, &mu, dm, &mu, dm, &mut r, &-S::one());
        r[ls] = S::zero();
        let Some(lr) = lead(&r, tol) else {
            return Ok(mu);
        };
        let delta = exp_diff(&block_exponents(nvars, ds, lr), &gamma).ok_or(not_square.clone())?;
        let di = block_index(nvars, &delta);
        if di <= lm {
            return Err(not_square);
        }
        mu[di] = mu[di].clone() + r[lr].clone() / two_lead.clone();
    }
    Err(not_square)
}

/// Factors `s = root^2` when the lowest block of `s` is a perfect square.
/// Zero tests use `rel_tol` relative to the largest coefficient of `s`.
pub fn sqrt_factor<S: Scalar>(s: &Jet<S>, rel_tol: f64) -> Result<SqrtFactor<S>, JetError> {
    let n = s.nvars();
    let order = s.order();
    let tol = rel_tol * s.sup_norm();
    let v = s.valuation(rel_tol).ok_or(JetError::Vanishes(order))?;
    if v % 2 == 1 {
        return Err(JetError::NotSquare { degree: v });
    }
    let m = v / 2;
    let root_order = order - m;
    let mut root = Jet::zero(s.base().clone(), root_order)?;
    root.block_mut(m).clone_from_slice(&hsqrt(n, s.block(v), v, tol)?);
    let two_lead: Vec<S> = root
        .block(m)
        .iter()
        .map(|c| S::from_i64(2) * c.clone())
        .collect();
    for k in 1..=order - 2 * m {
        let mut t = s.block(v + k).to_vec();
        for i in 1..k {
            let (a, b) = (root.block(m + i).to_vec(), root.block(m + k - i).to_vec());
            hom_mul_acc(n, &a, m + i, &b, m + k - i, &mut t, &-S::one());
        }
        let q = hdiv(n, &t, v + k, &two_lead, m, tol)
            .ok_or(JetError::NotDivisible { degree: v + k })?;
        root.block_mut(m + k).clone_from_slice(&q);
    }
    Ok(SqrtFactor {
        root,
        valuation: m,
        sign_ambiguous: m > 0,
    })
}

/// Quotient `a / b` for a divisor that may vanish at the base point.
/// The quotient has order `min(a.order, b.order) - valuation(b)`.
pub fn series_div<S: Scalar>(a: &Jet<S>, b: &Jet<S>, rel_tol: f64) -> Result<Jet<S>, JetError> {
    if a.nvars() != b.nvars() {
        return Err(JetError::VarsMismatch(a.nvars(), b.nvars()));
    }
    if a.base() != b.base() {
        return Err(JetError::BaseMismatch);
    }
    let n = a.nvars();
    let m = b.valuation(rel_tol).ok_or(JetError::Vanishes(b.order()))?;
    let top = a.order().min(b.order());
    if top < m {
        return Err(JetError::Vanishes(top));
    }
    let tol = rel_tol * (a.sup_norm() + b.sup_norm());
    for d in 0..m {
        if lead(a.block(d), tol).is_some() {
            return Err(JetError::NotDivisible { degree: d });
        }
    }
    let qorder = top - m;
    let mut q = Jet::zero(a.base().clone(), qorder)?;
    for d in 0..=qorder {
        let mut t = a.block(d + m).to_vec();
        for j in 1..=d {
            let (bj, qd) = (b.block(m + j).to_vec(), q.block(d - j).to_vec());
            hom_mul_acc(n, &bj, m + j, &qd, d - j, &mut t, &-S::one());
        }
        let qd = hdiv(n, &t, d + m, b.block(m), m, tol)
            .ok_or(JetError::NotDivisible { degree: d + m })?;
        q.block_mut(d).clone_from_slice(&qd);
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::jets::base_point;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn uv(order: usize) -> (Jet<Rational>, Jet<Rational>) {
        let b: Arc<[Rational]> = base_point(&[q(0), q(0)]);
        (
            Jet::variable(b.clone(), order, 0).unwrap(),
            Jet::variable(b, order, 1).unwrap(),
        )
    }

    #[test]
    fn constructed_square() {
        let (u, v) = uv(6);
        let p = u.powi(2).scale(&q(2)).try_sub(&v.powi(2).scale(&q(6))).unwrap();
        let s = p.powi(2);
        let f = sqrt_factor(&s, 0.0).unwrap();
        assert_eq!(f.valuation, 2);
        assert!(f.sign_ambiguous);
        assert_eq!(f.root.truncate(2), p.truncate(2));
        assert_eq!(f.root.try_mul(&f.root).unwrap(), s.truncate(f.root.order()));
    }

    #[test]
    fn square_of_linear_and_higher_terms() {
        let (u, v) = uv(5);
        let p = u
            .neg()
            .try_add(&u.try_mul(&v).unwrap().scale(&q(3)))
            .unwrap()
            .try_add(&v.powi(2))
            .unwrap()
            .try_add(&u.powi(3).scale(&q(-2)))
            .unwrap();
        let s = p.powi(2);
        let f = sqrt_factor(&s, 0.0).unwrap();
        assert_eq!(f.valuation, 1);
        // Leading coefficient is made positive, so the root is -p.
        assert_eq!(f.root, p.neg().truncate(4));
        let f = sqrt_factor(&u.powi(2), 0.0).unwrap();
        assert_eq!(f.root.truncate(1), u.truncate(1));
    }

    #[test]
    fn unit_constant_term_is_not_ambiguous() {
        let (u, v) = uv(4);
        let s = u.try_add(&v).unwrap().add_scalar(&q(1)).powi(2);
        let f = sqrt_factor(&s, 0.0).unwrap();
        assert!(!f.sign_ambiguous);
        assert_eq!(f.root, u.try_add(&v).unwrap().add_scalar(&q(1)));
    }

    #[test]
    fn non_squares_are_rejected() {
        let (u, v) = uv(4);
        let s = u.try_mul(&v).unwrap();
        assert_eq!(sqrt_factor(&s, 0.0), Err(JetError::NotSquare { degree: 2 }));
        let s = u.powi(3);
        assert_eq!(sqrt_factor(&s, 0.0), Err(JetError::NotSquare { degree: 3 }));
        let s = u.powi(2).try_add(&v.powi(2)).unwrap();
        assert!(sqrt_factor(&s, 0.0).is_err());
        // u^2 + v^3 is not a square past its lowest block
        let s = u.powi(2).try_add(&v.powi(3)).unwrap();
        assert_eq!(sqrt_factor(&s, 0.0), Err(JetError::NotDivisible { degree: 3 }));
        let zero = u.scale(&q(0));
        assert_eq!(sqrt_factor(&zero, 0.0), Err(JetError::Vanishes(4)));
    }

    #[test]
    fn division_by_vanishing_divisor() {
        let (u, v) = uv(5);
        let b = u.powi(2).try_sub(&v.powi(2).scale(&q(3))).unwrap();
        let c = u.try_add(&v.powi(2)).unwrap().add_scalar(&q(2));
        let a = b.try_mul(&c).unwrap();
        let quotient = series_div(&a, &b, 0.0).unwrap();
        assert_eq!(quotient.order(), 3);
        assert_eq!(quotient, c.truncate(3));
        assert_eq!(
            series_div(&u, &b, 0.0),
            Err(JetError::NotDivisible { degree: 1 })
        );
    }

    #[test]
    fn float_division_tolerates_rounding() {
        let b: Arc<[f64]> = base_point(&[0.0, 0.0]);
        let u = Jet::variable(b.clone(), 6, 0).unwrap();
        let v = Jet::variable(b, 6, 1).unwrap();
        let d = u.powi(2).scale(&0.3).try_add(&u.try_mul(&v).unwrap().scale(&1.7)).unwrap();
        let c = v.scale(&0.1).add_scalar(&(1.0 / 3.0)).sin().unwrap();
        let a = d.try_mul(&c).unwrap();
        let quotient = series_div(&a, &d, 1e-12).unwrap();
        for (x, y) in quotient.coeffs().iter().zip(c.coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
        let sq = sqrt_factor(&a.powi(2), 1e-12).unwrap();
        let back = sq.root.try_mul(&sq.root).unwrap();
        for (x, y) in back.coeffs().iter().zip(a.powi(2).coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
