use nalgebra::{DMatrix, DVector};

use super::{tangent_cross, FrontError, FrontGerm};
use crate::jets::{coeff_count, exponents, index_of, series_div, sqrt_factor, Jet, JetError, JetVector, MAX_ORDER};
use crate::scalar::Scalar;

/// Relative tolerance for the factor-and-divide steps.
pub const FACTOR_TOL: f64 = 1e-10;

/// Values below this count as zero when fixing the sign of the normal.
const SIGN_TOL: f64 = 1e-12;

/// Recovers a unit normal from the map alone. With `w = cross(df)` and
/// `|w|^2 = mu^2` exactly, `nu = w / mu` is smooth whenever the germ is
/// frontal. The orientation is fixed so the first component of `nu(p)` that
/// is not zero is positive. Both returned jets have order `order`.
///
/// In floating point a failed factorization is retried with
/// [`normal_by_least_squares`]: close to the singular set the leading blocks
/// of `|w|^2` are too small to classify reliably, which the linear solve
/// does not need to do.
pub fn recover_normal<S: Scalar>(
    germ: &FrontGerm,
    point: &[S],
    order: usize,
) -> Result<(JetVector<S>, Jet<S>), FrontError> {
    match recover_by_factoring(germ, point, order) {
        Err(e @ FrontError::NotFrontal { .. }) if !S::EXACT => {
            let p: Vec<f64> = point.iter().map(Scalar::to_f64).collect();
            let Ok((nu, lam)) = normal_by_least_squares(germ, &p, order) else {
                return Err(e);
            };
            let back = |j: &Jet<f64>| j.map_scalar(|x| S::from_f64(*x).expect("float scalar"));
            let nu = JetVector::new(nu.components().iter().map(back).collect())?;
            Ok((nu, back(&lam)))
        }
        r => r,
    }
}

fn recover_by_factoring<S: Scalar>(
    germ: &FrontGerm,
    point: &[S],
    order: usize,
) -> Result<(JetVector<S>, Jet<S>), FrontError> {
    let not_frontal = |source: JetError| FrontError::NotFrontal { order, source };

    // The valuation of |w|^2 may exceed the requested order (it is 4 at a
    // D4 point), so probe with growing truncation until it shows up. The
    // zero test is relative to the largest coefficient, so the probe always
    // reaches the quadratic block: near a singular point the constant term
    // is rounding noise that would otherwise be compared with itself.
    let mut probe = (order + 1).max(3);
    let (mut w, val) = loop {
        let w = tangent_cross(&germ.map_jets(point, probe)?)?;
        let s = w.norm_sq();
        match s.valuation(FACTOR_TOL) {
            Some(val) => break (w, val),
            None if probe >= MAX_ORDER => {
                return Err(not_frontal(JetError::Vanishes(s.order())));
            }
            None => probe = (probe + 2).min(MAX_ORDER),
        }
    };
    if val % 2 == 1 {
        return Err(not_frontal(JetError::NotSquare { degree: val }));
    }
    let m = val / 2;

    // Dividing by mu (valuation m) costs m orders in both w and mu, so w is
    // needed to order `order + 2m`.
    let needed = order + 2 * m + 1;
    if needed > MAX_ORDER {
        return Err(not_frontal(JetError::OrderTooLarge(needed)));
    }
    if needed != probe {
        w = tangent_cross(&germ.map_jets(point, needed)?)?;
    }
    let mu = sqrt_factor(&w.norm_sq(), FACTOR_TOL).map_err(not_frontal)?.root;
    let comps = w
        .components()
        .iter()
        .map(|c| series_div(c, &mu, FACTOR_TOL).map(|q| q.truncate(order)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(not_frontal)?;
    let mut nu = JetVector::new(comps)?;

    let first = nu
        .value()
        .into_iter()
        .map(|c| c.to_f64())
        .find(|c| c.abs() > SIGN_TOL)
        .ok_or(not_frontal(JetError::ZeroConstant))?;
    if first < 0.0 {
        nu = nu.scale(&-S::one());
    }
    let lam = w.truncate(order).dot(&nu)?;
    Ok((nu, lam))
}

/// Extra degrees of the tangency equations beyond `order` in the
/// least-squares recovery; covers `|w|^2` of valuation up to 4.
const LSQ_EXTRA_DEGREES: usize = 5;

/// Unit normal from the linear conditions `<f_x, N> = 0` for every
/// coordinate `x` and `N_k = 1`, imposed up to degree
/// `order + LSQ_EXTRA_DEGREES` and solved in the least-squares sense;
/// `nu = N / |N|` with the same orientation rule as [`recover_normal`]. The
/// extra degrees pin down the low-order part of `N` where `df` drops rank.
/// Every `k` with an acceptable residual is tried and the one with the
/// smallest `|N(p)|` is kept, i.e. the largest `|nu_k(p)|`.
pub fn normal_by_least_squares(
    germ: &FrontGerm,
    point: &[f64],
    order: usize,
) -> Result<(JetVector<f64>, Jet<f64>), FrontError> {
    let not_frontal = |source: JetError| FrontError::NotFrontal { order, source };
    let top = (order + LSQ_EXTRA_DEGREES).min(MAX_ORDER);
    let f = germ.map_jets(point, top + 1)?;
    let n = germ.dim();
    let base = f.component(0).base().clone();
    let mons = coeff_count(n, top);
    let partials: Vec<JetVector<f64>> = (0..n).map(|x| f.partial(x)).collect();
    let scale = partials.iter().flat_map(|p| p.components()).map(Jet::sup_norm).fold(1.0, f64::max);

    // Unknowns: coefficient `b` of component `c` at column `c * mons + b`.
    let rows = (n + 1) * mons;
    let mut a = DMatrix::<f64>::zeros(rows, (n + 1) * mons);
    for (x, p) in partials.iter().enumerate() {
        for (c, comp) in p.components().iter().enumerate() {
            for (alpha, coef) in comp.terms() {
                if *coef == 0.0 {
                    continue;
                }
                for b in 0..mons {
                    let beta = exponents(n, b);
                    let sum: [u8; 3] = [0, 1, 2].map(|i| alpha[i] + beta[i]);
                    if sum.iter().map(|&d| d as usize).sum::<usize>() <= top {
                        a[(x * mons + index_of(n, &sum), c * mons + b)] += coef;
                    }
                }
            }
        }
    }

    let mut best: Option<(f64, DVector<f64>)> = None;
    for k in 0..=n {
        let mut a = a.clone();
        for b in 0..mons {
            a[(n * mons + b, k * mons + b)] = scale;
        }
        let mut rhs = DVector::<f64>::zeros(rows);
        rhs[n * mons] = scale;
        let svd = a.clone().svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max();
        let Ok(sol) = svd.solve(&rhs, cutoff) else { continue };
        let residual = (&a * &sol - &rhs).amax();
        if !(residual <= FACTOR_TOL * scale) {
            continue;
        }
        let at_point: f64 = (0..=n).map(|c| sol[c * mons].powi(2)).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(m, _)| at_point < *m) {
            best = Some((at_point, sol));
        }
    }
    let (_, sol) = best.ok_or(not_frontal(JetError::Vanishes(top)))?;
    let comps = (0..=n)
        .map(|c| Jet::from_terms(base.clone(), order, (0..coeff_count(n, order)).map(|b| (exponents(n, b), sol[c * mons + b]))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut nu = JetVector::new(comps)?.normalize().map_err(not_frontal)?;
    let first = nu.value().into_iter().find(|c| c.abs() > SIGN_TOL).ok_or(not_frontal(JetError::ZeroConstant))?;
    if first < 0.0 {
        nu = nu.scale(&-1.0);
    }
    let w = tangent_cross(&germ.map_jets(point, order + 1)?)?;
    let lam = w.truncate(order).dot(&nu)?;
    Ok((nu, lam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn graph_normal() {
        let g = FrontGerm::parse(2, &["u", "v", "u^2+v^2"], None, "").unwrap();
        let (nu, lam) = recover_normal(&g, &[q(0, 1), q(0, 1)], 3).unwrap();
        assert_eq!(nu.value(), vec![q(0, 1), q(0, 1), q(1, 1)]);
        assert_eq!(nu.component(0).coeff(&[1, 0, 0]), q(-2, 1));
        assert_eq!(lam.value(), q(1, 1));
        assert_eq!(lam.coeff(&[2, 0, 0]), q(2, 1));
    }

    #[test]
    fn cuspidal_edge_normal() {
        let g = FrontGerm::parse(2, &["u", "v^2", "v^3"], None, "").unwrap();
        let (nu, lam) = recover_normal(&g, &[q(0, 1), q(0, 1)], 3).unwrap();
        assert_eq!(nu.value(), vec![q(0, 1), q(0, 1), q(1, 1)]);
        assert_eq!(nu.component(1).coeff(&[0, 1, 0]), q(-3, 2));
        // lambda = |w| = 2v sqrt(1 + 9v^2/4)
        assert_eq!(lam.coeff(&[0, 1, 0]), q(2, 1));
        assert_eq!(lam.coeff(&[0, 3, 0]), q(9, 4));
        assert_eq!(lam.coeff(&[0, 2, 0]), q(0, 1));
    }

    #[test]
    fn d4_normal_matches_explicit() {
        let g = FrontGerm::parse(2, &["u*v", "u^2+3*v^2", "u^2*v+v^3"], None, "").unwrap();
        let origin = [q(0, 1), q(0, 1)];
        let (nu, lam) = recover_normal(&g, &origin, 4).unwrap();
        assert_eq!(nu.value(), vec![q(0, 1), q(0, 1), q(1, 1)]);
        assert_eq!(lam.coeff(&[2, 0, 0]), q(-2, 1));
        assert_eq!(lam.coeff(&[0, 2, 0]), q(6, 1));
        // Opposite orientation to (2u, v, -2)/delta.
        let delta = parse("sqrt(4*u^2+v^2+4)").unwrap();
        let base = crate::jets::base_point(&origin);
        let expected = parse("-2*u").unwrap().eval_jet(&base, 4).unwrap()
            .try_div(&delta.eval_jet(&base, 4).unwrap())
            .unwrap();
        assert_eq!(nu.component(0), &expected);
    }

    #[test]
    fn float_matches_exact() {
        let g = FrontGerm::parse(2, &["u*v", "u^2-3*v^2", "u^2*v-v^3"], None, "").unwrap();
        let (nu, lam) = recover_normal(&g, &[0.0, 0.0], 4).unwrap();
        let (nu_q, lam_q) = recover_normal(&g, &[q(0, 1), q(0, 1)], 4).unwrap();
        for (a, b) in lam.coeffs().iter().zip(lam_q.coeffs()) {
            assert!((a - b.to_f64()).abs() < 1e-9);
        }
        for (x, y) in nu.components().iter().zip(nu_q.components()) {
            for (a, b) in x.coeffs().iter().zip(y.coeffs()) {
                assert!((a - b.to_f64()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn non_frontal_is_rejected() {
        // Image of a Whitney umbrella: the tangent cross has no square root.
        let g = FrontGerm::parse(2, &["u", "u*v", "v^2"], None, "").unwrap();
        let err = recover_normal(&g, &[q(0, 1), q(0, 1)], 3).unwrap_err();
        assert!(matches!(err, FrontError::NotFrontal { .. }), "{err:?}");
        let flat = FrontGerm::parse(2, &["u", "0", "0"], None, "").unwrap();
        assert!(recover_normal(&flat, &[q(0, 1), q(0, 1)], 3).is_err());
    }

    fn close(a: &JetVector<f64>, b: &JetVector<f64>, tol: f64) -> bool {
        a.components()
            .iter()
            .zip(b.components())
            .all(|(x, y)| x.coeffs().iter().zip(y.coeffs()).all(|(p, q)| (p - q).abs() < tol))
    }

    #[test]
    fn least_squares_agrees_with_factoring() {
        let germs = [
            FrontGerm::parse(2, &["u*v", "u^2+3*v^2", "u^2*(1+v)+v^2*(3+v)"], None, "").unwrap(),
            FrontGerm::parse(2, &["u", "v^2", "v^3"], None, "").unwrap(),
            FrontGerm::parse(2, &["u", "v", "sin(u)*v"], None, "").unwrap(),
        ];
        for g in &germs {
            for p in [[0.0, 0.0], [0.1, -0.2]] {
                let (a, la) = recover_normal(g, &p, 3).unwrap();
                let (b, lb) = normal_by_least_squares(g, &p, 3).unwrap();
                assert!(close(&a, &b, 1e-8), "{p:?}");
                assert!(la.coeffs().iter().zip(lb.coeffs()).all(|(x, y)| (x - y).abs() < 1e-8));
            }
        }
    }

    #[test]
    fn near_the_singular_set() {
        // The cuspidal edge is singular along v = 0; the factorization can
        // not tell a tiny constant term of |w|^2 from noise.
        let g = FrontGerm::parse(2, &["u", "v^2", "v^3"], None, "").unwrap();
        let exact = ["0", "-3*v/sqrt(9*v^2+4)", "2/sqrt(9*v^2+4)"].map(|e| parse(e).unwrap());
        for v in [1e-6, 1e-8, 1e-11] {
            let (nu, _) = recover_normal(&g, &[0.3, v], 2).unwrap();
            let base = crate::jets::base_point(&[0.3, v]);
            let comps = exact.iter().map(|e| e.eval_jet(&base, 2).unwrap()).collect();
            let mut expected = JetVector::new(comps).unwrap();
            if nu.value()[2] < 0.0 {
                expected = expected.scale(&-1.0);
            }
            assert!(close(&nu, &expected, 1e-6), "v = {v}");
        }
    }

    #[test]
    fn least_squares_rejects_non_frontal() {
        let g = FrontGerm::parse(2, &["u", "u*v", "v^2"], None, "").unwrap();
        assert!(normal_by_least_squares(&g, &[0.0, 0.0], 3).is_err());
        assert!(recover_normal(&g, &[0.0, 0.0], 3).is_err());
    }
}
