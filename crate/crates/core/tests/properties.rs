//! Randomized properties: jet algebra, expression printing, the discriminant
//! against root counting, and invariances of the classifier and of singular
//! curvature.

use std::sync::Arc;

use approx::assert_relative_eq;
use frontsing_core::criteria::{classify_f64, delta_phi, ClassificationOptions};
use frontsing_core::exec::Execution;
use frontsing_core::expr::{parse, Expr, Func, Node};
use frontsing_core::jets::{base_point, coeff_count, exponents, Jet};
use frontsing_core::oracle::{cubic_root_count, transform_front, CatalogEntry, DiffeoPair, NormalTransport};
use frontsing_core::scalar::ScalarMode;
use frontsing_core::singular::{singular_curvature, trace_singular_set, BranchCurve, ClosedBranch, Rect, TraceOptions};
use proptest::prelude::*;

const ORDER: usize = 4;

fn jet(base: &Arc<[f64]>, coeffs: &[f64]) -> Jet<f64> {
    let terms = coeffs.iter().enumerate().map(|(i, &c)| (exponents(2, i), c));
    Jet::from_terms(base.clone(), ORDER, terms).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, coeff_count(2, ORDER))
}

fn assert_jets_close(a: &Jet<f64>, b: &Jet<f64>, tol: f64) {
    for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
        assert!((x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())), "{x} vs {y}");
    }
}

/// Random expressions in `u` and `v` whose printed form parses back.
fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::u()),
        Just(Expr::v()),
        (-5i64..=5).prop_map(Expr::int),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| Expr::new(Node::Neg(a))),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| a.pow(n)),
            inner.clone().prop_map(|a| a.call(Func::Sin)),
            inner.prop_map(|a| a.call(Func::Exp)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_products_are_associative_and_distributive(a in coeffs(), b in coeffs(), c in coeffs()) {
        let base = base_point(&[0.3, -0.1]);
        let (a, b, c) = (jet(&base, &a), jet(&base, &b), jet(&base, &c));
        let left = a.try_mul(&b).unwrap().try_mul(&c).unwrap();
        let right = a.try_mul(&b.try_mul(&c).unwrap()).unwrap();
        assert_jets_close(&left, &right, 1e-12);
        let spread = a.try_mul(&b.try_add(&c).unwrap()).unwrap();
        let sum = a.try_mul(&b).unwrap().try_add(&a.try_mul(&c).unwrap()).unwrap();
        assert_jets_close(&spread, &sum, 1e-12);
    }

    #[test]
    fn division_undoes_multiplication(a in coeffs(), mut b in coeffs()) {
        let base = base_point(&[0.0, 0.0]);
        b[0] = if b[0] >= 0.0 { b[0] + 1.0 } else { b[0] - 1.0 };
        let (a, b) = (jet(&base, &a), jet(&base, &b));
        let back = a.try_mul(&b).unwrap().try_div(&b).unwrap();
        assert_jets_close(&back, &a, 1e-9);
    }

    #[test]
    fn jet_derivatives_match_finite_differences(u in -1.0..1.0f64, v in -1.0..1.0f64) {
        let e = parse("sin(u*v)+exp(u)*cos(v)-u^3*v/(2+v^2)").unwrap();
        let j = e.eval_jet(&base_point(&[u, v]), 2).unwrap();
        let f = |a: f64, b: f64| e.eval_scalar(&[a, b]).unwrap();
        let h = 1e-4;
        let fu = (f(u + h, v) - f(u - h, v)) / (2.0 * h);
        let fvv = (f(u, v + h) - 2.0 * f(u, v) + f(u, v - h)) / (h * h);
        let fuv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4.0 * h * h);
        assert_relative_eq!(j.derivative(&[1, 0, 0]).unwrap(), fu, epsilon = 1e-6);
        assert_relative_eq!(j.derivative(&[0, 2, 0]).unwrap(), fvv, epsilon = 1e-5);
        assert_relative_eq!(j.derivative(&[1, 1, 0]).unwrap(), fuv, epsilon = 1e-5);
    }

    #[test]
    fn printed_expressions_parse_back(e in expr(), u in -1.0..1.0f64, v in -1.0..1.0f64) {
        let text = e.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        let (x, y) = (e.eval_scalar(&[u, v]), back.eval_scalar(&[u, v]));
        if let (Ok(x), Ok(y)) = (x, y) {
            prop_assert!(x == y || (x.is_nan() && y.is_nan()));
        }
    }

    #[test]
    fn discriminant_sign_counts_real_roots(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64) {
        let dp = delta_phi(&(6.0 * a), &(2.0 * b), &(2.0 * c), &(6.0 * d));
        prop_assume!(dp.abs() > 1e-9);
        let n = cubic_root_count(a, b, c, d).unwrap();
        prop_assert_eq!(n, if dp < 0.0 { 3 } else { 1 });
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn verdicts_survive_random_equivalences(seed in any::<u64>(), entry in prop::sample::select(CatalogEntry::RANK_ZERO.to_vec())) {
        let opts = ClassificationOptions { mode: ScalarMode::Float, ..Default::default() };
        let germ = entry.germ();
        let base = classify_f64(&germ, &[0.0, 0.0], &opts).unwrap();
        let image = transform_front(&germ, &DiffeoPair::random(seed, 0, 2), NormalTransport::InverseTranspose).unwrap();
        let r = classify_f64(&image, &[0.0, 0.0], &opts).unwrap();
        prop_assert_eq!(r.verdict, base.verdict);
        prop_assert_eq!(r.hess_det.unwrap().signum(), base.hess_det.unwrap().signum());
    }

    #[test]
    fn singular_curvature_ignores_parameterization(a in prop_oneof![-3.0..-0.3f64, 0.3..3.0f64], t in 0.02..0.15f64) {
        let e = CatalogEntry::CurvedD4Plus;
        let germ = e.germ();
        let plus = ClosedBranch::parse("plus", "sqrt(3)*t", "t").unwrap();
        let scaled = ClosedBranch::parse("scaled", &format!("sqrt(3)*({a})*t"), &format!("({a})*t")).unwrap();
        let k0 = singular_curvature(&germ, &BranchCurve::Closed(&plus), t, 1e-8).unwrap().kappa;
        let k1 = singular_curvature(&germ, &BranchCurve::Closed(&scaled), t / a, 1e-8).unwrap().kappa;
        assert_relative_eq!(k0, k1, max_relative = 1e-10);
    }

    #[test]
    fn traced_cuspidal_edge_stays_on_the_edge(lo in -0.5..-0.05f64, hi in 0.05..0.5f64, grid in 5usize..40) {
        let germ = CatalogEntry::CuspidalEdge.germ();
        let rect = Rect::new(-0.4, 0.4, lo, hi).unwrap();
        let seq = trace_singular_set(&germ, rect, &TraceOptions { grid, exec: Execution::Sequential, ..Default::default() }).unwrap();
        let par = trace_singular_set(&germ, rect, &TraceOptions { grid, exec: Execution::Parallel, ..Default::default() }).unwrap();
        prop_assert_eq!(&seq, &par);
        prop_assert_eq!(seq.branches.len(), 1);
        prop_assert!(seq.branches[0].samples.iter().all(|s| s.point[1].abs() < 1e-10));
        assert_relative_eq!(seq.branches[0].length(), 0.8, epsilon = 1e-9);
    }
}
