//! Ground truth for the classifier: a catalog of normal forms, explicit
//! discriminant parameterizations, random right-left equivalences, and a
//! root-counting oracle for binary cubics.

mod diffeo;
mod suites;

use nalgebra::{DMatrix, Schur};
use serde::{Deserialize, Serialize};
use thiserror::Error;


use crate::front::{FrontGerm, NormalSpec};
use crate::singular::ClosedBranch;

pub use diffeo::{transform_front, DiffeoPair, NormalTransport, Poly, PolyMap, MAX_DEGREE, MIN_LINEAR_DET};
pub use suites::{
    discriminant_suite, identity_suite, invariance_suite, random_cubic, Counterexample, SuiteSummary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CatalogEntry {
    CuspidalEdge,
    Swallowtail,
    D4Plus,
    D4Minus,
    FourDimD4Plus,
    FourDimD4Minus,
    /// A D4+ front whose singular set contains the lines `u = +-sqrt(3) v`
    /// exactly, with nonzero third-order curvature data.
    CurvedD4Plus,
}

const DELTA: &str = "sqrt(4*u^2+v^2+4)";

impl CatalogEntry {
    pub const ALL: [CatalogEntry; 7] = [
        CatalogEntry::CuspidalEdge,
        CatalogEntry::Swallowtail,
        CatalogEntry::D4Plus,
        CatalogEntry::D4Minus,
        CatalogEntry::FourDimD4Plus,
        CatalogEntry::FourDimD4Minus,
        CatalogEntry::CurvedD4Plus,
    ];

    /// The entries with `df = 0` at the origin.
    pub const RANK_ZERO: [CatalogEntry; 3] =
        [CatalogEntry::D4Plus, CatalogEntry::D4Minus, CatalogEntry::CurvedD4Plus];

    pub fn name(self) -> &'static str {
        match self {
            CatalogEntry::CuspidalEdge => "cuspidal-edge",
            CatalogEntry::Swallowtail => "swallowtail",
            CatalogEntry::D4Plus => "d4-plus",
            CatalogEntry::D4Minus => "d4-minus",
            CatalogEntry::FourDimD4Plus => "4d-d4-plus",
            CatalogEntry::FourDimD4Minus => "4d-d4-minus",
            CatalogEntry::CurvedD4Plus => "curved-d4-plus",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        CatalogEntry::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn dim(self) -> usize {
        match self {
            CatalogEntry::FourDimD4Plus | CatalogEntry::FourDimD4Minus => 3,
            _ => 2,
        }
    }

    /// Map and normal as expression text; `None` means automatic normal.
    pub fn sources(self) -> (Vec<String>, Option<Vec<String>>) {
        let d4_normal = || {
            Some(vec![
                format!("2*u/{DELTA}"),
                format!("v/{DELTA}"),
                format!("-2/{DELTA}"),
            ])
        };
        let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match self {
            CatalogEntry::CuspidalEdge => (own(&["u", "v^2", "v^3"]), None),
            CatalogEntry::Swallowtail => (own(&["u", "3*v^4+u*v^2", "4*v^3+2*u*v"]), None),
            CatalogEntry::D4Plus => (own(&["u*v", "u^2+3*v^2", "u^2*v+v^3"]), d4_normal()),
            CatalogEntry::D4Minus => (own(&["u*v", "u^2-3*v^2", "u^2*v-v^3"]), d4_normal()),
            CatalogEntry::FourDimD4Plus => (
                own(&["u*v", "u^2+2*t*v+3*v^2", "2*u^2*v+t*v^2+2*v^3", "t"]),
                None,
            ),
            CatalogEntry::FourDimD4Minus => (
                own(&["u*v", "u^2+2*t*v-3*v^2", "2*u^2*v+t*v^2-2*v^3", "t"]),
                None,
            ),
            CatalogEntry::CurvedD4Plus => (
                own(&["u*v", "u^2+3*v^2", "u^2*(1+v)+v^2*(3+v)"]),
                None,
            ),
        }
    }

    pub fn germ(self) -> FrontGerm {
        let (map, normal) = self.sources();
        let map: Vec<&str> = map.iter().map(String::as_str).collect();
        let normal: Option<Vec<&str>> = normal.as_ref().map(|n| n.iter().map(String::as_str).collect());
        FrontGerm::parse(self.dim(), &map, normal.as_deref(), self.name())
            .expect("catalog expressions are valid")
    }

    /// Known singular curves through the origin, in closed form.
    pub fn branches(self) -> Vec<ClosedBranch> {
        let branch = |name: &str, u: &str, v: &str| ClosedBranch::parse(name, u, v).expect("valid");
        match self {
            CatalogEntry::CuspidalEdge => vec![branch("edge", "t", "0")],
            CatalogEntry::D4Plus | CatalogEntry::CurvedD4Plus => vec![
                branch("plus", "sqrt(3)*t", "t"),
                branch("minus", "-sqrt(3)*t", "t"),
            ],
            _ => Vec::new(),
        }
    }
}

/// Point of the discriminant set of `u^3 + eps u v^2 + x u + y v + z`.
pub fn discriminant_v0(eps: i8, u: f64, v: f64) -> [f64; 3] {
    let e = f64::from(eps.signum());
    [
        -3.0 * u * u - e * v * v,
        -e * 2.0 * u * v,
        2.0 * u * u * u + e * 2.0 * u * v * v,
    ]
}

/// Point of the discriminant set of the four-parameter unfolding; the last
/// coordinate is `t` itself.
pub fn discriminant_v(eps: i8, u: f64, v: f64, t: f64) -> [f64; 4] {
    let e = f64::from(eps.signum());
    [
        -3.0 * u * u - e * v * v - 2.0 * u * t,
        -e * 2.0 * u * v,
        2.0 * u * u * u + u * u * t + e * 2.0 * u * v * v,
        t,
    ]
}

/// `discriminant_v0` as a front germ with automatic normal.
pub fn discriminant_v0_germ(eps: i8) -> FrontGerm {
    let s = if eps >= 0 { "" } else { "-" };
    let map = [
        format!("-3*u^2-{s}(v^2)"),
        format!("-{s}(2*u*v)"),
        format!("2*u^3+{s}(2*u*v^2)"),
    ];
    let map: Vec<&str> = map.iter().map(String::as_str).collect();
    let label = if eps >= 0 { "discriminant-v0-plus" } else { "discriminant-v0-minus" };
    FrontGerm::parse(2, &map, None, label).expect("valid")
}

/// `discriminant_v` as a germ `(u, v, t) -> R^4` with automatic normal.
pub fn discriminant_v_germ(eps: i8) -> FrontGerm {
    let s = if eps >= 0 { "" } else { "-" };
    let map = [
        format!("-3*u^2-{s}(v^2)-2*u*t"),
        format!("-{s}(2*u*v)"),
        format!("2*u^3+u^2*t+{s}(2*u*v^2)"),
        "t".to_string(),
    ];
    let map: Vec<&str> = map.iter().map(String::as_str).collect();
    let label = if eps >= 0 { "discriminant-v-plus" } else { "discriminant-v-minus" };
    FrontGerm::parse(3, &map, None, label).expect("valid")
}

/// Same map with the normal dropped, for comparing against recovery.
pub fn without_normal(germ: &FrontGerm) -> FrontGerm {
    germ.with_normal(NormalSpec::Auto).expect("same shape")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootCountError {
    #[error("all coefficients are zero")]
    ZeroPolynomial,
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

/// Iteration cap for the Schur decomposition; the unbounded variant can
/// cycle on companion matrices with repeated roots.
const SCHUR_MAX_ITER: usize = 10_000;

/// Relative separation below which two roots count as one.
const ROOT_MERGE_TOL: f64 = 1e-6;
/// Relative imaginary part below which a root counts as real.
const ROOT_REAL_TOL: f64 = 1e-7;

/// Number of distinct real linear factors of the binary cubic
/// `a u^3 + b u^2 v + c u v^2 + d v^3`, i.e. distinct real roots of
/// `a s^3 + b s^2 + c s + d` plus one for the root at infinity when `a = 0`.
pub fn cubic_root_count(a: f64, b: f64, c: f64, d: f64) -> Result<usize, RootCountError> {
    let coeffs = [a, b, c, d];
    let Some(lead) = coeffs.iter().position(|&x| x != 0.0) else {
        return Err(RootCountError::ZeroPolynomial);
    };
    let at_infinity = usize::from(lead > 0);
    let mut poly = &coeffs[lead..];
    // A root at zero is split off by hand: the nilpotent companion matrix
    // of `s^k` is where the Schur iteration stalls.
    let mut at_zero = 0;
    while poly.len() > 1 && poly[poly.len() - 1] == 0.0 {
        poly = &poly[..poly.len() - 1];
        at_zero = 1;
    }
    let degree = poly.len() - 1;
    if degree == 0 {
        return Ok(at_infinity + at_zero);
    }
    // Companion matrix of the monic polynomial.
    let companion = DMatrix::from_fn(degree, degree, |i, j| {
        if i == 0 {
            -poly[j + 1] / poly[0]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let roots = Schur::try_new(companion, f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(RootCountError::NoConvergence)?
        .complex_eigenvalues();
    let scale = 1.0 + roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut real: Vec<f64> = roots
        .iter()
        .filter(|z| z.im.abs() <= ROOT_REAL_TOL * scale)
        .map(|z| z.re)
        .collect();
    if at_zero == 1 {
        real.push(0.0);
    }
    real.sort_by(f64::total_cmp);
    real.dedup_by(|x, y| (*x - *y).abs() <= ROOT_MERGE_TOL * scale);
    Ok(real.len() + at_infinity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{classify, ClassificationOptions, Verdict};
    use crate::front::{sample_grid, validate_front};
    use crate::scalar::{Rational, Scalar};

    fn origin(n: usize) -> Vec<Rational> {
        vec![Rational::from_i64(0); n]
    }

    #[test]
    fn root_counts() {
        assert_eq!(cubic_root_count(1.0, 0.0, -1.0, 0.0), Ok(3));
        assert_eq!(cubic_root_count(1.0, 0.0, 1.0, 0.0), Ok(1));
        assert_eq!(cubic_root_count(1.0, 0.0, 0.0, 0.0), Ok(1));
        assert_eq!(cubic_root_count(1.0, -2.0, 1.0, 0.0), Ok(2));
        // v (u^2 - v^2): a root at infinity plus two finite ones
        assert_eq!(cubic_root_count(0.0, 1.0, 0.0, -1.0), Ok(3));
        assert_eq!(cubic_root_count(0.0, 0.0, 0.0, 2.0), Ok(1));
        // (s - 1)^2 (s + 2) and s^2 (s - 1)
        assert_eq!(cubic_root_count(1.0, 0.0, -3.0, 2.0), Ok(2));
        assert_eq!(cubic_root_count(1.0, -1.0, 0.0, 0.0), Ok(2));
        assert_eq!(cubic_root_count(0.0, 0.0, 0.0, 0.0), Err(RootCountError::ZeroPolynomial));
    }

    #[test]
    fn discriminant_points() {
        assert_eq!(discriminant_v0(1, 0.0, 0.0), [0.0, 0.0, 0.0]);
        assert_eq!(discriminant_v0(1, 1.0, 0.0), [-3.0, 0.0, 2.0]);
        assert_eq!(discriminant_v(-1, 1.0, 0.0, 0.0), [-3.0, 0.0, 2.0, 0.0]);
        let g = discriminant_v0_germ(-1);
        let val = g.map_jets(&[0.4, -0.3], 0).unwrap().value();
        let expected = discriminant_v0(-1, 0.4, -0.3);
        for (a, b) in val.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn catalog_entries_are_fronts() {
        for entry in CatalogEntry::ALL {
            let g = entry.germ();
            let center = vec![0.0; g.dim()];
            let per_axis = if g.dim() == 2 { 5 } else { 3 };
            let report = validate_front(&g, &sample_grid(&center, 0.1, per_axis), 1e-10);
            assert!(report.passed, "{}: {:?}", entry.name(), report.failures);
        }
    }

    #[test]
    fn catalog_verdicts() {
        let opts = ClassificationOptions::default();
        let verdict = |e: CatalogEntry| classify(&e.germ(), &origin(e.dim()), &opts).unwrap().verdict;
        assert_eq!(verdict(CatalogEntry::D4Plus), Verdict::D4Plus);
        assert_eq!(verdict(CatalogEntry::D4Minus), Verdict::D4Minus);
        assert_eq!(verdict(CatalogEntry::CurvedD4Plus), Verdict::D4Plus);
        assert_eq!(verdict(CatalogEntry::FourDimD4Plus), Verdict::FourDimD4Plus);
        assert_eq!(verdict(CatalogEntry::FourDimD4Minus), Verdict::FourDimD4Minus);
        assert_eq!(verdict(CatalogEntry::Swallowtail), Verdict::NotD4("rank=1".into()));
    }

    #[test]
    fn discriminant_germs_classify_by_sign() {
        let opts = ClassificationOptions::default();
        let v = |g: FrontGerm| classify(&g, &origin(g.dim()), &opts).unwrap().verdict;
        assert_eq!(v(discriminant_v0_germ(1)), Verdict::D4Plus);
        assert_eq!(v(discriminant_v0_germ(-1)), Verdict::D4Minus);
        assert_eq!(v(discriminant_v_germ(1)), Verdict::FourDimD4Plus);
        assert_eq!(v(discriminant_v_germ(-1)), Verdict::FourDimD4Minus);
    }

    #[test]
    fn closed_branches_lie_in_the_singular_set() {
        let g = CatalogEntry::CurvedD4Plus.germ();
        for b in CatalogEntry::CurvedD4Plus.branches() {
            for t in [-0.2, -0.05, 0.07, 0.15] {
                let p = [b.u.eval_scalar(&[0.0, 0.0, t]).unwrap(), b.v.eval_scalar(&[0.0, 0.0, t]).unwrap()];
                let lam = crate::front::lambda_jet(&g, &p, 0).unwrap().lam.value();
                assert!(lam.abs() < 1e-12, "{} at {t}: {lam}", b.name);
            }
        }
    }
}
