//! D4 criteria: rank of `df`, sign of the density Hessian along the kernel,
//! the cubic discriminant of the support function, and the immersion
//! conditions that go with them.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::front::{check_front_jets, jacobian, FrontError, FrontGerm, KernelFrame};
use crate::jets::{Jet, JetVector, DEFAULT_ORDER};
use crate::linalg::{det, rank};
use crate::scalar::{Rational, Scalar, ScalarMode};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error(transparent)]
    Front(#[from] FrontError),
    #[error("{0}")]
    Precondition(String),
}

impl From<crate::jets::JetError> for CriteriaError {
    fn from(e: crate::jets::JetError) -> Self {
        CriteriaError::Front(e.into())
    }
}

impl CriteriaError {
    fn is_not_exact(&self) -> bool {
        matches!(self, CriteriaError::Front(e) if e.is_not_exact())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationOptions {
    /// Zero threshold for determinants and discriminants in float mode.
    pub tol: f64,
    /// Relative singular-value threshold for ranks.
    pub rank_tol: f64,
    pub mode: ScalarMode,
    /// Truncation order of the density and normal jets; at least 3.
    pub order: usize,
}

impl Default for ClassificationOptions {
    fn default() -> Self {
        ClassificationOptions {
            tol: DEFAULT_TOL,
            rank_tol: DEFAULT_RANK_TOL,
            mode: ScalarMode::Auto,
            order: DEFAULT_ORDER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason")]
pub enum Verdict {
    D4Plus,
    D4Minus,
    FourDimD4Plus,
    FourDimD4Minus,
    NotD4(String),
    Indeterminate(String),
}

impl Verdict {
    pub fn is_definite(&self) -> bool {
        !matches!(self, Verdict::Indeterminate(_))
    }

    pub fn is_d4(&self) -> bool {
        matches!(
            self,
            Verdict::D4Plus | Verdict::D4Minus | Verdict::FourDimD4Plus | Verdict::FourDimD4Minus
        )
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::D4Plus => write!(f, "D4+"),
            Verdict::D4Minus => write!(f, "D4-"),
            Verdict::FourDimD4Plus => write!(f, "4D D4+"),
            Verdict::FourDimD4Minus => write!(f, "4D D4-"),
            Verdict::NotD4(r) => write!(f, "NotD4 ({r})"),
            Verdict::Indeterminate(r) => write!(f, "Indeterminate ({r})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CubicType {
    D4PlusType,
    D4MinusType,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub label: String,
    pub dim: usize,
    pub point: Vec<f64>,
    /// Arithmetic actually used (never `auto`).
    pub mode: ScalarMode,
    pub order: usize,
    pub rank: usize,
    /// Hessian of the density in the kernel frame at the point.
    pub hess: Option<[[f64; 2]; 2]>,
    pub hess_det: Option<f64>,
    /// Exact rational value when computed in exact mode.
    pub hess_det_exact: Option<String>,
    pub delta_phi: Option<f64>,
    pub delta_phi_exact: Option<String>,
    /// Condition (3) in dimension three.
    pub immersion_ok: Option<bool>,
    pub immersion_rank: Option<usize>,
    /// Immersivity of `(h11, h12, h22)` in dimension two.
    pub second_fundamental_immersion: Option<bool>,
    pub kernel: Option<KernelFrame<f64>>,
    pub verdict: Verdict,
    pub tol: f64,
    pub rank_tol: f64,
}

/// Shortest round-trip text for a float, with `-0` printed as `0`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

impl ClassificationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        if !self.label.is_empty() {
            line(format!("front: {}", self.label));
        }
        line(format!("dim: {}", self.dim));
        let pt: Vec<String> = self.point.iter().map(|x| format_float(*x)).collect();
        line(format!("point: {}", pt.join(", ")));
        let mode = match self.mode {
            ScalarMode::Exact => "exact",
            _ => "float",
        };
        line(format!("arithmetic: {mode}"));
        line(format!("rank df: {}", self.rank));
        let value = |exact: &Option<String>, x: f64| exact.clone().unwrap_or_else(|| format_float(x));
        if let Some(h) = self.hess_det {
            let name = if self.dim == 2 { "det Hess λ" } else { "det Hess_(ξ,η) λ" };
            line(format!("{name} = {}", value(&self.hess_det_exact, h)));
        }
        if let Some(d) = self.delta_phi {
            line(format!("Δ_φ = {}", value(&self.delta_phi_exact, d)));
        }
        if let Some(ok) = self.second_fundamental_immersion {
            line(format!("(h11, h12, h22) immersion: {}", yes_no(ok)));
        }
        if let Some(ok) = self.immersion_ok {
            let r = self.immersion_rank.unwrap_or(0);
            line(format!("condition (3) immersion: {} (rank {r})", yes_no(ok)));
        }
        line(format!("verdict: {}", self.verdict));
        out
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// The cubic discriminant of the support function from its third
/// derivatives `a = phi_uuu, b = phi_uuv, c = phi_uvv, d = phi_vvv`.
/// Positive for cubics with one real linear factor.
pub fn delta_phi<S: Scalar>(a: &S, b: &S, c: &S, d: &S) -> S {
    let (a, b, c, d) = (a.clone(), b.clone(), c.clone(), d.clone());
    let n = |k: i64| S::from_i64(k);
    a.clone() * a.clone() * d.clone() * d.clone()
        - n(6) * a.clone() * b.clone() * c.clone() * d.clone()
        - n(3) * b.clone() * b.clone() * c.clone() * c.clone()
        + n(4) * b.clone() * b.clone() * b * d
        + n(4) * a * c.clone() * c.clone() * c
}

fn third_derivatives<S: Scalar>(phi: &Jet<S>) -> Result<[S; 4], CriteriaError> {
    Ok([
        phi.derivative(&[3, 0, 0])?,
        phi.derivative(&[2, 1, 0])?,
        phi.derivative(&[1, 2, 0])?,
        phi.derivative(&[0, 3, 0])?,
    ])
}

fn sign_of<S: Scalar>(x: &S, tol: f64) -> i8 {
    if S::EXACT {
        if x.is_zero() {
            0
        } else if *x > S::zero() {
            1
        } else {
            -1
        }
    } else {
        let x = x.to_f64();
        if x.abs() <= tol {
            0
        } else if x > 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Types a function germ of two variables whose 2-jet vanishes by the sign
/// of its cubic discriminant.
pub fn classify_cubic<S: Scalar>(phi: &Jet<S>, tol: f64) -> Result<CubicType, CriteriaError> {
    if phi.nvars() != 2 || phi.order() < 3 {
        return Err(CriteriaError::Precondition(
            "need a jet in two variables of order at least 3".into(),
        ));
    }
    if !phi.vanishes_to(2, tol) {
        return Err(CriteriaError::Precondition("2-jet does not vanish".into()));
    }
    let [a, b, c, d] = third_derivatives(phi)?;
    Ok(match sign_of(&delta_phi(&a, &b, &c, &d), tol) {
        1 => CubicType::D4PlusType,
        -1 => CubicType::D4MinusType,
        _ => CubicType::Degenerate,
    })
}

fn hessian_2x2<S: Scalar>(lam: &Jet<S>, xi: &[S], eta: &[S]) -> Result<[[S; 2]; 2], CriteriaError> {
    let second = |a: &[S], b: &[S]| lam.directional(a).directional(b).value();
    let h = [
        [second(xi, xi), second(xi, eta)],
        [second(eta, xi), second(eta, eta)],
    ];
    Ok(h)
}

/// Linear parts of a list of jets, as rows.
fn linear_rows<S: Scalar>(jets: &[Jet<S>]) -> Vec<Vec<S>> {
    jacobian(&JetVector::new(jets.to_vec()).expect("two to four jets"))
}

fn exact_string<S: Scalar>(x: &S) -> Option<String> {
    S::EXACT.then(|| x.to_string())
}

fn check_order(opts: &ClassificationOptions) -> Result<(), CriteriaError> {
    if opts.order < 3 {
        return Err(CriteriaError::Precondition(format!(
            "truncation order {} is below 3",
            opts.order
        )));
    }
    Ok(())
}

fn empty_report<S: Scalar>(
    germ: &FrontGerm,
    point: &[S],
    opts: &ClassificationOptions,
    rank: usize,
) -> ClassificationReport {
    ClassificationReport {
        label: germ.label().to_string(),
        dim: germ.dim(),
        point: point.iter().map(S::to_f64).collect(),
        mode: if S::EXACT {
            ScalarMode::Exact
        } else {
            ScalarMode::Float
        },
        order: opts.order,
        rank,
        hess: None,
        hess_det: None,
        hess_det_exact: None,
        delta_phi: None,
        delta_phi_exact: None,
        immersion_ok: None,
        immersion_rank: None,
        second_fundamental_immersion: None,
        kernel: None,
        verdict: Verdict::Indeterminate(String::new()),
        tol: opts.tol,
        rank_tol: opts.rank_tol,
    }
}

/// `(h11, h12, h22)` with `h_ij = <f_{u_i u_j}, nu>` is an immersion at the
/// point. Requires `df = 0` there.
pub fn second_fundamental_immersion<S: Scalar>(
    germ: &FrontGerm,
    point: &[S],
    opts: &ClassificationOptions,
) -> Result<bool, CriteriaError> {
    if germ.dim() != 2 {
        return Err(CriteriaError::Precondition("needs a front in dimension two".into()));
    }
    let f = germ.map_jets(point, 3)?;
    let nu = germ.normal_jets(point, 2)?;
    sff_immersion(&f, &nu, opts)
}

fn sff_immersion<S: Scalar>(
    f: &JetVector<S>,
    nu: &JetVector<S>,
    opts: &ClassificationOptions,
) -> Result<bool, CriteriaError> {
    let df = jacobian(&f.truncate(1));
    let r = rank(&df, opts.rank_tol);
    if r != 0 {
        return Err(CriteriaError::Precondition(format!("rank df = {r}, expected 0")));
    }
    let nu = nu.truncate(1);
    let h = |i: usize, j: usize| f.partial(i).partial(j).truncate(1).dot(&nu);
    let hs = [h(0, 0)?, h(0, 1)?, h(1, 1)?];
    Ok(rank(&linear_rows(&hs), opts.rank_tol) == 2)
}

fn classify_surface_in<S: Scalar>(
    germ: &FrontGerm,
    point: &[S],
    opts: &ClassificationOptions,
) -> Result<ClassificationReport, CriteriaError> {
    let k = opts.order;
    let f = germ.map_jets(point, k + 1)?;
    let (nu, lam) = germ.normal_and_density(point, k)?;
    check_front_jets(&f, &nu, opts.tol)?;
    let r = rank(&jacobian(&f.truncate(1)), opts.rank_tol);
    let mut report = empty_report(germ, point, opts, r);
    if r != 0 {
        report.verdict = Verdict::NotD4(format!("rank={r}"));
        return Ok(report);
    }
    let (e_u, e_v) = (vec![S::one(), S::zero()], vec![S::zero(), S::one()]);
    report.kernel = Some(
        KernelFrame {
            xi: e_u.clone(),
            eta: e_v.clone(),
            tau: None,
        }
        .to_f64(),
    );
    let h = hessian_2x2(&lam, &e_u, &e_v)?;
    let hd = det(&[h[0].to_vec(), h[1].to_vec()]);
    report.hess = Some(h.clone().map(|row| row.map(|x| x.to_f64())));
    report.hess_det = Some(hd.to_f64());
    report.hess_det_exact = exact_string(&hd);

    let shifted: Vec<Jet<S>> = f
        .truncate(3)
        .components()
        .iter()
        .map(|c| c.add_scalar(&-c.value()))
        .collect();
    let phi = JetVector::new(shifted)?.dot(&nu.truncate(3))?;
    let [a, b, c, d] = third_derivatives(&phi)?;
    let dp = delta_phi(&a, &b, &c, &d);
    report.delta_phi = Some(dp.to_f64());
    report.delta_phi_exact = exact_string(&dp);
    report.second_fundamental_immersion = Some(sff_immersion(&f, &nu, opts)?);

    report.verdict = match sign_of(&hd, opts.tol) {
        -1 => Verdict::D4Plus,
        1 => Verdict::D4Minus,
        _ => Verdict::Indeterminate("det Hess λ is zero within tolerance".into()),
    };
    Ok(report)
}

fn classify_space_in<S: Scalar>(
    germ: &FrontGerm,
    point: &[S],
    opts: &ClassificationOptions,
) -> Result<ClassificationReport, CriteriaError> {
    let k = opts.order;
    let f = germ.map_jets(point, k + 1)?;
    let (nu, lam) = germ.normal_and_density(point, k)?;
    check_front_jets(&f, &nu, opts.tol)?;
    let r = rank(&jacobian(&f.truncate(1)), opts.rank_tol);
    let mut report = empty_report(germ, point, opts, r);
    if r != 1 {
        report.verdict = Verdict::NotD4(format!("rank={r}"));
        return Ok(report);
    }
    let frame = crate::front::kernel_frame(germ, point, opts.rank_tol)?;
    report.kernel = Some(frame.to_f64());
    let (xi, eta) = (&frame.xi, &frame.eta);

    let h = hessian_2x2(&lam, xi, eta)?;
    let asym = (h[0][1].clone() - h[1][0].clone()).to_f64().abs();
    let scale = 1.0 + h.iter().flatten().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
    if asym > opts.tol * scale {
        return Err(CriteriaError::Precondition(format!(
            "kernel Hessian is not symmetric (defect {asym:e})"
        )));
    }
    let hd = det(&[h[0].to_vec(), h[1].to_vec()]);
    report.hess = Some(h.clone().map(|row| row.map(|x| x.to_f64())));
    report.hess_det = Some(hd.to_f64());
    report.hess_det_exact = exact_string(&hd);

    // Condition (3): (<f_xi, nu_xi>, <f_xi, nu_eta>, <f_eta, nu_eta>) has
    // invertible differential. Only linear parts matter, so order 2 suffices.
    let (f2, nu2) = (f.truncate(3), nu.truncate(2));
    let dir = |v: &JetVector<S>, d: &[S]| -> Result<JetVector<S>, CriteriaError> {
        Ok(JetVector::new(v.components().iter().map(|c| c.directional(d)).collect())?)
    };
    let (f_xi, f_eta) = (dir(&f2, xi)?.truncate(1), dir(&f2, eta)?.truncate(1));
    let (nu_xi, nu_eta) = (dir(&nu2, xi)?, dir(&nu2, eta)?);
    let g = [f_xi.dot(&nu_xi)?, f_xi.dot(&nu_eta)?, f_eta.dot(&nu_eta)?];
    let ir = rank(&linear_rows(&g), opts.rank_tol);
    report.immersion_rank = Some(ir);
    report.immersion_ok = Some(ir == 3);

    report.verdict = if ir != 3 {
        Verdict::NotD4(format!("condition (3) fails: rank={ir}"))
    } else {
        match sign_of(&hd, opts.tol) {
            -1 => Verdict::FourDimD4Plus,
            1 => Verdict::FourDimD4Minus,
            _ => Verdict::Indeterminate("det Hess_(ξ,η) λ is zero within tolerance".into()),
        }
    };
    Ok(report)
}

fn run_with_mode(
    germ: &FrontGerm,
    point: &[Rational],
    opts: &ClassificationOptions,
    run_exact: fn(&FrontGerm, &[Rational], &ClassificationOptions) -> Result<ClassificationReport, CriteriaError>,
    run_float: fn(&FrontGerm, &[f64], &ClassificationOptions) -> Result<ClassificationReport, CriteriaError>,
) -> Result<ClassificationReport, CriteriaError> {
    check_order(opts)?;
    let float_point: Vec<f64> = point.iter().map(Scalar::to_f64).collect();
    match opts.mode {
        ScalarMode::Exact => run_exact(germ, point, opts),
        ScalarMode::Float => run_float(germ, &float_point, opts),
        ScalarMode::Auto => match run_exact(germ, point, opts) {
            Err(e) if e.is_not_exact() => run_float(germ, &float_point, opts),
            other => other,
        },
    }
}

fn require_dim(germ: &FrontGerm, dim: usize) -> Result<(), CriteriaError> {
    if germ.dim() != dim {
        return Err(CriteriaError::Precondition(format!(
            "expected a front of dimension {dim}, got {}",
            germ.dim()
        )));
    }
    Ok(())
}

/// Classifies a front `R^2 -> R^3` at a point: D4+ when `df = 0` and
/// `det Hess lambda < 0`, D4- when `df = 0` and the determinant is positive.
pub fn classify_d4_surface(
    germ: &FrontGerm,
    point: &[Rational],
    opts: &ClassificationOptions,
) -> Result<ClassificationReport, CriteriaError> {
    require_dim(germ, 2)?;
    run_with_mode(germ, point, opts, classify_surface_in, classify_surface_in)
}

/// Classifies a front `R^3 -> R^4`: `df` of rank one, sign of the density
/// Hessian on `ker df`, and condition (3).
pub fn classify_d4_space(
    germ: &FrontGerm,
    point: &[Rational],
    opts: &ClassificationOptions,
) -> Result<ClassificationReport, CriteriaError> {
    require_dim(germ, 3)?;
    run_with_mode(germ, point, opts, classify_space_in, classify_space_in)
}

/// Dispatches on the dimension of the germ.
pub fn classify(
    germ: &FrontGerm,
    point: &[Rational],
    opts: &ClassificationOptions,
) -> Result<ClassificationReport, CriteriaError> {
    if germ.dim() == 2 {
        classify_d4_surface(germ, point, opts)
    } else {
        classify_d4_space(germ, point, opts)
    }
}

/// Float-only variant for sweeps where the point is already floating point.
pub fn classify_f64(
    germ: &FrontGerm,
    point: &[f64],
    opts: &ClassificationOptions,
) -> Result<ClassificationReport, CriteriaError> {
    check_order(opts)?;
    if germ.dim() == 2 {
        classify_surface_in(germ, point, opts)
    } else {
        classify_space_in(germ, point, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::front::NormalSpec;

    fn origin(n: usize) -> Vec<Rational> {
        vec![Rational::from_i64(0); n]
    }

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    const DELTA: &str = "sqrt(4*u^2+v^2+4)";

    fn d4(sign: char) -> FrontGerm {
        let nu = [
            format!("2*u/{DELTA}"),
            format!("v/{DELTA}"),
            format!("-2/{DELTA}"),
        ];
        let nu: Vec<&str> = nu.iter().map(String::as_str).collect();
        FrontGerm::parse(
            2,
            &["u*v", &format!("u^2{sign}3*v^2"), &format!("u^2*v{sign}v^3")],
            Some(&nu),
            "d4",
        )
        .unwrap()
    }

    fn four_dim(sign: char) -> FrontGerm {
        FrontGerm::parse(
            3,
            &[
                "u*v",
                &format!("u^2+2*t*v{sign}3*v^2"),
                &format!("2*u^2*v+t*v^2{sign}2*v^3"),
                "t",
            ],
            None,
            "",
        )
        .unwrap()
    }

    #[test]
    fn discriminant_values() {
        let d = |a, b, c, e| delta_phi(&q(a), &q(b), &q(c), &q(e));
        assert_eq!(d(6, 0, 2, 0), q(192));
        assert_eq!(d(6, 0, -2, 0), q(-192));
        assert_eq!(d(6, 0, 0, 0), q(0));
        assert_eq!(d(0, 1, 0, 3), q(12));
    }

    #[test]
    fn cubic_types() {
        let base = crate::jets::base_point(&origin(2));
        let jet = |s: &str| crate::expr::parse(s).unwrap().eval_jet(&base, 3).unwrap();
        assert_eq!(classify_cubic(&jet("(u^2*v+v^3)/2"), 1e-9).unwrap(), CubicType::D4PlusType);
        assert_eq!(classify_cubic(&jet("u^3-u*v^2"), 1e-9).unwrap(), CubicType::D4MinusType);
        assert_eq!(classify_cubic(&jet("u^3"), 1e-9).unwrap(), CubicType::Degenerate);
        assert!(classify_cubic(&jet("u^2+v^3"), 1e-9).is_err());
    }

    #[test]
    fn surface_golden_values() {
        let opts = ClassificationOptions::default();
        let r = classify_d4_surface(&d4('+'), &origin(2), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::D4Plus);
        assert_eq!(r.mode, ScalarMode::Exact);
        assert_eq!(r.hess_det_exact.as_deref(), Some("-48"));
        assert_eq!(r.delta_phi_exact.as_deref(), Some("12"));
        assert_eq!(r.second_fundamental_immersion, Some(true));
        let r = classify_d4_surface(&d4('-'), &origin(2), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::D4Minus);
        assert_eq!(r.hess_det, Some(48.0));
        let float = ClassificationOptions {
            mode: ScalarMode::Float,
            ..opts
        };
        let r = classify_d4_surface(&d4('+'), &origin(2), &float).unwrap();
        assert!((r.hess_det.unwrap() + 48.0).abs() < 1e-9);
        assert_eq!(r.mode, ScalarMode::Float);
    }

    #[test]
    fn flipping_the_normal_keeps_the_verdict() {
        let g = d4('+');
        let NormalSpec::Explicit(nu) = g.normal().clone() else { unreachable!() };
        let flipped = g.with_normal(NormalSpec::Explicit(nu.iter().map(|e| -e).collect())).unwrap();
        let opts = ClassificationOptions::default();
        let a = classify_d4_surface(&g, &origin(2), &opts).unwrap();
        let b = classify_d4_surface(&flipped, &origin(2), &opts).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.hess_det, b.hess_det);
        let auto = g.with_normal(NormalSpec::Auto).unwrap();
        assert_eq!(classify_d4_surface(&auto, &origin(2), &opts).unwrap().verdict, Verdict::D4Plus);
    }

    #[test]
    fn non_d4_surfaces() {
        let opts = ClassificationOptions::default();
        let edge = FrontGerm::parse(2, &["u", "v^2", "v^3"], None, "").unwrap();
        let r = classify_d4_surface(&edge, &origin(2), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::NotD4("rank=1".into()));
        let plane = FrontGerm::parse(2, &["u", "v", "0"], Some(&["0", "0", "1"]), "").unwrap();
        let r = classify_d4_surface(&plane, &origin(2), &opts).unwrap();
        assert_eq!(r.to_text().lines().last(), Some("verdict: NotD4 (rank=2)"));
        let bad = FrontGerm::parse(2, &["u", "v^2", "v^3"], Some(&["0", "0", "1"]), "").unwrap();
        assert!(classify_d4_surface(&bad, &origin(2), &opts).is_err());
    }

    #[test]
    fn space_normal_forms() {
        let opts = ClassificationOptions::default();
        let r = classify_d4_space(&four_dim('+'), &origin(3), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::FourDimD4Plus, "{r:?}");
        assert_eq!(r.immersion_rank, Some(3));
        assert_eq!(r.hess_det_exact.as_deref(), Some("-48"));
        let r = classify_d4_space(&four_dim('-'), &origin(3), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::FourDimD4Minus);
        let float = ClassificationOptions {
            mode: ScalarMode::Float,
            ..opts
        };
        let r = classify_d4_space(&four_dim('+'), &origin(3), &float).unwrap();
        assert_eq!(r.verdict, Verdict::FourDimD4Plus);
        assert!((r.hess_det.unwrap() + 48.0).abs() < 1e-8);
        let imm = FrontGerm::parse(3, &["u", "v", "t", "0"], None, "").unwrap();
        let r = classify_d4_space(&imm, &origin(3), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::NotD4("rank=3".into()));
    }

    #[test]
    fn second_fundamental_form() {
        let opts = ClassificationOptions::default();
        assert!(second_fundamental_immersion(&d4('+'), &origin(2), &opts).unwrap());
        assert!(second_fundamental_immersion(&d4('-'), &origin(2), &opts).unwrap());
        let flat = FrontGerm::parse(2, &["u^3", "v^3", "0"], Some(&["0", "0", "1"]), "").unwrap();
        assert!(!second_fundamental_immersion(&flat, &origin(2), &opts).unwrap());
        let edge = FrontGerm::parse(2, &["u", "v^2", "v^3"], None, "").unwrap();
        assert!(second_fundamental_immersion(&edge, &origin(2), &opts).is_err());
    }

    #[test]
    fn report_round_trips() {
        let r = classify_d4_surface(&d4('+'), &origin(2), &ClassificationOptions::default()).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: ClassificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert!(r.to_text().contains("det Hess λ = -48\n"));
        assert!(r.to_text().contains("verdict: D4+\n"));
    }
}
