//! Null vector fields and singular curvature along cuspidal-edge curves.
//!
//! With `gamma` a curve in `{lambda = 0}`, `eta` the null field oriented so
//! that `(gamma', eta)` is positive, and `g = f o gamma`,
//! `kappa_s = sign(dlambda(eta)) det(g', g'', nu o gamma) / |g'|^3`.
//! Flipping `nu` flips `lambda` too, so `kappa_s` does not depend on it.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ClosedBranch, SingularBranch, SingularError};
use crate::criteria::{classify, ClassificationOptions, Verdict};
use crate::exec::{map_slice, Execution};
use crate::expr::{JetBindings, Var};
use crate::front::{jacobian, FrontGerm, NormalSpec};
use crate::jets::{base_point, Jet};
use crate::linalg::{numeric_rank, svd_kernel};
use crate::scalar::{Rational, Scalar};

/// `|g'|` at or below this counts as a pole of `kappa_s`.
const POLE_TOL: f64 = 1e-12;
/// `dlambda(eta)` counts as zero below this fraction of `|dlambda|`.
const CUSP_REL_TOL: f64 = 1e-8;
/// Same as the orientation rule of recovered normals.
const SIGN_TOL: f64 = 1e-12;
/// Samples and degree of the local fit of a traced curve.
const FIT_WINDOW: usize = 7;
const FIT_DEGREE: usize = 4;

/// `k` in the sample parameters `t = +-2^-k` of the divergence check.
pub const DIVERGENCE_EXPONENTS: std::ops::RangeInclusive<i32> = 4..=12;

/// A curve in the domain: closed form, or a traced polyline that is fitted
/// locally.
#[derive(Debug, Clone, Copy)]
pub enum BranchCurve<'a> {
    Closed(&'a ClosedBranch),
    Traced(&'a SingularBranch),
}

impl BranchCurve<'_> {
    pub fn name(&self) -> String {
        match self {
            BranchCurve::Closed(b) => b.name.clone(),
            BranchCurve::Traced(b) => b.id.to_string(),
        }
    }

    /// Jets of `u(t)` and `v(t)` in one variable at `t`.
    fn jets(&self, t: f64, order: usize) -> Result<[Jet<f64>; 2], SingularError> {
        let base: Arc<[f64]> = base_point(&[t]);
        match self {
            BranchCurve::Closed(b) => {
                let tj = Jet::variable(base.clone(), order, 0)?;
                let mut ctx = JetBindings::new(base, order).bind(Var::T, tj);
                Ok([ctx.eval(&b.u)?, ctx.eval(&b.v)?])
            }
            BranchCurve::Traced(b) => fit_jets(b, t, order, base),
        }
    }
}

/// Least-squares polynomial through the `FIT_WINDOW` samples closest to `t`,
/// re-expanded at `t`.
fn fit_jets(b: &SingularBranch, t: f64, order: usize, base: Arc<[f64]>) -> Result<[Jet<f64>; 2], SingularError> {
    let (lo, hi) = b.t_range();
    if !(lo..=hi).contains(&t) {
        return Err(SingularError::OutOfRange { t, lo, hi });
    }
    if b.samples.len() < FIT_WINDOW {
        return Err(SingularError::Precondition(format!(
            "branch {} has {} samples, the local fit needs {FIT_WINDOW}",
            b.id,
            b.samples.len()
        )));
    }
    let centre = b.samples.partition_point(|s| s.t < t);
    let first = centre.saturating_sub(FIT_WINDOW / 2).min(b.samples.len() - FIT_WINDOW);
    let window = &b.samples[first..first + FIT_WINDOW];
    let h = window.iter().map(|s| (s.t - t).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let vander = DMatrix::from_fn(FIT_WINDOW, FIT_DEGREE + 1, |r, c| ((window[r].t - t) / h).powi(c as i32));
    let svd = vander.svd(true, true);
    let mut out = Vec::with_capacity(2);
    for axis in 0..2 {
        let rhs = DVector::from_iterator(FIT_WINDOW, window.iter().map(|s| s.point[axis]));
        let a = svd
            .solve(&rhs, 1e-14)
            .map_err(|e| SingularError::Precondition(format!("curve fit failed: {e}")))?;
        let terms = (0..=FIT_DEGREE.min(order)).map(|m| ([m as u8, 0, 0], a[m] / h.powi(m as i32)));
        out.push(Jet::from_terms(base.clone(), order, terms)?);
    }
    let v = out.pop().expect("two axes");
    let u = out.pop().expect("two axes");
    Ok([u, v])
}

/// Jets of `f o gamma` at `t`.
fn image_jets(germ: &FrontGerm, curve: &BranchCurve, t: f64, order: usize) -> Result<Vec<Jet<f64>>, SingularError> {
    let [u, v] = curve.jets(t, order)?;
    let base = u.base().clone();
    let mut ctx = JetBindings::new(base, order).bind(Var::U, u).bind(Var::V, v);
    Ok(germ.map().iter().map(|e| ctx.eval(e)).collect::<Result<Vec<_>, _>>()?)
}

fn derivative(j: &Jet<f64>, k: u8) -> f64 {
    j.derivative(&[k, 0, 0]).expect("order checked by caller")
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn require_surface(germ: &FrontGerm) -> Result<(), SingularError> {
    if germ.dim() != 2 {
        return Err(SingularError::Dim(germ.dim()));
    }
    Ok(())
}

/// Rank of `df(p)` and, when it is one, the unit kernel vector.
fn kernel_direction(germ: &FrontGerm, p: [f64; 2], rank_tol: f64) -> Result<(usize, Option<[f64; 2]>), SingularError> {
    let jac = DMatrix::from_fn(3, 2, {
        let j = jacobian(&germ.map_jets(&p, 1)?);
        move |r, c| j[r][c]
    });
    let r = numeric_rank(&jac, rank_tol);
    if r != 1 {
        return Ok((r, None));
    }
    let (kernel, _) = svd_kernel(&jac, 1);
    Ok((1, Some([kernel[0][0], kernel[0][1]])))
}

/// `dlambda(p)` as `(lambda_u, lambda_v)` and `nu(p)` at a rank-one point
/// with null direction `eta`.
///
/// Jet division is ill-conditioned at points that are only close to the
/// singular set, so both come from the 2-jet of `f`: `<f_ee, nu> = 0` there,
/// hence `nu` is parallel to `df(xi) x f_ee`, and the `nu'` term drops out
/// of `dlambda` because `f_u` and `f_v` are parallel.
fn density_differential(germ: &FrontGerm, p: [f64; 2], eta: [f64; 2]) -> Result<([f64; 2], [f64; 3]), SingularError> {
    let f = germ.map_jets(&p, 2)?;
    let c = |i: usize, a: [u8; 3]| f.component(i).coeff(&a);
    let fu = [0, 1, 2].map(|i| c(i, [1, 0, 0]));
    let fv = [0, 1, 2].map(|i| c(i, [0, 1, 0]));
    let fuu = [0, 1, 2].map(|i| 2.0 * c(i, [2, 0, 0]));
    let fuv = [0, 1, 2].map(|i| c(i, [1, 1, 0]));
    let fvv = [0, 1, 2].map(|i| 2.0 * c(i, [0, 2, 0]));
    let nu = match germ.normal() {
        NormalSpec::Explicit(_) => {
            let raw = germ.raw_normal_jets(&p, 0)?.expect("explicit normal").value();
            let n = norm3([raw[0], raw[1], raw[2]]);
            [raw[0] / n, raw[1] / n, raw[2] / n]
        }
        NormalSpec::Auto => {
            let xi = [-eta[1], eta[0]];
            let a = [0, 1, 2].map(|i| fu[i] * xi[0] + fv[i] * xi[1]);
            let fee = [0, 1, 2].map(|i| {
                fuu[i] * eta[0] * eta[0] + 2.0 * fuv[i] * eta[0] * eta[1] + fvv[i] * eta[1] * eta[1]
            });
            let w = cross3(a, fee);
            let n = norm3(w);
            if !(n > CUSP_REL_TOL * norm3(a) * norm3(fee)) {
                // dlambda(eta) = 0: fall back on the recovered normal.
                let nu = germ.normal_jets(&p, 0)?.value();
                [nu[0], nu[1], nu[2]]
            } else {
                let mut nu = w.map(|x| x / n);
                if nu.iter().find(|x| x.abs() > SIGN_TOL).is_some_and(|x| *x < 0.0) {
                    nu = nu.map(|x| -x);
                }
                nu
            }
        }
    };
    let dl_u = det3(fuu, fv, nu) + det3(fu, fuv, nu);
    let dl_v = det3(fuv, fv, nu) + det3(fu, fvv, nu);
    Ok(([dl_u, dl_v], nu))
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// True when `df(p)` has rank one and `lambda` is not stationary along the
/// null direction: a cuspidal edge, assuming `lambda(p) = 0`.
pub fn is_cuspidal_edge(germ: &FrontGerm, p: [f64; 2], rank_tol: f64) -> Result<bool, SingularError> {
    require_surface(germ)?;
    let (_, Some(eta)) = kernel_direction(germ, p, rank_tol)? else {
        return Ok(false);
    };
    let (dl, _) = density_differential(germ, p, eta)?;
    let grad = dl[0].hypot(dl[1]);
    let along = dl[0] * eta[0] + dl[1] * eta[1];
    Ok(grad > 0.0 && along.abs() > CUSP_REL_TOL * grad)
}

/// Fills `eta` on every regular sample, oriented so `(gamma', eta)` is
/// positive, with `gamma'` from neighbouring samples. Samples at a crossing
/// the branch starts or ends at keep `None`.
pub fn null_field(germ: &FrontGerm, branch: &SingularBranch, rank_tol: f64) -> Result<SingularBranch, SingularError> {
    require_surface(germ)?;
    let mut out = branch.clone();
    let n = out.samples.len();
    for k in 0..n {
        if (k == 0 && branch.start.is_some()) || (k + 1 == n && branch.end.is_some()) {
            out.samples[k].eta = None;
            continue;
        }
        let p = branch.samples[k].point;
        let (r, eta) = kernel_direction(germ, p, rank_tol)?;
        let Some(mut eta) = eta else {
            return Err(SingularError::Precondition(format!(
                "rank df = {r} at t = {} on branch {}",
                branch.samples[k].t, branch.id
            )));
        };
        let (a, b) = (branch.samples[k.saturating_sub(1)].point, branch.samples[(k + 1).min(n - 1)].point);
        let tangent = [b[0] - a[0], b[1] - a[1]];
        if tangent[0] * eta[1] - tangent[1] * eta[0] < 0.0 {
            eta = [-eta[0], -eta[1]];
        }
        out.samples[k].eta = Some(eta);
    }
    out.oriented = true;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureValue {
    pub t: f64,
    pub point: [f64; 2],
    pub kappa: f64,
    /// `sign(dlambda(eta))`, `+1` or `-1`.
    pub sign_dlambda_eta: i8,
    pub eta: [f64; 2],
    /// `|g'(t)|`.
    pub speed: f64,
}

/// Singular curvature at parameter `t` of `curve`.
pub fn singular_curvature(
    germ: &FrontGerm,
    curve: &BranchCurve,
    t: f64,
    rank_tol: f64,
) -> Result<CurvatureValue, SingularError> {
    require_surface(germ)?;
    if let BranchCurve::Traced(b) = curve {
        // df = 0 at a crossing, so the image curve is singular there.
        let (lo, hi) = b.t_range();
        if (t == lo && b.start.is_some()) || (t == hi && b.end.is_some()) {
            return Err(SingularError::Pole { t });
        }
    }
    let [u, v] = curve.jets(t, 2)?;
    let p = [u.value(), v.value()];
    let g = image_jets(germ, curve, t, 2)?;
    let g1 = [0, 1, 2].map(|i| derivative(&g[i], 1));
    let g2 = [0, 1, 2].map(|i| derivative(&g[i], 2));
    let speed = norm3(g1);
    if speed <= POLE_TOL {
        return Err(SingularError::Pole { t });
    }
    let (r, eta) = kernel_direction(germ, p, rank_tol)?;
    let Some(mut eta) = eta else {
        return Err(SingularError::NotCuspidalEdge {
            t,
            reason: format!("rank df = {r}"),
        });
    };
    let tangent = [derivative(&u, 1), derivative(&v, 1)];
    if tangent[0] * eta[1] - tangent[1] * eta[0] < 0.0 {
        eta = [-eta[0], -eta[1]];
    }
    let (dl, nu) = density_differential(germ, p, eta)?;
    let along = dl[0] * eta[0] + dl[1] * eta[1];
    if !(along.abs() > CUSP_REL_TOL * dl[0].hypot(dl[1])) {
        return Err(SingularError::NotCuspidalEdge {
            t,
            reason: "dlambda(eta) = 0".into(),
        });
    }
    let sign = if along > 0.0 { 1 } else { -1 };
    Ok(CurvatureValue {
        t,
        point: p,
        kappa: f64::from(sign) * det3(g1, g2, nu) / speed.powi(3),
        sign_dlambda_eta: sign,
        eta,
        speed,
    })
}

/// Outcome at one parameter of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CurvatureSample {
    Value(CurvatureValue),
    Pole { t: f64 },
    Error { t: f64, message: String },
}

impl CurvatureSample {
    pub fn t(&self) -> f64 {
        match self {
            CurvatureSample::Value(v) => v.t,
            CurvatureSample::Pole { t } | CurvatureSample::Error { t, .. } => *t,
        }
    }

    pub fn kappa(&self) -> Option<f64> {
        match self {
            CurvatureSample::Value(v) => Some(v.kappa),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub branch: String,
    pub samples: Vec<CurvatureSample>,
}

/// `kappa_s` at each parameter; poles and non-cuspidal points become
/// marker samples rather than errors.
pub fn curvature_profile(
    germ: &FrontGerm,
    curve: &BranchCurve,
    ts: &[f64],
    rank_tol: f64,
    exec: Execution,
) -> CurvatureProfile {
    let samples = map_slice(exec, ts, |&t| match singular_curvature(germ, curve, t, rank_tol) {
        Ok(v) => CurvatureSample::Value(v),
        Err(SingularError::Pole { t }) => CurvatureSample::Pole { t },
        Err(e) => CurvatureSample::Error { t, message: e.to_string() },
    });
    CurvatureProfile {
        branch: curve.name(),
        samples,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub branch: String,
    pub point: [f64; 2],
    /// `det(g''(0), g'''(0), nu(0))`.
    pub third_order_det: f64,
    pub nu: [f64; 3],
    /// `(t, kappa_s)` at `t = 2^-k` and `t = -2^-k`.
    pub positive_side: Vec<(f64, f64)>,
    pub negative_side: Vec<(f64, f64)>,
    /// `|kappa_s|` grows as `t -> +0`, resp. `t -> -0`, with constant sign.
    pub monotone_positive: bool,
    pub monotone_negative: bool,
    /// Sign of `kappa_s` near `+0` and `-0`.
    pub sign_positive: i8,
    pub sign_negative: i8,
    pub diverges: bool,
    pub tol: f64,
}

fn side(germ: &FrontGerm, curve: &BranchCurve, sign: f64, rank_tol: f64) -> Result<Vec<(f64, f64)>, SingularError> {
    DIVERGENCE_EXPONENTS
        .map(|k| {
            let t = sign * 2f64.powi(-k);
            singular_curvature(germ, curve, t, rank_tol).map(|c| (t, c.kappa))
        })
        .collect()
}

fn monotone(values: &[(f64, f64)]) -> (bool, i8) {
    let s = values.last().map_or(0.0, |v| v.1.signum());
    let same_sign = values.iter().all(|v| v.1.signum() == s && v.1 != 0.0);
    let growing = values.windows(2).all(|w| w[1].1.abs() > w[0].1.abs());
    (same_sign && growing, s as i8)
}

/// At a D4+ point `branch(0)`: the third-order determinant and, when it is
/// not zero, a numeric check that `kappa_s` blows up with opposite signs on
/// the two sides.
pub fn d4_divergence_check(
    germ: &FrontGerm,
    branch: &ClosedBranch,
    opts: &ClassificationOptions,
    tol: f64,
) -> Result<DivergenceReport, SingularError> {
    require_surface(germ)?;
    let curve = BranchCurve::Closed(branch);
    let point = branch.point(0.0)?;
    let exact: Vec<Rational> = point
        .iter()
        .map(|&x| Rational::from_f64(x).ok_or_else(|| SingularError::Precondition("non-finite point".into())))
        .collect::<Result<_, _>>()?;
    let report = classify(germ, &exact, opts).map_err(|e| SingularError::Precondition(e.to_string()))?;
    if report.verdict != Verdict::D4Plus {
        return Err(SingularError::Precondition(format!(
            "branch {} passes through {:?}, classified {}, not D4+",
            branch.name, point, report.verdict
        )));
    }
    let g = image_jets(germ, &curve, 0.0, 3)?;
    let g2 = [0, 1, 2].map(|i| derivative(&g[i], 2));
    let g3 = [0, 1, 2].map(|i| derivative(&g[i], 3));
    let nu = germ.normal_jets(&point, 0)?.value();
    let nu = [nu[0], nu[1], nu[2]];
    let third_order_det = det3(g2, g3, nu);

    let rank_tol = opts.rank_tol;
    let (positive_side, negative_side) = if third_order_det.abs() > tol {
        (side(germ, &curve, 1.0, rank_tol)?, side(germ, &curve, -1.0, rank_tol)?)
    } else {
        (Vec::new(), Vec::new())
    };
    let (monotone_positive, sign_positive) = monotone(&positive_side);
    let (monotone_negative, sign_negative) = monotone(&negative_side);
    let diverges = third_order_det.abs() > tol
        && monotone_positive
        && monotone_negative
        && sign_positive == -sign_negative;
    Ok(DivergenceReport {
        branch: branch.name.clone(),
        point,
        third_order_det,
        nu,
        positive_side,
        negative_side,
        monotone_positive,
        monotone_negative,
        sign_positive,
        sign_negative,
        diverges,
        tol,
    })
}
