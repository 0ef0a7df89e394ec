//! The singular set `{lambda = 0}` of a front `R^2 -> R^3`: contour tracing,
//! null vector fields along the traced curves, and singular curvature of
//! cuspidal-edge branches, including the blow-up at D4+ points.

mod curvature;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, Expr, ParseError};
use crate::front::FrontError;

pub use curvature::{
    curvature_profile, d4_divergence_check, is_cuspidal_edge, null_field, singular_curvature, BranchCurve,
    CurvatureProfile, CurvatureSample, CurvatureValue, DivergenceReport, DIVERGENCE_EXPONENTS,
};
pub use trace::{trace_singular_set, CriticalKind, CriticalZero, Rect, SingularSet, TraceOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SingularError {
    #[error(transparent)]
    Front(#[from] FrontError),
    #[error("singular-set tracing needs a front of dimension 2, got {0}")]
    Dim(usize),
    #[error("pole at t = {t}: the image curve is singular there")]
    Pole { t: f64 },
    #[error("not a cuspidal edge at t = {t}: {reason}")]
    NotCuspidalEdge { t: f64, reason: String },
    #[error("parameter t = {t} is outside the branch range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("{0}")]
    Precondition(String),
}

impl From<crate::jets::JetError> for SingularError {
    fn from(e: crate::jets::JetError) -> Self {
        SingularError::Front(e.into())
    }
}

impl From<crate::expr::EvalError> for SingularError {
    fn from(e: crate::expr::EvalError) -> Self {
        SingularError::Front(e.into())
    }
}

/// A curve `t -> (u(t), v(t))` in the domain given by expressions in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedBranch {
    pub name: String,
    pub u: Expr,
    pub v: Expr,
}

impl ClosedBranch {
    pub fn parse(name: &str, u: &str, v: &str) -> Result<Self, ParseError> {
        Ok(ClosedBranch {
            name: name.to_string(),
            u: parse(u)?,
            v: parse(v)?,
        })
    }

    pub fn point(&self, t: f64) -> Result<[f64; 2], SingularError> {
        let at = [0.0, 0.0, t];
        Ok([self.u.eval_scalar(&at)?, self.v.eval_scalar(&at)?])
    }
}

/// One point of a traced branch. `t` is arclength from the start of the
/// branch; `lambda` is the density left at the refined point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub t: f64,
    pub point: [f64; 2],
    pub lambda: f64,
    /// Unit vector spanning `ker df`, with `(gamma', eta)` positive. `None`
    /// until `null_field` runs, and at rank-zero points.
    pub eta: Option<[f64; 2]>,
}

/// A polyline inside `{lambda = 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularBranch {
    pub id: usize,
    pub samples: Vec<BranchSample>,
    /// Index into `SingularSet::critical` of the crossing this branch starts
    /// from, if any.
    pub start: Option<usize>,
    /// Index of the crossing this branch ends at, if any.
    pub end: Option<usize>,
    pub closed: bool,
    /// True once every regular sample carries an `eta` with `(gamma', eta)`
    /// positively oriented.
    pub oriented: bool,
}

impl SingularBranch {
    pub fn t_range(&self) -> (f64, f64) {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => (a.t, b.t),
            _ => (0.0, 0.0),
        }
    }

    pub fn length(&self) -> f64 {
        self.t_range().1 - self.t_range().0
    }

    /// Unit direction from the first sample to the first sample at distance
    /// at least `radius`; the outgoing tangent when the branch leaves a
    /// crossing.
    pub fn start_direction(&self, radius: f64) -> Option<[f64; 2]> {
        let p0 = self.samples.first()?.point;
        let q = self
            .samples
            .iter()
            .find(|s| dist(s.point, p0) >= radius)
            .or(self.samples.last())?
            .point;
        let d = [q[0] - p0[0], q[1] - p0[1]];
        let n = d[0].hypot(d[1]);
        (n > 0.0).then(|| [d[0] / n, d[1] / n])
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
