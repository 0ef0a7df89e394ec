//! Front germs: a map `f` into `R^(n+1)` with a unit normal `nu`, the signed
//! volume density `lambda = det(f_u1, .., f_un, nu)`, and the checks that make
//! the pair a front.

mod frame;
mod normal;
mod validate;

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{parse, EvalError, Expr, JetBindings, ParseError, Var};
use crate::jets::{cross, Jet, JetError, JetVector};
use crate::scalar::Scalar;

pub use frame::{jacobian, kernel_frame, rank_df, KernelFrame};
pub use normal::{normal_by_least_squares, recover_normal, FACTOR_TOL};
pub use validate::{
    check_front_jets, sample_grid, validate_front, SampleFailure, ValidationReport,
};

#[derive(Debug, Clone, PartialEq)]
pub enum NormalSpec {
    /// Components of a normal field; normalized before use.
    Explicit(Vec<Expr>),
    /// Recover the normal from `f` by factoring `|cross(df)|^2`.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontGerm {
    dim: usize,
    map: Vec<Expr>,
    normal: NormalSpec,
    label: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontError {
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("germ is not frontal to order {order} at this point ({source})")]
    NotFrontal { order: usize, source: JetError },
    #[error("rank of df is {found}, expected {expected}")]
    Rank { expected: usize, found: usize },
    #[error("not a front at this point: {0}")]
    NotAFront(String),
}

impl FrontError {
    /// True when the failure only means exact rational arithmetic could not
    /// represent some value, so a floating-point retry makes sense.
    pub fn is_not_exact(&self) -> bool {
        matches!(
            self,
            FrontError::Eval(EvalError::NotExact(_))
                | FrontError::Jet(JetError::NotExact(_))
                | FrontError::NotFrontal {
                    source: JetError::NotExact(_),
                    ..
                }
        )
    }
}

/// Jet of the signed volume density at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityJet<S: Scalar> {
    pub lam: Jet<S>,
    pub base_point: Vec<S>,
}

impl FrontGerm {
    pub fn new(
        dim: usize,
        map: Vec<Expr>,
        normal: NormalSpec,
        label: impl Into<String>,
    ) -> Result<Self, FrontError> {
        if !(2..=3).contains(&dim) {
            return Err(FrontError::Shape(format!("dimension must be 2 or 3, got {dim}")));
        }
        if map.len() != dim + 1 {
            return Err(FrontError::Shape(format!(
                "map needs {} components, got {}",
                dim + 1,
                map.len()
            )));
        }
        let mut all: Vec<&Expr> = map.iter().collect();
        if let NormalSpec::Explicit(nu) = &normal {
            if nu.len() != dim + 1 {
                return Err(FrontError::Shape(format!(
                    "normal needs {} components, got {}",
                    dim + 1,
                    nu.len()
                )));
            }
            all.extend(nu);
        }
        for e in all {
            if let Some(v) = e.vars().into_iter().find(|v| v.index() >= dim) {
                return Err(FrontError::Shape(format!(
                    "variable '{}' is not available in dimension {dim}",
                    v.name()
                )));
            }
        }
        Ok(FrontGerm {
            dim,
            map,
            normal,
            label: label.into(),
        })
    }

    /// Builds a germ from expression text; `normal = None` means automatic.
    pub fn parse(
        dim: usize,
        map: &[&str],
        normal: Option<&[&str]>,
        label: impl Into<String>,
    ) -> Result<Self, FrontError> {
        let map = map.iter().map(|s| parse(s)).collect::<Result<Vec<_>, _>>()?;
        let normal = match normal {
            Some(nu) => NormalSpec::Explicit(nu.iter().map(|s| parse(s)).collect::<Result<_, _>>()?),
            None => NormalSpec::Auto,
        };
        FrontGerm::new(dim, map, normal, label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn map(&self) -> &[Expr] {
        &self.map
    }

    pub fn normal(&self) -> &NormalSpec {
        &self.normal
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Same germ with the normal spec replaced (shape is rechecked).
    pub fn with_normal(&self, normal: NormalSpec) -> Result<Self, FrontError> {
        FrontGerm::new(self.dim, self.map.clone(), normal, self.label.clone())
    }

    fn base<S: Scalar>(&self, point: &[S]) -> Result<Arc<[S]>, FrontError> {
        if point.len() != self.dim {
            return Err(FrontError::Shape(format!(
                "point has {} coordinates, germ dimension is {}",
                point.len(),
                self.dim
            )));
        }
        Ok(point.to_vec().into())
    }

    fn eval_all<S: Scalar>(
        exprs: &[Expr],
        base: &Arc<[S]>,
        order: usize,
    ) -> Result<JetVector<S>, FrontError> {
        let mut ctx = JetBindings::new(base.clone(), order);
        let comps = exprs.iter().map(|e| ctx.eval(e)).collect::<Result<Vec<_>, _>>()?;
        Ok(JetVector::new(comps)?)
    }

    pub fn map_jets<S: Scalar>(&self, point: &[S], order: usize) -> Result<JetVector<S>, FrontError> {
        Self::eval_all(&self.map, &self.base(point)?, order)
    }

    /// Jets of the supplied normal before normalization; `None` for AUTO.
    pub fn raw_normal_jets<S: Scalar>(
        &self,
        point: &[S],
        order: usize,
    ) -> Result<Option<JetVector<S>>, FrontError> {
        match &self.normal {
            NormalSpec::Explicit(nu) => Ok(Some(Self::eval_all(nu, &self.base(point)?, order)?)),
            NormalSpec::Auto => Ok(None),
        }
    }

    /// Unit normal and density jets, both of order `order`.
    pub fn normal_and_density<S: Scalar>(
        &self,
        point: &[S],
        order: usize,
    ) -> Result<(JetVector<S>, Jet<S>), FrontError> {
        match &self.normal {
            NormalSpec::Auto => recover_normal(self, point, order),
            NormalSpec::Explicit(_) => {
                let f = self.map_jets(point, order + 1)?;
                let raw = self.raw_normal_jets(point, order)?.expect("explicit");
                let nu = raw.normalize()?;
                let lam = density(&f, &nu)?;
                Ok((nu, lam))
            }
        }
    }

    pub fn normal_jets<S: Scalar>(&self, point: &[S], order: usize) -> Result<JetVector<S>, FrontError> {
        Ok(self.normal_and_density(point, order)?.0)
    }
}

/// `lambda = <cross(f_u1, .., f_un), nu>`, truncated to the order of `nu`.
pub(crate) fn density<S: Scalar>(f: &JetVector<S>, nu: &JetVector<S>) -> Result<Jet<S>, FrontError> {
    let w = tangent_cross(f)?;
    Ok(w.dot(nu)?.truncate(nu.order()))
}

pub(crate) fn tangent_cross<S: Scalar>(f: &JetVector<S>) -> Result<JetVector<S>, FrontError> {
    let partials: Vec<JetVector<S>> = (0..f.nvars()).map(|i| f.partial(i)).collect();
    Ok(cross(&partials)?)
}

pub fn lambda_jet<S: Scalar>(
    germ: &FrontGerm,
    point: &[S],
    order: usize,
) -> Result<DensityJet<S>, FrontError> {
    Ok(DensityJet {
        lam: germ.normal_and_density(point, order)?.1,
        base_point: point.to_vec(),
    })
}

/// Jet of `phi = <f - f(base), nu>`.
pub fn support_function_jet<S: Scalar>(
    germ: &FrontGerm,
    point: &[S],
    order: usize,
) -> Result<Jet<S>, FrontError> {
    let f = germ.map_jets(point, order)?;
    let nu = germ.normal_jets(point, order)?;
    let shifted: Vec<Jet<S>> = f
        .components()
        .iter()
        .map(|c| c.add_scalar(&-c.value()))
        .collect();
    Ok(JetVector::new(shifted)?.dot(&nu)?)
}

/// Coordinates `u, v[, t]` in order, for building catalog and test germs.
pub fn coordinate_vars(dim: usize) -> Vec<Var> {
    Var::ALL[..dim].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    const DELTA: &str = "sqrt(4*u^2+v^2+4)";

    fn d4(eps: i64) -> FrontGerm {
        let (a, b) = if eps > 0 { ("+", "+") } else { ("-", "-") };
        let nu = [
            format!("2*u/{DELTA}"),
            format!("v/{DELTA}"),
            format!("-2/{DELTA}"),
        ];
        let nu: Vec<&str> = nu.iter().map(String::as_str).collect();
        FrontGerm::parse(
            2,
            &["u*v", &format!("u^2{a}3*v^2"), &format!("u^2*v{b}v^3")],
            Some(&nu),
            "d4",
        )
        .unwrap()
    }

    #[test]
    fn shape_is_checked() {
        assert!(FrontGerm::parse(2, &["u", "v"], None, "").is_err());
        assert!(FrontGerm::parse(2, &["u", "v", "t"], None, "").is_err());
        assert!(FrontGerm::parse(3, &["u", "v", "t", "0"], Some(&["0", "0", "1"]), "").is_err());
        assert!(FrontGerm::parse(2, &["u", "v", "0"], None, "plane").is_ok());
    }

    #[test]
    fn density_of_d4_forms() {
        let origin = [q(0, 1), q(0, 1)];
        let lam = lambda_jet(&d4(1), &origin, 4).unwrap().lam;
        // (4u^2 - 12v^2) / delta(0)
        assert_eq!(lam.coeff(&[2, 0, 0]), q(2, 1));
        assert_eq!(lam.coeff(&[0, 2, 0]), q(-6, 1));
        assert_eq!(lam.coeff(&[1, 1, 0]), q(0, 1));
        assert_eq!(lam.derivative(&[2, 0, 0]).unwrap(), q(4, 1));
        let lam = lambda_jet(&d4(-1), &origin, 4).unwrap().lam;
        assert_eq!(lam.coeff(&[2, 0, 0]), q(2, 1));
        assert_eq!(lam.coeff(&[0, 2, 0]), q(6, 1));
    }

    #[test]
    fn density_quartic_terms_match_closed_form() {
        // lambda = (4u^2 + 4u^4 - 12v^2 - 11u^2v^2 - 3v^4) / delta
        let origin = [q(0, 1), q(0, 1)];
        let lam = lambda_jet(&d4(1), &origin, 4).unwrap().lam;
        let num = parse("4*u^2+4*u^4-12*v^2-11*u^2*v^2-3*v^4").unwrap();
        let delta = parse(DELTA).unwrap();
        let b: Arc<[Rational]> = origin.to_vec().into();
        let expected = num
            .eval_jet(&b, 4)
            .unwrap()
            .try_div(&delta.eval_jet(&b, 4).unwrap())
            .unwrap();
        assert_eq!(lam, expected);
    }

    #[test]
    fn plane_density_is_one() {
        let plane = FrontGerm::parse(2, &["u", "v", "0"], Some(&["0", "0", "1"]), "plane").unwrap();
        let lam = lambda_jet(&plane, &[q(0, 1), q(0, 1)], 3).unwrap().lam;
        assert_eq!(lam, lam.one_like());
    }

    #[test]
    fn support_function_of_d4() {
        let origin = [q(0, 1), q(0, 1)];
        let phi = support_function_jet(&d4(1), &origin, 3).unwrap();
        assert!(phi.block(0).iter().chain(phi.block(1)).chain(phi.block(2)).all(|c| *c == q(0, 1)));
        // (u^2 v + v^3) / 2
        assert_eq!(phi.coeff(&[2, 1, 0]), q(1, 2));
        assert_eq!(phi.coeff(&[0, 3, 0]), q(1, 2));
        assert_eq!(phi.coeff(&[3, 0, 0]), q(0, 1));
        let phi = support_function_jet(&d4(-1), &origin, 3).unwrap();
        assert_eq!(phi.coeff(&[2, 1, 0]), q(1, 2));
        assert_eq!(phi.coeff(&[0, 3, 0]), q(-1, 2));
        let plane = FrontGerm::parse(2, &["u", "v", "0"], Some(&["0", "0", "1"]), "plane").unwrap();
        assert!(support_function_jet(&plane, &origin, 3).unwrap().is_zero());
    }
}
