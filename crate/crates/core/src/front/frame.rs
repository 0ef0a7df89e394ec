use serde::{Deserialize, Serialize};

use super::{FrontError, FrontGerm};
use crate::jets::JetVector;
use crate::linalg::{exact_complement, exact_kernel, rank, svd_kernel, to_dmatrix};
use crate::scalar::Scalar;

/// Matrix of first derivatives at the base point: one row per component,
/// one column per variable.
pub fn jacobian<S: Scalar>(f: &JetVector<S>) -> Vec<Vec<S>> {
    let n = f.nvars();
    f.components()
        .iter()
        .map(|c| {
            (0..n)
                .map(|j| {
                    let mut alpha = [0u8; 3];
                    alpha[j] = 1;
                    c.coeff(&alpha)
                })
                .collect()
        })
        .collect()
}

pub fn rank_df<S: Scalar>(germ: &FrontGerm, point: &[S], rank_tol: f64) -> Result<usize, FrontError> {
    Ok(rank(&jacobian(&germ.map_jets(point, 1)?), rank_tol))
}

/// A basis `(xi, eta)` of `ker df(p)`, plus a complementary direction `tau`
/// in dimension three. Exact mode gives an elimination basis, float mode an
/// orthonormal one; only signs of quadratic-form determinants in this frame
/// are basis independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFrame<S> {
    pub xi: Vec<S>,
    pub eta: Vec<S>,
    pub tau: Option<Vec<S>>,
}

impl<S: Scalar> KernelFrame<S> {
    pub fn to_f64(&self) -> KernelFrame<f64> {
        let conv = |v: &Vec<S>| v.iter().map(S::to_f64).collect();
        KernelFrame {
            xi: conv(&self.xi),
            eta: conv(&self.eta),
            tau: self.tau.as_ref().map(conv),
        }
    }
}

/// Requires `ker df(p)` to be two-dimensional.
pub fn kernel_frame<S: Scalar>(
    germ: &FrontGerm,
    point: &[S],
    rank_tol: f64,
) -> Result<KernelFrame<S>, FrontError> {
    let n = germ.dim();
    let jac = jacobian(&germ.map_jets(point, 1)?);
    let r = rank(&jac, rank_tol);
    if r + 2 != n {
        return Err(FrontError::Rank {
            expected: n - 2,
            found: r,
        });
    }
    let (kernel, tau) = if S::EXACT {
        let kernel = exact_kernel(&jac);
        let tau = (n == 3).then(|| exact_complement(&kernel, n).expect("kernel is proper"));
        (kernel, tau)
    } else {
        let (kernel, complement) = svd_kernel(&to_dmatrix(&jac), r);
        let conv = |v: Vec<f64>| -> Vec<S> {
            v.into_iter()
                .map(|x| S::from_f64(x).expect("finite"))
                .collect()
        };
        let tau = complement.into_iter().next().map(conv);
        (kernel.into_iter().map(conv).collect(), tau)
    };
    let [xi, eta]: [Vec<S>; 2] = kernel.try_into().expect("two kernel vectors");
    Ok(KernelFrame { xi, eta, tau })
}
