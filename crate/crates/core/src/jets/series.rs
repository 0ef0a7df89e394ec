use super::{Jet, JetError};
use crate::scalar::Scalar;

impl<S: Scalar> Jet<S> {
    /// Evaluates `sum_k coeffs[k] * (self - self(0))^k` by Horner's rule.
    /// Exact up to the truncation order because `self - self(0)` has no
    /// constant term.
    pub(crate) fn compose_univariate(&self, coeffs: &[S]) -> Self {
        let mut x = self.clone();
        x.coeffs[0] = S::zero();
        let mut acc = self.one_like().scale(&coeffs[coeffs.len() - 1]);
        for c in coeffs[..coeffs.len() - 1].iter().rev() {
            acc = acc.try_mul(&x).expect("same base").add_scalar(c);
        }
        acc
    }

    fn series_len(&self) -> usize {
        self.order + 1
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let a0 = self.value();
        if a0.is_zero() {
            return Err(JetError::ZeroConstant);
        }
        // 1/(a0 + x) = sum (-1)^k x^k / a0^(k+1)
        let inv = S::one() / a0;
        let mut coeffs = Vec::with_capacity(self.series_len());
        let mut c = inv.clone();
        for _ in 0..self.series_len() {
            coeffs.push(c.clone());
            c = -(c * inv.clone());
        }
        Ok(self.compose_univariate(&coeffs))
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let a0 = self.value();
        if a0.is_zero() {
            return Err(JetError::ZeroConstant);
        }
        if a0 < S::zero() {
            return Err(JetError::NegativeConstant);
        }
        let root = a0.sqrt().ok_or(JetError::NotExact("square root"))?;
        // sqrt(a0 + x) = sqrt(a0) * sum binom(1/2, k) (x / a0)^k
        let inv = S::one() / a0;
        let half = S::from_ratio(1, 2);
        let mut coeffs = Vec::with_capacity(self.series_len());
        let mut binom = S::one();
        let mut scale = root;
        for k in 0..self.series_len() {
            coeffs.push(binom.clone() * scale.clone());
            let kk = S::from_i64(k as i64);
            binom = binom * (half.clone() - kk.clone()) / (kk + S::one());
            scale = scale * inv.clone();
        }
        Ok(self.compose_univariate(&coeffs))
    }

    /// Coefficients `d^k/dx^k g(a0) / k!` from a cyclic derivative table.
    fn periodic_series(&self, cycle: [S; 4]) -> Self {
        let mut coeffs = Vec::with_capacity(self.series_len());
        let mut inv_fact = S::one();
        for k in 0..self.series_len() {
            if k > 0 {
                inv_fact = inv_fact / S::from_i64(k as i64);
            }
            coeffs.push(cycle[k % 4].clone() * inv_fact.clone());
        }
        self.compose_univariate(&coeffs)
    }

    pub fn sin(&self) -> Result<Self, JetError> {
        let a0 = self.value();
        let s = a0.sin().ok_or(JetError::NotExact("sin"))?;
        let c = a0.cos().ok_or(JetError::NotExact("cos"))?;
        Ok(self.periodic_series([s.clone(), c.clone(), -s, -c]))
    }

    pub fn cos(&self) -> Result<Self, JetError> {
        let a0 = self.value();
        let s = a0.sin().ok_or(JetError::NotExact("sin"))?;
        let c = a0.cos().ok_or(JetError::NotExact("cos"))?;
        Ok(self.periodic_series([c.clone(), -s.clone(), -c, s]))
    }

    pub fn exp(&self) -> Result<Self, JetError> {
        let e = self.value().exp().ok_or(JetError::NotExact("exp"))?;
        let mut coeffs = Vec::with_capacity(self.series_len());
        let mut c = e;
        for k in 0..self.series_len() {
            coeffs.push(c.clone());
            c = c / S::from_i64(k as i64 + 1);
        }
        Ok(self.compose_univariate(&coeffs))
    }
}
