use super::{Jet, JetError};
use crate::scalar::Scalar;

/// A vector of jets sharing one shape (variables, order, base point).
#[derive(Debug, Clone, PartialEq)]
pub struct JetVector<S> {
    components: Vec<Jet<S>>,
}

impl<S: Scalar> JetVector<S> {
    /// Truncates every component to the lowest order among them.
    pub fn new(components: Vec<Jet<S>>) -> Result<Self, JetError> {
        let first = components.first().ok_or(JetError::LengthMismatch)?;
        if !(2..=4).contains(&components.len()) {
            return Err(JetError::LengthMismatch);
        }
        let order = components.iter().map(Jet::order).min().unwrap_or(0);
        for c in &components[1..] {
            if c.nvars() != first.nvars() {
                return Err(JetError::VarsMismatch(first.nvars(), c.nvars()));
            }
            if c.base() != first.base() {
                return Err(JetError::BaseMismatch);
            }
        }
        Ok(JetVector {
            components: components.iter().map(|c| c.truncate(order)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Jet<S>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Jet<S> {
        &self.components[i]
    }

    pub fn order(&self) -> usize {
        self.components[0].order()
    }

    pub fn nvars(&self) -> usize {
        self.components[0].nvars()
    }

    /// Values at the base point.
    pub fn value(&self) -> Vec<S> {
        self.components.iter().map(Jet::value).collect()
    }

    pub fn partial(&self, var: usize) -> Self {
        self.map(|c| c.partial(var))
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|c| c.truncate(order))
    }

    pub fn to_f64(&self) -> JetVector<f64> {
        JetVector {
            components: self.components.iter().map(Jet::to_f64).collect(),
        }
    }

    fn map(&self, f: impl Fn(&Jet<S>) -> Jet<S>) -> Self {
        JetVector {
            components: self.components.iter().map(f).collect(),
        }
    }

    fn check_len(&self, other: &Self) -> Result<(), JetError> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(JetError::LengthMismatch)
        }
    }

    pub fn dot(&self, other: &Self) -> Result<Jet<S>, JetError> {
        self.check_len(other)?;
        let mut acc = self.components[0].try_mul(&other.components[0])?;
        for (a, b) in self.components.iter().zip(&other.components).skip(1) {
            acc = acc.try_add(&a.try_mul(b)?)?;
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> Jet<S> {
        self.dot(self).expect("same shape")
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, JetError> {
        self.check_len(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.try_add(b))
            .collect::<Result<_, _>>()?;
        Ok(JetVector { components })
    }

    /// Multiplies every component by a scalar jet.
    pub fn mul_jet(&self, factor: &Jet<S>) -> Result<Self, JetError> {
        let components = self
            .components
            .iter()
            .map(|c| c.try_mul(factor))
            .collect::<Result<_, _>>()?;
        Ok(JetVector { components })
    }

    pub fn scale(&self, factor: &S) -> Self {
        self.map(|c| c.scale(factor))
    }

    /// Divides by the length; fails when the vector vanishes at the base.
    pub fn normalize(&self) -> Result<Self, JetError> {
        let inv = self.norm_sq().sqrt()?.recip()?;
        self.mul_jet(&inv)
    }
}

fn det<S: Scalar>(m: &[Vec<&Jet<S>>]) -> Result<Jet<S>, JetError> {
    match m.len() {
        1 => Ok(m[0][0].clone()),
        2 => m[0][0].try_mul(m[1][1])?.try_sub(&m[0][1].try_mul(m[1][0])?),
        n => {
            let mut acc: Option<Jet<S>> = None;
            for col in 0..n {
                let minor: Vec<Vec<&Jet<S>>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != col)
                            .map(|(_, x)| *x)
                            .collect()
                    })
                    .collect();
                let term = m[0][col].try_mul(&det(&minor)?)?;
                acc = Some(match acc {
                    None => term,
                    Some(a) if col % 2 == 0 => a.try_add(&term)?,
                    Some(a) => a.try_sub(&term)?,
                });
            }
            Ok(acc.expect("n >= 1"))
        }
    }
}

/// Generalized cross product of `n` vectors in `n + 1` dimensions, with the
/// convention `<cross(a_1..a_n), x> = det(a_1, .., a_n, x)`.
pub fn cross<S: Scalar>(vectors: &[JetVector<S>]) -> Result<JetVector<S>, JetError> {
    let n = vectors.len();
    if !(1..=3).contains(&n) || vectors.iter().any(|v| v.len() != n + 1) {
        return Err(JetError::LengthMismatch);
    }
    let mut components = Vec::with_capacity(n + 1);
    for i in 0..=n {
        // Rows are the coordinates other than i, columns the input vectors.
        let rows: Vec<Vec<&Jet<S>>> = (0..=n)
            .filter(|&r| r != i)
            .map(|r| vectors.iter().map(|v| &v.components[r]).collect())
            .collect();
        let minor = det(&rows)?;
        components.push(if (i + n) % 2 == 0 { minor } else { minor.neg() });
    }
    JetVector::new(components)
}
