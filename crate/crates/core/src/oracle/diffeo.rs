//! Random polynomial diffeomorphism germs and the induced action on fronts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expr, Var};
use crate::front::{FrontError, FrontGerm, NormalSpec};
use crate::linalg::det;
use num_traits::Zero;

use crate::scalar::{Rational, Scalar};

/// Largest total degree of the random maps.
pub const MAX_DEGREE: usize = 3;

/// Smallest accepted `|det dPhi(0)|`.
pub const MIN_LINEAR_DET: f64 = 0.1;

/// Polynomial in up to four variables with rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub terms: Vec<(Vec<u8>, Rational)>,
}

impl Poly {
    pub fn derivative(&self, var: usize) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[var] > 0)
            .map(|(e, c)| {
                let mut e2 = e.clone();
                e2[var] -= 1;
                (e2, c.clone() * Rational::from_i64(e[var] as i64))
            })
            .collect();
        Poly { terms }
    }

    /// Builds `sum c * prod inputs[i]^e_i`; subexpressions of `inputs` stay
    /// shared.
    pub fn to_expr(&self, inputs: &[Expr]) -> Expr {
        let mut acc: Option<Expr> = None;
        for (e, c) in &self.terms {
            if c.is_zero() {
                continue;
            }
            let mut term = Expr::constant(c.clone());
            for (x, &k) in inputs.iter().zip(e) {
                match k {
                    0 => {}
                    1 => term = term * x.clone(),
                    k => term = term * x.pow(k as u32),
                }
            }
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.unwrap_or_else(|| Expr::int(0))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c.to_f64()
                    * x.iter().zip(e).map(|(xi, &k)| xi.powi(k as i32)).product::<f64>()
            })
            .sum()
    }
}

/// Exponents of all monomials of degree `1..=max_degree` in `n` variables.
fn monomials(n: usize, max_degree: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    fn rec(n: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for k in 0..=left {
            prefix.push(k as u8);
            rec(n, left - k, prefix, out);
            prefix.pop();
        }
    }
    rec(n, max_degree, &mut Vec::new(), &mut out);
    out.retain(|e| e.iter().any(|&k| k > 0));
    out.sort_by_key(|e| (e.iter().map(|&k| k as usize).sum::<usize>(), std::cmp::Reverse(e.clone())));
    out
}

/// Polynomial map germ `(R^n, 0) -> (R^n, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap {
    pub components: Vec<Poly>,
}

impl PolyMap {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn identity(n: usize) -> Self {
        let components = (0..n)
            .map(|i| {
                let mut e = vec![0u8; n];
                e[i] = 1;
                Poly {
                    terms: vec![(e, Rational::from_i64(1))],
                }
            })
            .collect();
        PolyMap { components }
    }

    /// Permutation of coordinates: component `i` is `x_perm[i]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let components = perm
            .iter()
            .map(|&j| {
                let mut e = vec![0u8; n];
                e[j] = 1;
                Poly {
                    terms: vec![(e, Rational::from_i64(1))],
                }
            })
            .collect();
        PolyMap { components }
    }

    /// Coefficients `k/1000` with `k` uniform in `[-500, 500]`, redrawn
    /// until the linear part has `|det| > MIN_LINEAR_DET`.
    pub fn random<R: Rng>(rng: &mut R, n: usize) -> Self {
        let monos = monomials(n, MAX_DEGREE);
        loop {
            let components: Vec<Poly> = (0..n)
                .map(|_| Poly {
                    terms: monos
                        .iter()
                        .map(|e| (e.clone(), Rational::from_ratio(rng.gen_range(-500..=500), 1000)))
                        .collect(),
                })
                .collect();
            let map = PolyMap { components };
            if map.linear_det().to_f64().abs() > MIN_LINEAR_DET {
                return map;
            }
        }
    }

    pub fn linear_part(&self) -> Vec<Vec<Rational>> {
        let n = self.dim();
        self.components
            .iter()
            .map(|p| {
                (0..n)
                    .map(|j| {
                        p.terms
                            .iter()
                            .filter(|(e, _)| e.iter().enumerate().all(|(i, &k)| k == u8::from(i == j)))
                            .map(|(_, c)| c.clone())
                            .fold(Rational::from_i64(0), |a, b| a + b)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn linear_det(&self) -> Rational {
        det(&self.linear_part())
    }

    pub fn apply(&self, inputs: &[Expr]) -> Vec<Expr> {
        self.components.iter().map(|p| p.to_expr(inputs)).collect()
    }

    /// Jacobian entries `d phi_i / d x_j` evaluated on `inputs`.
    pub fn jacobian_exprs(&self, inputs: &[Expr]) -> Vec<Vec<Expr>> {
        self.components
            .iter()
            .map(|p| (0..self.dim()).map(|j| p.derivative(j).to_expr(inputs)).collect())
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.eval(x)).collect()
    }
}

/// A right-left equivalence: `source` acts on the domain, `target` on the
/// ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffeoPair {
    pub source: PolyMap,
    pub target: PolyMap,
}

impl DiffeoPair {
    pub fn identity(dim: usize) -> Self {
        DiffeoPair {
            source: PolyMap::identity(dim),
            target: PolyMap::identity(dim + 1),
        }
    }

    /// Pair number `trial` of the stream seeded by `seed`; independent of
    /// how many other trials are drawn.
    pub fn random(seed: u64, trial: u64, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let source = PolyMap::random(&mut rng, dim);
        let target = PolyMap::random(&mut rng, dim + 1);
        DiffeoPair { source, target }
    }
}

/// How the normal is carried along a target diffeomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalTransport {
    /// `nu~ = (dT)^{-T} nu / |(dT)^{-T} nu|`, the correct rule.
    InverseTranspose,
    /// Keep `nu` unchanged; only a negative control.
    Naive,
}

fn minor(m: &[Vec<Expr>], row: usize, col: usize) -> Vec<Vec<Expr>> {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|&(j, _)| j != col)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

fn expr_det(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        1 => m[0][0].clone(),
        n => {
            let mut acc: Option<Expr> = None;
            for col in 0..n {
                let term = &m[0][col] * &expr_det(&minor(m, 0, col));
                acc = Some(match acc {
                    None => term,
                    Some(a) if col % 2 == 0 => a + term,
                    Some(a) => a - term,
                });
            }
            acc.expect("nonempty")
        }
    }
}

/// The germ `T o f o S` with its normal transported along `T` and then
/// pulled back by `S`. `(dT)^{-T}` is applied as the cofactor matrix; the
/// missing `1/det` factor disappears in the normalization.
pub fn transform_front(
    germ: &FrontGerm,
    pair: &DiffeoPair,
    transport: NormalTransport,
) -> Result<FrontGerm, FrontError> {
    let n = germ.dim();
    if pair.source.dim() != n || pair.target.dim() != n + 1 {
        return Err(FrontError::Shape(format!(
            "diffeomorphisms of dimensions {} and {} do not fit a germ of dimension {n}",
            pair.source.dim(),
            pair.target.dim()
        )));
    }
    let f = germ.map();
    let mut map = pair.target.apply(f);
    let normal = match germ.normal() {
        NormalSpec::Auto => NormalSpec::Auto,
        NormalSpec::Explicit(nu) => {
            let carried: Vec<Expr> = match transport {
                NormalTransport::Naive => nu.clone(),
                NormalTransport::InverseTranspose => {
                    let jac = pair.target.jacobian_exprs(f);
                    (0..=n)
                        .map(|i| {
                            // (cof M)_{ij} = (-1)^{i+j} det(minor_ij)
                            let mut acc: Option<Expr> = None;
                            for (j, nj) in nu.iter().enumerate() {
                                let c = expr_det(&minor(&jac, i, j)) * nj.clone();
                                acc = Some(match acc {
                                    None if (i + j) % 2 == 0 => c,
                                    None => -c,
                                    Some(a) if (i + j) % 2 == 0 => a + c,
                                    Some(a) => a - c,
                                });
                            }
                            acc.expect("nonempty")
                        })
                        .collect()
                }
            };
            let len_sq = carried
                .iter()
                .map(|c| c.pow(2))
                .reduce(|a, b| a + b)
                .expect("nonempty");
            let len = len_sq.sqrt();
            NormalSpec::Explicit(carried.into_iter().map(|c| c / len.clone()).collect())
        }
    };
    let src: Vec<Option<Expr>> = {
        let vars: Vec<Expr> = Var::ALL[..n].iter().map(|&v| Expr::var(v)).collect();
        let mut s: Vec<Option<Expr>> = pair.source.apply(&vars).into_iter().map(Some).collect();
        s.resize(3, None);
        s
    };
    let subst: [Option<Expr>; 3] = [src[0].clone(), src[1].clone(), src[2].clone()];
    map = map.iter().map(|e| e.substitute(&subst)).collect();
    let normal = match normal {
        NormalSpec::Auto => NormalSpec::Auto,
        NormalSpec::Explicit(nu) => {
            NormalSpec::Explicit(nu.iter().map(|e| e.substitute(&subst)).collect())
        }
    };
    FrontGerm::new(n, map, normal, germ.label().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::front::{sample_grid, validate_front};

    fn d4_plus() -> FrontGerm {
        let d = "sqrt(4*u^2+v^2+4)";
        let nu = [format!("2*u/{d}"), format!("v/{d}"), format!("-2/{d}")];
        let nu: Vec<&str> = nu.iter().map(String::as_str).collect();
        FrontGerm::parse(2, &["u*v", "u^2+3*v^2", "u^2*v+v^3"], Some(&nu), "d4+").unwrap()
    }

    #[test]
    fn monomial_count() {
        assert_eq!(monomials(2, 3).len(), 9);
        assert_eq!(monomials(3, 3).len(), 19);
        assert_eq!(monomials(4, 3).len(), 34);
    }

    #[test]
    fn random_maps_are_reproducible_and_invertible() {
        let a = DiffeoPair::random(42, 7, 2);
        let b = DiffeoPair::random(42, 7, 2);
        assert_eq!(a, b);
        assert_ne!(a, DiffeoPair::random(42, 8, 2));
        assert!(a.source.linear_det().to_f64().abs() > MIN_LINEAR_DET);
        assert!(a.target.linear_det().to_f64().abs() > MIN_LINEAR_DET);
        for (_, c) in a.source.components.iter().flat_map(|p| &p.terms) {
            assert!(c.to_f64().abs() <= 0.5);
        }
    }

    #[test]
    fn identity_pair_changes_nothing_numerically() {
        let g = d4_plus();
        let t = transform_front(&g, &DiffeoPair::identity(2), NormalTransport::InverseTranspose).unwrap();
        for p in sample_grid(&[0.0, 0.0], 0.2, 3) {
            let a = g.normal_jets(&p, 0).unwrap().value();
            let b = t.normal_jets(&p, 0).unwrap().value();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn coordinate_swap_permutes_the_normal() {
        let plane = FrontGerm::parse(2, &["u", "v", "-0.75*u"], Some(&["0.6", "0", "0.8"]), "").unwrap();
        let pair = DiffeoPair {
            source: PolyMap::identity(2),
            target: PolyMap::permutation(&[1, 0, 2]),
        };
        let t = transform_front(&plane, &pair, NormalTransport::InverseTranspose).unwrap();
        let nu = t.normal_jets(&[0.3, -0.2], 0).unwrap().value();
        // cof of a transposition is minus the transposition
        assert!((nu[0].abs() - 0.0).abs() < 1e-15);
        assert!((nu[1].abs() - 0.6).abs() < 1e-15);
        assert!((nu[2].abs() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn transported_normal_stays_a_front_and_naive_does_not() {
        let g = d4_plus();
        let pair = DiffeoPair::random(3, 0, 2);
        let grid = sample_grid(&[0.0, 0.0], 0.05, 3);
        let good = transform_front(&g, &pair, NormalTransport::InverseTranspose).unwrap();
        let report = validate_front(&good, &grid, 1e-10);
        assert!(report.passed, "{report:?}");
        let naive = transform_front(&g, &pair, NormalTransport::Naive).unwrap();
        let report = validate_front(&naive, &grid, 1e-10);
        assert!(!report.passed);
        assert!(report.max_orthogonality_residual > 1e-4);
    }
}
