use serde::{Deserialize, Serialize};

use super::{recover_normal, FrontError, FrontGerm, NormalSpec};
use crate::jets::JetVector;
use crate::linalg::{min_singular_value, numeric_rank, rank, to_dmatrix};
use crate::scalar::Scalar;

/// Rank threshold for the Legendrian lift `(f, nu)`.
const LIFT_RANK_TOL: f64 = 1e-8;

/// Jet-level front test at one point: every `<f_ui, nu>` vanishes as a jet
/// and `d(f, nu)` has full rank there. `f` must have order at least one more
/// than `nu`. Tolerances scale with `1 + |f_ui|`.
pub fn check_front_jets<S: Scalar>(
    f: &JetVector<S>,
    nu: &JetVector<S>,
    tol: f64,
) -> Result<(), FrontError> {
    let n = f.nvars();
    for i in 0..n {
        let fi = f.partial(i).truncate(nu.order());
        let scale = 1.0 + fi.components().iter().map(|c| c.sup_norm()).fold(0.0, f64::max);
        let pairing = fi.dot(nu)?;
        let bad = pairing
            .terms()
            .find(|(_, c)| !c.is_negligible(tol * scale))
            .map(|(alpha, c)| (alpha, c.clone()));
        if let Some((alpha, c)) = bad {
            return Err(FrontError::NotAFront(format!(
                "<f_{}, nu> has coefficient {c} at exponent {:?}",
                ["u", "v", "t"][i],
                &alpha[..n]
            )));
        }
    }
    let mut lift = super::jacobian(&f.truncate(1));
    lift.extend(super::jacobian(&nu.truncate(1)));
    let r = rank(&lift, LIFT_RANK_TOL);
    if r < n {
        return Err(FrontError::NotAFront(format!(
            "d(f, nu) has rank {r}, expected {n}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub point: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub samples: usize,
    /// Largest `| |nu| - 1 |` of the normal as supplied (0 for AUTO).
    pub max_norm_residual: f64,
    /// Largest `|<f_ui, nu>| / (1 + |f_ui|)` after normalizing.
    pub max_orthogonality_residual: f64,
    /// Smallest singular value of `d(f, nu)` seen.
    pub min_lift_singular_value: f64,
    pub failures: Vec<SampleFailure>,
    pub passed: bool,
}

struct Sample {
    norm: f64,
    orth: f64,
    lift_sv: f64,
    lift_rank: usize,
}

fn sample(germ: &FrontGerm, p: &[f64]) -> Result<Sample, FrontError> {
    let n = germ.dim();
    let f = germ.map_jets(p, 1)?;
    let (norm, nu) = match germ.normal() {
        NormalSpec::Explicit(_) => {
            let raw = germ.raw_normal_jets(p, 1)?.expect("explicit");
            let len = raw.value().iter().map(|x| x * x).sum::<f64>().sqrt();
            ((len - 1.0).abs(), raw.normalize()?)
        }
        NormalSpec::Auto => (0.0, recover_normal(germ, p, 1)?.0),
    };
    let nu0 = nu.value();
    let orth = (0..n)
        .map(|i| {
            let fi = f.partial(i).value();
            let dot: f64 = fi.iter().zip(&nu0).map(|(a, b)| a * b).sum();
            let len = fi.iter().map(|x| x * x).sum::<f64>().sqrt();
            dot.abs() / (1.0 + len)
        })
        .fold(0.0, f64::max);
    let mut lift = super::jacobian(&f);
    lift.extend(super::jacobian(&nu));
    let lift = to_dmatrix(&lift);
    Ok(Sample {
        norm,
        orth,
        lift_sv: min_singular_value(&lift),
        lift_rank: numeric_rank(&lift, LIFT_RANK_TOL),
    })
}

/// Pointwise checks of the front conditions on sample points: unit normal,
/// orthogonality to `df`, and immersivity of `(f, nu)`.
pub fn validate_front(germ: &FrontGerm, samples: &[Vec<f64>], tol: f64) -> ValidationReport {
    let mut report = ValidationReport {
        samples: samples.len(),
        max_norm_residual: 0.0,
        max_orthogonality_residual: 0.0,
        min_lift_singular_value: f64::INFINITY,
        failures: Vec::new(),
        passed: true,
    };
    for p in samples {
        let mut fail = |reason: String| {
            report.failures.push(SampleFailure {
                point: p.clone(),
                reason,
            })
        };
        match sample(germ, p) {
            Err(e) => fail(e.to_string()),
            Ok(s) => {
                if s.norm > tol {
                    fail(format!("normal is not unit (| |nu| - 1 | = {:e})", s.norm));
                }
                if s.orth > tol {
                    fail(format!("normal is not orthogonal to df (residual {:e})", s.orth));
                }
                if s.lift_rank < germ.dim() {
                    fail(format!(
                        "(f, nu) is not an immersion (smallest singular value {:e})",
                        s.lift_sv
                    ));
                }
                report.max_norm_residual = report.max_norm_residual.max(s.norm);
                report.max_orthogonality_residual = report.max_orthogonality_residual.max(s.orth);
                report.min_lift_singular_value = report.min_lift_singular_value.min(s.lift_sv);
            }
        }
    }
    if report.min_lift_singular_value.is_infinite() {
        report.min_lift_singular_value = 0.0;
    }
    report.passed = report.failures.is_empty();
    report
}

/// Regular grid of `per_axis^dim` points in the cube of half-width `radius`
/// around `center`.
pub fn sample_grid(center: &[f64], radius: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let ticks: Vec<f64> = match per_axis {
        0 => Vec::new(),
        1 => vec![0.0],
        k => (0..k)
            .map(|i| -radius + 2.0 * radius * i as f64 / (k - 1) as f64)
            .collect(),
    };
    let mut points = vec![Vec::new()];
    for &c in center {
        points = points
            .into_iter()
            .flat_map(|p| {
                ticks.iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(c + t);
                    q
                })
            })
            .collect();
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    const DELTA: &str = "sqrt(4*u^2+v^2+4)";

    fn d4_explicit() -> FrontGerm {
        let nu = [
            format!("2*u/{DELTA}"),
            format!("v/{DELTA}"),
            format!("-2/{DELTA}"),
        ];
        let nu: Vec<&str> = nu.iter().map(String::as_str).collect();
        FrontGerm::parse(2, &["u*v", "u^2+3*v^2", "u^2*v+v^3"], Some(&nu), "").unwrap()
    }

    #[test]
    fn d4_passes() {
        let report = validate_front(&d4_explicit(), &sample_grid(&[0.0, 0.0], 0.1, 5), 1e-10);
        assert!(report.passed, "{report:?}");
        assert_eq!(report.samples, 25);
        let auto = d4_explicit().with_normal(NormalSpec::Auto).unwrap();
        let report = validate_front(&auto, &sample_grid(&[0.0, 0.0], 0.1, 5), 1e-10);
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn constant_normal_on_cuspidal_edge_fails() {
        let g = FrontGerm::parse(2, &["u", "v^2", "v^3"], Some(&["0", "0", "1"]), "").unwrap();
        let report = validate_front(&g, &sample_grid(&[0.0, 0.0], 0.1, 3), 1e-10);
        assert!(!report.passed);
        assert!(report.failures.iter().any(|f| f.reason.contains("orthogonal")));
    }

    #[test]
    fn non_unit_normal_fails() {
        let g = FrontGerm::parse(2, &["u", "v", "0"], Some(&["0", "0", "2"]), "").unwrap();
        let report = validate_front(&g, &[vec![0.0, 0.0]], 1e-10);
        assert!(!report.passed);
        assert!((report.max_norm_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jet_check_at_d4() {
        let g = d4_explicit();
        let o = [Rational::from_i64(0), Rational::from_i64(0)];
        let f = g.map_jets(&o, 5).unwrap();
        let nu = g.normal_jets(&o, 4).unwrap();
        check_front_jets(&f, &nu, 1e-9).unwrap();
        let bad = FrontGerm::parse(2, &["u", "v^2", "v^3"], Some(&["0", "0", "1"]), "").unwrap();
        let f = bad.map_jets(&o, 5).unwrap();
        let nu = bad.normal_jets(&o, 4).unwrap();
        assert!(matches!(check_front_jets(&f, &nu, 1e-9), Err(FrontError::NotAFront(_))));
    }

    #[test]
    fn grid_shape() {
        let g = sample_grid(&[1.0, 2.0, 3.0], 0.5, 3);
        assert_eq!(g.len(), 27);
        assert_eq!(g[0], vec![0.5, 1.5, 2.5]);
        assert_eq!(g[26], vec![1.5, 2.5, 3.5]);
    }
}
