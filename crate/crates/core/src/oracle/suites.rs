//! Seeded verification suites. Each trial draws its randomness from its own
//! ChaCha stream, so results do not depend on scheduling or trial count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cubic_root_count, transform_front, CatalogEntry, DiffeoPair, NormalTransport};
use crate::criteria::{classify_f64, delta_phi, ClassificationOptions, ClassificationReport, Verdict};
use crate::exec::{map_indices, Execution};
use crate::front::{sample_grid, validate_front, FrontGerm};

/// Sampling of the validation check run on every transformed germ.
const VALIDATE_RADIUS: f64 = 0.02;
const VALIDATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub entry: String,
    pub seed: u64,
    pub trial: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub seed: u64,
    pub trials: u64,
    pub runs: usize,
    pub passed_runs: usize,
    pub failures: Vec<Counterexample>,
    pub passed: bool,
}

impl SuiteSummary {
    fn collect(suite: &str, seed: u64, trials: u64, results: Vec<Result<(), Counterexample>>) -> Self {
        let runs = results.len();
        let failures: Vec<Counterexample> = results.into_iter().filter_map(Result::err).collect();
        SuiteSummary {
            suite: suite.to_string(),
            seed,
            trials,
            runs,
            passed_runs: runs - failures.len(),
            passed: failures.is_empty(),
            failures,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "suite: {}\nseed: {}\nruns: {}/{} passed\n",
            self.suite, self.seed, self.passed_runs, self.runs
        );
        for f in &self.failures {
            out.push_str(&format!(
                "counterexample: entry={} seed={} trial={}: {}\n",
                f.entry, f.seed, f.trial, f.message
            ));
        }
        out.push_str(if self.passed { "result: PASS\n" } else { "result: FAIL\n" });
        out
    }
}

fn sign(x: f64, tol: f64) -> i8 {
    if x.abs() <= tol {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

fn origin_report(germ: &FrontGerm, opts: &ClassificationOptions) -> Result<ClassificationReport, String> {
    classify_f64(germ, &vec![0.0; germ.dim()], opts).map_err(|e| e.to_string())
}

/// Checks shared by the invariance and identity suites on one germ.
fn check_rank_zero_identity(r: &ClassificationReport, tol: f64) -> Result<(), String> {
    let (Some(h), Some(d)) = (r.hess_det, r.delta_phi) else {
        return Err("Hessian or discriminant missing".into());
    };
    let (sh, sd) = (sign(h, tol), sign(d, tol));
    if sh == 0 || sd == 0 || sh != -sd {
        return Err(format!("sign identity fails: det Hess = {h}, delta_phi = {d}"));
    }
    Ok(())
}

fn invariance_trial(
    entry: CatalogEntry,
    base: &ClassificationReport,
    seed: u64,
    trial: u64,
    opts: &ClassificationOptions,
) -> Result<(), String> {
    let germ = entry.germ();
    let pair = DiffeoPair::random(seed, trial, germ.dim());
    let image = transform_front(&germ, &pair, NormalTransport::InverseTranspose).map_err(|e| e.to_string())?;
    let grid = sample_grid(&vec![0.0; germ.dim()], VALIDATE_RADIUS, 3);
    let v = validate_front(&image, &grid, VALIDATE_TOL);
    if !v.passed {
        return Err(format!("image fails front validation: {}", v.failures[0].reason));
    }
    let r = origin_report(&image, opts)?;
    if r.verdict != base.verdict {
        return Err(format!("verdict changed from {} to {}", base.verdict, r.verdict));
    }
    if let (Some(h0), Some(h)) = (base.hess_det, r.hess_det) {
        if sign(h0, opts.tol) != sign(h, opts.tol) {
            return Err(format!("sign of det Hess changed: {h0} vs {h}"));
        }
    }
    if germ.dim() == 2 && r.rank == 0 {
        check_rank_zero_identity(&r, opts.tol)?;
    }
    if matches!(r.verdict, Verdict::D4Plus | Verdict::D4Minus) && r.second_fundamental_immersion != Some(true) {
        return Err("(h11, h12, h22) is not an immersion".into());
    }
    Ok(())
}

/// Applies `trials` random right-left equivalences to each entry and checks
/// that the classification and its supporting signs do not move.
pub fn invariance_suite(
    seed: u64,
    trials: u64,
    entries: &[CatalogEntry],
    opts: &ClassificationOptions,
    exec: Execution,
) -> SuiteSummary {
    let bases: Vec<Result<ClassificationReport, String>> =
        entries.iter().map(|e| origin_report(&e.germ(), opts)).collect();
    let n = entries.len() * trials as usize;
    let results = map_indices(exec, n, |k| {
        let (i, trial) = (k / trials as usize, (k % trials as usize) as u64);
        let entry = entries[i];
        let outcome = match &bases[i] {
            Err(e) => Err(format!("untransformed germ fails: {e}")),
            Ok(base) => invariance_trial(entry, base, seed, trial, opts),
        };
        outcome.map_err(|message| Counterexample {
            entry: entry.name().to_string(),
            seed,
            trial,
            message,
        })
    });
    SuiteSummary::collect("invariance", seed, trials, results)
}

/// `sign det Hess lambda = -sign Delta_phi` on the rank-zero catalog germs
/// and `trials` random images of each.
pub fn identity_suite(seed: u64, trials: u64, opts: &ClassificationOptions, exec: Execution) -> SuiteSummary {
    let entries = CatalogEntry::RANK_ZERO;
    let per_entry = trials as usize + 1;
    let results = map_indices(exec, entries.len() * per_entry, |k| {
        let entry = entries[k / per_entry];
        let j = k % per_entry;
        // Slot 0 is the germ itself, slot j >= 1 is random trial j - 1.
        let trial = j.saturating_sub(1) as u64;
        let outcome = (|| {
            let germ = entry.germ();
            let germ = if j == 0 {
                germ
            } else {
                let pair = DiffeoPair::random(seed, trial, 2);
                transform_front(&germ, &pair, NormalTransport::InverseTranspose).map_err(|e| e.to_string())?
            };
            let r = origin_report(&germ, opts)?;
            if r.rank != 0 {
                return Err(format!("rank df = {}", r.rank));
            }
            check_rank_zero_identity(&r, opts.tol)
        })();
        outcome.map_err(|message| Counterexample {
            entry: if j == 0 {
                entry.name().to_string()
            } else {
                format!("{} (image)", entry.name())
            },
            seed,
            trial,
            message,
        })
    });
    SuiteSummary::collect("identity", seed, trials, results)
}

/// Coefficients `(a, b, c, d)` of the binary cubic for one trial, uniform in
/// `[-1, 1]`.
pub fn random_cubic(seed: u64, trial: u64) -> [f64; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    [0; 4].map(|_| rng.gen_range(-1.0..=1.0))
}

/// The sign of the discriminant against the real root count of
/// `a u^3 + b u^2 v + c u v^2 + d v^3`.
pub fn discriminant_suite(seed: u64, trials: u64, tol: f64, exec: Execution) -> SuiteSummary {
    let results = map_indices(exec, trials as usize, |k| {
        let trial = k as u64;
        let [a, b, c, d] = random_cubic(seed, trial);
        // Third derivatives of the cubic.
        let dp = delta_phi(&(6.0 * a), &(2.0 * b), &(2.0 * c), &(6.0 * d));
        let outcome = match cubic_root_count(a, b, c, d) {
            Err(e) => Err(e.to_string()),
            Ok(count) => {
                let ok = match sign(dp, tol) {
                    -1 => count == 3,
                    1 => count == 1,
                    _ => count == 1 || count == 2,
                };
                if ok {
                    Ok(())
                } else {
                    Err(format!(
                        "cubic ({a}, {b}, {c}, {d}): delta_phi = {dp} but {count} real roots"
                    ))
                }
            }
        };
        outcome.map_err(|message| Counterexample {
            entry: "cubic".into(),
            seed,
            trial,
            message,
        })
    });
    SuiteSummary::collect("discriminant", seed, trials, results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ScalarMode;

    fn float_opts() -> ClassificationOptions {
        ClassificationOptions {
            mode: ScalarMode::Float,
            ..Default::default()
        }
    }

    #[test]
    fn small_invariance_run() {
        let s = invariance_suite(1, 3, &CatalogEntry::RANK_ZERO, &float_opts(), Execution::Sequential);
        assert!(s.passed, "{}", s.to_text());
        assert_eq!(s.runs, 9);
    }

    #[test]
    fn small_identity_run() {
        let s = identity_suite(5, 2, &float_opts(), Execution::Parallel);
        assert!(s.passed, "{}", s.to_text());
        assert_eq!(s.runs, 9);
    }

    #[test]
    fn discriminant_run() {
        let s = discriminant_suite(11, 200, 1e-9, Execution::Parallel);
        assert!(s.passed, "{}", s.to_text());
    }

    #[test]
    fn cubics_are_reproducible() {
        assert_eq!(random_cubic(3, 4), random_cubic(3, 4));
        assert_ne!(random_cubic(3, 4), random_cubic(3, 5));
    }
}
