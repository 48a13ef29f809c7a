//! Experiment harness: per-cell trial loops for the product-polynomial and
//! prescribed-matrix families, the Mignotte run, and the solver dispatch the
//! CLI uses. Trials derive their seeds from (cell, index), so reruns are
//! bit-identical regardless of scheduling.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lifting::{self, LiftOptions};
use crate::linalg::RngSeed;
use crate::poly::Polynomial;
use crate::radii::{self, RadiiSolveOptions};
use crate::realeig;
use crate::report::{RootReport, SolveStatus};
use crate::signiter::{self, SignIterOptions};
use crate::sqrtmod::{self, SqrtModOptions};

use super::{
    gen_cheb_product, gen_mignotte, gen_prescribed_matrix, mean_std, oracle_roots, real_members,
    real_root_bound, TrialStats,
};

/// Which real-root solver a benchmark or CLI run drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Sign,
    SignBanded,
    Mobius,
    Cayley,
    Sqrtmod,
    Radii,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sign" => Ok(SolverKind::Sign),
            "sign-banded" => Ok(SolverKind::SignBanded),
            "mobius" => Ok(SolverKind::Mobius),
            "cayley" => Ok(SolverKind::Cayley),
            "sqrtmod" => Ok(SolverKind::Sqrtmod),
            "radii" => Ok(SolverKind::Radii),
            other => Err(Error::InvalidArgument(format!("unknown solver `{other}`"))),
        }
    }
}

/// Per-run knobs shared by the CLI and the harness.
#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub r: Option<usize>,
    pub seed: RngSeed,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub alpha: Option<f64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            r: None,
            seed: RngSeed(0),
            max_iter: None,
            tol: None,
            alpha: None,
        }
    }
}

/// Runs the selected solver on a polynomial.
pub fn solve_polynomial(kind: SolverKind, p: &Polynomial, cfg: &SolveConfig) -> Result<RootReport> {
    match kind {
        SolverKind::Sign | SolverKind::SignBanded => {
            let mut opts = SignIterOptions::default();
            if let Some(mi) = cfg.max_iter {
                opts.max_iter = mi;
            }
            if let Some(tol) = cfg.tol {
                opts.residual_tol = tol;
            }
            if kind == SolverKind::Sign {
                signiter::real_roots_sign(p, cfg.r, &opts, cfg.seed)
            } else {
                let alpha = match cfg.alpha {
                    Some(a) => a,
                    None => signiter::choose_alpha(p)?,
                };
                signiter::real_roots_sign_banded(p, alpha, &opts, cfg.seed)
            }
        }
        SolverKind::Mobius | SolverKind::Cayley => {
            let mut opts = LiftOptions::default();
            if let Some(mi) = cfg.max_iter {
                opts.max_k = mi;
            }
            if let Some(tol) = cfg.tol {
                opts.newton_tol = tol;
            }
            if kind == SolverKind::Mobius {
                lifting::mobius_real_roots(p, cfg.r, &opts)
            } else {
                lifting::cayley_real_roots(p, cfg.r, &opts)
            }
        }
        SolverKind::Sqrtmod => {
            let mut opts = SqrtModOptions::default();
            if let Some(mi) = cfg.max_iter {
                opts.max_iter = mi;
            }
            if let Some(tol) = cfg.tol {
                opts.agcd_tol = tol;
            }
            sqrtmod::real_roots_sqrtmod(p, cfg.r, &opts)
        }
        SolverKind::Radii => {
            let opts = RadiiSolveOptions {
                expected_r: cfg.r,
                select_tol: cfg.tol,
                ..RadiiSolveOptions::default()
            };
            radii::real_roots_by_radii(p, &opts)
        }
    }
}

fn cell_seed(seed: RngSeed, n: usize, r: usize, trial: usize, attempt: usize) -> RngSeed {
    seed.derive((n as u64) << 40 | (r as u64) << 24 | (trial as u64) << 4 | attempt as u64)
}

/// Random-product family table: per (n, r) cell, `trials` instances of the
/// Chebyshev-times-Gaussian product are generated, confirmed against the
/// oracle, and solved; iteration counts and worst real-root errors are
/// aggregated. Failed or incomplete runs count as failures and stay out of
/// the means.
pub fn run_table1(
    ns: &[usize],
    rs: &[usize],
    trials: usize,
    algo: SolverKind,
    seed: RngSeed,
) -> Result<Vec<TrialStats>> {
    let mut out = Vec::new();
    for &n in ns {
        for &r in rs {
            if r == 0 || r >= n {
                continue;
            }
            let mut iters = Vec::new();
            let mut bounds = Vec::new();
            let mut failures = 0usize;
            for trial in 0..trials {
                let Some((p, truth, trial_seed)) = confirmed_instance(seed, n, r, trial)? else {
                    failures += 1;
                    continue;
                };
                let cfg = SolveConfig {
                    r: None,
                    seed: trial_seed.derive(0xbeef),
                    ..SolveConfig::default()
                };
                match solve_polynomial(algo, &p, &cfg) {
                    Ok(report) if report.status == SolveStatus::Converged => {
                        let bound = real_root_bound(&truth, &report.roots);
                        if bound.is_finite() {
                            iters.push(report.iterations as f64);
                            bounds.push(bound);
                        } else {
                            failures += 1;
                        }
                    }
                    Ok(_) | Err(_) => failures += 1,
                }
            }
            let (iter_mean, iter_std) = mean_std(&iters);
            let (bound_mean, bound_std) = mean_std(&bounds);
            out.push(TrialStats {
                n,
                r,
                iter_mean,
                iter_std,
                bound_mean,
                bound_std,
                trials,
                failures,
                seed,
            });
        }
    }
    Ok(out)
}

/// Generates an instance whose declared real roots the oracle confirms;
/// resamples a few times before giving up on the trial.
fn confirmed_instance(
    seed: RngSeed,
    n: usize,
    r: usize,
    trial: usize,
) -> Result<Option<(Polynomial, Vec<f64>, RngSeed)>> {
    for attempt in 0..6 {
        let trial_seed = cell_seed(seed, n, r, trial, attempt);
        let (p, truth) = gen_cheb_product(n, r, trial_seed)?;
        let oracle = oracle_roots(&p)?;
        let confirmed = truth.iter().all(|&t| {
            oracle
                .iter()
                .any(|z| (z - num_complex::Complex64::new(t, 0.0)).norm() <= 1e-5 * (1.0 + t.abs()))
        });
        if confirmed {
            return Ok(Some((p, truth, trial_seed)));
        }
    }
    Ok(None)
}

/// Prescribed-spectrum matrix table: `trials` random `A = U^T D U` per cell,
/// solved by the dense sign iteration.
pub fn run_table2(
    ns: &[usize],
    rs: &[usize],
    trials: usize,
    seed: RngSeed,
) -> Result<Vec<TrialStats>> {
    let mut out = Vec::new();
    for &n in ns {
        for &r in rs {
            if r > n || (n - r) % 2 != 0 {
                continue;
            }
            let mut iters = Vec::new();
            let mut bounds = Vec::new();
            let mut failures = 0usize;
            for trial in 0..trials {
                let trial_seed = cell_seed(seed, n, r, trial, 0);
                let (a, truth) = gen_prescribed_matrix(n, r, trial_seed)?;
                let opts = SignIterOptions::default();
                match realeig::real_eigs_sign(&a, None, &opts, trial_seed.derive(0xfeed)) {
                    Ok(report) if report.status == SolveStatus::Converged => {
                        let bound = real_root_bound(&truth, &report.eigenvalues);
                        if bound.is_finite() {
                            iters.push(report.iterations as f64);
                            bounds.push(bound);
                        } else {
                            failures += 1;
                        }
                    }
                    Ok(_) | Err(_) => failures += 1,
                }
            }
            let (iter_mean, iter_std) = mean_std(&iters);
            let (bound_mean, bound_std) = mean_std(&bounds);
            out.push(TrialStats {
                n,
                r,
                iter_mean,
                iter_std,
                bound_mean,
                bound_std,
                trials,
                failures,
                seed,
            });
        }
    }
    Ok(out)
}

/// Outcome of one Mignotte benchmark run.
#[derive(Debug, Clone, Serialize)]
pub struct MignotteRow {
    pub n: usize,
    pub real_roots_found: usize,
    pub iterations: usize,
    pub max_error: f64,
    pub status: SolveStatus,
    pub seconds: f64,
}

/// Runs the sign-iteration driver on `x^n + (100x - 1)^3` and measures the
/// worst real-root error against the oracle.
pub fn run_mignotte(ns: &[usize], seed: RngSeed) -> Result<Vec<MignotteRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        let p = gen_mignotte(n)?;
        let truth = real_members(&oracle_roots(&p)?);
        let opts = SignIterOptions::default();
        let start = Instant::now();
        let report = signiter::real_roots_sign(&p, None, &opts, seed.derive(n as u64))?;
        let seconds = start.elapsed().as_secs_f64();
        let max_error = real_root_bound(&truth, &report.roots);
        rows.push(MignotteRow {
            n,
            real_roots_found: report.roots.len(),
            iterations: report.iterations,
            max_error,
            status: report.status,
            seconds,
        });
    }
    Ok(rows)
}

/// Mignotte rows in the shared CSV column layout.
pub fn mignotte_to_stats(rows: &[MignotteRow], seed: RngSeed) -> Vec<TrialStats> {
    rows.iter()
        .map(|row| TrialStats {
            n: row.n,
            r: row.real_roots_found,
            iter_mean: row.iterations as f64,
            iter_std: 0.0,
            bound_mean: row.max_error,
            bound_std: 0.0,
            trials: 1,
            failures: usize::from(row.status != SolveStatus::Converged),
            seed,
        })
        .collect()
}
