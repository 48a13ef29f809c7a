//! Solver reports shared by the root-finding and eigen-solving drivers.

use serde::Serialize;

/// Outcome of a driver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    /// The projection residual passed its tolerance and the requested roots
    /// were extracted.
    Converged,
    /// The run ended without a passing residual check.
    Failure,
    /// The run produced a usable but incomplete answer (iteration cap,
    /// truncation never firing, a missing candidate, ...).
    Partial,
}

/// Result of a real root-finding driver.
#[derive(Debug, Clone, Serialize)]
pub struct RootReport {
    /// Approximations to the real roots, ascending.
    pub roots: Vec<f64>,
    /// Number of iterations (sign steps, lifting levels, ...) performed.
    pub iterations: usize,
    /// Residual of the final projection or division check.
    pub residual: f64,
    pub status: SolveStatus,
    /// Imaginary-part estimates matching `roots`, reported by the near-real
    /// drivers; `None` for plain real solvers.
    pub imag_estimates: Option<Vec<f64>>,
}

impl RootReport {
    pub fn new(mut roots: Vec<f64>, iterations: usize, residual: f64, status: SolveStatus) -> Self {
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        RootReport {
            roots,
            iterations,
            residual,
            status,
            imag_estimates: None,
        }
    }

    pub fn empty(iterations: usize, residual: f64, status: SolveStatus) -> Self {
        RootReport::new(Vec::new(), iterations, residual, status)
    }
}

/// Result of a real eigenvalue driver.
#[derive(Debug, Clone, Serialize)]
pub struct EigReport {
    /// Approximations to the real eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Sign-iteration count, or the filter order `m` for the factored driver.
    pub iterations: usize,
    pub residual: f64,
    pub status: SolveStatus,
}

impl EigReport {
    pub fn new(
        mut eigenvalues: Vec<f64>,
        iterations: usize,
        residual: f64,
        status: SolveStatus,
    ) -> Self {
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
        EigReport {
            eigenvalues,
            iterations,
            residual,
            status,
        }
    }
}
