//! The square-root modular iteration: the polynomial-side dual of the sign
//! iteration, running the same recurrence on residues mod `p(x)` and
//! splitting the nonreal factor off with an approximate GCD instead of a
//! randomized projection. Numerically fragile by design when no real roots
//! exist — the residue `y^2 + 1` then has to vanish at every root, which
//! collapses its whole coefficient vector; the driver detects and reports
//! that instability.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frobenius::{alg_inv, alg_mul, generator, CompanionMatrix, FrobeniusElement};
use crate::lifting::real_all_roots;
use crate::poly::Polynomial;
use crate::radii::newton_refine;
use crate::report::{RootReport, SolveStatus};

/// Result of an approximate GCD computation.
#[derive(Debug, Clone)]
pub struct AgcdResult {
    pub g: Polynomial,
    /// Largest relative division remainder of the two inputs by `g`.
    pub residual: f64,
    pub degree: usize,
}

/// One modular square-root step `y <- (y - 1/y)/2 mod p`; identical algebra
/// to the sign iteration's step, kept as its own entry point.
pub fn sqrt_mod_step(y: &FrobeniusElement) -> Result<FrobeniusElement> {
    let inv = alg_inv(y)?;
    Ok(y.sub(&inv)?.scale(Complex64::new(0.5, 0.0)))
}

/// Approximate greatest common divisor by the Euclidean remainder sequence
/// with per-step normalization: the first remainder whose norm falls below
/// `tol` (relative to unit-normalized inputs) ends the sequence, and its
/// predecessor, made monic, is the answer. Coprime inputs run down to a
/// constant and report degree 0 with residual 0.
pub fn agcd(u: &Polynomial, v: &Polynomial, tol: f64) -> Result<AgcdResult> {
    if u.is_zero() || v.is_zero() {
        return Err(Error::InvalidArgument("agcd of a zero polynomial".into()));
    }
    let (mut a, mut b) = if u.degree() >= v.degree() {
        (u.normalized_inf(), v.normalized_inf())
    } else {
        (v.normalized_inf(), u.normalized_inf())
    };
    let g = loop {
        if b.degree() == 0 {
            break Polynomial::one();
        }
        let (_, rem) = a.divrem(&b)?;
        let rel = rem.norm_inf() / a.norm_inf().max(1.0);
        if rem.is_zero() || rel <= tol {
            break b.monic();
        }
        a = b;
        b = rem.normalized_inf();
    };
    let residual = division_residual(u, &g)?.max(division_residual(v, &g)?);
    Ok(AgcdResult {
        degree: g.degree(),
        g,
        residual,
    })
}

fn division_residual(p: &Polynomial, g: &Polynomial) -> Result<f64> {
    if g.degree() == 0 {
        return Ok(0.0);
    }
    let (_, rem) = p.divrem(g)?;
    Ok(rem.norm_inf() / p.norm_inf().max(1e-300))
}

/// Options for [`real_roots_sqrtmod`].
#[derive(Debug, Clone)]
pub struct SqrtModOptions {
    pub max_iter: usize,
    /// agcd tolerance, relative; the sweep of degrees seen per check is kept
    /// in the trace for diagnosis.
    pub agcd_tol: f64,
    /// Collapse threshold: `||t_k|| / ||p||` below this raises
    /// `InstabilityDetected`.
    pub collapse_tol: f64,
    /// Checks run every this many iterations.
    pub cadence: usize,
    pub refine: bool,
}

impl Default for SqrtModOptions {
    fn default() -> Self {
        SqrtModOptions {
            max_iter: 60,
            agcd_tol: 1e-7,
            collapse_tol: 1e-6,
            cadence: 3,
            refine: true,
        }
    }
}

/// Real root-finding by the modular square-root iteration: periodically form
/// `t_k = y_k^2 + 1 mod p` and `g_k = agcd(p, t_k)`; once `deg g_k` reaches
/// `n - r`, the quotient `p / g_k` is the all-real factor and its roots are
/// the answer. With no real roots at all, `t_k` collapses entirely and the
/// run aborts with `InstabilityDetected`.
pub fn real_roots_sqrtmod(
    p: &Polynomial,
    r: Option<usize>,
    opts: &SqrtModOptions,
) -> Result<RootReport> {
    if !p.is_real() {
        return Err(Error::PreconditionViolated(
            "real_roots_sqrtmod expects a real polynomial".into(),
        ));
    }
    let n = p.degree();
    if n == 0 {
        return Ok(RootReport::empty(0, 0.0, SolveStatus::Converged));
    }
    let cp = CompanionMatrix::new(p)?;
    let modulus = cp.modulus().clone();
    let mut y = generator(&cp);
    let mut last_degree: Option<usize> = None;
    for h in 1..=opts.max_iter {
        y = sqrt_mod_step(&y)?;
        if h % opts.cadence != 0 {
            continue;
        }
        let t = alg_mul(&y, &y)?.shift(Complex64::new(1.0, 0.0));
        let ratio = t.residue().norm_inf() / modulus.norm_inf().max(1e-300);
        if ratio < opts.collapse_tol {
            return Err(Error::InstabilityDetected {
                iteration: h,
                ratio,
            });
        }
        let gcd = agcd(&modulus, t.residue(), opts.agcd_tol)?;
        let target_met = match r {
            Some(real_count) => gcd.degree == n - real_count,
            None => {
                let stable = last_degree == Some(gcd.degree);
                last_degree = Some(gcd.degree);
                stable && (n - gcd.degree) > 0
            }
        };
        if !target_met {
            continue;
        }
        let (v, rem) = modulus.divrem(&gcd.g)?;
        let division_residual = rem.norm_inf() / modulus.norm_inf().max(1e-300);
        let mut roots = match real_all_roots(&v.realified(1e-8), 1e-12) {
            Ok(roots) => roots,
            Err(_) => continue,
        };
        if opts.refine {
            for x in roots.iter_mut() {
                let polished = newton_refine(p, Complex64::new(*x, 0.0), 1e-13, 50);
                if (polished.x.re - *x).abs() <= 0.25 * (1.0 + x.abs()) {
                    *x = polished.x.re;
                }
            }
        }
        return Ok(RootReport::new(
            roots,
            h,
            division_residual,
            SolveStatus::Converged,
        ));
    }
    Ok(RootReport::empty(opts.max_iter, f64::NAN, SolveStatus::Partial))
}
