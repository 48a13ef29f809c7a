//! Root-radii estimation from the Newton polygon of a repeatedly
//! root-squared polynomial, proximity tests, Newton refinement, and the
//! root-finder that combines them: estimated radii give `2n` real
//! candidates, proximity tests select the survivors, and concurrent Newton
//! iterations polish them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{Polynomial, TRIM_REL};
use crate::report::{RootReport, SolveStatus};

/// Per-index root radii bounds.
#[derive(Debug, Clone)]
pub struct RadiiEstimate {
    /// Estimated root magnitudes, nonincreasing, one per root.
    pub radii: Vec<f64>,
    /// Guaranteed ratio between over- and under-estimates: `(2n)^(1/2^k)`
    /// for the number of squarings actually applied.
    pub relative_width: f64,
    /// Squarings actually applied (less than requested when a coefficient
    /// collapsed).
    pub applied_squarings: usize,
}

/// `gamma = max_i |p_{n-i}/p_n|^{1/i}`; the largest root radius lies in
/// `[gamma/n, 2 gamma]`.
pub fn extreme_radius_bounds(p: &Polynomial) -> Result<(f64, f64)> {
    if p.is_zero() {
        return Err(Error::InvalidArgument(
            "extreme_radius_bounds of zero polynomial".into(),
        ));
    }
    let n = p.degree();
    if n == 0 {
        return Ok((0.0, 0.0));
    }
    let lead = p.leading().norm();
    let mut gamma = 0.0f64;
    for i in 1..=n {
        let ratio = p.coeff(n - i).norm() / lead;
        if ratio > 0.0 {
            gamma = gamma.max(ratio.powf(1.0 / i as f64));
        }
    }
    Ok((gamma / n as f64, 2.0 * gamma))
}

/// Root squaring on raw coefficient vectors: no trimming (tiny endpoint
/// coefficients carry the radii information) and an infinity-norm rescale
/// per step so repeated squaring cannot overflow.
fn graeffe_raw(q: &[Complex64]) -> Vec<Complex64> {
    let n = q.len() - 1;
    let even: Vec<Complex64> = q.iter().step_by(2).copied().collect();
    let odd: Vec<Complex64> = q.iter().skip(1).step_by(2).copied().collect();
    // p(x) = E(x^2) + x O(x^2), so the squared-root image in y = x^2 is
    // E(y)^2 - y O(y)^2.
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    for (i, &a) in even.iter().enumerate() {
        for (j, &b) in even.iter().enumerate() {
            if i + j <= n {
                out[i + j] += a * b;
            }
        }
    }
    for (i, &a) in odd.iter().enumerate() {
        for (j, &b) in odd.iter().enumerate() {
            if i + j + 1 <= n {
                out[i + j + 1] -= a * b;
            }
        }
    }
    let scale = out.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        for c in &mut out {
            *c /= scale;
        }
    }
    out
}

/// Upper convex hull of `(i, ln|q_i|)`, evaluated at every integer index.
fn upper_hull_heights(q: &[Complex64]) -> Vec<f64> {
    let n = q.len() - 1;
    let pts: Vec<(f64, f64)> = q
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(i, c)| (i as f64, c.norm().ln()))
        .collect();
    // Monotone chain, keeping only upward-convex vertices.
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // remove b when it lies below segment a-p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut heights = vec![f64::NEG_INFINITY; n + 1];
    let mut seg = 0;
    for i in 0..=n {
        let x = i as f64;
        while seg + 1 < hull.len() && hull[seg + 1].0 < x {
            seg += 1;
        }
        if seg + 1 >= hull.len() {
            heights[i] = hull[hull.len() - 1].1;
        } else {
            let (x0, y0) = hull[seg];
            let (x1, y1) = hull[seg + 1];
            heights[i] = y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    heights
}

/// All `n` root radii after `k` root-squaring steps, de-squared back through
/// the exponent `1/2^k`. The estimates tighten as `(2n)^(1/2^k)`.
pub fn all_root_radii(p: &Polynomial, k: usize) -> Result<RadiiEstimate> {
    let n = p.degree();
    if p.is_zero() || n == 0 {
        return Err(Error::InvalidArgument(
            "all_root_radii needs positive degree".into(),
        ));
    }
    if p.coeff(0).norm() <= TRIM_REL * p.norm_inf() {
        return Err(Error::DegenerateInput(
            "all_root_radii requires p(0) != 0 (deflate zero roots first)".into(),
        ));
    }
    let mut q = p.normalized_inf().coeffs().to_vec();
    let mut applied = 0usize;
    for _ in 0..k {
        let next = graeffe_raw(&q);
        // A collapsed endpoint coefficient would corrupt the de-squared
        // estimates; stop and report the usable number of squarings.
        let lead = next[n].norm();
        let tail = next[0].norm();
        if lead <= 1e-280 || tail <= 1e-280 {
            break;
        }
        q = next;
        applied += 1;
    }
    let heights = upper_hull_heights(&q);
    let descale = 1.0 / (1u64 << applied.min(62)) as f64;
    let mut radii = Vec::with_capacity(n);
    for j in 1..=n {
        let log_r = (heights[n - j] - heights[n - j + 1]) * descale;
        radii.push(log_r.exp());
    }
    // The hull is concave, so the slopes are already sorted; enforce it
    // against rounding ties anyway.
    radii.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(RadiiEstimate {
        radii,
        relative_width: (2.0 * n as f64).powf(descale),
        applied_squarings: applied,
    })
}

/// Default number of squarings: enough for a relative width of roughly
/// `1 + O(1/n)`.
pub fn default_squarings(n: usize) -> usize {
    (n.max(2) as f64).log2().ceil() as usize + 2
}

/// Estimates the distance from `c` to the nearest root of `p`: the smaller
/// of the reversed-shift radius bound `n / gamma` and the Newton quotient
/// bound `n |p(c)/p'(c)|`. A `budget` above 1 first walks up to `budget - 1`
/// Newton steps (capped so the walk stays local) and estimates at the
/// endpoint: the heuristic basin test, which accepts a candidate whose
/// Newton iteration homes in on a nearby root. Returns infinity when no
/// estimator applies.
pub fn proximity_test(p: &Polynomial, c: Complex64, budget: usize) -> f64 {
    let n = p.degree();
    if n == 0 {
        return f64::INFINITY;
    }
    let deriv = p.derivative();
    let walk_cap = 0.5 * (1.0 + c.norm());
    let mut point = c;
    let mut walked = 0.0f64;
    for _ in 1..budget.max(1) {
        let pv = p.eval(point);
        let dv = deriv.eval(point);
        if dv.norm() == 0.0 || pv.norm() == 0.0 {
            break;
        }
        let step = pv / dv;
        if !step.norm().is_finite() || walked + step.norm() > walk_cap {
            break;
        }
        point -= step;
        walked += step.norm();
    }

    let mut best = f64::INFINITY;
    let pv = p.eval(point);
    if pv.norm() == 0.0 {
        return walked;
    }
    let dv = deriv.eval(point);
    if dv.norm() > 0.0 {
        best = best.min(n as f64 * (pv / dv).norm());
    }
    // Shift so the walked point sits at the origin, reverse to invert the
    // distances, and bound the largest inverted radius from below.
    if let Ok(shifted) = p.shift_scale(Complex64::new(1.0, 0.0), point) {
        let rev = shifted.reverse();
        if rev.degree() >= 1 {
            let lead = rev.leading().norm();
            if lead > 0.0 {
                let m = rev.degree();
                let mut gamma = 0.0f64;
                for i in 1..=m {
                    let ratio = rev.coeff(m - i).norm() / lead;
                    if ratio > 0.0 {
                        gamma = gamma.max(ratio.powf(1.0 / i as f64));
                    }
                }
                if gamma > 0.0 {
                    best = best.min(n as f64 / gamma);
                }
            }
        }
    }
    best
}

/// Outcome of a Newton refinement run.
#[derive(Debug, Clone, Copy)]
pub struct NewtonOutcome {
    pub x: Complex64,
    /// True when the last step satisfied `|step| <= tol (1 + |x|)`.
    pub converged: bool,
    pub iterations: usize,
    /// Ratio of the last two step sizes; near-constant ratios in (0,1)
    /// indicate a multiple root (linear convergence).
    pub step_ratio: f64,
    pub suspected_multiple: bool,
}

/// Newton's iteration from `x0`. Near a simple well-isolated root the error
/// squares every step; near a multiple root the step-ratio monitor trips.
pub fn newton_refine(p: &Polynomial, x0: Complex64, tol: f64, max_iter: usize) -> NewtonOutcome {
    let deriv = p.derivative();
    let mut x = x0;
    let mut prev_step: Option<f64> = None;
    let mut ratio = 0.0;
    let mut linear_count = 0usize;
    for it in 1..=max_iter.max(1) {
        let pv = p.eval(x);
        let dv = deriv.eval(x);
        if dv.norm() == 0.0 {
            return NewtonOutcome {
                x,
                converged: pv.norm() == 0.0,
                iterations: it,
                step_ratio: ratio,
                suspected_multiple: false,
            };
        }
        let step = pv / dv;
        x -= step;
        let s = step.norm();
        if let Some(prev) = prev_step {
            if prev > 0.0 {
                ratio = s / prev;
                if (0.3..0.97).contains(&ratio) {
                    linear_count += 1;
                } else {
                    linear_count = 0;
                }
            }
        }
        prev_step = Some(s);
        if s <= tol * (1.0 + x.norm()) {
            return NewtonOutcome {
                x,
                converged: true,
                iterations: it,
                step_ratio: ratio,
                suspected_multiple: linear_count >= 4,
            };
        }
    }
    NewtonOutcome {
        x,
        converged: false,
        iterations: max_iter,
        step_ratio: ratio,
        suspected_multiple: linear_count >= 4,
    }
}

/// Radius below which a computed root cannot be distinguished from a real
/// one at working precision: the Newton step noise `3 eps sum|p_i||x|^i /
/// |p'(x)|`.
pub fn newton_noise_radius(p: &Polynomial, x: Complex64) -> f64 {
    let dv = p.derivative().eval(x).norm();
    if dv == 0.0 {
        return f64::INFINITY;
    }
    3.0 * f64::EPSILON * p.eval_magnitude_sum(x) / dv
}

/// Options for [`real_roots_by_radii`].
#[derive(Debug, Clone)]
pub struct RadiiSolveOptions {
    /// Squaring count; defaults to `ceil(log2 n) + 2`.
    pub squarings: Option<usize>,
    /// Proximity acceptance threshold; defaults to `1e-3 * max radius`.
    pub select_tol: Option<f64>,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// When known, the expected number of real roots; fewer survivors make
    /// the report Partial.
    pub expected_r: Option<usize>,
}

impl Default for RadiiSolveOptions {
    fn default() -> Self {
        RadiiSolveOptions {
            squarings: None,
            select_tol: None,
            newton_tol: 1e-12,
            max_newton: 60,
            expected_r: None,
        }
    }
}

/// Real root-finding by root-radii approximation: the `2n` candidates
/// `+-r_j` are screened by the proximity test, deduplicated, and the
/// survivors refined by Newton's iteration (independent candidates, so the
/// refinements could run concurrently; they are order-insensitive).
pub fn real_roots_by_radii(p: &Polynomial, opts: &RadiiSolveOptions) -> Result<RootReport> {
    if !p.is_real() {
        return Err(Error::PreconditionViolated(
            "real_roots_by_radii expects a real polynomial".into(),
        ));
    }
    // Factor out exact zero roots up front.
    let (zero_mult, reduced) = deflate_zero_roots(p);
    let mut roots: Vec<f64> = vec![0.0; zero_mult];
    let n = reduced.degree();
    if n == 0 {
        let status = status_for(&roots, opts.expected_r);
        return Ok(RootReport::new(roots, 0, 0.0, status));
    }

    let k = opts.squarings.unwrap_or_else(|| default_squarings(n));
    let estimate = all_root_radii(&reduced, k)?;
    let max_radius = estimate.radii.first().copied().unwrap_or(1.0);
    let select_tol = opts.select_tol.unwrap_or(1e-3 * max_radius.max(1e-300));

    let mut candidates: Vec<f64> = Vec::with_capacity(2 * n);
    for &r in &estimate.radii {
        candidates.push(r);
        candidates.push(-r);
    }
    // Screen by proximity, tie-breaking toward the smaller |p(c)|.
    let mut selected: Vec<f64> = Vec::new();
    for &c in &candidates {
        let z = Complex64::new(c, 0.0);
        if proximity_test(&reduced, z, 4) <= select_tol * (1.0 + c.abs()) {
            selected.push(c);
        }
    }
    selected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    selected.dedup_by(|a, b| {
        if (*a - *b).abs() <= 1e-9 * (1.0 + a.abs()) {
            let pa = reduced.eval(Complex64::new(*a, 0.0)).norm();
            let pb = reduced.eval(Complex64::new(*b, 0.0)).norm();
            if pa < pb {
                *b = *a;
            }
            true
        } else {
            false
        }
    });

    let mut refined: Vec<f64> = Vec::new();
    let mut max_residual = 0.0f64;
    for &c in &selected {
        let out = newton_refine(
            &reduced,
            Complex64::new(c, 0.0),
            opts.newton_tol,
            opts.max_newton,
        );
        if !out.converged && !out.suspected_multiple {
            continue;
        }
        let x = out.x.re;
        let residual = reduced.eval(Complex64::new(x, 0.0)).norm()
            / reduced.eval_magnitude_sum(Complex64::new(x, 0.0)).max(1e-300);
        if residual > 1e3 * f64::EPSILON {
            continue;
        }
        max_residual = max_residual.max(residual);
        let noise = newton_noise_radius(&reduced, Complex64::new(x, 0.0));
        let dup = refined
            .iter()
            .any(|&r| (r - x).abs() <= (1e-8 * (1.0 + x.abs())).max(noise));
        if !dup {
            refined.push(x);
        }
    }
    roots.extend(refined);
    let status = status_for(&roots, opts.expected_r);
    Ok(RootReport::new(roots, k, max_residual, status))
}

fn status_for(roots: &[f64], expected: Option<usize>) -> SolveStatus {
    match expected {
        Some(r) if roots.len() < r => SolveStatus::Partial,
        _ => SolveStatus::Converged,
    }
}

/// Splits off an exact power of `x`: returns the multiplicity of the zero
/// root and the deflated polynomial.
pub fn deflate_zero_roots(p: &Polynomial) -> (usize, Polynomial) {
    let cut = 1e-14 * p.norm_inf();
    let mut m = 0;
    while m < p.degree() && p.coeff(m).norm() <= cut {
        m += 1;
    }
    if m == 0 {
        return (0, p.clone());
    }
    (m, Polynomial::new(p.coeffs()[m..].to_vec()))
}
