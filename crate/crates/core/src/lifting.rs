//! Polynomial-side lifting/descending solvers. One pipeline lifts through
//! `y = (x - 1/x)/2` until the images of all nonreal roots collapse into a
//! negligible trailing coefficient block; the other moves the real axis to
//! the unit circle with a Cayley map and squares the roots until everything
//! off the circle drifts to zero or infinity. Both recover the real roots of
//! the original polynomial by walking the level stack back down, selecting
//! one of two preimage candidates per root with proximity tests.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{truncate_to_unit_factor, Polynomial, TruncationOutcome};
use crate::radii::{
    deflate_zero_roots, extreme_radius_bounds, newton_noise_radius, newton_refine, proximity_test,
};
use crate::report::{RootReport, SolveStatus};

/// Which lift produced a level stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    Mobius,
    CayleyGraeffe,
}

/// The stored lift levels `p_0 .. p_k`; level 0 is the normalized input.
#[derive(Debug, Clone)]
pub struct LiftTrace {
    pub levels: Vec<Polynomial>,
    pub k: usize,
    pub kind: LiftKind,
}

/// Options shared by the lifting drivers.
#[derive(Debug, Clone)]
pub struct LiftOptions {
    /// Lift budget before giving up with a Partial report.
    pub max_k: usize,
    /// Truncation threshold, relative to the infinity norm; defaults to
    /// `1e-10 * n`.
    pub tau: Option<f64>,
    /// Proximity acceptance factor for the descent filter.
    pub proximity_tol: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Tolerance handed to the all-real-roots subsolver.
    pub all_real_tol: f64,
    /// Optional pre-shift `p(x - s)` applied before lifting (an alternative
    /// to deflating roots at the origin).
    pub pre_shift: Option<f64>,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            max_k: 40,
            tau: None,
            proximity_tol: 1e-3,
            newton_tol: 1e-12,
            max_newton: 60,
            all_real_tol: 1e-12,
            pre_shift: None,
        }
    }
}

// ---------------------------------------------------------------------------
// All-real-roots subsolver
// ---------------------------------------------------------------------------

/// All roots of a real polynomial whose roots are all real, by the
/// Aberth-Ehrlich simultaneous iteration started on a real grid spread over
/// the root-radius interval, with a bisection sweep as fallback. Real
/// starting points and real arithmetic keep every iterate exactly real.
pub fn real_all_roots(v: &Polynomial, tol: f64) -> Result<Vec<f64>> {
    let vr = v.monic().realified(1e-9);
    let coeffs = vr.real_coeffs().ok_or_else(|| {
        Error::PreconditionViolated("real_all_roots expects a (nearly) real polynomial".into())
    })?;
    let d = vr.degree();
    match d {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-coeffs[0]]),
        2 => {
            let (b, c) = (coeffs[1], coeffs[0]);
            let disc = b * b - 4.0 * c;
            if disc < 0.0 {
                if disc > -1e-9 * (1.0 + b * b) {
                    return Ok(vec![-b / 2.0, -b / 2.0]);
                }
                return Err(Error::PreconditionViolated(
                    "quadratic has nonreal roots".into(),
                ));
            }
            let s = disc.sqrt();
            let mut out = vec![(-b - s) / 2.0, (-b + s) / 2.0];
            out.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return Ok(out);
        }
        _ => {}
    }

    let eval = |x: f64| -> (f64, f64) {
        // value and derivative by one Horner pass
        let mut p = coeffs[d - 1] + x; // monic: implicit leading 1
        let mut dp = 1.0;
        let mut val = p;
        let mut der = dp;
        for k in (0..d - 1).rev() {
            der = val + x * der;
            val = coeffs[k] + x * val;
            let _ = (p, dp);
            p = 0.0;
            dp = 0.0;
        }
        (val, der)
    };

    let (_, hi) = extreme_radius_bounds(&vr)?;
    let spread = hi.max(1e-6) * 1.0001;
    let mut xs: Vec<f64> = (0..d)
        .map(|j| {
            let angle = std::f64::consts::PI * (j as f64 + 0.5) / d as f64;
            spread * angle.cos() + spread * 1e-4 * ((7.3 * j as f64 + 1.1).sin())
        })
        .collect();

    let mut best_step = f64::INFINITY;
    let mut stagnant = 0usize;
    for _ in 0..400 {
        let mut max_step = 0.0f64;
        for j in 0..d {
            let (val, der) = eval(xs[j]);
            if val == 0.0 {
                continue;
            }
            let newton = if der != 0.0 { val / der } else { 1e-3 * (1.0 + xs[j].abs()) };
            let mut repulsion = 0.0f64;
            for (k, &xk) in xs.iter().enumerate() {
                if k != j {
                    let gap = xs[j] - xk;
                    if gap.abs() < 1e-300 {
                        repulsion += 1e12;
                    } else {
                        repulsion += 1.0 / gap;
                    }
                }
            }
            let denom = 1.0 - newton * repulsion;
            let step = if denom.abs() > 1e-300 { newton / denom } else { newton };
            xs[j] -= step;
            max_step = max_step.max(step.abs() / (1.0 + xs[j].abs()));
        }
        if max_step <= tol {
            break;
        }
        if max_step >= best_step * 0.97 {
            stagnant += 1;
            if stagnant > 40 {
                break;
            }
        } else {
            stagnant = 0;
            best_step = max_step;
        }
    }

    // Polish and verify each iterate; a failed residual means the input had
    // nonreal roots after all.
    let mut out = Vec::with_capacity(d);
    let mut unresolved = 0usize;
    for &x in &xs {
        let polished = newton_refine(&vr, Complex64::new(x, 0.0), tol.max(1e-14), 30);
        let z = Complex64::new(polished.x.re, 0.0);
        let rel = vr.eval(z).norm() / vr.eval_magnitude_sum(z).max(1e-300);
        // multiple roots stall with an enlarged but bounded residual
        if rel <= 1e-7 {
            out.push(z.re);
        } else {
            unresolved += 1;
        }
    }
    if unresolved > 0 {
        // Bisection on sign changes patches roots Aberth missed.
        let grid = 4 * d + 1;
        let mut prev_x = -spread;
        let mut prev_v = eval(prev_x).0;
        for g in 1..=grid {
            let x = -spread + 2.0 * spread * g as f64 / grid as f64;
            let v = eval(x).0;
            if prev_v == 0.0 {
                out.push(prev_x);
            } else if prev_v.signum() != v.signum() && v != 0.0 {
                let (mut a, mut b) = (prev_x, x);
                let mut fa = prev_v;
                for _ in 0..100 {
                    let mid = 0.5 * (a + b);
                    let fm = eval(mid).0;
                    if fm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if fa.signum() == fm.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                let candidate = 0.5 * (a + b);
                let dup = out
                    .iter()
                    .any(|&r| (r - candidate).abs() <= 1e-8 * (1.0 + candidate.abs()));
                if !dup {
                    out.push(candidate);
                }
            }
            prev_x = x;
            prev_v = v;
        }
    }
    if out.len() > d {
        // a bisection hit can duplicate an Aberth root; keep the best-fitting d
        out.sort_by(|a, b| {
            let ra = vr.eval(Complex64::new(*a, 0.0)).norm();
            let rb = vr.eval(Complex64::new(*b, 0.0)).norm();
            ra.partial_cmp(&rb).unwrap()
        });
        out.truncate(d);
    }
    if out.len() != d {
        return Err(Error::PreconditionViolated(format!(
            "all-real-roots subsolver resolved {} of {} roots; input has nonreal roots",
            out.len(),
            d
        )));
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

// ---------------------------------------------------------------------------
// Shared descent machinery
// ---------------------------------------------------------------------------

struct Selection {
    point: Complex64,
    clean: bool,
}

/// Picks one of the two preimage candidates by the proximity filter; ties
/// break toward the smaller |p(c)|, and a double miss is flagged.
fn select_candidate(
    level: &Polynomial,
    c1: Complex64,
    c2: Complex64,
    proximity_tol: f64,
) -> Selection {
    let p1 = proximity_test(level, c1, 2);
    let p2 = proximity_test(level, c2, 2);
    let ok1 = p1 <= proximity_tol * (1.0 + c1.norm());
    let ok2 = p2 <= proximity_tol * (1.0 + c2.norm());
    match (ok1, ok2) {
        (true, false) => Selection { point: c1, clean: true },
        (false, true) => Selection { point: c2, clean: true },
        (true, true) => {
            let point = if level.eval(c1).norm() <= level.eval(c2).norm() {
                c1
            } else {
                c2
            };
            Selection { point, clean: true }
        }
        (false, false) => {
            let point = if p1 <= p2 { c1 } else { c2 };
            Selection { point, clean: false }
        }
    }
}

/// Local Newton polish that refuses to leave the candidate's neighborhood.
fn refine_local(level: &Polynomial, c: Complex64, tol: f64, max_iter: usize) -> Complex64 {
    let out = newton_refine(level, c, tol, max_iter);
    if (out.x - c).norm() <= 0.25 * (1.0 + c.norm())
        && level.eval(out.x).norm() <= level.eval(c).norm() * (1.0 + 1e-12)
    {
        out.x
    } else {
        c
    }
}

// ---------------------------------------------------------------------------
// Half-difference lifting (the `y = (x - 1/x)/2` pipeline)
// ---------------------------------------------------------------------------

/// The image of the level polynomial whose roots are `x^2 + 1` over the
/// roots of `q`: square the roots, then shift by one.
fn squared_plus_one(q: &Polynomial) -> Result<Polynomial> {
    q.graeffe_step()
        .shift_scale(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))
}

/// Scans for an even-length negligible trailing block and returns the
/// implied factor degree.
fn vanished_trailing(t: &Polynomial, tau: f64) -> usize {
    let scale = t.norm_inf();
    let mut m = 0;
    while m < t.degree() && t.coeff(m).norm() <= tau * scale {
        m += 1;
    }
    m - (m % 2)
}

/// Real root-finding through the half-difference lift. Lifts until the
/// images of the nonreal roots vanish from the trailing coefficients of the
/// squared-shifted level polynomial, solves the surviving all-real factor,
/// and descends level by level, Newton-refining per level.
pub fn mobius_real_roots(
    p: &Polynomial,
    r: Option<usize>,
    opts: &LiftOptions,
) -> Result<RootReport> {
    if !p.is_real() {
        return Err(Error::PreconditionViolated(
            "mobius_real_roots expects a real polynomial".into(),
        ));
    }
    let mut shift_used = 0.0f64;
    let mut work = p.clone();
    let mut zero_roots = 0usize;
    if let Some(s) = opts.pre_shift {
        shift_used = s;
        work = work.shift_scale(Complex64::new(1.0, 0.0), Complex64::new(s, 0.0))?;
    } else {
        let (m, reduced) = deflate_zero_roots(&work);
        zero_roots = m;
        work = reduced;
    }

    // A root drifting onto the origin mid-lift degenerates the next level;
    // restart with a shifted input when that happens.
    let mut attempt = 0usize;
    loop {
        match mobius_pipeline(&work, r, opts) {
            Ok((mut roots, iterations, residual, clean)) => {
                for x in &mut roots {
                    *x += shift_used;
                }
                let mut all = vec![0.0; zero_roots];
                all.extend(roots);
                let expected_met = r.map_or(true, |want| all.len() >= want + zero_roots);
                let status = if clean && expected_met {
                    SolveStatus::Converged
                } else {
                    SolveStatus::Partial
                };
                return Ok(RootReport::new(all, iterations, residual, status));
            }
            Err(Error::DegenerateInput(_)) if attempt < 4 => {
                attempt += 1;
                let (_, hi) = extreme_radius_bounds(&work)?;
                let s = 0.17 * (1.0 + hi) * attempt as f64;
                shift_used += s;
                work = work.shift_scale(Complex64::new(1.0, 0.0), Complex64::new(s, 0.0))?;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Builds the lift level stack for inspection.
pub fn mobius_lift_trace(p: &Polynomial, k: usize) -> Result<LiftTrace> {
    let mut levels = vec![p.normalized_inf()];
    for h in 0..k {
        levels.push(levels[h].mobius_lift()?.normalized_inf());
    }
    Ok(LiftTrace {
        levels,
        k,
        kind: LiftKind::Mobius,
    })
}

fn mobius_pipeline(
    p: &Polynomial,
    r: Option<usize>,
    opts: &LiftOptions,
) -> Result<(Vec<f64>, usize, f64, bool)> {
    let n = p.degree();
    if n == 0 {
        return Ok((Vec::new(), 0, 0.0, true));
    }
    let tau = opts.tau.unwrap_or(1e-10 * n as f64);
    let mut levels = vec![p.normalized_inf()];
    for k in 1..=opts.max_k {
        let next = levels[k - 1].mobius_lift()?.normalized_inf();
        levels.push(next);
        let t = squared_plus_one(&levels[k])?;
        let candidate = match r {
            Some(want) => match truncate_to_unit_factor(&t, want, tau) {
                TruncationOutcome::Factor(v) => Some(v),
                TruncationOutcome::NotYet { .. } => None,
            },
            None => {
                let m = vanished_trailing(&t, tau);
                if m == 0 && t.coeff(0).norm() > tau * t.norm_inf() {
                    None
                } else {
                    match truncate_to_unit_factor(&t, n - m, tau) {
                        TruncationOutcome::Factor(v) => Some(v),
                        TruncationOutcome::NotYet { .. } => None,
                    }
                }
            }
        };
        if let Some(v) = candidate {
            // the factor must carry images x^2 + 1 >= 1 of real points
            match real_all_roots(&v, opts.all_real_tol) {
                Ok(ws) if ws.iter().all(|w| *w >= 0.9) => {
                    return descend_mobius(&levels, k, ws, opts);
                }
                _ => {}
            }
        }
    }
    // Truncation never fired: report what the final level knows (nothing).
    Ok((Vec::new(), opts.max_k, 1.0, false))
}

fn descend_mobius(
    levels: &[Polynomial],
    k: usize,
    images: Vec<f64>,
    opts: &LiftOptions,
) -> Result<(Vec<f64>, usize, f64, bool)> {
    let mut clean = true;
    // Level-k roots from the factor images w = x^2 + 1.
    let mut current: Vec<Complex64> = Vec::with_capacity(images.len());
    for w in images {
        let radicand = (w - 1.0).max(0.0);
        let root = radicand.sqrt();
        let c1 = Complex64::new(root, 0.0);
        let c2 = Complex64::new(-root, 0.0);
        let sel = select_candidate(&levels[k], c1, c2, opts.proximity_tol);
        clean &= sel.clean;
        current.push(refine_local(&levels[k], sel.point, opts.newton_tol, opts.max_newton));
    }
    // Descend: x_{h-1} solves (x - 1/x)/2 = x_h, i.e. x_h +- sqrt(x_h^2 + 1).
    for h in (1..=k).rev() {
        let level = &levels[h - 1];
        let mut next = Vec::with_capacity(current.len());
        for &x in &current {
            let s = (x * x + Complex64::new(1.0, 0.0)).sqrt();
            let sel = select_candidate(level, x + s, x - s, opts.proximity_tol);
            clean &= sel.clean;
            next.push(refine_local(level, sel.point, opts.newton_tol, opts.max_newton));
        }
        current = next;
    }
    let base = &levels[0];
    let mut roots = Vec::with_capacity(current.len());
    let mut residual = 0.0f64;
    for &x in &current {
        let noise = newton_noise_radius(base, x);
        if x.im.abs() <= noise.max(1e-9 * (1.0 + x.norm())) {
            let xr = Complex64::new(x.re, 0.0);
            roots.push(x.re);
            residual = residual
                .max(base.eval(xr).norm() / base.eval_magnitude_sum(xr).max(1e-300));
        } else {
            clean = false;
        }
    }
    Ok((roots, k, residual, clean))
}

// ---------------------------------------------------------------------------
// Cayley + root squaring
// ---------------------------------------------------------------------------

/// Real root-finding through the Cayley map followed by repeated root
/// squaring on the unit circle.
pub fn cayley_real_roots(
    p: &Polynomial,
    r: Option<usize>,
    opts: &LiftOptions,
) -> Result<RootReport> {
    if !p.is_real() {
        return Err(Error::PreconditionViolated(
            "cayley_real_roots expects a real polynomial".into(),
        ));
    }
    let mut shift_used = 0.0f64;
    let mut work = p.clone();
    let mut attempt = 0usize;
    loop {
        // Roots at 1, -1, 0 or i break the map pair (their circle images
        // square onto the inverse-Cayley pole); shift away and retry.
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let scale = work.norm_1();
        let degenerate = work.eval(one).norm() <= 1e-12 * scale
            || work.eval(-one).norm() <= 1e-12 * scale
            || work.eval(Complex64::new(0.0, 0.0)).norm() <= 1e-12 * scale
            || work.eval(i).norm() <= 1e-12 * scale;
        let outcome = if degenerate {
            Err(Error::DegenerateInput("root at a Cayley pole image".into()))
        } else {
            cayley_pipeline(&work, r, opts)
        };
        match outcome {
            Ok((mut roots, iterations, residual, clean)) => {
                for x in &mut roots {
                    *x += shift_used;
                }
                let expected_met = r.map_or(true, |want| roots.len() >= want);
                let status = if clean && expected_met {
                    SolveStatus::Converged
                } else {
                    SolveStatus::Partial
                };
                return Ok(RootReport::new(roots, iterations, residual, status));
            }
            Err(Error::DegenerateInput(_)) if attempt < 4 => {
                attempt += 1;
                let (_, hi) = extreme_radius_bounds(&work)?;
                let s = 0.13 * (1.0 + hi) * attempt as f64;
                shift_used += s;
                work = work.shift_scale(Complex64::new(1.0, 0.0), Complex64::new(s, 0.0))?;
            }
            Err(e) => return Err(e),
        }
    }
}

fn cayley_pipeline(
    p: &Polynomial,
    r: Option<usize>,
    opts: &LiftOptions,
) -> Result<(Vec<f64>, usize, f64, bool)> {
    let n = p.degree();
    if n == 0 {
        return Ok((Vec::new(), 0, 0.0, true));
    }
    let tau = opts.tau.unwrap_or(1e-10 * n as f64);
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);

    let mut levels = vec![p.cayley_poly()?];
    for k in 0..=opts.max_k {
        if k > 0 {
            let next = levels[k - 1].graeffe_step().normalized_inf();
            levels.push(next);
        }
        let q = &levels[k];
        let scale = q.norm_inf();
        let mut lo = 0usize;
        while lo < q.degree() && q.coeff(lo).norm() <= tau * scale {
            lo += 1;
        }
        let mut hi = 0usize;
        while hi < q.degree() && q.coeff(q.degree() - hi).norm() <= tau * scale {
            hi += 1;
        }
        // Conjugate symmetry sends one root inside the circle for every root
        // outside, so both trims must agree before extraction.
        let s = lo.min(hi);
        let r_cand = n.saturating_sub(2 * s);
        let fits = match r {
            Some(want) => r_cand == want && (s > 0 || want == n),
            None => s > 0 || k >= 2,
        };
        if !fits || r_cand == 0 {
            if r == Some(0) && r_cand == 0 && k >= 1 {
                return Ok((Vec::new(), k, 0.0, true));
            }
            continue;
        }
        let u = Polynomial::new(q.coeffs()[s..=n - s].to_vec());
        if u.eval(one).norm() <= 1e-10 * u.norm_1() {
            // root image parked on the Cayley pole; lift further or restart
            continue;
        }
        let w = match u.inverse_cayley_poly() {
            Ok(w) => w,
            Err(_) => continue,
        };
        let w_real = w.monic().realified(1e-6);
        if !w_real.is_real() {
            continue;
        }
        let ts = match real_all_roots(&w_real, opts.all_real_tol) {
            Ok(ts) => ts,
            Err(_) => continue,
        };
        // Stage 6: back onto the unit circle.
        let mut current: Vec<Complex64> = ts
            .iter()
            .map(|&t| {
                let tz = Complex64::new(t, 0.0);
                (tz + i) / (tz - i)
            })
            .collect();
        let mut clean = true;
        // Stage 7: descend through the square roots.
        for h in (1..=k).rev() {
            let level = &levels[h - 1];
            let mut next = Vec::with_capacity(current.len());
            for &z in &current {
                let root = z.sqrt();
                let sel = select_candidate(level, root, -root, opts.proximity_tol);
                clean &= sel.clean;
                next.push(refine_local(level, sel.point, opts.newton_tol, opts.max_newton));
            }
            current = next;
        }
        // Stage 8: leave the circle for the real axis.
        let mut roots = Vec::with_capacity(current.len());
        let mut residual = 0.0f64;
        for &z in &current {
            if (z - one).norm() <= 1e-12 {
                clean = false;
                continue;
            }
            let x = i * (z + one) / (z - one);
            let refined = refine_local(p, x, opts.newton_tol, opts.max_newton);
            let noise = newton_noise_radius(p, refined);
            if refined.im.abs() <= noise.max(1e-9 * (1.0 + refined.norm())) {
                let xr = Complex64::new(refined.re, 0.0);
                roots.push(refined.re);
                residual =
                    residual.max(p.eval(xr).norm() / p.eval_magnitude_sum(xr).max(1e-300));
            } else {
                clean = false;
            }
        }
        return Ok((roots, k, residual, clean));
    }
    Ok((Vec::new(), opts.max_k, 1.0, false))
}

// ---------------------------------------------------------------------------
// Near-real extension
// ---------------------------------------------------------------------------

/// Widened half-difference pipeline that keeps near-real roots: the
/// truncation accepts whatever factor degree emerges, the factor is solved
/// over the complex numbers, and roots within `alpha` of the axis are
/// reported along with their imaginary estimates.
pub fn near_real_extension(p: &Polynomial, alpha: f64, opts: &LiftOptions) -> Result<RootReport> {
    if !p.is_real() {
        return Err(Error::PreconditionViolated(
            "near_real_extension expects a real polynomial".into(),
        ));
    }
    let (zero_roots, deflated) = deflate_zero_roots(p);
    if deflated.degree() == 0 {
        let roots = vec![0.0; zero_roots];
        let imag = vec![0.0; zero_roots];
        let mut report = RootReport::new(roots, 0, 0.0, SolveStatus::Converged);
        report.imag_estimates = Some(imag);
        return Ok(report);
    }
    let mut work = deflated;
    let mut shift_used = 0.0f64;
    let mut attempt = 0usize;
    loop {
        match near_real_pipeline(&work, alpha, opts) {
            Ok(report) => {
                // Undo the shift and weave the deflated origin roots back in,
                // keeping the imaginary estimates aligned.
                let imag = report.imag_estimates.unwrap_or_default();
                let mut pairs: Vec<(f64, f64)> = report
                    .roots
                    .iter()
                    .zip(imag.iter())
                    .map(|(&x, &im)| (x + shift_used, im))
                    .collect();
                pairs.extend(std::iter::repeat((0.0, 0.0)).take(zero_roots));
                pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let mut out = RootReport::new(
                    pairs.iter().map(|p| p.0).collect(),
                    report.iterations,
                    report.residual,
                    report.status,
                );
                out.imag_estimates = Some(pairs.iter().map(|p| p.1).collect());
                return Ok(out);
            }
            Err(Error::DegenerateInput(_)) if attempt < 4 => {
                attempt += 1;
                let (_, hi) = extreme_radius_bounds(&work)?;
                let s = 0.19 * (1.0 + hi) * attempt as f64;
                shift_used += s;
                work = work.shift_scale(Complex64::new(1.0, 0.0), Complex64::new(s, 0.0))?;
            }
            Err(e) => return Err(e),
        }
    }
}

fn near_real_pipeline(work: &Polynomial, alpha: f64, opts: &LiftOptions) -> Result<RootReport> {
    let n = work.degree();
    let tau = opts.tau.unwrap_or(1e-10 * n as f64);
    let mut levels = vec![work.normalized_inf()];
    for k in 1..=opts.max_k {
        let next = levels[k - 1].mobius_lift()?.normalized_inf();
        levels.push(next);
        let t = squared_plus_one(&levels[k])?;
        let m = vanished_trailing(&t, tau);
        if m == 0 {
            continue;
        }
        let v = Polynomial::new(t.coeffs()[m..].to_vec());
        let ws = aberth_complex(&v, opts.all_real_tol);
        // Descend with complex candidates.
        let mut clean = true;
        let mut current: Vec<Complex64> = Vec::with_capacity(ws.len());
        for w in ws {
            let s = (w - Complex64::new(1.0, 0.0)).sqrt();
            let sel = select_candidate(&levels[k], s, -s, opts.proximity_tol);
            clean &= sel.clean;
            current.push(refine_local(&levels[k], sel.point, opts.newton_tol, opts.max_newton));
        }
        for h in (1..=k).rev() {
            let level = &levels[h - 1];
            let mut next = Vec::with_capacity(current.len());
            for &x in &current {
                let s = (x * x + Complex64::new(1.0, 0.0)).sqrt();
                let sel = select_candidate(level, x + s, x - s, opts.proximity_tol);
                clean &= sel.clean;
                next.push(refine_local(level, sel.point, opts.newton_tol, opts.max_newton));
            }
            current = next;
        }
        let base = &levels[0];
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(current.len());
        let mut residual = 0.0f64;
        for &x in &current {
            let noise = newton_noise_radius(base, x);
            let band = alpha.max(noise).max(1e-9 * (1.0 + x.norm()));
            if x.im.abs() <= band {
                pairs.push((x.re, x.im));
                residual = residual.max(base.eval(x).norm() / base.eval_magnitude_sum(x).max(1e-300));
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let status = if clean { SolveStatus::Converged } else { SolveStatus::Partial };
        let mut report = RootReport::new(pairs.iter().map(|p| p.0).collect(), k, residual, status);
        report.imag_estimates = Some(pairs.iter().map(|p| p.1).collect());
        return Ok(report);
    }
    Ok(RootReport::empty(opts.max_k, 1.0, SolveStatus::Partial))
}

/// Standard complex Aberth-Ehrlich iteration (used where the factor may
/// carry near-real roots).
pub fn aberth_complex(p: &Polynomial, tol: f64) -> Vec<Complex64> {
    let q = p.monic();
    let d = q.degree();
    if d == 0 {
        return Vec::new();
    }
    let deriv = q.derivative();
    let radius = extreme_radius_bounds(&q).map(|(_, hi)| hi).unwrap_or(1.0);
    let radius = radius.max(1e-6);
    let mut zs: Vec<Complex64> = (0..d)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / d as f64 + 0.4;
            Complex64::new(radius * angle.cos(), radius * angle.sin() + 1e-4 * radius)
        })
        .collect();
    for _ in 0..300 {
        let mut max_step = 0.0f64;
        for j in 0..d {
            let val = q.eval(zs[j]);
            if val.norm() == 0.0 {
                continue;
            }
            let der = deriv.eval(zs[j]);
            let newton = if der.norm() > 0.0 {
                val / der
            } else {
                Complex64::new(1e-3 * (1.0 + zs[j].norm()), 0.0)
            };
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (k, &zk) in zs.iter().enumerate() {
                if k != j {
                    let gap = zs[j] - zk;
                    if gap.norm() > 1e-300 {
                        repulsion += gap.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            zs[j] -= step;
            max_step = max_step.max(step.norm() / (1.0 + zs[j].norm()));
        }
        if max_step <= tol {
            break;
        }
    }
    zs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{chebyshev, chebyshev_roots};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn all_real_roots_chebyshev_8() {
        let roots = real_all_roots(&chebyshev(8), 1e-12).unwrap();
        let expected = chebyshev_roots(8);
        assert_eq!(roots.len(), 8);
        for (got, want) in roots.iter().zip(expected.iter()) {
            assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn all_real_roots_triple_root_cluster() {
        let p = Polynomial::from_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let roots = real_all_roots(&p, 1e-12).unwrap();
        assert_eq!(roots.len(), 3);
        for r in roots {
            assert!((r - 1.0).abs() <= 1e-4, "cluster member {r}");
        }
    }

    #[test]
    fn all_real_roots_wilkinson_5() {
        let roots: Vec<Complex64> = (1..=5).map(|k| c(k as f64, 0.0)).collect();
        let p = Polynomial::from_roots(&roots);
        let got = real_all_roots(&p, 1e-12).unwrap();
        for (got, want) in got.iter().zip([1.0, 2.0, 3.0, 4.0, 5.0].iter()) {
            assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn mobius_solver_constructed_factors() {
        // (x^2+1)(x-2)(x-3)
        let p = Polynomial::from_real(&[1.0, 0.0, 1.0])
            .mul(&Polynomial::from_roots(&[c(2.0, 0.0), c(3.0, 0.0)]));
        let report = mobius_real_roots(&p, Some(2), &LiftOptions::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert_eq!(report.roots.len(), 2, "{:?}", report.roots);
        assert!((report.roots[0] - 2.0).abs() < 1e-8);
        assert!((report.roots[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn mobius_solver_no_real_roots() {
        let p = Polynomial::from_real(&[1.0, 0.0, 1.0]);
        let report = mobius_real_roots(&p, Some(0), &LiftOptions::default()).unwrap();
        assert!(report.roots.is_empty());
        assert_eq!(report.status, SolveStatus::Converged);
    }

    #[test]
    fn mobius_solver_unknown_count() {
        let p = Polynomial::from_roots(&[c(0.5, 0.0), c(-1.5, 0.0)])
            .mul(&Polynomial::from_real(&[2.0, -0.4, 1.0]));
        let report = mobius_real_roots(&p, None, &LiftOptions::default()).unwrap();
        assert_eq!(report.roots.len(), 2, "{:?}", report.roots);
        assert!((report.roots[0] + 1.5).abs() < 1e-8);
        assert!((report.roots[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn cayley_solver_degree_one() {
        let p = Polynomial::from_real(&[-2.0, 1.0]);
        let report = cayley_real_roots(&p, Some(1), &LiftOptions::default()).unwrap();
        assert_eq!(report.roots.len(), 1);
        assert!((report.roots[0] - 2.0).abs() < 1e-10, "{}", report.roots[0]);
    }

    #[test]
    fn cayley_solver_constructed_factors() {
        // (x^2+4)(x-1)
        let p = Polynomial::from_real(&[4.0, 0.0, 1.0])
            .mul(&Polynomial::from_roots(&[c(1.0, 0.0)]));
        let report = cayley_real_roots(&p, Some(1), &LiftOptions::default()).unwrap();
        assert_eq!(report.roots.len(), 1, "{:?}", report.roots);
        assert!((report.roots[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn near_real_reports_imaginary_estimates() {
        // roots {1, 2, 0.5 +- 1e-6 i, +- 3i}
        let p = Polynomial::from_roots(&[c(1.0, 0.0), c(2.0, 0.0)])
            .mul(&Polynomial::from_roots(&[c(0.5, 1e-6), c(0.5, -1e-6)]).realified(1e-15))
            .mul(&Polynomial::from_real(&[9.0, 0.0, 1.0]));
        let report = near_real_extension(&p, 1e-3, &LiftOptions::default()).unwrap();
        assert_eq!(report.roots.len(), 4, "{:?}", report.roots);
        let imag = report.imag_estimates.as_ref().unwrap();
        assert_eq!(imag.len(), 4);
        for (root, im) in report.roots.iter().zip(imag.iter()) {
            assert!(im.abs() <= 1e-3, "root {root} imag {im}");
        }
    }

    #[test]
    fn near_real_zero_band_matches_plain_solver() {
        let p = Polynomial::from_real(&[1.0, 0.0, 1.0])
            .mul(&Polynomial::from_roots(&[c(2.0, 0.0), c(3.0, 0.0)]));
        let a = near_real_extension(&p, 0.0, &LiftOptions::default()).unwrap();
        let b = mobius_real_roots(&p, Some(2), &LiftOptions::default()).unwrap();
        assert_eq!(a.roots.len(), b.roots.len());
        for (x, y) in a.roots.iter().zip(b.roots.iter()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn near_real_all_far_from_axis_is_empty() {
        let p = Polynomial::from_real(&[9.0, 0.0, 1.0]).mul(&Polynomial::from_real(&[4.0, 0.0, 1.0]));
        let report = near_real_extension(&p, 1e-3, &LiftOptions::default()).unwrap();
        assert!(report.roots.is_empty(), "{:?}", report.roots);
    }
}
