//! Real eigenvalue extraction for dense real nonsymmetric matrices: the sign
//! iteration applied verbatim to a dense matrix, and the factorized filter
//! `(P^m - P^{-m})^{-1}` built from the Cayley image `P` of the input — the
//! filter leaves real eigenvalues at magnitude 1/2 or above while crushing
//! everything off the axis, and the factorized form never touches a high
//! power of `P` explicitly.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frobenius::{alg_inv, alg_mul, generator, identity, CompanionMatrix, FrobeniusElement};
use crate::linalg::{self, DenseMatrix, Lu, RngSeed};
use crate::poly::Polynomial;
use crate::report::{EigReport, SolveStatus};
use crate::signiter::SignIterOptions;

fn ident(n: usize) -> DenseMatrix {
    DenseMatrix::identity(n)
}

/// `theta M / ||M||_F`; shrinking the spectrum this way makes the shifted
/// factor solves diagonally dominant.
pub fn scale_matrix(m: &DenseMatrix, theta: f64) -> Result<DenseMatrix> {
    let norm = m.norm_fro();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("scale_matrix of zero matrix".into()));
    }
    Ok(m.scale(Complex64::new(theta / norm, 0.0)))
}

/// The Cayley image `P = (M + iI)(M - iI)^{-1}`; real eigenvalues of `M`
/// land exactly on the unit circle.
pub fn cayley_matrix(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("cayley_matrix".into()));
    }
    let i = Complex64::new(0.0, 1.0);
    let shifted = m.shift_diag(-i);
    let lu = linalg::lu_decompose(&shifted)
        .map_err(|_| Error::PreconditionViolated("i is an eigenvalue of M".into()))?;
    Ok(lu.solve_mat(&m.shift_diag(i)))
}

// ---------------------------------------------------------------------------
// Hessenberg-aware shifted solves
// ---------------------------------------------------------------------------

pub fn is_upper_hessenberg(m: &DenseMatrix) -> bool {
    for i in 2..m.rows {
        for j in 0..i - 1 {
            if m.at(i, j).norm() != 0.0 {
                return false;
            }
        }
    }
    m.is_square()
}

/// LU of an upper Hessenberg matrix with adjacent-row pivoting: `O(n^2)` to
/// factor and to solve.
struct HessLu {
    u: DenseMatrix,
    lowers: Vec<Complex64>,
    swaps: Vec<bool>,
}

impl HessLu {
    fn new(a: &DenseMatrix) -> Result<HessLu> {
        let n = a.rows;
        let mut u = a.clone();
        let scale = a.max_abs();
        let mut lowers = Vec::with_capacity(n.saturating_sub(1));
        let mut swaps = Vec::with_capacity(n.saturating_sub(1));
        for k in 0..n.saturating_sub(1) {
            let swap = u.at(k + 1, k).norm() > u.at(k, k).norm();
            if swap {
                for j in k..n {
                    let tmp = u.at(k, j);
                    *u.at_mut(k, j) = u.at(k + 1, j);
                    *u.at_mut(k + 1, j) = tmp;
                }
            }
            swaps.push(swap);
            let pivot = u.at(k, k);
            if pivot.norm() <= scale * 1e-15 * n as f64 + f64::MIN_POSITIVE {
                return Err(Error::SingularMatrix);
            }
            let l = u.at(k + 1, k) / pivot;
            lowers.push(l);
            if l.norm_sqr() != 0.0 {
                for j in k..n {
                    let sub = l * u.at(k, j);
                    *u.at_mut(k + 1, j) -= sub;
                }
            }
        }
        let last = u.at(n - 1, n - 1);
        if last.norm() <= scale * 1e-15 * n as f64 + f64::MIN_POSITIVE {
            return Err(Error::SingularMatrix);
        }
        Ok(HessLu { u, lowers, swaps })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.u.rows;
        let mut x = b.to_vec();
        for k in 0..n - 1 {
            if self.swaps[k] {
                x.swap(k, k + 1);
            }
            let sub = self.lowers[k] * x[k];
            x[k + 1] -= sub;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.u.at(i, j) * x[j];
            }
            x[i] = acc / self.u.at(i, i);
        }
        x
    }
}

enum FactorSolver {
    Dense(Lu),
    Hessenberg(HessLu),
}

impl FactorSolver {
    fn build(a: &DenseMatrix, hessenberg: bool) -> Result<FactorSolver> {
        if hessenberg {
            Ok(FactorSolver::Hessenberg(HessLu::new(a)?))
        } else {
            Ok(FactorSolver::Dense(linalg::lu_decompose(a)?))
        }
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        match self {
            FactorSolver::Dense(lu) => lu.solve_vec(b),
            FactorSolver::Hessenberg(h) => h.solve(b),
        }
    }
}

// ---------------------------------------------------------------------------
// The factorized filter
// ---------------------------------------------------------------------------

/// Applies `Y = (P^m - P^{-m})^{-1}` through the shifted-factor form
/// `prod_i (M^2 + I) F_i^{-1} G_i^{-1}` with
/// `F_i = (1 + w) M + i (1 - w) I`, `G_i = (1 - w) M + i (1 + w) I` and
/// `w = exp(i pi i/m)`, so no power of `P` is ever formed. Factor LUs are
/// cached by their exact angle fraction and survive doubling `m`.
pub struct FactoredFilter {
    m_matrix: DenseMatrix,
    msq_plus_one: DenseMatrix,
    pub m: usize,
    hessenberg: bool,
    cache: HashMap<(u64, u64), FactorSolver>,
}

fn reduced_fraction(num: u64, den: u64) -> (u64, u64) {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(num, den).max(1);
    (num / g, den / g)
}

impl FactoredFilter {
    pub fn new(m_matrix: &DenseMatrix, m: usize) -> Result<FactoredFilter> {
        if m == 0 {
            return Err(Error::InvalidArgument("filter order m must be >= 1".into()));
        }
        let msq_plus_one = m_matrix.matmul(m_matrix).shift_diag(Complex64::new(1.0, 0.0));
        let mut filter = FactoredFilter {
            m_matrix: m_matrix.clone(),
            msq_plus_one,
            m,
            hessenberg: is_upper_hessenberg(m_matrix),
            cache: HashMap::new(),
        };
        filter.build_factors()?;
        Ok(filter)
    }

    /// Doubles the filter order; previously factored solvers are reused.
    pub fn double(&mut self) -> Result<()> {
        self.m *= 2;
        self.build_factors()
    }

    fn build_factors(&mut self) -> Result<()> {
        let n = self.m_matrix.rows;
        let i = Complex64::new(0.0, 1.0);
        for idx in 0..self.m {
            let key = reduced_fraction(idx as u64, 2 * self.m as u64);
            if self.cache.contains_key(&key) {
                continue;
            }
            let angle = std::f64::consts::PI * idx as f64 / self.m as f64;
            let w = Complex64::new(angle.cos(), angle.sin());
            let one = Complex64::new(1.0, 0.0);
            let mut f = self.m_matrix.scale(one + w);
            let mut g = self.m_matrix.scale(one - w);
            for d in 0..n {
                *f.at_mut(d, d) += i * (one - w);
                *g.at_mut(d, d) += i * (one + w);
            }
            let solver = FactorSolver::build(&f, self.hessenberg)
                .and_then(|fs| Ok((fs, FactorSolver::build(&g, self.hessenberg)?)));
            match solver {
                Ok((fs, gs)) => {
                    self.cache.insert(key, fs);
                    let gkey = (key.0 + u64::MAX / 2, key.1);
                    self.cache.insert(gkey, gs);
                }
                Err(_) => return Err(Error::SingularFactor { index: idx }),
            }
        }
        Ok(())
    }

    /// `v -> Y v` by `m` successive factor solves.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut x = v.to_vec();
        for idx in 0..self.m {
            let key = reduced_fraction(idx as u64, 2 * self.m as u64);
            let gkey = (key.0 + u64::MAX / 2, key.1);
            x = self.cache[&gkey].solve(&x);
            x = self.cache[&key].solve(&x);
            x = self.msq_plus_one.matvec(&x);
        }
        x
    }
}

/// The same filter as an element of the companion algebra, in the identical
/// shifted-factor form `prod_i (x^2 + 1) F_i(x)^{-1} G_i(x)^{-1}` on residues
/// mod `p`, which keeps every factor solve at `O(n^2)` and never forms the
/// Cayley image itself.
pub fn companion_filter_element(p: &Polynomial, m: usize) -> Result<FrobeniusElement> {
    let cp = CompanionMatrix::new(p)?;
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let x = generator(&cp);
    let xsq_plus = alg_mul(&x, &x)?.shift(one);
    let mut acc = identity(&cp);
    for idx in 0..m {
        let angle = std::f64::consts::PI * idx as f64 / m as f64;
        let w = Complex64::new(angle.cos(), angle.sin());
        let f = x.scale(one + w).shift(i * (one - w));
        let g = x.scale(one - w).shift(i * (one + w));
        let inv_f = alg_inv(&f).map_err(|_| Error::SingularFactor { index: idx })?;
        let inv_g = alg_inv(&g).map_err(|_| Error::SingularFactor { index: idx })?;
        acc = alg_mul(&alg_mul(&alg_mul(&acc, &xsq_plus)?, &inv_f)?, &inv_g)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Dense sign-iteration driver
// ---------------------------------------------------------------------------

fn dense_shift_scale(y: &DenseMatrix) -> f64 {
    (0.5 * y.norm_fro() / (y.rows as f64).sqrt()).clamp(1e-3, 1e3)
}

fn dense_sign_step(y: &DenseMatrix) -> Result<DenseMatrix> {
    let lu = linalg::lu_decompose(y)?;
    if lu.pivot_ratio() < 1e-13 {
        return Err(Error::IllConditioned {
            norm: lu.pivot_ratio(),
        });
    }
    let inv = lu.solve_mat(&ident(y.rows));
    Ok(y.sub(&inv).scale(Complex64::new(0.5, 0.0)))
}

fn dense_step_with_policy(
    y: DenseMatrix,
    opts: &SignIterOptions,
    free_pending: &mut usize,
) -> Result<DenseMatrix> {
    if *free_pending > 0 {
        *free_pending -= 1;
        let y3 = y.matmul(&y).matmul(&y);
        return Ok(y3.add(&y.scale(Complex64::new(3.0, 0.0))).scale(Complex64::new(0.5, 0.0)));
    }
    match dense_sign_step(&y) {
        Ok(next) => Ok(next),
        Err(Error::IllConditioned { .. }) | Err(Error::SingularMatrix) => {
            let sigma = dense_shift_scale(&y);
            for factor in [1.0f64, -1.0, 2.0, -2.0].iter().take(opts.shift_policy.tries) {
                let shifted = y.shift_diag(Complex64::new(factor * sigma, 0.0));
                if let Ok(next) = dense_sign_step(&shifted) {
                    return Ok(next);
                }
            }
            *free_pending = opts.shift_policy.inversion_free_steps.saturating_sub(1);
            let y3 = y.matmul(&y).matmul(&y);
            Ok(y3.add(&y.scale(Complex64::new(3.0, 0.0))).scale(Complex64::new(0.5, 0.0)))
        }
        Err(e) => Err(e),
    }
}

/// Rank probe on a matrix-free operator, doubling the sketch width.
fn rank_probe_op(
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    n: usize,
    tol: f64,
    seed: RngSeed,
    cap: usize,
) -> Option<usize> {
    let cap = cap.min(n).max(1);
    let mut s = 4usize.min(cap);
    loop {
        let rank = {
            let g = linalg::gaussian_matrix(n, s, seed);
            let mut h = DenseMatrix::zeros(n, s);
            for j in 0..s {
                h.set_column(j, &apply(&g.column(j)));
            }
            // column-pivoted norms are enough for counting
            sketch_rank_gs(&h, tol)
        };
        if rank < s || s == n {
            return Some(rank);
        }
        if s >= cap {
            return None;
        }
        s = (2 * s).min(cap);
    }
}

fn sketch_rank_gs(h: &DenseMatrix, tol: f64) -> usize {
    let (_, s) = (h.rows, h.cols);
    let mut cols: Vec<Vec<Complex64>> = (0..s).map(|j| h.column(j)).collect();
    let mut rdiag: Vec<f64> = Vec::new();
    for _ in 0..s {
        let (best, norm) = match cols
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let nrm = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                (i, if nrm.is_finite() { nrm } else { 0.0 })
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
        {
            Some(x) => x,
            None => break,
        };
        if norm == 0.0 {
            break;
        }
        let mut col = cols.remove(best);
        for c in &mut col {
            *c /= norm;
        }
        rdiag.push(norm);
        for other in &mut cols {
            let mut dot = Complex64::new(0.0, 0.0);
            for (a, b) in col.iter().zip(other.iter()) {
                dot += a.conj() * b;
            }
            for (a, b) in col.iter().zip(other.iter_mut()) {
                *b -= dot * a;
            }
        }
    }
    match rdiag.first() {
        None => 0,
        Some(&top) if top == 0.0 => 0,
        Some(&top) => rdiag.iter().take_while(|&&d| d > tol * top).count(),
    }
}

/// Inverse-iteration plus Rayleigh-quotient polish of an eigenvalue estimate.
fn polish_eig(m: &DenseMatrix, lam: Complex64, seed: RngSeed) -> Complex64 {
    let mut mu = lam;
    for round in 0..2u64 {
        match linalg::inverse_iteration(m, mu, 2, seed.derive(round)) {
            Ok(v) => {
                let rq = linalg::rayleigh_quotient(m, &v);
                if rq.is_finite() {
                    mu = rq;
                }
            }
            Err(_) => break,
        }
    }
    mu
}

fn extract_eigs(
    m: &DenseMatrix,
    basis: &DenseMatrix,
    opts: &SignIterOptions,
    seed: RngSeed,
) -> Result<Vec<f64>> {
    let r = basis.cols;
    let n = m.rows;
    let mut mq = DenseMatrix::zeros(n, r);
    for j in 0..r {
        mq.set_column(j, &m.matvec(&basis.column(j)));
    }
    let l = basis.hermitian().matmul(&mq);
    let eigs = linalg::small_eigs_bounded(&l, opts.eig_cap)?;
    let mut out = Vec::new();
    for (idx, lam) in eigs.into_iter().enumerate() {
        if lam.im.abs() > 1e-3 * (1.0 + lam.norm()) {
            continue;
        }
        let polished = if opts.refine {
            polish_eig(m, lam, seed.derive(4_000 + idx as u64))
        } else {
            lam
        };
        if polished.im.abs() <= 1e-6 * (1.0 + polished.norm()) {
            out.push(polished.re);
        }
    }
    Ok(out)
}

/// Real eigenvalues of a dense real matrix by the sign iteration with dense
/// solves, randomized projection, and Rayleigh-quotient polish.
pub fn real_eigs_sign(
    m: &DenseMatrix,
    r: Option<usize>,
    opts: &SignIterOptions,
    seed: RngSeed,
) -> Result<EigReport> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("real_eigs_sign".into()));
    }
    if !m.is_real() {
        return Err(Error::PreconditionViolated(
            "real_eigs_sign expects a real matrix".into(),
        ));
    }
    let n = m.rows;
    // Balancing is a diagonal similarity: eigenvalues are untouched, but the
    // iteration and the projected eigenproblem behave far better on wildly
    // scaled inputs such as companion matrices.
    let mut base = m.clone();
    linalg::balance(&mut base);
    let m = &base;
    let mut y = m.clone();
    if opts.use_scaling {
        if let Ok(lu) = linalg::lu_decompose(m) {
            let nu = 1.0 / lu.abs_det_root().max(1e-300);
            if nu.is_finite() && nu > 0.0 {
                y = y.scale(Complex64::new(nu, 0.0));
            }
        }
    }
    let mut free_pending = 0usize;
    let mut rank_history: Vec<usize> = Vec::new();
    let mut last_residual = f64::NAN;
    let mut residual_failed = false;
    for h in 1..=opts.max_iter {
        y = dense_step_with_policy(y, opts, &mut free_pending)?;
        if h % opts.cadence != 0 {
            continue;
        }
        let s = y.matmul(&y).shift_diag(Complex64::new(1.0, 0.0));
        // The Frobenius norm dominates the spectral radius, so a surviving
        // real image (>= 1) keeps it above 1; genuinely empty spectra decay.
        if s.norm_fro() <= 1e-8 {
            return Ok(EigReport::new(Vec::new(), h, s.norm_fro(), SolveStatus::Converged));
        }
        // Bounded transform (S)(S + I)^{-1}: keeps a transient huge real
        // image from masking the others in the relative rank threshold.
        let t = s.shift_diag(Complex64::new(1.0, 0.0));
        let w = match linalg::lu_decompose(&t) {
            Ok(lu) => lu.solve_mat(&s),
            Err(_) => s.clone(),
        };
        let w_op = w.clone();
        let apply = move |v: &[Complex64]| w_op.matvec(v);
        let cap = r.map_or(opts.eig_cap + 8, |want| want + 8);
        let rank = match rank_probe_op(&apply, n, opts.rank_tol, seed.derive(100 + h as u64), cap)
        {
            Some(rank) => rank,
            None => {
                rank_history.clear();
                continue;
            }
        };
        rank_history.push(rank);
        let ready = match r {
            Some(want) => rank == want,
            None => {
                let stable =
                    rank_history.len() >= 2 && rank_history[rank_history.len() - 2] == rank;
                stable && (rank < n || h >= 8)
            }
        };
        if !ready || rank > opts.eig_cap {
            continue;
        }
        if rank == 0 {
            return Ok(EigReport::new(Vec::new(), h, 0.0, SolveStatus::Converged));
        }
        let w_range = w.clone();
        let apply_range = move |v: &[Complex64]| w_range.matvec(v);
        let (basis, residual) = linalg::range_finder(
            &apply_range,
            n,
            rank,
            opts.oversample,
            seed.derive(1_000 + h as u64),
        )?;
        last_residual = residual;
        if residual > opts.residual_tol {
            residual_failed = true;
            continue;
        }
        let eigs = extract_eigs(m, &basis, opts, seed)?;
        return Ok(EigReport::new(eigs, h, residual, SolveStatus::Converged));
    }
    let status = if residual_failed {
        SolveStatus::Failure
    } else {
        SolveStatus::Partial
    };
    Ok(EigReport::new(Vec::new(), opts.max_iter, last_residual, status))
}

/// Real eigenvalues through the factorized filter: probe the numerical rank
/// of `(P^m - P^{-m})^{-1}`, double `m` (reusing factors) until it settles
/// at the real count, then project and solve the small eigenproblem.
pub fn real_eigs_factored(
    m: &DenseMatrix,
    r: Option<usize>,
    m0: usize,
    opts: &SignIterOptions,
    seed: RngSeed,
) -> Result<EigReport> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("real_eigs_factored".into()));
    }
    if !m.is_real() {
        return Err(Error::PreconditionViolated(
            "real_eigs_factored expects a real matrix".into(),
        ));
    }
    let n = m.rows;
    const M_CAP: usize = 1024;
    let mut filter = FactoredFilter::new(m, m0.max(1))?;
    let mut prev_rank: Option<usize> = None;
    loop {
        let apply = |v: &[Complex64]| filter.apply(v);
        let cap = r.map_or(opts.eig_cap + 8, |want| want + 8);
        let order = filter.m;
        let rank = rank_probe_op(&apply, n, opts.rank_tol, seed.derive(order as u64), cap);
        let accept = match (rank, r) {
            (Some(rank), Some(want)) => rank == want,
            (Some(rank), None) => prev_rank == Some(rank),
            (None, _) => false,
        };
        if accept {
            let rank = rank.unwrap();
            if rank == 0 {
                return Ok(EigReport::new(Vec::new(), order, 0.0, SolveStatus::Converged));
            }
            let apply_range = |v: &[Complex64]| filter.apply(v);
            let (basis, residual) = linalg::range_finder(
                &apply_range,
                n,
                rank,
                opts.oversample,
                seed.derive(9_000 + order as u64),
            )?;
            if residual <= opts.residual_tol {
                let eigs = extract_eigs(m, &basis, opts, seed)?;
                return Ok(EigReport::new(eigs, order, residual, SolveStatus::Converged));
            }
        }
        prev_rank = rank;
        if filter.m * 2 > M_CAP {
            return Ok(EigReport::new(
                Vec::new(),
                filter.m,
                f64::NAN,
                SolveStatus::Partial,
            ));
        }
        filter.double()?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scale_matrix_example() {
        let m = DenseMatrix::identity(3).scale(c(2.0, 0.0));
        let scaled = scale_matrix(&m, 0.5).unwrap();
        let expect = 0.5 * 2.0 / (2.0 * 3.0f64.sqrt());
        assert!((scaled.at(0, 0).re - expect).abs() < 1e-15);
        assert!(scale_matrix(&DenseMatrix::zeros(2, 2), 0.5).is_err());
    }

    #[test]
    fn cayley_matrix_examples() {
        let zero = DenseMatrix::zeros(1, 1);
        let p = cayley_matrix(&zero).unwrap();
        assert!((p.at(0, 0) - c(-1.0, 0.0)).norm() < 1e-14);

        let one = DenseMatrix::identity(1);
        let p = cayley_matrix(&one).unwrap();
        assert!((p.at(0, 0) - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn filter_magnitude_on_real_eigenvalue() {
        // M = diag(1): P = i, Y = (P - P^{-1})^{-1} = -i/2
        let m = DenseMatrix::identity(1);
        let filter = FactoredFilter::new(&m, 1).unwrap();
        let out = filter.apply(&[c(1.0, 0.0)]);
        assert!((out[0] - c(0.0, -0.5)).norm() < 1e-12, "{}", out[0]);
    }

    #[test]
    fn filter_is_linear() {
        let m = DenseMatrix::from_real_rows(&[
            vec![0.4, 1.0, 0.0],
            vec![-0.3, 0.2, 0.5],
            vec![0.0, -0.8, 0.1],
        ]);
        let filter = FactoredFilter::new(&m, 4).unwrap();
        let v = [c(1.0, 0.0), c(0.0, 1.0), c(-0.5, 0.25)];
        let w = [c(0.3, -0.4), c(1.0, 0.0), c(0.0, 0.7)];
        let a = c(0.7, -0.2);
        let b = c(-1.1, 0.4);
        let combo: Vec<Complex64> = v.iter().zip(w.iter()).map(|(x, y)| a * x + b * y).collect();
        let lhs = filter.apply(&combo);
        let fv = filter.apply(&v);
        let fw = filter.apply(&w);
        for k in 0..3 {
            let rhs = a * fv[k] + b * fw[k];
            assert!((lhs[k] - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn filter_crushes_nonreal_eigenvalues_as_m_doubles() {
        // spectrum {+-0.9i}
        let m = DenseMatrix::from_real_rows(&[vec![0.0, -0.9], vec![0.9, 0.0]]);
        let mut filter = FactoredFilter::new(&m, 2).unwrap();
        let v = [c(1.0, 0.0), c(0.0, 0.0)];
        let mut prev = f64::INFINITY;
        for _ in 0..4 {
            let out = filter.apply(&v);
            let mag = (out[0].norm_sqr() + out[1].norm_sqr()).sqrt();
            assert!(mag < prev, "magnitude {mag} did not shrink (prev {prev})");
            prev = mag;
            filter.double().unwrap();
        }
    }

    #[test]
    fn factor_cache_reused_across_doubling() {
        let m = DenseMatrix::from_real_rows(&[vec![0.2, 1.0], vec![-0.4, 0.3]]);
        let mut filter = FactoredFilter::new(&m, 4).unwrap();
        let before = filter.cache.len();
        filter.double().unwrap();
        let after = filter.cache.len();
        // doubling adds only the odd angles
        assert_eq!(after - before, 8);
    }

    #[test]
    fn real_eigs_sign_block_diagonal() {
        // diag(1, 2) ++ rotation(pi/3)
        let (s, co) = (std::f64::consts::FRAC_PI_3.sin(), std::f64::consts::FRAC_PI_3.cos());
        let m = DenseMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0, 0.0],
            vec![0.0, 0.0, co, -s],
            vec![0.0, 0.0, s, co],
        ]);
        let report = real_eigs_sign(&m, Some(2), &SignIterOptions::default(), RngSeed(17)).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert_eq!(report.eigenvalues.len(), 2, "{:?}", report.eigenvalues);
        assert!((report.eigenvalues[0] - 1.0).abs() <= 1e-8);
        assert!((report.eigenvalues[1] - 2.0).abs() <= 1e-8);
    }

    #[test]
    fn factored_driver_matches_dense_driver() {
        // companion of (x^2+1)(x-2)(x-3)
        let p = Polynomial::from_real(&[1.0, 0.0, 1.0]).mul(&Polynomial::from_roots(&[
            c(2.0, 0.0),
            c(3.0, 0.0),
        ]));
        let m = crate::bench::companion_matrix(&p).unwrap();
        let dense = real_eigs_sign(&m, Some(2), &SignIterOptions::default(), RngSeed(3)).unwrap();
        let fact = real_eigs_factored(&m, Some(2), 8, &SignIterOptions::default(), RngSeed(3)).unwrap();
        assert_eq!(dense.eigenvalues.len(), 2);
        assert_eq!(fact.eigenvalues.len(), 2);
        for (a, b) in dense.eigenvalues.iter().zip(fact.eigenvalues.iter()) {
            assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn factored_driver_identity_matrix() {
        let m = DenseMatrix::identity(5);
        let report =
            real_eigs_factored(&m, Some(5), 8, &SignIterOptions::default(), RngSeed(23)).unwrap();
        assert_eq!(report.eigenvalues.len(), 5);
        for e in &report.eigenvalues {
            assert!((e - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn companion_filter_matches_dense_filter() {
        let p = Polynomial::from_real(&[1.0, 0.0, 1.0]).mul(&Polynomial::from_roots(&[
            c(2.0, 0.0),
            c(3.0, 0.0),
        ]));
        let mdense = crate::bench::companion_matrix(&p).unwrap();
        let filter = FactoredFilter::new(&mdense, 4).unwrap();
        let element = companion_filter_element(&p, 4).unwrap();
        let v: Vec<Complex64> = (0..4).map(|k| c(0.3 * k as f64 - 0.5, 0.1 * k as f64)).collect();
        let dense_out = filter.apply(&v);
        let alg_out = crate::frobenius::apply_to_vector(&element, &v).unwrap();
        for (a, b) in dense_out.iter().zip(alg_out.iter()) {
            assert!((a - b).norm() <= 1e-8 * (1.0 + b.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn hessenberg_solver_matches_dense() {
        let p = Polynomial::from_real(&[2.0, -1.0, 0.5, 1.0]);
        let m = crate::bench::companion_matrix(&p).unwrap();
        assert!(is_upper_hessenberg(&m));
        let shifted = m.shift_diag(c(0.3, 0.7));
        let hess = HessLu::new(&shifted).unwrap();
        let dense = linalg::lu_decompose(&shifted).unwrap();
        let b = vec![c(1.0, 0.0), c(-0.5, 0.25), c(0.0, 1.0)];
        let x1 = hess.solve(&b);
        let x2 = dense.solve_vec(&b);
        for (a, b) in x1.iter().zip(x2.iter()) {
            assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }
}
