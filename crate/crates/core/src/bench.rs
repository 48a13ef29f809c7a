//! Test-family generators, the brute-force root/eigenvalue oracle, and the
//! experiment harness behind the `bench` subcommand.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frobenius::CompanionMatrix;
use crate::linalg::{self, DenseMatrix, RngSeed};
use crate::poly::Polynomial;
use crate::radii::{deflate_zero_roots, newton_refine};


/// Degree/order cap for the oracle.
pub const ORACLE_CAP: usize = 500;

/// Imaginary-part threshold (relative) for classifying an oracle value as
/// real.
pub const ORACLE_REAL_TOL: f64 = 1e-7;

/// All complex roots by the balanced companion-Hessenberg QR iteration with
/// a final Newton polish. The reference answer the solvers are measured
/// against.
pub fn oracle_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    if p.degree() > ORACLE_CAP {
        return Err(Error::InvalidArgument(format!(
            "oracle_roots caps at degree {ORACLE_CAP}"
        )));
    }
    let (zero_mult, reduced) = deflate_zero_roots(p);
    let mut roots = vec![Complex64::new(0.0, 0.0); zero_mult];
    if reduced.degree() == 0 {
        return Ok(roots);
    }
    let companion = CompanionMatrix::new(&reduced)?.to_dense();
    let mut h = companion;
    linalg::balance(&mut h);
    let eigs = linalg::hessenberg_qr_eigenvalues(&mut h)?;
    for e in eigs {
        roots.push(polish_root(&reduced, e));
    }
    if p.is_real() {
        pair_conjugates(&mut roots);
    }
    Ok(roots)
}

/// All eigenvalues of a dense matrix, conjugate-paired for real inputs.
pub fn oracle_eigs(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    if m.rows > ORACLE_CAP {
        return Err(Error::InvalidArgument(format!(
            "oracle_eigs caps at order {ORACLE_CAP}"
        )));
    }
    let mut eigs = linalg::eigenvalues(m)?;
    if m.is_real() {
        pair_conjugates(&mut eigs);
    }
    Ok(eigs)
}

/// The real members of an oracle value list.
pub fn real_members(values: &[Complex64]) -> Vec<f64> {
    let mut out: Vec<f64> = values
        .iter()
        .filter(|v| v.im.abs() <= ORACLE_REAL_TOL * (1.0 + v.norm()))
        .map(|v| v.re)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// A couple of Newton steps, accepted only while they shrink the residual
/// and stay local (so clustered roots are not reshuffled).
fn polish_root(p: &Polynomial, start: Complex64) -> Complex64 {
    let out = newton_refine(p, start, 1e-14, 20);
    let moved = (out.x - start).norm();
    if moved <= 0.05 * (1.0 + start.norm())
        && p.eval(out.x).norm() <= p.eval(start).norm() * (1.0 + 1e-12)
    {
        out.x
    } else {
        start
    }
}

/// Forces the list to be exactly closed under conjugation: nearly
/// conjugate pairs are symmetrized, stray small imaginary parts dropped.
fn pair_conjugates(values: &mut [Complex64]) {
    let n = values.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || values[i].im <= 0.0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if j == i || used[j] || values[j].im > 0.0 {
                continue;
            }
            let d = (values[j].conj() - values[i]).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            if d <= 1e-6 * (1.0 + values[i].norm()) {
                let avg = (values[i] + values[j].conj()) * 0.5;
                values[i] = avg;
                values[j] = avg.conj();
                used[i] = true;
                used[j] = true;
            }
        }
    }
    for v in values.iter_mut() {
        if v.im.abs() <= 1e-13 * (1.0 + v.norm()) {
            v.im = 0.0;
        }
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// The Mignotte-style benchmark `x^n + (100 x - 1)^3`: three ill-conditioned
/// roots clustered near 0.01 plus well-conditioned outer roots.
pub fn gen_mignotte(n: usize) -> Result<Polynomial> {
    if n < 4 {
        return Err(Error::InvalidArgument("gen_mignotte needs n >= 4".into()));
    }
    let mut coeffs = vec![0.0f64; n + 1];
    coeffs[0] = -1.0;
    coeffs[1] = 300.0;
    coeffs[2] = -30_000.0;
    coeffs[3] = 1_000_000.0;
    coeffs[n] += 1.0;
    Ok(Polynomial::from_real(&coeffs))
}

/// Chebyshev polynomial of the first kind, by the recurrence.
pub fn chebyshev(r: usize) -> Polynomial {
    let mut t0 = Polynomial::from_real(&[1.0]);
    if r == 0 {
        return t0;
    }
    let mut t1 = Polynomial::x();
    let two_x = Polynomial::from_real(&[0.0, 2.0]);
    for _ in 2..=r {
        let next = t1.mul(&two_x).sub(&t0);
        t0 = t1;
        t1 = next;
    }
    t1
}

/// The closed-form Chebyshev roots `cos((2k+1) pi / (2r))`, ascending.
pub fn chebyshev_roots(r: usize) -> Vec<f64> {
    let mut roots: Vec<f64> = (0..r)
        .map(|k| ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * r) as f64).cos())
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Product family: the degree-`r` Chebyshev polynomial times a random
/// polynomial with i.i.d. standard Gaussian coefficients. Returns the
/// polynomial and its known real roots: the Chebyshev nodes plus whatever
/// real roots the random factor happens to have (found by the oracle).
pub fn gen_cheb_product(n: usize, r: usize, seed: RngSeed) -> Result<(Polynomial, Vec<f64>)> {
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(
            "gen_cheb_product needs 0 < r <= n".into(),
        ));
    }
    let cheb = chebyshev(r);
    let coeffs = linalg::gaussian_vector(n - r + 1, seed);
    let f2 = Polynomial::new(coeffs);
    let p = cheb.mul(&f2);
    let mut truth = chebyshev_roots(r);
    if f2.degree() > 0 {
        truth.extend(real_members(&oracle_roots(&f2)?));
    }
    truth.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok((p, truth))
}

/// Prescribed-spectrum real matrix `A = U^T D U` with `U` a random
/// orthogonal matrix and `D` block diagonal: `r` real eigenvalues and
/// `(n-r)/2` conjugate pairs `a +- b i`, all parameters standard Gaussian.
/// Returns the matrix and its exact real eigenvalues.
pub fn gen_prescribed_matrix(
    n: usize,
    r: usize,
    seed: RngSeed,
) -> Result<(DenseMatrix, Vec<f64>)> {
    if r > n || (n - r) % 2 != 0 {
        return Err(Error::InvalidArgument(
            "gen_prescribed_matrix needs n - r even".into(),
        ));
    }
    let mut d = DenseMatrix::zeros(n, n);
    let params = linalg::gaussian_vector(n + (n - r) / 2, seed.derive(1));
    let mut reals = Vec::with_capacity(r);
    for i in 0..r {
        let x = params[i].re;
        *d.at_mut(i, i) = Complex64::new(x, 0.0);
        reals.push(x);
    }
    let mut idx = r;
    let mut park = r;
    while idx < n {
        let a = params[park].re;
        let mut b = params[park + (n - idx) / 2].re;
        if b == 0.0 {
            b = 1.0;
        }
        *d.at_mut(idx, idx) = Complex64::new(a, 0.0);
        *d.at_mut(idx + 1, idx + 1) = Complex64::new(a, 0.0);
        *d.at_mut(idx, idx + 1) = Complex64::new(-b, 0.0);
        *d.at_mut(idx + 1, idx) = Complex64::new(b, 0.0);
        idx += 2;
        park += 1;
    }
    let g = linalg::gaussian_matrix(n, n, seed.derive(2));
    let (u, _) = linalg::qr(&g)?;
    let a = u.hermitian().matmul(&d).matmul(&u);
    reals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok((a, reals))
}

/// Dense companion matrix of a polynomial (after deflating zero roots the
/// caller should handle separately).
pub fn companion_matrix(p: &Polynomial) -> Result<DenseMatrix> {
    Ok(CompanionMatrix::new(p)?.to_dense())
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

/// Aggregated outcome of one benchmark cell.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TrialStats {
    pub n: usize,
    pub r: usize,
    pub iter_mean: f64,
    pub iter_std: f64,
    pub bound_mean: f64,
    pub bound_std: f64,
    pub trials: usize,
    pub failures: usize,
    pub seed: RngSeed,
}

pub(crate) fn mean_std(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    if samples.len() == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
        / (samples.len() - 1) as f64;
    (mean, var.sqrt())
}

/// Largest distance from any true real root to its nearest computed root;
/// infinite when a root has no computed partner at all.
pub fn real_root_bound(truth: &[f64], computed: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for &t in truth {
        let best = computed
            .iter()
            .map(|&c| (c - t).abs())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    worst
}

/// CSV with the fixed column set used by the CLI.
pub fn stats_to_csv(stats: &[TrialStats]) -> String {
    let mut out = String::from("n,r,iter_mean,iter_std,bound_mean,bound_std,failures\n");
    for s in stats {
        out.push_str(&format!(
            "{},{},{:.4},{:.4},{:.6e},{:.6e},{}\n",
            s.n, s.r, s.iter_mean, s.iter_std, s.bound_mean, s.bound_std, s.failures
        ));
    }
    out
}

// Table runners are defined in `harness` below once the solvers exist; the
// module is re-exported flat.
mod harness;
pub use harness::*;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn oracle_roots_of_quadratic() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let mut roots: Vec<f64> = oracle_roots(&p).unwrap().iter().map(|r| r.re).collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((roots[0] + 1.0).abs() < 1e-12 && (roots[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_wilkinson_10() {
        let roots: Vec<Complex64> = (1..=10).map(|k| c(k as f64, 0.0)).collect();
        let p = Polynomial::from_roots(&roots);
        let got = oracle_roots(&p).unwrap();
        for k in 1..=10 {
            let target = k as f64;
            let d = got
                .iter()
                .map(|r| (r - c(target, 0.0)).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-6, "root {k}: distance {d}");
        }
    }

    #[test]
    fn oracle_real_input_conjugate_closure() {
        let p = Polynomial::from_real(&[5.0, -1.0, 2.0, 0.3, 1.0]);
        let roots = oracle_roots(&p).unwrap();
        for r in &roots {
            if r.im != 0.0 {
                let partner = roots.iter().any(|s| (s - r.conj()).norm() == 0.0);
                assert!(partner, "no exact conjugate partner for {r}");
            }
        }
    }

    #[test]
    fn mignotte_construction() {
        let p = gen_mignotte(4).unwrap();
        // x^4 + 10^6 x^3 - 3*10^4 x^2 + 300 x - 1
        let expected = [-1.0, 300.0, -30_000.0, 1_000_000.0, 1.0];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(p.coeff(i), c(e, 0.0));
        }
        assert_eq!(gen_mignotte(32).unwrap().coeffs().len(), 33);
        assert!(gen_mignotte(3).is_err());
    }

    #[test]
    fn mignotte_matches_exact_rational_evaluation() {
        // p(1/100) = (1/100)^n exactly: (100 x - 1)^3 vanishes there, so the
        // big-integer value of p(1/100) * 100^n must be exactly 1.
        use num_bigint::BigInt;
        let n = 32usize;
        let p = gen_mignotte(n).unwrap();
        let hundred = BigInt::from(100);
        let mut scaled_value = BigInt::from(0);
        for i in 0..=n {
            scaled_value += BigInt::from(p.coeff(i).re as i64) * hundred.pow((n - i) as u32);
        }
        assert_eq!(scaled_value, BigInt::from(1));
    }

    #[test]
    fn cheb_product_contains_chebyshev_factor() {
        let (p, truth) = gen_cheb_product(10, 2, RngSeed(11)).unwrap();
        // T_2 = 2x^2 - 1 divides p
        let t2 = Polynomial::from_real(&[-1.0, 0.0, 2.0]);
        let (_, rem) = p.divrem(&t2).unwrap();
        assert!(rem.norm_inf() <= 1e-12 * p.norm_inf());
        for root in chebyshev_roots(2) {
            assert!(truth.iter().any(|t| (t - root).abs() < 1e-12));
        }
    }

    #[test]
    fn cheb_product_truth_confirmed_by_oracle() {
        let (p, truth) = gen_cheb_product(14, 4, RngSeed(3)).unwrap();
        let oracle = oracle_roots(&p).unwrap();
        for &t in &truth {
            let d = oracle
                .iter()
                .map(|r| (r - c(t, 0.0)).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-7, "truth root {t} unexplained (dist {d})");
        }
    }

    #[test]
    fn prescribed_matrix_spectrum() {
        let (a, reals) = gen_prescribed_matrix(8, 2, RngSeed(21)).unwrap();
        assert!(a.is_real());
        let eigs = oracle_eigs(&a).unwrap();
        for &t in &reals {
            let d = eigs
                .iter()
                .map(|e| (e - c(t, 0.0)).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-10, "real eigenvalue {t} missing (dist {d})");
        }
        let real_count = real_members(&eigs).len();
        assert_eq!(real_count, 2);
        // r = n gives a symmetric matrix
        let (sym, _) = gen_prescribed_matrix(6, 6, RngSeed(5)).unwrap();
        let asym = sym.sub(&sym.hermitian()).norm_fro();
        assert!(asym < 1e-12 * sym.norm_fro().max(1.0));
    }

    #[test]
    fn bound_metric_examples() {
        assert!((real_root_bound(&[1.0, 2.0], &[1.0, 2.05]) - 0.05).abs() < 1e-12);
        assert!(real_root_bound(&[1.0], &[]).is_infinite());
        assert_eq!(real_root_bound(&[], &[3.0]), 0.0);
    }
}
