//! Dense real/complex kernels: QR with positive diagonal, LU solves, the
//! shifted Hessenberg QR eigenvalue iteration, and seeded randomized range
//! finding / numerical rank probes.
//!
//! Matrices are stored row-major with complex entries; real matrices simply
//! carry exactly zero imaginary parts.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Seed for all randomized kernels. The same seed always reproduces the same
/// stream, independent of platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Derives a decorrelated child seed (splitmix64 finalizer).
    pub fn derive(self, salt: u64) -> RngSeed {
        let mut z = self.0 ^ salt.wrapping_mul(0x9e3779b97f4a7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        RngSeed(z ^ (z >> 31))
    }

    fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<Complex64>,
}

impl std::fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DenseMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            for j in 0..self.cols.min(8) {
                write!(f, " {:+.3e}{:+.3e}i", self.at(i, j).re, self.at(i, j).im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(rows * cols, entries.len());
        DenseMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            for &x in row {
                entries.push(Complex64::new(x, 0.0));
            }
        }
        DenseMatrix::from_entries(r, c, entries)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = DenseMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                *m.at_mut(i, j) = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|c| c.im == 0.0)
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Complex64]) {
        assert_eq!(col.len(), self.rows);
        for i in 0..self.rows {
            *self.at_mut(i, j) = col[i];
        }
    }

    /// Hermitian transpose.
    pub fn hermitian(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i).conj())
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            let base = i * self.cols;
            for j in 0..self.cols {
                acc += self.entries[base + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    *out.at_mut(i, j) += a * other.at(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a + b)
            .collect();
        DenseMatrix::from_entries(self.rows, self.cols, entries)
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix::from_entries(self.rows, self.cols, entries)
    }

    pub fn scale(&self, s: Complex64) -> DenseMatrix {
        DenseMatrix::from_entries(
            self.rows,
            self.cols,
            self.entries.iter().map(|&e| e * s).collect(),
        )
    }

    /// Adds `s` to the diagonal.
    pub fn shift_diag(&self, s: Complex64) -> DenseMatrix {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            *out.at_mut(i, i) += s;
        }
        out
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Standard Gaussian matrix, deterministic per seed. Entries are real
/// (zero imaginary part), generated column by column so a wider sketch built
/// from the same seed extends a narrower one.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: RngSeed) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        let col = gaussian_vector(rows, seed.derive(j as u64));
        m.set_column(j, &col);
    }
    m
}

pub fn gaussian_vector(len: usize, seed: RngSeed) -> Vec<Complex64> {
    let mut rng = seed.rng();
    (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
        .collect()
}

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
    pub min_pivot: f64,
    pub max_pivot: f64,
}

impl Lu {
    pub fn n(&self) -> usize {
        self.lu.rows
    }

    /// Ratio of smallest to largest pivot; a cheap conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    /// `|det|^{1/n}` from the pivot magnitudes.
    pub fn abs_det_root(&self) -> f64 {
        let n = self.n();
        if n == 0 || self.min_pivot == 0.0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        for i in 0..n {
            log_sum += self.lu.at(i, i).norm().ln();
        }
        (log_sum / n as f64).exp()
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu.at(i, j) * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu.at(i, j) * x[j];
            }
            x[i] = acc / self.lu.at(i, i);
        }
        x
    }

    pub fn solve_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            let col = self.solve_vec(&b.column(j));
            out.set_column(j, &col);
        }
        out
    }
}

/// Factors a square matrix; errors when a pivot collapses to working
/// precision.
pub fn lu_decompose(a: &DenseMatrix) -> Result<Lu> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("lu of non-square matrix".into()));
    }
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = a.max_abs();
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot = 0.0f64;
    for k in 0..n {
        let mut best = k;
        let mut best_mag = lu.at(k, k).norm();
        for i in k + 1..n {
            let mag = lu.at(i, k).norm();
            if mag > best_mag {
                best = i;
                best_mag = mag;
            }
        }
        if best_mag <= scale * 1e-15 * n as f64 + f64::MIN_POSITIVE {
            return Err(Error::SingularMatrix);
        }
        if best != k {
            perm.swap(k, best);
            for j in 0..n {
                let tmp = lu.at(k, j);
                *lu.at_mut(k, j) = lu.at(best, j);
                *lu.at_mut(best, j) = tmp;
            }
        }
        min_pivot = min_pivot.min(best_mag);
        max_pivot = max_pivot.max(best_mag);
        let pivot = lu.at(k, k);
        for i in k + 1..n {
            let factor = lu.at(i, k) / pivot;
            *lu.at_mut(i, k) = factor;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let sub = factor * lu.at(k, j);
                *lu.at_mut(i, j) -= sub;
            }
        }
    }
    Ok(Lu {
        lu,
        perm,
        min_pivot,
        max_pivot,
    })
}

/// Solves `A X = B` by partial-pivot LU.
pub fn solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "solve: A is {}x{}, B is {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(lu_decompose(a)?.solve_mat(b))
}

// ---------------------------------------------------------------------------
// Householder QR
// ---------------------------------------------------------------------------

struct Reflector {
    v: Vec<Complex64>,
    start: usize,
    inv_norm2: f64,
}

impl Reflector {
    /// Builds the reflector sending `x` to `beta e_1`; `None` for zero `x`.
    fn from_column(x: &[Complex64], start: usize) -> Option<(Reflector, Complex64)> {
        let norm_x = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            return None;
        }
        let alpha = x[0];
        let phase = if alpha.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            alpha / alpha.norm()
        };
        let beta = -phase * norm_x;
        let mut v = x.to_vec();
        v[0] -= beta;
        let vn2 = v.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if vn2 == 0.0 {
            return None;
        }
        Some((
            Reflector {
                v,
                start,
                inv_norm2: 1.0 / vn2,
            },
            beta,
        ))
    }

    /// Applies `I - 2 v v^H / (v^H v)` to the slice `y[start..]`.
    fn apply(&self, y: &mut [Complex64]) {
        let seg = &mut y[self.start..self.start + self.v.len()];
        let mut dot = Complex64::new(0.0, 0.0);
        for (vi, yi) in self.v.iter().zip(seg.iter()) {
            dot += vi.conj() * yi;
        }
        let factor = dot * (2.0 * self.inv_norm2);
        for (vi, yi) in self.v.iter().zip(seg.iter_mut()) {
            *yi -= factor * vi;
        }
    }
}

/// Thin QR of an `m x n` matrix (`m >= n`) with orthonormal `Q` (`m x n`)
/// and upper-triangular `R` (`n x n`) whose diagonal is real positive.
pub fn qr(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    if m.rows < m.cols {
        return Err(Error::DimensionMismatch(
            "qr expects at least as many rows as columns".into(),
        ));
    }
    let (rows, cols) = (m.rows, m.cols);
    let mut work = m.clone();
    let mut reflectors: Vec<Option<Reflector>> = Vec::with_capacity(cols);
    let scale = m.max_abs();
    for k in 0..cols {
        let col: Vec<Complex64> = (k..rows).map(|i| work.at(i, k)).collect();
        match Reflector::from_column(&col, k) {
            Some((refl, beta)) => {
                for j in k..cols {
                    let mut column: Vec<Complex64> = (0..rows).map(|i| work.at(i, j)).collect();
                    refl.apply(&mut column);
                    for i in 0..rows {
                        *work.at_mut(i, j) = column[i];
                    }
                }
                *work.at_mut(k, k) = beta;
                reflectors.push(Some(refl));
            }
            None => reflectors.push(None),
        }
        if work.at(k, k).norm() <= scale * 1e-13 * rows as f64 {
            return Err(Error::RankDeficient { rank: k });
        }
    }
    // Accumulate the thin Q by applying the reflectors to identity columns.
    let mut q = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        let mut e = vec![Complex64::new(0.0, 0.0); rows];
        e[j] = Complex64::new(1.0, 0.0);
        for refl in reflectors.iter().rev().flatten() {
            refl.apply(&mut e);
        }
        q.set_column(j, &e);
    }
    let mut r = DenseMatrix::zeros(cols, cols);
    for i in 0..cols {
        for j in i..cols {
            *r.at_mut(i, j) = work.at(i, j);
        }
    }
    // Normalize phases so every R diagonal entry is real positive.
    for j in 0..cols {
        let d = r.at(j, j);
        if d.norm() == 0.0 {
            continue;
        }
        let phase = d / d.norm();
        let conj_phase = phase.conj();
        for col in j..cols {
            *r.at_mut(j, col) *= conj_phase;
        }
        for row in 0..rows {
            *q.at_mut(row, j) *= phase;
        }
    }
    Ok((q, r))
}

// ---------------------------------------------------------------------------
// Column-pivoted QR and the randomized probes built on it
// ---------------------------------------------------------------------------

struct Cpqr {
    reflectors: Vec<Option<Reflector>>,
    rdiag: Vec<f64>,
    /// Frobenius norm of the trailing block after each completed step.
    trailing: Vec<f64>,
    total_fro: f64,
    rows: usize,
}

fn col_pivoted_qr(h: &DenseMatrix, max_steps: usize) -> Cpqr {
    let (rows, cols) = (h.rows, h.cols);
    let steps = max_steps.min(rows).min(cols);
    let mut work = h.clone();
    let total_fro = work.norm_fro();
    let mut reflectors = Vec::with_capacity(steps);
    let mut rdiag = Vec::with_capacity(steps);
    let mut trailing = Vec::with_capacity(steps);
    for k in 0..steps {
        // Pivot: remaining column with the largest norm below row k.
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..cols {
            let nrm: f64 = (k..rows).map(|i| work.at(i, j).norm_sqr()).sum();
            if nrm > best_norm {
                best_norm = nrm;
                best = j;
            }
        }
        if best != k {
            for i in 0..rows {
                let tmp = work.at(i, k);
                *work.at_mut(i, k) = work.at(i, best);
                *work.at_mut(i, best) = tmp;
            }
        }
        let col: Vec<Complex64> = (k..rows).map(|i| work.at(i, k)).collect();
        match Reflector::from_column(&col, k) {
            Some((refl, beta)) => {
                for j in k..cols {
                    let mut column: Vec<Complex64> = (0..rows).map(|i| work.at(i, j)).collect();
                    refl.apply(&mut column);
                    for i in 0..rows {
                        *work.at_mut(i, j) = column[i];
                    }
                }
                *work.at_mut(k, k) = beta;
                rdiag.push(beta.norm());
                reflectors.push(Some(refl));
            }
            None => {
                rdiag.push(0.0);
                reflectors.push(None);
            }
        }
        let mut rest = 0.0;
        for i in k + 1..rows {
            for j in k + 1..cols {
                rest += work.at(i, j).norm_sqr();
            }
        }
        trailing.push(rest.sqrt());
    }
    Cpqr {
        reflectors,
        rdiag,
        trailing,
        total_fro,
        rows,
    }
}

impl Cpqr {
    /// Orthonormal basis of the first `k` pivoted directions.
    fn q_first(&self, k: usize) -> DenseMatrix {
        let mut q = DenseMatrix::zeros(self.rows, k);
        for j in 0..k {
            let mut e = vec![Complex64::new(0.0, 0.0); self.rows];
            e[j] = Complex64::new(1.0, 0.0);
            for refl in self.reflectors[..=j].iter().rev().flatten() {
                refl.apply(&mut e);
            }
            q.set_column(j, &e);
        }
        q
    }

    fn rank(&self, rel_tol: f64) -> usize {
        let top = self.rdiag.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        self.rdiag
            .iter()
            .take_while(|&&d| d > rel_tol * top)
            .count()
    }
}

/// Applies the operator to each column of `g`.
fn sketch(apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>, g: &DenseMatrix) -> DenseMatrix {
    let mut h = DenseMatrix::zeros(g.rows, g.cols);
    for j in 0..g.cols {
        let col = apply(&g.column(j));
        assert_eq!(col.len(), g.rows, "operator changed vector length");
        h.set_column(j, &col);
    }
    h
}

/// Default relative threshold for numerical rank decisions.
pub const RANK_TOL_DEFAULT: f64 = 1e-6;

/// Numerical rank of the sketched operator: a column-pivoted QR of `Y G` for
/// an `n x n` Gaussian `G`, counting pivots above `tol` relative to the
/// largest. Monotone nonincreasing in `tol`.
pub fn numerical_rank(
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    n: usize,
    tol: f64,
    seed: RngSeed,
) -> usize {
    let g = gaussian_matrix(n, n, seed);
    let h = sketch(apply, &g);
    let f = col_pivoted_qr(&h, n);
    f.rank(tol)
}

/// Rank probe that doubles the sketch width until the detected rank falls
/// short of it, so low ranks cost only a handful of operator applications.
pub fn numerical_rank_doubling(
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    n: usize,
    tol: f64,
    seed: RngSeed,
) -> usize {
    let mut s = 4.min(n);
    loop {
        let g = gaussian_matrix(n, s, seed);
        let h = sketch(apply, &g);
        let f = col_pivoted_qr(&h, s);
        let rank = f.rank(tol);
        if rank < s || s == n {
            return rank;
        }
        s = (2 * s).min(n);
    }
}

/// Randomized range finder: sketches the operator with `r + oversample`
/// Gaussian columns, orthonormalizes by column-pivoted QR, and returns the
/// dominant `n x r` basis together with the relative residual proxy
/// `||Y - Q Q^H Y||_F / ||Y||_F` measured on the sketch.
pub fn range_finder(
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    n: usize,
    r: usize,
    oversample: usize,
    seed: RngSeed,
) -> Result<(DenseMatrix, f64)> {
    if r > n {
        return Err(Error::InvalidArgument(format!(
            "range_finder: r = {r} exceeds dimension {n}"
        )));
    }
    if r == 0 {
        return Ok((DenseMatrix::zeros(n, 0), 0.0));
    }
    let extra = oversample.min(n - r);
    let cols = r + extra;
    let g = gaussian_matrix(n, cols, seed);
    let h = sketch(apply, &g);
    let f = col_pivoted_qr(&h, cols);
    let top = f.rdiag.first().copied().unwrap_or(0.0);
    for j in 0..r {
        if f.rdiag[j] <= 1e-12 * top {
            return Err(Error::RankBelowTarget { actual: j });
        }
    }
    let q = f.q_first(r);
    let residual = if f.total_fro == 0.0 {
        0.0
    } else {
        f.trailing[r - 1] / f.total_fro
    };
    Ok((q, residual))
}

// ---------------------------------------------------------------------------
// Eigenvalues: balance + Hessenberg + shifted QR
// ---------------------------------------------------------------------------

/// Diagonal (radix-2) balancing; an eigenvalue-preserving similarity.
pub fn balance(a: &mut DenseMatrix) {
    let n = a.rows;
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    let mut rounds = 0;
    while !done && rounds < 100 {
        done = true;
        rounds += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a.at(j, i).norm();
                    r += a.at(i, j).norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut c2 = c;
            let mut g = r / RADIX;
            while c2 < g {
                f *= RADIX;
                c2 *= sqrdx;
            }
            g = r * RADIX;
            while c2 > g {
                f /= RADIX;
                c2 /= sqrdx;
            }
            if (c2 + r) / f < 0.95 * s && f != 1.0 {
                done = false;
                let ginv = 1.0 / f;
                for j in 0..n {
                    *a.at_mut(i, j) *= ginv;
                }
                for j in 0..n {
                    *a.at_mut(j, i) *= f;
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form (similarity).
pub fn hessenberg_reduce(a: &mut DenseMatrix) {
    let n = a.rows;
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let col: Vec<Complex64> = (k + 1..n).map(|i| a.at(i, k)).collect();
        let Some((refl, beta)) = Reflector::from_column(&col, 0) else {
            continue;
        };
        // Left: rows k+1.. of columns k..n
        for j in k..n {
            let mut column: Vec<Complex64> = (k + 1..n).map(|i| a.at(i, j)).collect();
            refl.apply(&mut column);
            for (idx, i) in (k + 1..n).enumerate() {
                *a.at_mut(i, j) = column[idx];
            }
        }
        // Right: columns k+1.. of all rows; H is Hermitian, so acting on the
        // conjugated row slice gives the right-multiplication entrywise.
        for i in 0..n {
            let mut row: Vec<Complex64> = (k + 1..n).map(|j| a.at(i, j).conj()).collect();
            refl.apply(&mut row);
            for (idx, j) in (k + 1..n).enumerate() {
                *a.at_mut(i, j) = row[idx].conj();
            }
        }
        *a.at_mut(k + 1, k) = beta;
        for i in k + 2..n {
            *a.at_mut(i, k) = Complex64::new(0.0, 0.0);
        }
    }
}

fn givens(a: Complex64, b: Complex64) -> (Complex64, Complex64, Complex64) {
    let t = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if t == 0.0 {
        return (
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
    }
    let c = a.conj() / t;
    let s = b.conj() / t;
    (c, s, Complex64::new(t, 0.0))
}

fn eig_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    (tr_half + disc, tr_half - disc)
}

/// Eigenvalues of an upper Hessenberg matrix by the shifted (Wilkinson) QR
/// iteration with explicit Givens sweeps.
pub fn hessenberg_qr_eigenvalues(h: &mut DenseMatrix) -> Result<Vec<Complex64>> {
    let n = h.rows;
    let mut eigs = Vec::with_capacity(n);
    if n == 0 {
        return Ok(eigs);
    }
    let eps = f64::EPSILON;
    let fro = h.norm_fro().max(f64::MIN_POSITIVE);
    let mut hi = n;
    let mut stall = 0usize;
    let mut sweeps_left = 80 * n.max(2);
    while hi > 0 {
        // Deflation scan: find the start of the active block ending at hi-1.
        let mut lo = hi - 1;
        while lo > 0 {
            let s = h.at(lo - 1, lo - 1).norm() + h.at(lo, lo).norm();
            let s = if s == 0.0 { fro } else { s };
            if h.at(lo, lo - 1).norm() <= eps * s {
                *h.at_mut(lo, lo - 1) = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        let size = hi - lo;
        if size == 1 {
            eigs.push(h.at(hi - 1, hi - 1));
            hi -= 1;
            stall = 0;
            continue;
        }
        if size == 2 {
            let (l1, l2) = eig_2x2(
                h.at(lo, lo),
                h.at(lo, lo + 1),
                h.at(lo + 1, lo),
                h.at(lo + 1, lo + 1),
            );
            eigs.push(l1);
            eigs.push(l2);
            hi -= 2;
            stall = 0;
            continue;
        }
        if sweeps_left == 0 {
            return Err(Error::NoConvergence { lo, hi });
        }
        sweeps_left -= 1;
        stall += 1;
        // Wilkinson shift from the trailing 2x2, exceptional shift on stall.
        let shift = if stall % 16 == 0 {
            h.at(hi - 1, hi - 1) + Complex64::new(0.75 * h.at(hi - 1, hi - 2).norm(), 0.0)
        } else {
            let (l1, l2) = eig_2x2(
                h.at(hi - 2, hi - 2),
                h.at(hi - 2, hi - 1),
                h.at(hi - 1, hi - 2),
                h.at(hi - 1, hi - 1),
            );
            let target = h.at(hi - 1, hi - 1);
            if (l1 - target).norm() < (l2 - target).norm() {
                l1
            } else {
                l2
            }
        };
        for k in lo..hi {
            *h.at_mut(k, k) -= shift;
        }
        // QR sweep: zero the subdiagonal with row rotations, then multiply
        // them back on the right.
        let mut rots = Vec::with_capacity(hi - lo - 1);
        for k in lo..hi - 1 {
            let (c, s, r) = givens(h.at(k, k), h.at(k + 1, k));
            for j in k..hi {
                let x = h.at(k, j);
                let y = h.at(k + 1, j);
                *h.at_mut(k, j) = c * x + s * y;
                *h.at_mut(k + 1, j) = -s.conj() * x + c.conj() * y;
            }
            *h.at_mut(k, k) = r;
            *h.at_mut(k + 1, k) = Complex64::new(0.0, 0.0);
            rots.push((c, s));
        }
        for (idx, (c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            let row_end = (k + 2).min(hi);
            for i in lo..row_end {
                let x = h.at(i, k);
                let y = h.at(i, k + 1);
                *h.at_mut(i, k) = x * c.conj() + y * s.conj();
                *h.at_mut(i, k + 1) = -x * *s + y * *c;
            }
        }
        for k in lo..hi {
            *h.at_mut(k, k) += shift;
        }
    }
    Ok(eigs)
}

/// All eigenvalues of a dense square matrix: balance, Hessenberg reduction,
/// shifted QR.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(
            "eigenvalues of non-square matrix".into(),
        ));
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg_reduce(&mut h);
    hessenberg_qr_eigenvalues(&mut h)
}

/// Default order bound for the projected eigenproblem.
pub const SMALL_EIG_BOUND: usize = 64;

/// Eigenvalues of a small dense matrix (the projected `r x r` problem).
/// Rejects orders above `bound` — these blocks are meant to stay small.
pub fn small_eigs_bounded(l: &DenseMatrix, bound: usize) -> Result<Vec<Complex64>> {
    if !l.is_square() {
        return Err(Error::DimensionMismatch(
            "small_eigs of non-square matrix".into(),
        ));
    }
    if l.rows > bound {
        return Err(Error::InvalidArgument(format!(
            "small_eigs: order {} exceeds configured bound {}",
            l.rows, bound
        )));
    }
    eigenvalues(l)
}

pub fn small_eigs(l: &DenseMatrix) -> Result<Vec<Complex64>> {
    small_eigs_bounded(l, SMALL_EIG_BOUND)
}

/// A few steps of inverse iteration: an approximate unit eigenvector of `a`
/// for the eigenvalue estimate `mu`.
pub fn inverse_iteration(
    a: &DenseMatrix,
    mu: Complex64,
    steps: usize,
    seed: RngSeed,
) -> Result<Vec<Complex64>> {
    let n = a.rows;
    let mut x = gaussian_vector(n, seed);
    normalize(&mut x);
    let scale = a.max_abs().max(1.0);
    let mut shift = mu;
    for attempt in 0..3 {
        let shifted = a.shift_diag(-shift);
        match lu_decompose(&shifted) {
            Ok(lu) => {
                for _ in 0..steps.max(1) {
                    x = lu.solve_vec(&x);
                    normalize(&mut x);
                }
                return Ok(x);
            }
            Err(_) => {
                // Exact hit: nudge the shift off the eigenvalue.
                shift += Complex64::new(scale * 1e-12 * (attempt + 1) as f64, 0.0);
            }
        }
    }
    Err(Error::SingularMatrix)
}

fn normalize(x: &mut [Complex64]) {
    let nrm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if nrm > 0.0 {
        for c in x.iter_mut() {
            *c /= nrm;
        }
    }
}

/// Rayleigh quotient `x^H A x / x^H x`.
pub fn rayleigh_quotient(a: &DenseMatrix, x: &[Complex64]) -> Complex64 {
    let ax = a.matvec(x);
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (xi, axi) in x.iter().zip(ax.iter()) {
        num += xi.conj() * axi;
        den += xi.norm_sqr();
    }
    num / den
}

// ---------------------------------------------------------------------------
// Matrix text format
// ---------------------------------------------------------------------------

/// Parses the matrix text format: first non-comment line `rows cols`, then
/// `rows*cols` row-major entries, one per line (`re` or `re im`).
pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        lines.push(line);
    }
    if lines.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }
    let mut header = lines[0].split_whitespace();
    let rows: usize = header
        .next()
        .ok_or_else(|| Error::Parse("missing rows".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("rows: {e}")))?;
    let cols: usize = header
        .next()
        .ok_or_else(|| Error::Parse("missing cols".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("cols: {e}")))?;
    let mut entries = Vec::with_capacity(rows * cols);
    for line in &lines[1..] {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let (re, im) = match parts.as_slice() {
            [re] => (re.parse::<f64>(), Ok(0.0)),
            [re, im] => (re.parse::<f64>(), im.parse::<f64>()),
            _ => return Err(Error::Parse(format!("bad entry line: {line}"))),
        };
        let re = re.map_err(|e| Error::Parse(format!("entry: {e}")))?;
        let im = im.map_err(|e| Error::Parse(format!("entry: {e}")))?;
        entries.push(Complex64::new(re, im));
    }
    if entries.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries, found {}",
            rows * cols,
            entries.len()
        )));
    }
    Ok(DenseMatrix::from_entries(rows, cols, entries))
}

/// Writes the format read by [`parse_matrix`], one entry per line.
pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            let c = m.at(i, j);
            if c.im == 0.0 {
                out.push_str(&format!("{:.17e}\n", c.re));
            } else {
                out.push_str(&format!("{:.17e} {:.17e}\n", c.re, c.im));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rand_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        gaussian_matrix(rows, cols, RngSeed(seed))
    }

    #[test]
    fn qr_identity_and_single_column() {
        let (q, r) = qr(&DenseMatrix::identity(4)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((q.at(i, j) - c(expect, 0.0)).norm() < 1e-14);
                assert!((r.at(i, j) - c(expect, 0.0)).norm() < 1e-14);
            }
        }
        let mut m = DenseMatrix::zeros(3, 1);
        *m.at_mut(0, 0) = c(2.0, 0.0);
        let (q, r) = qr(&m).unwrap();
        assert!((q.at(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((r.at(0, 0) - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn qr_reconstruction_and_orthonormality() {
        let m = rand_matrix(10, 4, 7);
        let (q, r) = qr(&m).unwrap();
        let back = q.matmul(&r);
        assert!(back.sub(&m).norm_fro() / m.norm_fro() <= 1e-12);
        let gram = q.hermitian().matmul(&q);
        assert!(gram.sub(&DenseMatrix::identity(4)).norm_fro() <= 1e-12);
        for j in 0..4 {
            assert!(r.at(j, j).im == 0.0 && r.at(j, j).re > 0.0);
        }
    }

    #[test]
    fn qr_detects_rank_deficiency() {
        let mut m = rand_matrix(6, 3, 3);
        let col0 = m.column(0);
        m.set_column(1, &col0.iter().map(|&x| x * 2.0).collect::<Vec<_>>());
        match qr(&m) {
            Err(Error::RankDeficient { rank }) => assert!(rank <= 2),
            other => panic!("expected rank deficiency, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn solve_examples() {
        let b = rand_matrix(5, 2, 11);
        let x = solve(&DenseMatrix::identity(5), &b).unwrap();
        assert!(x.sub(&b).norm_fro() < 1e-14);

        let mut d = DenseMatrix::zeros(1, 1);
        *d.at_mut(0, 0) = c(2.0, 0.0);
        let mut rhs = DenseMatrix::zeros(1, 1);
        *rhs.at_mut(0, 0) = c(4.0, 0.0);
        let x = solve(&d, &rhs).unwrap();
        assert!((x.at(0, 0) - c(2.0, 0.0)).norm() < 1e-14);

        let a = rand_matrix(12, 12, 5);
        let b = rand_matrix(12, 3, 6);
        let x = solve(&a, &b).unwrap();
        let residual = a.matmul(&x).sub(&b).norm_fro() / b.norm_fro();
        assert!(residual <= 1e-10, "residual {residual}");
    }

    #[test]
    fn small_eigs_examples() {
        let d = DenseMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ]);
        let mut eigs: Vec<f64> = small_eigs(&d).unwrap().iter().map(|e| e.re).collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 2.0).abs() < 1e-12);
        assert!((eigs[2] - 3.0).abs() < 1e-12);

        let rot = DenseMatrix::from_real_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        let eigs = small_eigs(&rot).unwrap();
        let mut ims: Vec<f64> = eigs.iter().map(|e| e.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-12 && (ims[1] - 1.0).abs() < 1e-12);
        for e in &eigs {
            assert!(e.re.abs() < 1e-12);
        }
    }

    #[test]
    fn small_eigs_companion_spectrum() {
        // companion of (x-1)(x-2)(x^2+1) = x^4 - 3x^3 + 3x^2 - 3x + 2
        let p = [2.0, -3.0, 3.0, -3.0];
        let n = 4;
        let mut m = DenseMatrix::zeros(n, n);
        for i in 1..n {
            *m.at_mut(i, i - 1) = c(1.0, 0.0);
        }
        for (i, &coeff) in p.iter().enumerate() {
            *m.at_mut(i, n - 1) = c(-coeff, 0.0);
        }
        let eigs = small_eigs(&m).unwrap();
        let mut expect = vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)];
        for e in eigs {
            let (idx, d) = expect
                .iter()
                .enumerate()
                .map(|(i, &t)| (i, (t - e).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(d < 1e-10, "eig {e} unmatched (dist {d})");
            expect.remove(idx);
        }
    }

    #[test]
    fn small_eigs_rejects_large_order() {
        let m = DenseMatrix::identity(65);
        assert!(small_eigs(&m).is_err());
        assert!(small_eigs_bounded(&m, 100).is_ok());
    }

    #[test]
    fn gaussian_deterministic_and_distinct() {
        let a = gaussian_matrix(6, 3, RngSeed(42));
        let b = gaussian_matrix(6, 3, RngSeed(42));
        assert_eq!(a, b);
        let other = gaussian_matrix(6, 3, RngSeed(43));
        assert!(a != other);
        // wider sketch from the same seed extends the narrow one
        let wide = gaussian_matrix(6, 5, RngSeed(42));
        for j in 0..3 {
            assert_eq!(a.column(j), wide.column(j));
        }
    }

    #[test]
    fn gaussian_column_mean_shrinks() {
        let g = gaussian_matrix(10_000, 2, RngSeed(1));
        for j in 0..2 {
            let mean: f64 = g.column(j).iter().map(|x| x.re).sum::<f64>() / 10_000.0;
            // 3 sigma for the sample mean of 10^4 standard normals
            assert!(mean.abs() < 3.0 / 100.0, "mean {mean}");
        }
    }

    #[test]
    fn numerical_rank_examples() {
        let zero = |v: &[Complex64]| vec![c(0.0, 0.0); v.len()];
        assert_eq!(numerical_rank(&zero, 5, 1e-6, RngSeed(2)), 0);

        let ident = |v: &[Complex64]| v.to_vec();
        assert_eq!(numerical_rank(&ident, 7, 1e-8, RngSeed(2)), 7);

        // rank-3 outer product plus tiny noise
        let u = gaussian_matrix(9, 3, RngSeed(5));
        let noise = gaussian_matrix(9, 9, RngSeed(6)).scale(c(1e-12, 0.0));
        let op = move |v: &[Complex64]| {
            let ut_v = u.hermitian().matvec(v);
            let mut out = u.matvec(&ut_v);
            let nv = noise.matvec(v);
            for (o, n) in out.iter_mut().zip(nv.iter()) {
                *o += n;
            }
            out
        };
        assert_eq!(numerical_rank(&op, 9, 1e-6, RngSeed(7)), 3);
        assert_eq!(numerical_rank_doubling(&op, 9, 1e-6, RngSeed(7)), 3);
    }

    #[test]
    fn range_finder_examples() {
        let n = 8;
        let mut diag = vec![1e-12; n];
        diag[0] = 10.0;
        diag[1] = 10.0;
        let op = move |v: &[Complex64]| {
            v.iter()
                .enumerate()
                .map(|(i, &x)| x * diag[i])
                .collect::<Vec<_>>()
        };
        let (q, res) = range_finder(&op, n, 2, 4, RngSeed(3)).unwrap();
        assert_eq!((q.rows, q.cols), (n, 2));
        assert!(res <= 1e-10, "residual {res}");

        let ident = |v: &[Complex64]| v.to_vec();
        let (q, res) = range_finder(&ident, 6, 6, 10, RngSeed(4)).unwrap();
        assert!(res == 0.0);
        let gram = q.hermitian().matmul(&q);
        assert!(gram.sub(&DenseMatrix::identity(6)).norm_fro() <= 1e-10);
    }

    #[test]
    fn eigenvalues_survive_wild_scaling() {
        // char poly is x^3 - 6x^2 + 9x - 2, roots {2 - sqrt(3), 2, 2 + sqrt(3)}
        let m = DenseMatrix::from_real_rows(&[
            vec![1.0, 1e6, 0.0],
            vec![1e-6, 2.0, 1e6],
            vec![0.0, 1e-6, 3.0],
        ]);
        let mut eigs: Vec<f64> = eigenvalues(&m).unwrap().iter().map(|e| e.re).collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [2.0 - 3.0f64.sqrt(), 2.0, 2.0 + 3.0f64.sqrt()];
        for (got, want) in eigs.iter().zip(expected.iter()) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn rayleigh_and_inverse_iteration_recover_eigenpair() {
        let m = DenseMatrix::from_real_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ]);
        let eigs = eigenvalues(&m).unwrap();
        let target = eigs
            .iter()
            .max_by(|a, b| a.re.partial_cmp(&b.re).unwrap())
            .copied()
            .unwrap();
        let v = inverse_iteration(&m, target + c(1e-6, 0.0), 3, RngSeed(9)).unwrap();
        let rq = rayleigh_quotient(&m, &v);
        assert!((rq - target).norm() < 1e-8);
    }

    #[test]
    fn matrix_io_round_trip() {
        let m = DenseMatrix::from_fn(3, 2, |i, j| c(i as f64, j as f64 - 1.0));
        let text = format_matrix(&m);
        let back = parse_matrix(&text).unwrap();
        assert_eq!(back, m);
        let real = parse_matrix("# comment\n2 2\n1.0\n2.0\n3.0\n4.0\n").unwrap();
        assert!(real.is_real());
        assert_eq!(real.at(1, 0), c(3.0, 0.0));
    }
}
