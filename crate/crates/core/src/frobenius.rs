//! Arithmetic in the matrix algebra generated by a companion matrix. Every
//! element is stored as its residue polynomial modulo `p(x)`: the element is
//! `residue(C_p)`, its eigenvalue at a root `x_j` of `p` is `residue(x_j)`,
//! and all algebra operations reduce to polynomial arithmetic mod `p`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::poly::Polynomial;

/// Tolerance below which an extended-Euclid remainder counts as a collapse.
pub const EPS_INV: f64 = 1e-12;

/// The companion matrix of a polynomial, stored through its monic
/// normalization. Matrix-vector products cost `O(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionMatrix {
    monic: Polynomial,
    n: usize,
}

impl CompanionMatrix {
    pub fn new(p: &Polynomial) -> Result<Arc<Self>> {
        if p.degree() < 1 {
            return Err(Error::InvalidArgument(
                "companion matrix needs degree >= 1".into(),
            ));
        }
        if p.leading().norm() == 0.0 {
            return Err(Error::InvalidArgument("zero leading coefficient".into()));
        }
        Ok(Arc::new(CompanionMatrix {
            monic: p.monic(),
            n: p.degree(),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The monic modulus `p(x)`.
    pub fn modulus(&self) -> &Polynomial {
        &self.monic
    }

    /// `C_p v` in `O(n)`: shift down and subtract the scaled last column.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        let top = v[self.n - 1];
        let mut out = Vec::with_capacity(self.n);
        out.push(-self.monic.coeff(0) * top);
        for i in 1..self.n {
            out.push(v[i - 1] - self.monic.coeff(i) * top);
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.n;
        let mut m = DenseMatrix::zeros(n, n);
        for i in 1..n {
            *m.at_mut(i, i - 1) = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            *m.at_mut(i, n - 1) = -self.monic.coeff(i);
        }
        m
    }

    /// `|p_n / p_0|^{1/n}`: the reciprocal of the geometric mean of the root
    /// magnitudes, used as a determinantal scaling factor.
    pub fn determinantal_scale_factor(&self) -> Result<f64> {
        let p0 = self.monic.coeff(0).norm();
        if p0 == 0.0 {
            return Err(Error::DegenerateInput(
                "determinantal scaling needs p(0) != 0".into(),
            ));
        }
        Ok((-p0.ln() / self.n as f64).exp())
    }
}

/// An element of the algebra, identified with its residue mod `p`.
#[derive(Debug, Clone)]
pub struct FrobeniusElement {
    residue: Polynomial,
    parent: Arc<CompanionMatrix>,
}

/// The multiplicative identity (residue 1).
pub fn identity(parent: &Arc<CompanionMatrix>) -> FrobeniusElement {
    FrobeniusElement {
        residue: Polynomial::one(),
        parent: parent.clone(),
    }
}

/// The generator `C_p` itself (residue `x`).
pub fn generator(parent: &Arc<CompanionMatrix>) -> FrobeniusElement {
    FrobeniusElement {
        residue: Polynomial::x(),
        parent: parent.clone(),
    }
}

/// Wraps an arbitrary polynomial, reducing it mod `p`.
pub fn element_from_polynomial(
    parent: &Arc<CompanionMatrix>,
    poly: &Polynomial,
) -> Result<FrobeniusElement> {
    let residue = if poly.degree() < parent.n() {
        poly.clone()
    } else {
        poly.divrem(parent.modulus())?.1
    };
    Ok(FrobeniusElement {
        residue,
        parent: parent.clone(),
    })
}

impl FrobeniusElement {
    pub fn residue(&self) -> &Polynomial {
        &self.residue
    }

    pub fn parent(&self) -> &Arc<CompanionMatrix> {
        &self.parent
    }

    fn check_parent(&self, other: &FrobeniusElement) -> Result<()> {
        if Arc::ptr_eq(&self.parent, &other.parent) || self.parent == other.parent {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "algebra elements have different parents".into(),
            ))
        }
    }

    pub fn add(&self, other: &FrobeniusElement) -> Result<FrobeniusElement> {
        self.check_parent(other)?;
        Ok(FrobeniusElement {
            residue: self.residue.add(&other.residue),
            parent: self.parent.clone(),
        })
    }

    pub fn sub(&self, other: &FrobeniusElement) -> Result<FrobeniusElement> {
        self.check_parent(other)?;
        Ok(FrobeniusElement {
            residue: self.residue.sub(&other.residue),
            parent: self.parent.clone(),
        })
    }

    pub fn scale(&self, s: Complex64) -> FrobeniusElement {
        FrobeniusElement {
            residue: self.residue.scale(s),
            parent: self.parent.clone(),
        }
    }

    /// Adds `s` times the identity.
    pub fn shift(&self, s: Complex64) -> FrobeniusElement {
        FrobeniusElement {
            residue: self.residue.add(&Polynomial::constant(s)),
            parent: self.parent.clone(),
        }
    }

    /// The residue evaluated at `lambda`: the eigenvalue of this element on
    /// the eigenvector of `C_p` for `lambda`.
    pub fn eigen_image(&self, lambda: Complex64) -> Complex64 {
        self.residue.eval(lambda)
    }
}

/// Product in the algebra: `(a b) mod p`. The eigen image at every root
/// multiplies accordingly.
pub fn alg_mul(a: &FrobeniusElement, b: &FrobeniusElement) -> Result<FrobeniusElement> {
    a.check_parent(b)?;
    let prod = a.residue.mul(&b.residue);
    let (_, residue) = prod.divrem(a.parent.modulus())?;
    Ok(FrobeniusElement {
        residue,
        parent: a.parent.clone(),
    })
}

/// Inverse in the algebra by the extended Euclidean algorithm on `(p, a)`
/// with monic-rescaled remainders, followed by one Newton correction of the
/// residual. When the Euclidean remainder sequence degrades — it cancels
/// catastrophically on badly scaled moduli long before the element is
/// genuinely singular — the inverse is recomputed as the linear solve
/// `M_a u = e_1` against the multiplication matrix of `a`. Fails with
/// `IllConditioned` only when both routes leave a large residual, which
/// happens exactly when some eigen image of `a` is near zero.
pub fn alg_inv(a: &FrobeniusElement) -> Result<FrobeniusElement> {
    match alg_inv_euclid(a) {
        Ok(inv) => Ok(inv),
        Err(Error::IllConditioned { norm }) => match alg_inv_linear_solve(a) {
            Ok(inv) => Ok(inv),
            Err(_) => Err(Error::IllConditioned { norm }),
        },
        Err(e) => Err(e),
    }
}

fn alg_inv_euclid(a: &FrobeniusElement) -> Result<FrobeniusElement> {
    let parent = &a.parent;
    let p = parent.modulus();
    if a.residue.is_zero() {
        return Err(Error::IllConditioned { norm: 0.0 });
    }

    let mut r_prev = p.clone();
    let mut t_prev = Polynomial::zero();
    let mut r_cur = a.residue.clone();
    let mut t_cur = Polynomial::one();
    // Keep remainders monic; the same rescale applied to t preserves
    // t_i * a = r_i (mod p).
    let lc = r_cur.leading();
    r_cur = r_cur.scale(lc.inv());
    t_cur = t_cur.scale(lc.inv());

    loop {
        if r_cur.degree() == 0 {
            break;
        }
        let (q, r_next) = r_prev.divrem(&r_cur)?;
        let t_next = t_prev.sub(&q.mul(&t_cur));
        let norm = r_next.norm_inf();
        if r_next.is_zero() || (norm <= EPS_INV * r_prev.norm_inf().max(1.0) && r_next.degree() > 0)
        {
            return Err(Error::IllConditioned { norm });
        }
        let lc = r_next.leading();
        r_prev = r_cur;
        t_prev = t_cur;
        r_cur = r_next.scale(lc.inv());
        t_cur = t_next.scale(lc.inv());
    }

    let c = r_cur.coeff(0);
    if c.norm() <= EPS_INV {
        return Err(Error::IllConditioned { norm: c.norm() });
    }
    let mut inv = FrobeniusElement {
        residue: t_cur.scale(c.inv()),
        parent: parent.clone(),
    };
    // Newton correction u <- u (2 - a u) squares the inversion residual.
    let mut residual = inverse_residual(a, &inv)?;
    if residual > 1e-14 {
        let au = alg_mul(a, &inv)?;
        let two_minus = identity(parent).scale(Complex64::new(2.0, 0.0)).sub(&au)?;
        let corrected = alg_mul(&inv, &two_minus)?;
        let corrected_residual = inverse_residual(a, &corrected)?;
        if corrected_residual < residual {
            inv = corrected;
            residual = corrected_residual;
        }
    }
    if residual > 1e-6 {
        return Err(Error::IllConditioned { norm: residual });
    }
    Ok(inv)
}

fn inverse_residual(a: &FrobeniusElement, u: &FrobeniusElement) -> Result<f64> {
    let au = alg_mul(a, u)?;
    Ok(au.residue.sub(&Polynomial::one()).norm_inf())
}

/// Inverse as the solution of `M_a u = e_1`, where `M_a` is the matrix of
/// multiplication by `a` on residues mod `p`.
fn alg_inv_linear_solve(a: &FrobeniusElement) -> Result<FrobeniusElement> {
    let parent = &a.parent;
    let n = parent.n();
    let p = parent.modulus();
    let mut mult = DenseMatrix::zeros(n, n);
    // column j holds a * x^j mod p
    let mut col = a.residue.coeffs().to_vec();
    col.resize(n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        for (i, &c) in col.iter().enumerate() {
            *mult.at_mut(i, j) = c;
        }
        if j + 1 < n {
            // multiply by x mod p: shift up, fold the overflow back in
            let top = col[n - 1];
            for i in (1..n).rev() {
                col[i] = col[i - 1];
            }
            col[0] = Complex64::new(0.0, 0.0);
            if top.norm_sqr() != 0.0 {
                for (i, c) in col.iter_mut().enumerate() {
                    *c -= top * p.coeff(i);
                }
            }
        }
    }
    let mut rhs = DenseMatrix::zeros(n, 1);
    *rhs.at_mut(0, 0) = Complex64::new(1.0, 0.0);
    let solved = crate::linalg::solve(&mult, &rhs).map_err(|_| Error::IllConditioned {
        norm: 0.0,
    })?;
    let inv = FrobeniusElement {
        residue: Polynomial::new(solved.column(0)),
        parent: parent.clone(),
    };
    let residual = inverse_residual(a, &inv)?;
    if residual > 1e-6 {
        return Err(Error::IllConditioned { norm: residual });
    }
    Ok(inv)
}

/// `residue(C_p) v` by Horner over companion matvecs, `O(n deg)`.
pub fn apply_to_vector(a: &FrobeniusElement, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.parent.n();
    if v.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "apply_to_vector: vector length {} vs algebra dimension {}",
            v.len(),
            n
        )));
    }
    let deg = a.residue.degree();
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..=deg).rev() {
        acc = a.parent.matvec(&acc);
        let coeff = a.residue.coeff(k);
        if coeff.norm_sqr() != 0.0 {
            for (w, &x) in acc.iter_mut().zip(v.iter()) {
                *w += coeff * x;
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn parent_of(coeffs: &[f64]) -> Arc<CompanionMatrix> {
        CompanionMatrix::new(&Polynomial::from_real(coeffs)).unwrap()
    }

    #[test]
    fn generator_and_identity_basics() {
        let cp = parent_of(&[-2.0, 0.0, 1.0]); // x^2 - 2
        let g = generator(&cp);
        assert_eq!(g.residue().degree(), 1);
        assert!((g.residue().coeff(1) - c(1.0, 0.0)).norm() == 0.0);

        let z = element_from_polynomial(&cp, &Polynomial::from_real(&[0.3, -1.7])).unwrap();
        let prod = alg_mul(&identity(&cp), &z).unwrap();
        assert!(prod.residue().sub(z.residue()).norm_inf() == 0.0);
    }

    #[test]
    fn generator_shifts_basis_vectors() {
        let cp = parent_of(&[1.0, 2.0, 3.0, 1.0]); // n = 3
        let e1 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let out = apply_to_vector(&generator(&cp), &e1).unwrap();
        assert!((out[1] - c(1.0, 0.0)).norm() == 0.0);
        assert!(out[0].norm() == 0.0 && out[2].norm() == 0.0);
    }

    #[test]
    fn alg_mul_reduces_mod_p() {
        let cp = parent_of(&[-2.0, 0.0, 1.0]); // x^2 - 2
        let g = generator(&cp);
        let sq = alg_mul(&g, &g).unwrap();
        assert_eq!(sq.residue().degree(), 0);
        assert!((sq.residue().coeff(0) - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn alg_inv_examples() {
        let cp = parent_of(&[-2.0, 0.0, 1.0]); // x^2 - 2
        let inv_id = alg_inv(&identity(&cp)).unwrap();
        assert!(inv_id.residue().sub(&Polynomial::one()).norm_inf() < 1e-14);

        let inv_x = alg_inv(&generator(&cp)).unwrap();
        // x * (x/2) = x^2/2 = 1 mod (x^2 - 2)
        assert!((inv_x.residue().coeff(1) - c(0.5, 0.0)).norm() < 1e-14);
        assert!(inv_x.residue().coeff(0).norm() < 1e-14);
    }

    #[test]
    fn alg_inv_high_degree_exact_case() {
        // p = x^32 - 2: the inverse of x is x^31 / 2.
        let mut coeffs = vec![0.0; 33];
        coeffs[0] = -2.0;
        coeffs[32] = 1.0;
        let cp = parent_of(&coeffs);
        let inv = alg_inv(&generator(&cp)).unwrap();
        let au = alg_mul(&generator(&cp), &inv).unwrap();
        assert!(au.residue().sub(&Polynomial::one()).norm_inf() <= 1e-12);
        assert_eq!(inv.residue().degree(), 31);
        assert!((inv.residue().coeff(31) - c(0.5, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn alg_inv_flags_singular_elements() {
        // x has eigen image 0 at the root 0 of p = x^2 - x.
        let cp = parent_of(&[0.0, -1.0, 1.0]);
        match alg_inv(&generator(&cp)) {
            Err(Error::IllConditioned { .. }) => {}
            other => panic!("expected IllConditioned, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn apply_to_vector_matches_companion_column() {
        let cp = parent_of(&[1.0, -4.0, 2.0, 1.0]); // monic cubic
        let n = 3;
        let mut e_last = vec![c(0.0, 0.0); n];
        e_last[n - 1] = c(1.0, 0.0);
        let out = apply_to_vector(&generator(&cp), &e_last).unwrap();
        assert!((out[0] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((out[1] - c(4.0, 0.0)).norm() < 1e-15);
        assert!((out[2] - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn apply_identity_is_identity() {
        let cp = parent_of(&[3.0, -1.0, 0.5, 1.0]);
        let v = vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.25, -1.0)];
        let out = apply_to_vector(&identity(&cp), &v).unwrap();
        for (a, b) in out.iter().zip(v.iter()) {
            assert!((a - b).norm() == 0.0);
        }
    }

    #[test]
    fn eigen_image_examples() {
        let cp = parent_of(&[-2.0, 0.0, 1.0]);
        let lambda = c(2.0f64.sqrt(), 0.0);
        assert!((generator(&cp).eigen_image(lambda) - lambda).norm() == 0.0);
        let inv = alg_inv(&generator(&cp)).unwrap();
        assert!((inv.eigen_image(lambda) - lambda.inv()).norm() < 1e-14);
    }

    #[test]
    fn determinantal_scale_examples() {
        let cp = parent_of(&[-4.0, 0.0, 1.0]); // x^2 - 4
        assert!((cp.determinantal_scale_factor().unwrap() - 0.5).abs() < 1e-15);
        let cp2 = parent_of(&[1.0, 3.0, 1.0]); // |p_0| = 1
        assert!((cp2.determinantal_scale_factor().unwrap() - 1.0).abs() < 1e-15);
        let cp3 = parent_of(&[0.0, 1.0, 1.0]); // p(0) = 0
        assert!(cp3.determinantal_scale_factor().is_err());
    }

    #[test]
    fn parent_mismatch_is_rejected() {
        let a = generator(&parent_of(&[-2.0, 0.0, 1.0]));
        let b = generator(&parent_of(&[-3.0, 0.0, 1.0]));
        assert!(alg_mul(&a, &b).is_err());
    }
}
