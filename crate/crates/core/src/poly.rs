//! Dense univariate polynomial arithmetic and the root-mapping transforms
//! (shift/scale, reversal, root squaring, the half-sum/half-difference lifts
//! and the Cayley pair) that the lifting solvers are built from.
//!
//! Coefficients are stored in ascending degree order, so `coeffs[i]` is the
//! coefficient of `x^i`. A polynomial is "real" when every stored imaginary
//! part is exactly zero; operations that cannot introduce imaginary parts on
//! real inputs preserve that property exactly.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Relative magnitude below which a leading coefficient is treated as zero
/// when fixing the degree.
pub const TRIM_REL: f64 = 1e-14;

/// Threshold for schoolbook vs FFT products, in total coefficient count.
const FFT_THRESHOLD: usize = 64;

#[derive(Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl std::fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Polynomial(deg {}; {:?})", self.degree(), self.coeffs)
    }
}

impl Polynomial {
    /// Builds a polynomial, trimming leading coefficients whose magnitude is
    /// below `TRIM_REL` relative to the largest coefficient.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = TRIM_REL * scale;
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.norm() <= cut) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Polynomial::new(vec![c])
    }

    pub fn one() -> Self {
        Polynomial::constant(Complex64::new(1.0, 0.0))
    }

    pub fn zero() -> Self {
        Polynomial::constant(Complex64::new(0.0, 0.0))
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Polynomial::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    /// Builds the monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Polynomial::one();
        for &r in roots {
            p = p.mul(&Polynomial::new(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs
            .get(i)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].norm() == 0.0
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn norm_1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Zeroes imaginary parts whose magnitude is at most `tol * norm_inf`.
    pub fn realified(&self, tol: f64) -> Polynomial {
        let cut = tol * self.norm_inf();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                if c.im.abs() <= cut {
                    Complex64::new(c.re, 0.0)
                } else {
                    *c
                }
            })
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn real_coeffs(&self) -> Option<Vec<f64>> {
        if self.is_real() {
            Some(self.coeffs.iter().map(|c| c.re).collect())
        } else {
            None
        }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Sum of `|p_i| |x|^i`; the evaluation rounding error at `x` is of order
    /// machine epsilon times this quantity.
    pub fn eval_magnitude_sum(&self, x: Complex64) -> f64 {
        let ax = x.norm();
        let mut acc = 0.0f64;
        for &c in self.coeffs.iter().rev() {
            acc = acc * ax + c.norm();
        }
        acc
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Polynomial::new(coeffs)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i) - other.coeff(i)).collect();
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, s: Complex64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Polynomial {
        let lc = self.leading();
        if lc.norm() == 0.0 {
            return self.clone();
        }
        self.scale(lc.inv())
    }

    /// Rescales so the largest coefficient magnitude is 1.
    pub fn normalized_inf(&self) -> Polynomial {
        let m = self.norm_inf();
        if m == 0.0 {
            return self.clone();
        }
        self.scale(Complex64::new(1.0 / m, 0.0))
    }

    /// Product, schoolbook below `FFT_THRESHOLD` total coefficients and FFT
    /// convolution above. A product of two exactly real polynomials is
    /// returned with exactly zero imaginary parts.
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let both_real = self.is_real() && other.is_real();
        let total = self.coeffs.len() + other.coeffs.len();
        let mut out = if total < FFT_THRESHOLD {
            self.mul_schoolbook(other)
        } else {
            self.mul_fft(other)
        };
        if both_real {
            for c in &mut out {
                c.im = 0.0;
            }
        }
        Polynomial::new(out)
    }

    fn mul_schoolbook(&self, other: &Polynomial) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    }

    fn mul_fft(&self, other: &Polynomial) -> Vec<Complex64> {
        let out_len = self.coeffs.len() + other.coeffs.len() - 1;
        let size = out_len.next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(size);
        let ifft = planner.plan_fft_inverse(size);

        let mut a = self.coeffs.clone();
        a.resize(size, Complex64::new(0.0, 0.0));
        let mut b = other.coeffs.clone();
        b.resize(size, Complex64::new(0.0, 0.0));
        fft.process(&mut a);
        fft.process(&mut b);
        for (x, y) in a.iter_mut().zip(b.iter()) {
            *x *= y;
        }
        ifft.process(&mut a);
        let scale = 1.0 / size as f64;
        a.truncate(out_len);
        for c in &mut a {
            *c *= scale;
        }
        a
    }

    /// Quotient and remainder of division by `div`.
    pub fn divrem(&self, div: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        if div.is_zero() {
            return Err(Error::InvalidArgument("division by zero polynomial".into()));
        }
        let dn = div.degree();
        if self.degree() < dn {
            return Ok((Polynomial::zero(), self.clone()));
        }
        let lc = div.leading();
        let mut rem = self.coeffs.clone();
        let qn = self.degree() - dn;
        let mut quot = vec![Complex64::new(0.0, 0.0); qn + 1];
        for k in (0..=qn).rev() {
            let q = rem[k + dn] / lc;
            quot[k] = q;
            for j in 0..=dn {
                rem[k + j] -= q * div.coeffs[j];
            }
        }
        rem.truncate(dn.max(1));
        Ok((Polynomial::new(quot), Polynomial::new(rem)))
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Polynomial {
        if self.degree() == 0 {
            return Polynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
        Polynomial::new(coeffs)
    }

    /// Composition `q(x) = p(a x + b)`; the roots move as `x_j -> (x_j - b)/a`.
    pub fn shift_scale(&self, a: Complex64, b: Complex64) -> Result<Polynomial> {
        if a.norm() == 0.0 {
            return Err(Error::InvalidArgument("shift_scale requires a != 0".into()));
        }
        let lin = Polynomial::new(vec![b, a]);
        let mut acc = Polynomial::constant(self.leading());
        for k in (0..self.degree()).rev() {
            acc = acc.mul(&lin);
            acc = acc.add(&Polynomial::constant(self.coeffs[k]));
        }
        Ok(acc)
    }

    /// Reverses the coefficients; the roots invert when `p(0) != 0`.
    pub fn reverse(&self) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Polynomial::new(coeffs)
    }

    /// One root-squaring step: the output is monic of the same degree with
    /// roots `x_j^2`. The input is normalized to monic first.
    pub fn graeffe_step(&self) -> Polynomial {
        let p = self.monic();
        let n = p.degree();
        if n == 0 {
            return Polynomial::one();
        }
        let mut even = Vec::with_capacity(n / 2 + 1);
        let mut odd = Vec::with_capacity(n / 2 + 1);
        for (i, &c) in p.coeffs.iter().enumerate() {
            if i % 2 == 0 {
                even.push(c);
            } else {
                odd.push(c);
            }
        }
        let e = Polynomial::new(even);
        let o = Polynomial::new(odd);
        let mut xo2 = o.mul(&o).coeffs;
        xo2.insert(0, Complex64::new(0.0, 0.0));
        let q = e.mul(&e).sub(&Polynomial::new(xo2));
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        q.scale(Complex64::new(sign, 0.0)).monic()
    }

    /// Newton-form interpolation through `(nodes[m], values[m])`, returned in
    /// the monomial basis.
    fn interpolate(nodes: &[Complex64], values: &[Complex64]) -> Polynomial {
        let n = nodes.len();
        let mut dd = values.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - j]);
            }
        }
        let mut poly = Polynomial::constant(dd[n - 1]);
        for i in (0..n - 1).rev() {
            let lin = Polynomial::new(vec![-nodes[i], Complex64::new(1.0, 0.0)]);
            poly = poly.mul(&lin).add(&Polynomial::constant(dd[i]));
        }
        poly
    }

    /// Lift through `y = (x - 1/x)/2`: returns the degree-n polynomial
    /// `q(y) = p(x) p(-1/x)` whose roots are `(x_j - 1/x_j)/2`. Real roots
    /// stay real and nonreal roots on the unit circle land near `[-i, i]`.
    ///
    /// Computed by evaluation at unit-circle points `x_m = e^{i t_m}` with
    /// `t_m` spread over `(-pi/2, pi/2)` so the interpolation nodes
    /// `y_m = i sin t_m` are distinct, then Newton interpolation.
    pub fn mobius_lift(&self) -> Result<Polynomial> {
        let n = self.degree();
        if self.coeff(0).norm() <= TRIM_REL * self.norm_inf() {
            return Err(Error::DegenerateInput(
                "lift through (x - 1/x)/2 requires p(0) != 0".into(),
            ));
        }
        let count = n + 1;
        let mut nodes = Vec::with_capacity(count);
        let mut values = Vec::with_capacity(count);
        for m in 0..count {
            let t = std::f64::consts::PI * (m as f64 + 0.5) / count as f64
                - std::f64::consts::FRAC_PI_2;
            let x = Complex64::new(t.cos(), t.sin());
            let minus_inv = Complex64::new(-t.cos(), t.sin());
            nodes.push(Complex64::new(0.0, t.sin()));
            values.push(self.eval(x) * self.eval(minus_inv));
        }
        let q = Polynomial::interpolate(&nodes, &values);
        if self.is_real() {
            Ok(q.realified(1e-8))
        } else {
            Ok(q)
        }
    }

    /// Lift through `y = (x + 1/x)/2`: returns `q(y) = p(x) p(1/x)` with
    /// roots `(x_j + 1/x_j)/2`.
    pub fn half_sum_lift(&self) -> Result<Polynomial> {
        let n = self.degree();
        if self.coeff(0).norm() <= TRIM_REL * self.norm_inf() {
            return Err(Error::DegenerateInput(
                "lift through (x + 1/x)/2 requires p(0) != 0".into(),
            ));
        }
        let count = n + 1;
        let mut nodes = Vec::with_capacity(count);
        let mut values = Vec::with_capacity(count);
        for m in 0..count {
            let t = std::f64::consts::PI * (m as f64 + 0.5) / count as f64;
            let x = Complex64::new(t.cos(), t.sin());
            let inv = Complex64::new(t.cos(), -t.sin());
            nodes.push(Complex64::new(t.cos(), 0.0));
            values.push(self.eval(x) * self.eval(inv));
        }
        let q = Polynomial::interpolate(&nodes, &values);
        if self.is_real() {
            Ok(q.realified(1e-8))
        } else {
            Ok(q)
        }
    }

    /// Returns `den(z)^n p(num(z)/den(z))` for linear `num`, `den`; the
    /// workhorse behind the Cayley maps.
    fn compose_linear_fraction(
        &self,
        num: (Complex64, Complex64),
        den: (Complex64, Complex64),
    ) -> Polynomial {
        let n = self.degree();
        let num_p = Polynomial::new(vec![num.1, num.0]);
        let den_p = Polynomial::new(vec![den.1, den.0]);
        let mut den_pows = Vec::with_capacity(n + 1);
        den_pows.push(Polynomial::one());
        for j in 1..=n {
            den_pows.push(den_pows[j - 1].mul(&den_p));
        }
        let mut acc = Polynomial::constant(self.coeffs[n]);
        for k in (0..n).rev() {
            acc = acc.mul(&num_p);
            acc = acc.add(&den_pows[n - k].scale(self.coeffs[k]));
        }
        acc
    }

    /// Cayley transform of the coefficients: the output has roots
    /// `z_j = (x_j + i)/(x_j - i)`, so real roots land on the unit circle.
    /// Requires `p(i) != 0`, otherwise the degree would drop.
    pub fn cayley_poly(&self) -> Result<Polynomial> {
        let i = Complex64::new(0.0, 1.0);
        if self.eval(i).norm() <= 1e-12 * self.norm_1() {
            return Err(Error::DegenerateInput(
                "cayley transform requires p(i) != 0".into(),
            ));
        }
        let q = self.compose_linear_fraction((i, i), (Complex64::new(1.0, 0.0), -Complex64::new(1.0, 0.0)));
        Ok(q.normalized_inf())
    }

    /// Inverse of [`Polynomial::cayley_poly`]: roots move as
    /// `z_j -> i (z_j + 1)/(z_j - 1)`, taking unit-circle roots to the real
    /// axis. Requires `u(1) != 0`.
    pub fn inverse_cayley_poly(&self) -> Result<Polynomial> {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        if self.eval(one).norm() <= 1e-12 * self.norm_1() {
            return Err(Error::DegenerateInput(
                "inverse cayley transform requires u(1) != 0".into(),
            ));
        }
        let w = self.compose_linear_fraction((one, i), (one, -i));
        Ok(w.normalized_inf())
    }
}

/// Outcome of the trailing-coefficient truncation test.
#[derive(Debug, Clone)]
pub enum TruncationOutcome {
    /// The low-order block was negligible; this is the degree-`r` quotient by
    /// `x^{n-r}`.
    Factor(Polynomial),
    /// The block still carries mass; keep iterating.
    NotYet { block_rel_magnitude: f64 },
}

/// Checks whether the `n - r` lowest coefficients of `q` are negligible
/// relative to `||q||_inf` at threshold `tau`, and if so returns the
/// degree-`r` factor formed by the leading coefficients.
pub fn truncate_to_unit_factor(q: &Polynomial, r: usize, tau: f64) -> TruncationOutcome {
    let n = q.degree();
    if r >= n {
        return TruncationOutcome::Factor(q.clone());
    }
    let scale = q.norm_inf();
    let block_max = q.coeffs()[..n - r]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if block_max <= tau * scale {
        TruncationOutcome::Factor(Polynomial::new(q.coeffs()[n - r..].to_vec()))
    } else {
        TruncationOutcome::NotYet {
            block_rel_magnitude: block_max / scale,
        }
    }
}

/// The menu of root maps realizable on coefficients at near-linear cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    /// `y = 1/x` (coefficient reversal).
    Inverse,
    /// `q(x) = p(a x + b)`, roots `(x - b)/a`; `a != 0`.
    ShiftScale(Complex64, Complex64),
    /// `y = x^2` (root squaring).
    Square,
    /// `y = (x + 1/x)/2`.
    HalfSum,
    /// `y = (x - 1/x)/2`.
    HalfDiff,
    /// `y = (x + i)/(x - i)`.
    Cayley,
    /// `y = i (x + 1)/(x - 1)`.
    InverseCayley,
}

impl MapKind {
    /// Applies the map to the polynomial, producing one whose roots are the
    /// mapped roots of `p`.
    pub fn apply_to_poly(&self, p: &Polynomial) -> Result<Polynomial> {
        match *self {
            MapKind::Inverse => Ok(p.reverse()),
            MapKind::ShiftScale(a, b) => {
                if a.norm() == 0.0 {
                    return Err(Error::InvalidArgument("ShiftScale requires a != 0".into()));
                }
                p.shift_scale(a, b)
            }
            MapKind::Square => Ok(p.graeffe_step()),
            MapKind::HalfSum => p.half_sum_lift(),
            MapKind::HalfDiff => p.mobius_lift(),
            MapKind::Cayley => p.cayley_poly(),
            MapKind::InverseCayley => p.inverse_cayley_poly(),
        }
    }

    /// The scalar form of the same map, for oracle checks.
    pub fn apply_to_scalar(&self, z: Complex64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        match *self {
            MapKind::Inverse => z.inv(),
            MapKind::ShiftScale(a, b) => (z - b) / a,
            MapKind::Square => z * z,
            MapKind::HalfSum => (z + z.inv()) * 0.5,
            MapKind::HalfDiff => (z - z.inv()) * 0.5,
            MapKind::Cayley => (z + i) / (z - i),
            MapKind::InverseCayley => i * (z + one) / (z - one),
        }
    }
}

/// Parses the one-coefficient-per-line text format (`re` or `re im`,
/// `#`-prefixed lines ignored), ascending degree.
pub fn parse_polynomial(text: &str) -> Result<Polynomial> {
    let mut coeffs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let re: f64 = parts
            .next()
            .unwrap()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {}", lineno + 1, e)))?;
        let im: f64 = match parts.next() {
            Some(tok) => tok
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {}", lineno + 1, e)))?,
            None => 0.0,
        };
        if parts.next().is_some() {
            return Err(Error::Parse(format!(
                "line {}: expected `re` or `re im`",
                lineno + 1
            )));
        }
        coeffs.push(Complex64::new(re, im));
    }
    if coeffs.is_empty() {
        return Err(Error::Parse("no coefficients found".into()));
    }
    Ok(Polynomial::new(coeffs))
}

/// Writes the text format read by [`parse_polynomial`].
pub fn format_polynomial(p: &Polynomial) -> String {
    let mut out = String::new();
    for c in p.coeffs() {
        if c.im == 0.0 {
            out.push_str(&format!("{:.17e}\n", c.re));
        } else {
            out.push_str(&format!("{:.17e} {:.17e}\n", c.re, c.im));
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

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    fn assert_poly_close(p: &Polynomial, q: &Polynomial, tol: f64) {
        assert_eq!(p.degree(), q.degree(), "{p:?} vs {q:?}");
        for i in 0..=p.degree() {
            assert_close(p.coeff(i), q.coeff(i), tol);
        }
    }

    /// Proportional comparison after normalizing both to unit leading coeff.
    fn assert_proportional(p: &Polynomial, q: &Polynomial, tol: f64) {
        assert_poly_close(&p.monic(), &q.monic(), tol);
    }

    #[test]
    fn eval_quadratic_and_constant() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        assert_close(p.eval(c(2.0, 0.0)), c(3.0, 0.0), 0.0);
        let one = Polynomial::one();
        assert_close(one.eval(c(17.5, -3.0)), c(1.0, 0.0), 0.0);
    }

    #[test]
    fn shift_scale_binomial() {
        let p = Polynomial::from_real(&[0.0, 0.0, 1.0]);
        let q = p.shift_scale(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_poly_close(&q, &Polynomial::from_real(&[1.0, 2.0, 1.0]), 1e-15);
        let id = p.shift_scale(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_poly_close(&id, &p, 0.0);
        assert!(p.shift_scale(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn shift_scale_round_trip() {
        let p = Polynomial::from_real(&[3.0, -1.0, 0.5, 2.0, -0.25, 1.0]);
        let a = c(2.0, 0.0);
        let b = c(-1.0, 0.0);
        let q = p.shift_scale(a, b).unwrap();
        let back = q.shift_scale(a.inv(), -b / a).unwrap();
        for i in 0..=p.degree() {
            assert_close(back.coeff(i), p.coeff(i), 1e-10 * p.norm_inf());
        }
    }

    #[test]
    fn reverse_cases() {
        let p = Polynomial::from_real(&[2.0, -3.0, 1.0]);
        let r = p.reverse();
        assert_poly_close(&r, &Polynomial::from_real(&[1.0, -3.0, 2.0]), 0.0);
        let pal = Polynomial::from_real(&[1.0, 4.0, 1.0]);
        assert_poly_close(&pal.reverse(), &pal, 0.0);
        assert_poly_close(&p.reverse().reverse(), &p, 0.0);
    }

    #[test]
    fn multiply_basics() {
        let a = Polynomial::from_real(&[-1.0, 1.0]);
        let b = Polynomial::from_real(&[1.0, 1.0]);
        assert_poly_close(&a.mul(&b), &Polynomial::from_real(&[-1.0, 0.0, 1.0]), 0.0);
        let p = Polynomial::from_real(&[3.0, 0.0, 2.0, 5.0]);
        assert_poly_close(&p.mul(&Polynomial::one()), &p, 0.0);
    }

    #[test]
    fn multiply_fft_matches_schoolbook() {
        let mut coeffs_a = Vec::new();
        let mut coeffs_b = Vec::new();
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for _ in 0..51 {
            coeffs_a.push(c(next(), next()));
            coeffs_b.push(c(next(), next()));
        }
        let a = Polynomial::new(coeffs_a);
        let b = Polynomial::new(coeffs_b);
        let fast = a.mul_fft(&b);
        let slow = a.mul_schoolbook(&b);
        let scale = slow.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (x, y) in fast.iter().zip(slow.iter()) {
            assert!((x - y).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn graeffe_squares_roots() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let q = p.graeffe_step();
        assert_poly_close(&q, &Polynomial::from_real(&[1.0, -2.0, 1.0]), 1e-14);
        let x = Polynomial::x();
        assert_poly_close(&x.graeffe_step(), &x, 0.0);
    }

    #[test]
    fn graeffe_preserves_degree_and_monicity() {
        let p = Polynomial::from_real(&[2.0, -3.0, 0.5, 1.5, 4.0]);
        let q = p.graeffe_step();
        assert_eq!(q.degree(), p.degree());
        assert_close(q.leading(), c(1.0, 0.0), 1e-14);
    }

    #[test]
    fn mobius_lift_fixed_points() {
        // roots +-i are fixed by y = (x - 1/x)/2
        let p = Polynomial::from_real(&[1.0, 0.0, 1.0]);
        let q = p.mobius_lift().unwrap();
        assert_proportional(&q, &Polynomial::from_real(&[1.0, 0.0, 1.0]), 1e-12);
        // roots +-1 both map to 0
        let p2 = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let q2 = p2.mobius_lift().unwrap();
        assert_proportional(&q2, &Polynomial::from_real(&[0.0, 0.0, 1.0]), 1e-12);
        assert!(q2.is_real());
    }

    #[test]
    fn mobius_lift_rejects_root_at_zero() {
        let p = Polynomial::from_real(&[0.0, 1.0]);
        assert!(p.mobius_lift().is_err());
    }

    #[test]
    fn half_sum_lift_chebyshev_relation() {
        // p = x^2 + 1 has roots +-i; (x + 1/x)/2 maps both to 0.
        let p = Polynomial::from_real(&[1.0, 0.0, 1.0]);
        let q = p.half_sum_lift().unwrap();
        assert_proportional(&q, &Polynomial::from_real(&[0.0, 0.0, 1.0]), 1e-12);
    }

    #[test]
    fn cayley_of_x_has_root_minus_one() {
        let p = Polynomial::x();
        let q = p.cayley_poly().unwrap();
        assert_eq!(q.degree(), 1);
        let root = -q.coeff(0) / q.coeff(1);
        assert_close(root, c(-1.0, 0.0), 1e-14);
    }

    #[test]
    fn cayley_rejects_root_at_i() {
        let p = Polynomial::new(vec![c(0.0, -1.0), c(1.0, 0.0)]);
        assert!(p.cayley_poly().is_err());
    }

    #[test]
    fn inverse_cayley_examples() {
        let u = Polynomial::from_real(&[1.0, 1.0]);
        let w = u.inverse_cayley_poly().unwrap();
        assert_eq!(w.degree(), 1);
        let root = -w.coeff(0) / w.coeff(1);
        assert_close(root, c(0.0, 0.0), 1e-14);

        let u2 = Polynomial::from_real(&[1.0, 0.0, 1.0]);
        let w2 = u2.inverse_cayley_poly().unwrap();
        let mut roots = [-1.0f64, 1.0];
        // w2 is proportional to x^2 - 1
        assert_proportional(&w2, &Polynomial::from_real(&[-1.0, 0.0, 1.0]), 1e-12);
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }

    #[test]
    fn cayley_round_trip_is_proportional_to_input() {
        let p = Polynomial::from_real(&[2.0, -1.0, 3.0, 0.5, 1.0]);
        let q = p.cayley_poly().unwrap();
        let back = q.inverse_cayley_poly().unwrap();
        let back = back.realified(1e-10);
        assert_proportional(&back, &p, 1e-9);
    }

    #[test]
    fn truncation_outcomes() {
        // q = x^4 + tiny tail, r = 2 keeps the top three coefficients
        let q = Polynomial::new(vec![
            c(1e-20, 0.0),
            c(-1e-21, 0.0),
            c(0.5, 0.0),
            c(0.25, 0.0),
            c(1.0, 0.0),
        ]);
        match truncate_to_unit_factor(&q, 2, 1e-10 * 4.0) {
            TruncationOutcome::Factor(v) => {
                assert_eq!(v.degree(), 2);
                assert_close(v.coeff(0), c(0.5, 0.0), 0.0);
            }
            TruncationOutcome::NotYet { .. } => panic!("expected factor"),
        }
        let q2 = Polynomial::from_real(&[0.1, 0.0, 0.0, 0.0, 1.0]);
        match truncate_to_unit_factor(&q2, 2, 1e-8) {
            TruncationOutcome::NotYet { block_rel_magnitude } => {
                assert!(block_rel_magnitude > 1e-8);
            }
            TruncationOutcome::Factor(_) => panic!("expected NotYet"),
        }
    }

    #[test]
    fn derivative_cases() {
        let p = Polynomial::from_real(&[0.0, 0.0, 1.0]);
        assert_poly_close(&p.derivative(), &Polynomial::from_real(&[0.0, 2.0]), 0.0);
        assert!(Polynomial::one().derivative().is_zero());
        let cube = Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0]);
        assert_close(cube.derivative().eval(c(2.0, 0.0)), c(12.0, 0.0), 0.0);
    }

    #[test]
    fn divrem_reconstructs() {
        let p = Polynomial::from_real(&[4.0, -2.0, 3.0, 1.0, 2.0]);
        let d = Polynomial::from_real(&[1.0, 2.0, 1.0]);
        let (q, r) = p.divrem(&d).unwrap();
        let back = q.mul(&d).add(&r);
        assert_poly_close(&back, &p, 1e-13);
        assert!(r.degree() < d.degree());
    }

    #[test]
    fn parse_and_format_round_trip() {
        let text = "# comment\n1.5\n-2.0 0.25\n0.0\n3.0\n";
        let p = parse_polynomial(text).unwrap();
        assert_eq!(p.degree(), 3);
        assert_close(p.coeff(1), c(-2.0, 0.25), 0.0);
        let p2 = parse_polynomial(&format_polynomial(&p)).unwrap();
        assert_poly_close(&p2, &p, 0.0);
    }

    #[test]
    fn real_product_has_exactly_zero_imag() {
        let a = Polynomial::from_real(&(0..40).map(|i| (i as f64).sin()).collect::<Vec<_>>());
        let b = Polynomial::from_real(&(0..40).map(|i| (i as f64).cos()).collect::<Vec<_>>());
        assert!(a.mul(&b).is_real());
    }

    #[test]
    fn map_kind_scalar_and_poly_agree_on_degree_one() {
        let root = c(1.7, 0.0);
        let p = Polynomial::from_roots(&[root]);
        for kind in [
            MapKind::Inverse,
            MapKind::ShiftScale(c(2.0, 0.0), c(-1.0, 0.0)),
            MapKind::Square,
            MapKind::HalfSum,
            MapKind::HalfDiff,
            MapKind::Cayley,
            MapKind::InverseCayley,
        ] {
            let mapped = kind.apply_to_poly(&p).unwrap();
            let expected = kind.apply_to_scalar(root);
            assert_eq!(mapped.degree(), 1, "{kind:?}");
            let got = -mapped.coeff(0) / mapped.coeff(1);
            assert_close(got, expected, 1e-12 * (1.0 + expected.norm()));
        }
    }
}
