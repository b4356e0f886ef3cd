use num_complex::Complex;

use super::pochhammer;
use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, cplx, creal, Real};

/// Degree above which the alternating hypergeometric sum is refused.
pub const DEFAULT_JACOBI_DEGREE_CAP: usize = 40;

/// Degree and (complex) parameters of a Jacobi polynomial P_n^{(α,β)}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams<T> {
    pub degree: usize,
    pub alpha: Complex<T>,
    pub beta: Complex<T>,
}

impl<T: Real> JacobiParams<T> {
    pub fn new(degree: usize, alpha: Complex<T>, beta: Complex<T>) -> Self {
        Self { degree, alpha, beta }
    }

    /// Parameters (α+1, β+1) of degree n−1, the polynomial appearing in the derivative.
    pub fn raised(&self) -> Self {
        let one = T::one();
        Self {
            degree: self.degree.saturating_sub(1),
            alpha: self.alpha + one,
            beta: self.beta + one,
        }
    }
}

/// Coefficients d_k with P_n^{(α,β)}(z) = Σ_k d_k ((1−z)/2)^k.
///
/// d_k = (α+k+1)_{n−k} (−n)_k (n+α+β+1)_k / (n! k!). Writing the prefactor
/// as a shifted Pochhammer avoids dividing by (α+1)_k.
pub fn jacobi_coefficients<T: Real>(p: &JacobiParams<T>) -> Vec<Complex<T>> {
    let n = p.degree;
    let one = T::one();
    let n_fact: T = (1..=n).fold(one, |acc, j| acc * T::of(j));
    let top = p.alpha + p.beta + T::of(n + 1);
    let minus_n = creal(-T::of(n));
    let mut out = Vec::with_capacity(n + 1);
    let mut k_fact = one;
    for k in 0..=n {
        if k > 0 {
            k_fact *= T::of(k);
        }
        let shifted = pochhammer(p.alpha + T::of(k + 1), n - k);
        let d = shifted * pochhammer(minus_n, k) * pochhammer(top, k) / (n_fact * k_fact);
        out.push(d);
    }
    out
}

/// P_n^{(α,β)}(z) by the terminating hypergeometric sum, degree capped at
/// [`DEFAULT_JACOBI_DEGREE_CAP`].
pub fn jacobi_poly<T: Real>(p: &JacobiParams<T>, z: Complex<T>) -> Result<Complex<T>> {
    jacobi_poly_with_cap(p, z, DEFAULT_JACOBI_DEGREE_CAP)
}

pub fn jacobi_poly_with_cap<T: Real>(p: &JacobiParams<T>, z: Complex<T>, cap: usize) -> Result<Complex<T>> {
    check_cap(p.degree, cap)?;
    let w = (creal(T::one()) - z) * T::lit(0.5);
    let coeffs = jacobi_coefficients(p);
    let mut terms: Vec<Complex<T>> = Vec::with_capacity(coeffs.len());
    let mut wk = creal(T::one());
    for d in coeffs {
        terms.push(d * wk);
        wk *= w;
    }
    Ok(compensated_sum(&mut terms))
}

/// d/dz P_n^{(α,β)}(z) = ((n+α+β+1)/2) P_{n−1}^{(α+1,β+1)}(z).
pub fn jacobi_poly_derivative<T: Real>(p: &JacobiParams<T>, z: Complex<T>) -> Result<Complex<T>> {
    check_cap(p.degree, DEFAULT_JACOBI_DEGREE_CAP)?;
    if p.degree == 0 {
        return Ok(creal(T::zero()));
    }
    let factor = (p.alpha + p.beta + T::of(p.degree + 1)) * T::lit(0.5);
    Ok(factor * jacobi_poly(&p.raised(), z)?)
}

/// sin^n(θ) · P_n^{(α,β)}(i cot θ), evaluated without forming cot θ.
///
/// Uses (1 − i cot θ)/2 · sin θ = (sin θ − i cos θ)/2, so every term is a
/// bounded trigonometric monomial and the value stays finite as θ → 0, π.
pub fn jacobi_trig_scaled<T: Real>(p: &JacobiParams<T>, theta: T) -> Result<Complex<T>> {
    check_cap(p.degree, DEFAULT_JACOBI_DEGREE_CAP)?;
    let (s, c) = theta.sin_cos();
    let g = cplx(s, -c) * T::lit(0.5);
    let n = p.degree;
    let coeffs = jacobi_coefficients(p);
    let mut terms = Vec::with_capacity(n + 1);
    let mut gk = creal(T::one());
    for (k, d) in coeffs.into_iter().enumerate() {
        terms.push(d * gk * s.powi((n - k) as i32));
        gk *= g;
    }
    Ok(compensated_sum(&mut terms))
}

fn check_cap(degree: usize, cap: usize) -> Result<()> {
    if degree > cap {
        Err(Error::DegreeCap { degree, cap })
    } else {
        Ok(())
    }
}
