//! Truncated Taylor expansions ("jets") with complex coefficients.
//!
//! A jet of order K at a point x₀ stores f(x₀), f′(x₀), …, f⁽ᴷ⁾(x₀)/K! as
//! normalized Taylor coefficients. Arithmetic on jets propagates exact
//! derivatives, which is how every differential operator in this crate is
//! applied to analytic operands.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::scalar::{creal, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Jet<T> {
    pub fn from_coeffs(coeffs: Vec<Complex<T>>) -> Self {
        assert!(!coeffs.is_empty(), "a jet carries at least its value");
        Self { coeffs }
    }

    pub fn constant(value: Complex<T>, order: usize) -> Self {
        let mut coeffs = vec![creal(T::zero()); order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(creal(T::zero()), order)
    }

    /// The identity function x ↦ x expanded at x₀.
    pub fn variable(x0: T, order: usize) -> Self {
        let mut jet = Self::constant(creal(x0), order);
        if order > 0 {
            jet.coeffs[1] = creal(T::one());
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> Complex<T> {
        self.coeffs[0]
    }

    pub fn coeff(&self, k: usize) -> Complex<T> {
        self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> Complex<T> {
        let fact = (1..=k).fold(T::one(), |acc, j| acc * T::of(j));
        self.coeffs[k] * fact
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order()) + 1;
        Self {
            coeffs: self.coeffs[..n].to_vec(),
        }
    }

    /// Jet of f′, one order lower.
    pub fn differentiate(&self) -> Self {
        assert!(self.order() > 0, "differentiating an order-0 jet");
        let coeffs = (1..self.coeffs.len()).map(|k| self.coeffs[k] * T::of(k)).collect();
        Self { coeffs }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: Complex<T>) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    pub fn div(&self, other: &Self) -> Self {
        let n = self.order().min(other.order()) + 1;
        let b0 = other.coeffs[0];
        let mut q: Vec<Complex<T>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= other.coeffs[j] * q[k - j];
            }
            q.push(acc / b0);
        }
        Self { coeffs: q }
    }

    pub fn exp(&self) -> Self {
        let u = &self.coeffs;
        let mut v = Vec::with_capacity(u.len());
        v.push(u[0].exp());
        for k in 1..u.len() {
            let mut acc = creal(T::zero());
            for j in 1..=k {
                acc += u[j] * v[k - j] * T::of(j);
            }
            v.push(acc / T::of(k));
        }
        Self { coeffs: v }
    }

    pub fn ln(&self) -> Self {
        let u = &self.coeffs;
        let mut v: Vec<Complex<T>> = Vec::with_capacity(u.len());
        v.push(u[0].ln());
        for k in 1..u.len() {
            let mut acc = creal(T::zero());
            for j in 1..k {
                acc += v[j] * u[k - j] * T::of(j);
            }
            v.push((u[k] - acc / T::of(k)) / u[0]);
        }
        Self { coeffs: v }
    }

    /// u^p for real p; requires a nonzero value at the expansion point.
    pub fn powf(&self, p: T) -> Self {
        let u = &self.coeffs;
        let mut v: Vec<Complex<T>> = Vec::with_capacity(u.len());
        v.push(u[0].powf(p));
        for k in 1..u.len() {
            let mut acc = creal(T::zero());
            for j in 1..=k {
                let w = p * T::of(j) - T::of(k - j);
                acc += u[j] * v[k - j] * w;
            }
            v.push(acc / (u[0] * T::of(k)));
        }
        Self { coeffs: v }
    }

    pub fn powi(&self, n: usize) -> Self {
        let mut out = Self::constant(creal(T::one()), self.order());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// (sin u, cos u) computed jointly.
    pub fn sin_cos(&self) -> (Self, Self) {
        let u = &self.coeffs;
        let mut s = Vec::with_capacity(u.len());
        let mut c = Vec::with_capacity(u.len());
        s.push(u[0].sin());
        c.push(u[0].cos());
        for k in 1..u.len() {
            let mut acc_s = creal(T::zero());
            let mut acc_c = creal(T::zero());
            for j in 1..=k {
                let ju = u[j] * T::of(j);
                acc_s += ju * c[k - j];
                acc_c -= ju * s[k - j];
            }
            s.push(acc_s / T::of(k));
            c.push(acc_c / T::of(k));
        }
        (Self { coeffs: s }, Self { coeffs: c })
    }
}

impl<T: Real> Add for &Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: Self) -> Jet<T> {
        let n = self.order().min(rhs.order()) + 1;
        Jet {
            coeffs: (0..n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect(),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<T: Real> Sub for &Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: Self) -> Jet<T> {
        let n = self.order().min(rhs.order()) + 1;
        Jet {
            coeffs: (0..n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect(),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<T: Real> Mul for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: Self) -> Jet<T> {
        let n = self.order().min(rhs.order()) + 1;
        let coeffs = (0..n)
            .map(|k| (0..=k).fold(creal(T::zero()), |acc, j| acc + self.coeffs[j] * rhs.coeffs[k - j]))
            .collect();
        Jet { coeffs }
    }
}

impl<T: Real> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        Jet {
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: Self) -> Jet<T> {
        &self + &rhs
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: Self) -> Jet<T> {
        &self - &rhs
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: Self) -> Jet<T> {
        &self * &rhs
    }
}
