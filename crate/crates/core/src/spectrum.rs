//! Model parameters, hierarchy energies and the combinatorial gap factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest m + n accepted by [`LevelIndex::new`].
pub const DEFAULT_LEVEL_CAP: usize = 20;

/// Physical parameters of V(x) = ε₀[ν(ν+1)/sin²(πx/L) − 2β cot(πx/L)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub nu: T,
    pub beta: T,
    pub hbar: T,
    pub length: T,
    pub mass: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(nu: T, beta: T, hbar: T, length: T, mass: T) -> Result<Self> {
        let p = Self {
            nu,
            beta,
            hbar,
            length,
            mass,
        };
        p.validate()?;
        Ok(p)
    }

    /// Gauge ħ = 1, L = 1, 2M = 1, in which ε₀ = π².
    pub fn dimensionless(nu: T, beta: T) -> Result<Self> {
        Self::new(nu, beta, T::one(), T::one(), T::lit(0.5))
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, v: T, ok: bool| {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams {
                    name,
                    value: v.as_f64(),
                })
            }
        };
        check("nu", self.nu, self.nu >= T::zero())?;
        check("beta", self.beta, self.beta >= T::zero())?;
        check("hbar", self.hbar, self.hbar > T::zero())?;
        check("L", self.length, self.length > T::zero())?;
        check("mass", self.mass, self.mass > T::zero())
    }

    /// ε₀ = ħ²π²/(2ML²).
    pub fn epsilon0(&self) -> T {
        let k = self.wavenumber();
        self.hbar * self.hbar * k * k / (T::lit(2.0) * self.mass)
    }

    /// π/L.
    pub fn wavenumber(&self) -> T {
        T::PI() / self.length
    }

    /// πħ/L, the momentum unit that scales every superpotential.
    pub fn momentum_unit(&self) -> T {
        self.hbar * self.wavenumber()
    }

    pub fn two_mass(&self) -> T {
        T::lit(2.0) * self.mass
    }

    /// Same physical units with ν replaced by ν + shift.
    pub fn shifted(&self, shift: usize) -> Self {
        Self {
            nu: self.nu + T::of(shift),
            ..*self
        }
    }

    pub fn same_units(&self, other: &Self) -> bool {
        self.hbar == other.hbar && self.length == other.length && self.mass == other.mass
    }
}

/// Hierarchy order m and excitation number n of the eigenpair E_n^{(m)}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelIndex {
    pub m: usize,
    pub n: usize,
}

impl LevelIndex {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        Self::with_cap(m, n, DEFAULT_LEVEL_CAP)
    }

    pub fn with_cap(m: usize, n: usize, cap: usize) -> Result<Self> {
        if m + n > cap {
            return Err(Error::DegreeCap { degree: m + n, cap });
        }
        Ok(Self { m, n })
    }

    /// Index of the base-level state with the same energy.
    pub fn base_level(&self) -> usize {
        self.m + self.n
    }
}

/// E_n^{(m)} = ε₀[(n+m+ν+1)² − β²/(n+m+ν+1)²].
///
/// Depends on m and n only through m + n, so E_n^{(m+1)} = E_{n+1}^{(m)} exactly.
pub fn energy<T: Real>(params: &ModelParams<T>, idx: LevelIndex) -> T {
    base_energy(params, idx.base_level())
}

/// E_j^{(0)}.
pub fn base_energy<T: Real>(params: &ModelParams<T>, j: usize) -> T {
    let a = T::of(j) + params.nu + T::one();
    let b = params.beta / a;
    params.epsilon0() * (a * a - b * b)
}

fn ln_abs_product<T: Real>(factors: impl Iterator<Item = T>) -> (T, T) {
    let mut ln = T::zero();
    let mut sign = T::one();
    for f in factors {
        if f == T::zero() {
            return (T::neg_infinity(), T::zero());
        }
        if f < T::zero() {
            sign = -sign;
        }
        ln += f.abs().ln();
    }
    (ln, sign)
}

fn gap_term<T: Real>(params: &ModelParams<T>, top: usize, k: usize) -> T {
    // (top−k+1)(top+2ν+k+3)(1 + β²/[(k+ν+1)(top+ν+2)]²) with top = n+m or 2n
    let nu = params.nu;
    let first = T::of(top + 1) - T::of(k);
    let second = T::of(top + k + 3) + T::lit(2.0) * nu;
    let r = params.beta / ((T::of(k) + nu + T::one()) * (T::of(top + 2) + nu));
    first * second * (T::one() + r * r)
}

/// M(n, m) = [Π_{k=0}^m (n+m−k+1)(n+m+2ν+k+3)(1 + β²/[(k+ν+1)(n+m+ν+2)]²)]^{1/2}.
///
/// Satisfies (πħ/L)^{2(m+1)} M² = (2M)^{m+1} Π_k (E_{n+m+1} − E_k).
pub fn gap_factor_m<T: Real>(params: &ModelParams<T>, n: usize, m: usize) -> T {
    let (ln, _) = ln_abs_product((0..=m).map(|k| gap_term(params, n + m, k)));
    (ln * T::lit(0.5)).exp()
}

/// N(n, m) = Π_{k=0}^m (2n−k+1)(2n+2ν+k+3)(1 + β²/[(k+ν+1)(2n+ν+2)]²).
///
/// Positive for m ≤ 2n; the factor 2n−k+1 makes it vanish or change sign
/// beyond that, and the sign is kept.
pub fn gap_factor_n<T: Real>(params: &ModelParams<T>, n: usize, m: usize) -> T {
    let (ln, sign) = ln_abs_product((0..=m).map(|k| gap_term(params, 2 * n, k)));
    sign * ln.exp()
}

/// α(n) = arctan(β/[(ν+1)(ν+n+2)]).
pub fn phase_alpha<T: Real>(params: &ModelParams<T>, n: usize) -> T {
    let nu = params.nu;
    (params.beta / ((nu + T::one()) * (nu + T::of(n + 2)))).atan()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(nu: f64, beta: f64) -> ModelParams<f64> {
        ModelParams::dimensionless(nu, beta).unwrap()
    }

    #[test]
    fn gauge_and_validation() {
        assert!((p(0.0, 0.0).epsilon0() - PI * PI).abs() < 1e-14);
        assert!(ModelParams::dimensionless(-0.1, 0.0).is_err());
        assert!(ModelParams::dimensionless(0.0, f64::NAN).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 0.0, 1.0).is_err());
        let q = ModelParams::new(1.0, 0.0, 2.0, 3.0, 0.7).unwrap();
        assert!((q.epsilon0() - 4.0 * PI * PI / (1.4 * 9.0)).abs() < 1e-13);
    }

    #[test]
    fn energy_examples() {
        let e0 = PI * PI;
        let idx = LevelIndex::new(0, 0).unwrap();
        assert!((energy(&p(0.0, 0.0), idx) - e0).abs() < 1e-13);
        assert!((energy(&p(1.0, 2.0), idx) - 3.0 * e0).abs() < 1e-12);
        for n in 0..4 {
            let e = energy(&p(0.0, 0.0), LevelIndex::new(0, n).unwrap());
            assert!((e / e0 - ((n + 1) * (n + 1)) as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn level_cap() {
        assert!(LevelIndex::new(10, 10).is_ok());
        assert!(matches!(LevelIndex::new(11, 10), Err(Error::DegreeCap { .. })));
    }

    #[test]
    fn gap_factor_examples() {
        assert!((gap_factor_m(&p(0.0, 0.0), 0, 0) - 3f64.sqrt()).abs() < 1e-14);
        assert!((gap_factor_n(&p(0.0, 0.0), 1, 0) - 15.0).abs() < 1e-12);
        let q = p(1.3, 0.8);
        for n in 0..5 {
            let m2 = gap_factor_m(&q, n, n).powi(2);
            assert!((gap_factor_n(&q, n, n) - m2).abs() < 1e-10 * m2);
        }
        // 2n − k + 1 = 0 at k = 3 for n = 1
        assert_eq!(gap_factor_n(&p(0.5, 1.0), 1, 3), 0.0);
    }

    #[test]
    fn phase_alpha_examples() {
        assert_eq!(phase_alpha(&p(2.0, 0.0), 3), 0.0);
        assert!((phase_alpha(&p(0.0, 2.0), 0) - PI / 4.0).abs() < 1e-15);
        assert!((phase_alpha(&p(1.0, 3.0), 2) - (0.3f64).atan()).abs() < 1e-15);
    }
}
