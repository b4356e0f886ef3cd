//! Superpotentials, partner potentials, the first-order ladder operators
//! A_m = ħ d/dx + W_m and A_m† = −ħ d/dx + W_m, their chains, and the
//! level-m Hamiltonians, all acting on Taylor jets of analytic operands.

mod corpus;
mod verify;

pub use corpus::{bump_corpus, test_corpus, Bump, FiniteDifferenceOperand, BUMP_SEED, MAX_FD_ORDER};
pub use verify::{verify_operator_identities, IdentityResidual, ParamsRecord, ResidualReport, VerifyOptions};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{creal, Real};
use crate::spectrum::{base_energy, ModelParams};
use crate::trig;

/// Relative distance from the walls below which evaluations are clamped.
pub const WALL_CLAMP: f64 = 1e-6;

/// A jet written as sin(πx/L)^power · rest.
///
/// Operators act on `rest` with the singular cot and 1/sin² terms combined
/// into exact coefficients, so the wall behaviour of an eigenfunction cancels
/// algebraically instead of in floating point.
#[derive(Debug, Clone, PartialEq)]
pub struct WallJet<T> {
    pub power: T,
    pub rest: Jet<T>,
}

impl<T: Real> WallJet<T> {
    pub fn plain(jet: Jet<T>) -> Self {
        Self {
            power: T::zero(),
            rest: jet,
        }
    }

    /// The full jet sin(πx/L)^power · rest.
    pub fn to_jet(&self, params: &ModelParams<T>, x: T) -> Jet<T> {
        if self.power == T::zero() {
            return self.rest.clone();
        }
        let (s, _) = trig::sin_cos_jet(params, x, self.rest.order());
        &s.powf(self.power) * &self.rest
    }
}

/// Anything that can be expanded as a Taylor jet at an interior point.
pub trait Operand<T: Real>: Sync {
    fn jet(&self, x: T, order: usize) -> Result<Jet<T>>;

    fn value(&self, x: T) -> Result<Complex<T>> {
        Ok(self.jet(x, 0)?.value())
    }

    /// The jet with any known power of sin(πx/L) split off.
    fn wall_jet(&self, x: T, order: usize) -> Result<WallJet<T>> {
        Ok(WallJet::plain(self.jet(x, order)?))
    }
}

impl<T: Real, O: Operand<T> + ?Sized> Operand<T> for &O {
    fn jet(&self, x: T, order: usize) -> Result<Jet<T>> {
        (**self).jet(x, order)
    }

    fn wall_jet(&self, x: T, order: usize) -> Result<WallJet<T>> {
        (**self).wall_jet(x, order)
    }
}

impl<T: Real, O: Operand<T> + ?Sized + Send> Operand<T> for Box<O> {
    fn jet(&self, x: T, order: usize) -> Result<Jet<T>> {
        (**self).jet(x, order)
    }

    fn wall_jet(&self, x: T, order: usize) -> Result<WallJet<T>> {
        (**self).wall_jet(x, order)
    }
}

fn interior<T: Real>(params: &ModelParams<T>, x: T) -> Result<T> {
    let l = params.length;
    if !(x > T::zero() && x < l) {
        return Err(Error::Domain {
            value: x.as_f64(),
            domain: "open interval (0, L)",
        });
    }
    let gap = l * T::lit(WALL_CLAMP);
    Ok(x.max(gap).min(l - gap))
}

fn level_nu<T: Real>(params: &ModelParams<T>, m: usize) -> T {
    params.nu + T::of(m + 1)
}

/// W_m(x) = −(πħ/L)[(ν+m+1) cot(πx/L) − β/(ν+m+1)].
pub fn superpotential<T: Real>(params: &ModelParams<T>, m: usize, x: T) -> Result<T> {
    let x = interior(params, x)?;
    let (s, c) = trig::sin_cos(params, x);
    let a = level_nu(params, m);
    Ok(-params.momentum_unit() * (a * c / s - params.beta / a))
}

fn superpotential_jet<T: Real>(params: &ModelParams<T>, m: usize, x: T, order: usize) -> Jet<T> {
    let (s, c) = trig::sin_cos_jet(params, x, order);
    let a = level_nu(params, m);
    c.div(&s)
        .scale_real(a)
        .add_scalar(creal(-params.beta / a))
        .scale_real(-params.momentum_unit())
}

/// V_m(x) = ε₀[(ν+m)(ν+m+1)/sin²(πx/L) − 2β cot(πx/L)].
pub fn potential<T: Real>(params: &ModelParams<T>, m: usize, x: T) -> Result<T> {
    let x = interior(params, x)?;
    let (s, c) = trig::sin_cos(params, x);
    let a = params.nu + T::of(m);
    Ok(params.epsilon0() * (a * (a + T::one()) / (s * s) - T::lit(2.0) * params.beta * c / s))
}

/// V_m from its superpotential, (W_m² − ħW_m′)/2M + E_0^{(m)}.
pub fn potential_from_superpotential<T: Real>(params: &ModelParams<T>, m: usize, x: T) -> Result<T> {
    let x = interior(params, x)?;
    let w = superpotential_jet(params, m, x, 1);
    let (w0, w1) = (w.value().re, w.derivative(1).re);
    Ok((w0 * w0 - params.hbar * w1) / params.two_mass() + base_energy(params, m))
}

/// V_m = V_0 − (ħ² m(2ν+m+1)/2M) d²/dx² ln sin(πx/L).
pub fn potential_cross_relation<T: Real>(params: &ModelParams<T>, m: usize, x: T) -> Result<T> {
    let v0 = potential(params, 0, x)?;
    let x = interior(params, x)?;
    let (s, _) = trig::sin_cos(params, x);
    let k = params.wavenumber();
    let d2_ln_sin = -k * k / (s * s);
    let mm = T::of(m);
    let coupling = params.hbar * params.hbar * mm * (T::lit(2.0) * params.nu + mm + T::one());
    Ok(v0 - coupling / params.two_mass() * d2_ln_sin)
}

fn potential_jet<T: Real>(params: &ModelParams<T>, m: usize, x: T, order: usize) -> Jet<T> {
    let (s, c) = trig::sin_cos_jet(params, x, order);
    let a = params.nu + T::of(m);
    let inv_s2 = Jet::constant(creal(T::one()), order).div(&(&s * &s));
    let cot = c.div(&s);
    (&inv_s2.scale_real(a * (a + T::one())) - &cot.scale_real(T::lit(2.0) * params.beta)).scale_real(params.epsilon0())
}

/// One factor of an operator word.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor<T> {
    A(usize),
    ADag(usize),
    H(usize),
    /// H^{(m)} − E.
    HMinus(usize, T),
}

impl<T> Factor<T> {
    pub fn order(&self) -> usize {
        match self {
            Factor::A(_) | Factor::ADag(_) => 1,
            Factor::H(_) | Factor::HMinus(..) => 2,
        }
    }
}

/// B_m = A_m ⋯ A_1 A_0, written left to right.
pub fn b_chain<T>(m: usize) -> Vec<Factor<T>> {
    (0..=m).rev().map(Factor::A).collect()
}

/// B_m† = A_0† A_1† ⋯ A_m†.
pub fn b_chain_dagger<T>(m: usize) -> Vec<Factor<T>> {
    (0..=m).map(Factor::ADag).collect()
}

/// Λ_{lo,hi} = A_hi ⋯ A_lo.
pub fn lambda_chain<T>(lo: usize, hi: usize) -> Vec<Factor<T>> {
    (lo..=hi).rev().map(Factor::A).collect()
}

/// Θ_{lo,hi} = A_lo† ⋯ A_hi†.
pub fn theta_chain<T>(lo: usize, hi: usize) -> Vec<Factor<T>> {
    (lo..=hi).map(Factor::ADag).collect()
}

/// Operator set of the hierarchy built on one set of model parameters.
///
/// `sign_flipped` reverses the sign of every superpotential inside A_m and
/// A_m† while leaving the Hamiltonians untouched; it exists as a negative
/// control for the identity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ladder<T> {
    params: ModelParams<T>,
    w_sign: T,
}

impl<T: Real> Ladder<T> {
    pub fn new(params: ModelParams<T>) -> Self {
        Self {
            params,
            w_sign: T::one(),
        }
    }

    pub fn sign_flipped(params: ModelParams<T>) -> Self {
        Self {
            params,
            w_sign: -T::one(),
        }
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn is_sign_flipped(&self) -> bool {
        self.w_sign < T::zero()
    }

    /// W_m(x) as seen by this operator set.
    pub fn superpotential(&self, m: usize, x: T) -> Result<T> {
        Ok(self.w_sign * superpotential(&self.params, m, x)?)
    }

    fn w(&self, m: usize, x: T, order: usize) -> Jet<T> {
        superpotential_jet(&self.params, m, x, order).scale_real(self.w_sign)
    }

    /// A_m f as a jet one order lower than `f`.
    pub fn a_jet(&self, m: usize, f: &Jet<T>, x: T) -> Jet<T> {
        let order = f.order() - 1;
        &f.differentiate().scale_real(self.params.hbar) + &(&self.w(m, x, order) * f)
    }

    pub fn a_dag_jet(&self, m: usize, f: &Jet<T>, x: T) -> Jet<T> {
        let order = f.order() - 1;
        &f.differentiate().scale_real(-self.params.hbar) + &(&self.w(m, x, order) * f)
    }

    /// H^{(m)} f = −(ħ²/2M) f″ + V_m f, two orders lower than `f`.
    pub fn h_jet(&self, m: usize, f: &Jet<T>, x: T) -> Jet<T> {
        let order = f.order() - 2;
        let kinetic = -self.params.hbar * self.params.hbar / self.params.two_mass();
        let f2 = f.differentiate().differentiate().scale_real(kinetic);
        &f2 + &(&potential_jet(&self.params, m, x, order) * f)
    }

    /// (1/2M) A_m† A_m f + E_0^{(m)} f, the factorized form of H^{(m)}.
    pub fn h_factorized_jet(&self, m: usize, f: &Jet<T>, x: T) -> Jet<T> {
        let inner = self.a_dag_jet(m, &self.a_jet(m, f, x), x);
        let e0 = base_energy(&self.params, m);
        &inner.scale_real(T::one() / self.params.two_mass()) + &f.truncate(inner.order()).scale_real(e0)
    }

    pub fn apply_factor(&self, factor: Factor<T>, f: &Jet<T>, x: T) -> Jet<T> {
        match factor {
            Factor::A(m) => self.a_jet(m, f, x),
            Factor::ADag(m) => self.a_dag_jet(m, f, x),
            Factor::H(m) => self.h_jet(m, f, x),
            Factor::HMinus(m, e) => {
                let h = self.h_jet(m, f, x);
                &h - &f.truncate(h.order()).scale_real(e)
            }
        }
    }

    /// Applies a word (rightmost factor first) to a jet with enough order.
    pub fn apply_word_jet(&self, word: &[Factor<T>], f: &Jet<T>, x: T) -> Jet<T> {
        word.iter()
            .rev()
            .fold(f.clone(), |acc, &factor| self.apply_factor(factor, &acc, x))
    }

    /// A_m, A_m† or H^{(m)} acting on sin^p · g, returned in the same form.
    ///
    /// With k = π/L, C = cot(kx), μ = ν+m+1 and σ the superpotential sign:
    /// A f = s^p ħ[g′ + k(p − σμ)C g + σkβ/μ g],
    /// A† f = s^{p−1} ħ[−s g′ − k(p + σμ)cos·g + σkβ/μ s g] (p > 0),
    /// H f = s^p{−(ħ²/2M)g″ − 2p(ε₀/k)C g′ + ε₀[(a(a+1) − p(p−1))/s² + p² − 2βC] g}, a = ν+m.
    pub fn apply_factor_wall(&self, factor: Factor<T>, f: &WallJet<T>, x: T) -> WallJet<T> {
        let p = &self.params;
        let pw = f.power;
        let g = &f.rest;
        let k = p.wavenumber();
        let sigma = self.w_sign;
        let first = |m: usize, dag: bool| {
            let order = g.order() - 1;
            let (s, c) = trig::sin_cos_jet(p, x, order);
            let mu = level_nu(p, m);
            let g0 = g.truncate(order);
            let g1 = g.differentiate();
            let shift = sigma * k * p.beta / mu;
            if dag && pw > T::zero() {
                // A† lowers the wall power: multiply the bracket through by s
                let rest = &(&(&s * &g1).scale_real(-T::one()) - &(&c * &g0).scale_real(k * (pw + sigma * mu)))
                    + &(&s * &g0).scale_real(shift);
                return (pw - T::one(), rest.scale_real(p.hbar));
            }
            let cot = c.div(&s);
            let (d_sign, cot_coef) = if dag {
                (-T::one(), -(pw + sigma * mu))
            } else {
                (T::one(), pw - sigma * mu)
            };
            let rest = &(&g1.scale_real(d_sign) + &(&cot * &g0).scale_real(k * cot_coef)) + &g0.scale_real(shift);
            (pw, rest.scale_real(p.hbar))
        };
        let hamiltonian = |m: usize| {
            let order = g.order() - 2;
            let (s, c) = trig::sin_cos_jet(p, x, order);
            let cot = c.div(&s);
            let inv_s2 = Jet::constant(creal(T::one()), order).div(&(&s * &s));
            let a = p.nu + T::of(m);
            let eps = p.epsilon0();
            let g1 = g.differentiate();
            let g2 = g1.differentiate();
            let g1 = g1.truncate(order);
            let g0 = g.truncate(order);
            let kinetic = g2.scale_real(-p.hbar * p.hbar / p.two_mass());
            let drift = (&cot * &g1).scale_real(-T::lit(2.0) * pw * eps / k);
            let coef = &(&inv_s2.scale_real(a * (a + T::one()) - pw * (pw - T::one()))
                - &cot.scale_real(T::lit(2.0) * p.beta))
                .add_scalar(creal(pw * pw));
            &(&kinetic + &drift) + &(coef * &g0).scale_real(eps)
        };
        let (power, rest) = match factor {
            Factor::A(m) => first(m, false),
            Factor::ADag(m) => first(m, true),
            Factor::H(m) => (pw, hamiltonian(m)),
            Factor::HMinus(m, e) => {
                let h = hamiltonian(m);
                (pw, &h - &g.truncate(h.order()).scale_real(e))
            }
        };
        WallJet { power, rest }
    }

    /// [`Ladder::apply_word_jet`] in wall-factored form.
    pub fn apply_word_wall(&self, word: &[Factor<T>], f: &WallJet<T>, x: T) -> WallJet<T> {
        word.iter()
            .rev()
            .fold(f.clone(), |acc, &factor| self.apply_factor_wall(factor, &acc, x))
    }

    /// Value of `word` applied to `f` at x; `extra` spare orders are kept.
    ///
    /// Works on the wall-factored jet of `f`, so for eigenfunctions the
    /// singular parts of W_m and V_m cancel exactly.
    pub fn apply_word(&self, word: &[Factor<T>], f: &dyn Operand<T>, x: T, extra: usize) -> Result<Jet<T>> {
        let x = interior(&self.params, x)?;
        let order: usize = word.iter().map(Factor::order).sum::<usize>() + extra;
        let jet = f.wall_jet(x, order)?;
        Ok(self.apply_word_wall(word, &jet, x).to_jet(&self.params, x))
    }
}

/// Values of a function on a strictly increasing interior grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    grid: Vec<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> SampledFunction<T> {
    pub fn new(params: &ModelParams<T>, grid: Vec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        check_grid(params, &grid)?;
        if grid.len() != values.len() {
            return Err(Error::Domain {
                value: values.len() as f64,
                domain: "one value per grid point",
            });
        }
        Ok(Self { grid, values })
    }

    pub fn sample(params: &ModelParams<T>, f: &dyn Operand<T>, grid: &[T]) -> Result<Self> {
        check_grid(params, grid)?;
        let values = grid.iter().map(|&x| f.value(x)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: grid.to_vec(),
            values,
        })
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// max |self − other| / max(max |self|, max |other|).
    pub fn relative_distance(&self, other: &Self) -> T {
        let mut diff = T::zero();
        let mut scale = T::zero();
        for (a, b) in self.values.iter().zip(&other.values) {
            diff = diff.max((a - b).norm());
            scale = scale.max(a.norm()).max(b.norm());
        }
        if scale == T::zero() {
            diff
        } else {
            diff / scale
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.norm()))
    }
}

fn check_grid<T: Real>(params: &ModelParams<T>, grid: &[T]) -> Result<()> {
    let mut prev = T::zero();
    for (i, &x) in grid.iter().enumerate() {
        if !(x > T::zero() && x < params.length) || (i > 0 && x <= prev) {
            return Err(Error::Domain {
                value: x.as_f64(),
                domain: "strictly increasing grid inside (0, L)",
            });
        }
        prev = x;
    }
    Ok(())
}

/// Midpoint grid x_i = L(i + 1/2)/N.
pub fn interior_grid<T: Real>(params: &ModelParams<T>, points: usize) -> Vec<T> {
    let n = T::of(points);
    (0..points)
        .map(|i| params.length * (T::of(i) + T::lit(0.5)) / n)
        .collect()
}

fn apply_sampled<T: Real>(
    ladder: &Ladder<T>,
    word: &[Factor<T>],
    f: &dyn Operand<T>,
    grid: &[T],
) -> Result<SampledFunction<T>> {
    check_grid(ladder.params(), grid)?;
    let values = grid
        .iter()
        .map(|&x| Ok(ladder.apply_word(word, f, x, 0)?.value()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledFunction {
        grid: grid.to_vec(),
        values,
    })
}

/// (A_m f)(x) = ħ f′(x) + W_m(x) f(x) on the grid.
pub fn apply_a<T: Real>(ladder: &Ladder<T>, m: usize, f: &dyn Operand<T>, grid: &[T]) -> Result<SampledFunction<T>> {
    apply_sampled(ladder, &[Factor::A(m)], f, grid)
}

pub fn apply_a_dagger<T: Real>(
    ladder: &Ladder<T>,
    m: usize,
    f: &dyn Operand<T>,
    grid: &[T],
) -> Result<SampledFunction<T>> {
    apply_sampled(ladder, &[Factor::ADag(m)], f, grid)
}

/// B_m f = A_m ⋯ A_0 f on the grid.
pub fn apply_b_chain<T: Real>(
    ladder: &Ladder<T>,
    m: usize,
    f: &dyn Operand<T>,
    grid: &[T],
) -> Result<SampledFunction<T>> {
    apply_sampled(ladder, &b_chain(m), f, grid)
}

pub fn apply_b_chain_dagger<T: Real>(
    ladder: &Ladder<T>,
    m: usize,
    f: &dyn Operand<T>,
    grid: &[T],
) -> Result<SampledFunction<T>> {
    apply_sampled(ladder, &b_chain_dagger(m), f, grid)
}

/// −(ħ²/2M) f″ + V_m f on the grid.
pub fn hamiltonian_apply<T: Real>(
    ladder: &Ladder<T>,
    m: usize,
    f: &dyn Operand<T>,
    grid: &[T],
) -> Result<SampledFunction<T>> {
    apply_sampled(ladder, &[Factor::H(m)], f, grid)
}
