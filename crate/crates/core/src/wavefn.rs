//! Normalized eigenfunctions φ_n^{(m)} of the hierarchy Hamiltonians.
//!
//! Base-level states are evaluated in the trigonometric form
//! φ_n = K s^{ν+1} e^{−βπx/(L(ν+n+1))} Q_n with Q_n = sⁿ P_n(i cot θ), where
//! θ = πx/L and s = sin θ. Q_n is a bounded trigonometric polynomial, so the
//! evaluation never forms cot θ. Every state carries the phase iⁿ, which makes
//! it real. Higher levels are obtained by applying the ladder chain
//! A_{m−1} ⋯ A_0 to jets of φ_{n+m}^{(0)}.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::operators::{b_chain, Ladder, Operand, WallJet};
use crate::scalar::{ci, compensated_sum, cplx, creal, Real};
use crate::specfun::{jacobi_coefficients, JacobiParams};
use crate::specfun::{ln_gamma_real, log_gamma, pochhammer};
use crate::spectrum::{base_energy, energy, phase_alpha, LevelIndex, ModelParams};
use crate::trig;

/// Significant digits below which a cancelling sum is rejected.
pub const MIN_DIGITS: f64 = 6.0;

/// [`MIN_DIGITS`], lowered for scalars that carry fewer than nine digits.
fn min_digits<T: Real>() -> T {
    T::lit(MIN_DIGITS).min(-T::epsilon().log10() - T::lit(3.0))
}

/// Jacobi parameters a_n = −(n+ν+1) + iβ/(n+ν+1) and its conjugate.
pub fn jacobi_params<T: Real>(params: &ModelParams<T>, n: usize) -> JacobiParams<T> {
    let p = params.nu + T::of(n + 1);
    let a = cplx(-p, params.beta / p);
    JacobiParams::new(n, a, a.conj())
}

/// A positive sum carried as ln S, with the digits that survived cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSum<T> {
    pub ln_value: T,
    pub digits: T,
}

fn gram_coefficients<T: Real>(nu: T, beta: T, n: usize) -> Vec<Complex<T>> {
    // c_k = (−n)_k (−n−2ν−1)_k / ((a_n+1)_k k!)
    let p = nu + T::of(n + 1);
    let alpha1 = cplx(T::one() - p, beta / p);
    let minus_n = creal(-T::of(n));
    let second = creal(-T::of(n + 1) - T::lit(2.0) * nu);
    let mut out = Vec::with_capacity(n + 1);
    let mut c = creal(T::one());
    for k in 0..=n {
        if k > 0 {
            let j = T::of(k - 1);
            c = c * (minus_n + j) * (second + j) / ((alpha1 + j) * T::of(k));
        }
        out.push(c);
    }
    out
}

/// S(τ) = Σ_k Σ_s c̄_k c_s Γ(2ν+2n−k−s+3) / (Γ(ν+n+2−k+iτ) Γ(ν+n+2−s−iτ)),
/// c_k = (−n)_k (−n−2ν−1)_k / ((a_n+1)_k k!).
///
/// τ = β/(ν+n+1) gives the normalization integral; other τ weight the density
/// by an exponential. Writing Γ(2ν+2n+3−k−s) as a Laguerre moment turns the
/// sum into the positive form ∫₀^∞ y^{2ν+2} e^{−y} |Σ_s u_s y^{n−s}|² dy with
/// u_s = c_s/Γ(ν+n+2−s−iτ), which an (n+1)-point generalized Gauss-Laguerre
/// rule evaluates exactly. The direct sum cancels catastrophically once n
/// approaches ten; this form only loses what cancels inside each Σ_s.
pub fn weighted_gram_sum<T: Real>(nu: T, beta: T, n: usize, tau: T) -> Result<LogSum<T>> {
    let c = gram_coefficients(nu, beta, n);
    // 1/Γ(B−s) = (−1)^s (1−B)_s / Γ(B), B = ν+n+2−iτ
    let b = cplx(nu + T::of(n + 2), -tau);
    let ln_gamma_b = log_gamma(b)?.re;
    let one_minus_b = creal(T::one()) - b;
    let mut v = Vec::with_capacity(n + 1);
    let mut rising = creal(T::one());
    for (s, cs) in c.iter().enumerate() {
        if s > 0 {
            rising = -rising * (one_minus_b + T::of(s - 1));
        }
        v.push(cs * rising);
    }
    let (nodes, ln_w) = crate::quadrature::gauss_laguerre(n + 1, (T::lit(2.0) * nu + T::lit(2.0)).as_f64())?;
    let mut ln_terms = Vec::with_capacity(n + 1);
    let mut conds = Vec::with_capacity(n + 1);
    for (&y, &lw) in nodes.iter().zip(&ln_w) {
        let y = T::lit(y);
        // Horner in y, tracking the absolute sum for the cancellation ratio
        let mut acc = creal(T::zero());
        let mut abs = T::zero();
        for vs in &v {
            acc = acc * y + vs;
            abs = abs * y + vs.norm();
        }
        let ln_term = T::lit(lw) + T::lit(2.0) * acc.norm().ln();
        conds.push(abs / acc.norm());
        ln_terms.push(ln_term);
    }
    let shift = ln_terms.iter().fold(T::neg_infinity(), |acc, &z| acc.max(z));
    let shares: Vec<T> = ln_terms.iter().map(|&z| (z - shift).exp()).collect();
    let sum = shares.iter().fold(T::zero(), |a, &b| a + b);
    // each node's relative error is its Horner condition number times eps,
    // doubled by the square; S inherits their average weighted by share
    let cond = shares.iter().zip(&conds).fold(T::zero(), |a, (&w, &k)| a + w * k) / sum;
    let digits = -(T::lit(2.0) * T::epsilon() * cond).log10();
    if !(digits >= min_digits::<T>()) {
        return Err(Error::LossOfSignificance {
            what: "weighted Gram double sum",
            digits: digits.as_f64(),
        });
    }
    Ok(LogSum {
        ln_value: shift + sum.ln() - T::lit(2.0) * ln_gamma_b,
        digits,
    })
}

/// The same double sum accumulated term by term, kept as an independent
/// check of [`weighted_gram_sum`] at small n.
pub fn weighted_gram_sum_direct<T: Real>(nu: T, beta: T, n: usize, tau: T) -> Result<LogSum<T>> {
    let p = nu + T::of(n + 1);
    let mut ln_u = Vec::with_capacity(n + 1);
    for (k, ck) in gram_coefficients(nu, beta, n).into_iter().enumerate() {
        let g = log_gamma(cplx(p + T::one() - T::of(k), -tau))?;
        ln_u.push(ck.ln() - g);
    }
    let top = T::lit(2.0) * p + T::one();
    let mut ln_terms = Vec::with_capacity((n + 1) * (n + 1));
    for (k, uk) in ln_u.iter().enumerate() {
        for (s, us) in ln_u.iter().enumerate() {
            ln_terms.push(uk.conj() + us + ln_gamma_real(top - T::of(k + s))?);
        }
    }
    let shift = ln_terms.iter().fold(T::neg_infinity(), |acc, z| acc.max(z.re));
    let mut terms: Vec<Complex<T>> = ln_terms.iter().map(|z| (z - shift).exp()).collect();
    let count = T::of(terms.len());
    let sum = compensated_sum(&mut terms);
    let floor = T::epsilon() * count;
    let digits = if sum.re > T::zero() {
        (sum.re / floor).log10()
    } else {
        T::zero()
    };
    if digits < min_digits::<T>() || sum.im.abs() > T::lit(1e-10) * sum.re + T::lit(100.0) * floor {
        return Err(Error::LossOfSignificance {
            what: "direct double sum",
            digits: digits.as_f64(),
        });
    }
    Ok(LogSum {
        ln_value: shift + sum.re.ln(),
        digits,
    })
}

/// Pieces of K_n = 2^{n+ν+1} L^{−1/2} T O^{−1/2} e^{βπ/(2(n+ν+1))}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationData<T> {
    pub log_k: T,
    /// ln O, with O = S(β/(ν+n+1)).
    pub log_o: T,
    /// T = n!/|(−n−ν+iβ/(ν+n+1))_n|.
    pub t_value: T,
}

impl<T: Real> NormalizationData<T> {
    pub fn k(&self) -> T {
        self.log_k.exp()
    }
}

/// Normalization constant of φ_n^{(0)}.
pub fn normalization_k<T: Real>(params: &ModelParams<T>, n: usize) -> Result<NormalizationData<T>> {
    params.validate()?;
    let p = params.nu + T::of(n + 1);
    let bp = params.beta / p;
    // a per-state constant: always summed in double precision, since single
    // precision cannot absorb the cancellation even at small n
    let o = weighted_gram_sum(params.nu.as_f64(), params.beta.as_f64(), n, bp.as_f64())?;
    normalization_with(params, n, T::lit(o.ln_value))
}

/// K_n for a given ln O; O = 1 leaves a positive scale that only fixes magnitudes.
fn normalization_with<T: Real>(params: &ModelParams<T>, n: usize, ln_o: T) -> Result<NormalizationData<T>> {
    let p = params.nu + T::of(n + 1);
    let bp = params.beta / p;
    // real parts of the factors are ≤ −ν−1, so the product never vanishes
    let poch = pochhammer(cplx(-T::of(n) - params.nu, bp), n).norm();
    if !(poch > T::zero() && poch.is_finite()) {
        return Err(Error::LossOfSignificance {
            what: "Pochhammer factor of T",
            digits: 0.0,
        });
    }
    let n_fact = (1..=n).fold(T::one(), |acc, j| acc * T::of(j));
    let t_value = n_fact / poch;
    let log_k = p * T::LN_2() - T::lit(0.5) * params.length.ln() + t_value.ln() - T::lit(0.5) * ln_o
        + params.beta * T::PI() / (T::lit(2.0) * p);
    Ok(NormalizationData {
        log_k,
        log_o: ln_o,
        t_value,
    })
}

/// Q = sⁿ P_n(i cot θ) = Σ_k d_k g^k s^{n−k}, g = (s − i c)/2.
fn trig_poly<T: Real>(coeffs: &[Complex<T>], s: T, c: T) -> Complex<T> {
    let n = coeffs.len() - 1;
    let g = cplx(s, -c) * T::lit(0.5);
    let mut terms = Vec::with_capacity(n + 1);
    let mut gk = creal(T::one());
    for (k, d) in coeffs.iter().enumerate() {
        terms.push(d * gk * s.powi((n - k) as i32));
        gk *= g;
    }
    compensated_sum(&mut terms)
}

fn trig_poly_jet<T: Real>(coeffs: &[Complex<T>], s: &Jet<T>, c: &Jet<T>) -> Jet<T> {
    let n = coeffs.len() - 1;
    let g = (s - &c.scale(ci())).scale_real(T::lit(0.5));
    let mut acc = Jet::zero(s.order());
    let mut gk = Jet::constant(creal(T::one()), s.order());
    for (k, d) in coeffs.iter().enumerate() {
        acc = &acc + &(&gk * &s.powi(n - k)).scale(*d);
        gk = &gk * &g;
    }
    acc
}

fn i_pow<T: Real>(n: usize) -> Complex<T> {
    match n % 4 {
        0 => cplx(T::one(), T::zero()),
        1 => cplx(T::zero(), T::one()),
        2 => cplx(-T::one(), T::zero()),
        _ => cplx(T::zero(), -T::one()),
    }
}

fn check_closed<T: Real>(params: &ModelParams<T>, x: T) -> Result<()> {
    if x >= T::zero() && x <= params.length {
        Ok(())
    } else {
        Err(Error::Domain {
            value: x.as_f64(),
            domain: "closed interval [0, L]",
        })
    }
}

fn check_open<T: Real>(params: &ModelParams<T>, x: T) -> Result<()> {
    if x > T::zero() && x < params.length {
        Ok(())
    } else {
        Err(Error::Domain {
            value: x.as_f64(),
            domain: "open interval (0, L)",
        })
    }
}

/// φ_n^{(0)} with its coefficients and normalization precomputed.
#[derive(Debug, Clone, PartialEq)]
struct BaseState<T> {
    params: ModelParams<T>,
    n: usize,
    norm: NormalizationData<T>,
    /// iⁿ d_k.
    coeffs: Vec<Complex<T>>,
    /// iⁿ (n+α+β̄+1)/2 · d_k⁺ of the raised polynomial.
    raised: Vec<Complex<T>>,
    decay: T,
}

impl<T: Real> BaseState<T> {
    fn new(params: &ModelParams<T>, n: usize) -> Result<Self> {
        Self::with_norm(params, n, normalization_k(params, n)?)
    }

    /// Off by a positive constant, so signs are right even where S cannot be summed.
    fn unnormalized(params: &ModelParams<T>, n: usize) -> Result<Self> {
        Self::with_norm(params, n, normalization_with(params, n, T::zero())?)
    }

    fn with_norm(params: &ModelParams<T>, n: usize, norm: NormalizationData<T>) -> Result<Self> {
        let jp = jacobi_params(params, n);
        let phase = i_pow::<T>(n);
        let coeffs = jacobi_coefficients(&jp).into_iter().map(|d| d * phase).collect();
        let raised = if n == 0 {
            Vec::new()
        } else {
            let half = (jp.alpha + jp.beta + T::of(n + 1)) * T::lit(0.5);
            jacobi_coefficients(&jp.raised())
                .into_iter()
                .map(|d| d * half * phase)
                .collect()
        };
        let p = params.nu + T::of(n + 1);
        Ok(Self {
            params: *params,
            n,
            norm,
            coeffs,
            raised,
            decay: params.beta * params.wavenumber() / p,
        })
    }

    fn envelope_ln(&self, s: T, x: T) -> T {
        self.norm.log_k + (self.params.nu + T::one()) * s.ln() - self.decay * x
    }

    fn value(&self, x: T) -> Result<Complex<T>> {
        check_closed(&self.params, x)?;
        if x == T::zero() || x == self.params.length {
            return Ok(creal(T::zero()));
        }
        let (s, c) = trig::sin_cos(&self.params, x);
        Ok(trig_poly(&self.coeffs, s, c) * self.envelope_ln(s, x).exp())
    }

    /// φ′ = K (π/L) e^{−bx} s^ν [(p c − (β/p) s) Q_n + i(n+2ν+1)/2 · Q⁺_{n−1}] iⁿ,
    /// where the raised coefficients already carry −(n+2ν+1)/2 · iⁿ.
    fn derivative(&self, x: T) -> Result<Complex<T>> {
        let (s, c) = trig::sin_cos(&self.params, x);
        let p = self.params.nu + T::of(self.n + 1);
        let k = self.params.wavenumber();
        let mut bracket = trig_poly(&self.coeffs, s, c) * (p * c - self.params.beta / p * s);
        if self.n > 0 {
            // d/dz P_n at z = i cot θ picks up dz/dθ = −i csc² θ
            bracket -= ci::<T>() * trig_poly(&self.raised, s, c);
        }
        let ln_env = self.norm.log_k - self.decay * x;
        Ok(bracket * (k * s.powf(self.params.nu) * ln_env.exp()))
    }

    /// sin^{ν+1} split off; the rest is K e^{−bx} Q_n, smooth up to the walls.
    fn wall_jet(&self, x: T, order: usize) -> Result<WallJet<T>> {
        let (s, c) = trig::sin_cos_jet(&self.params, x, order);
        let q = trig_poly_jet(&self.coeffs, &s, &c);
        let mut lin = vec![creal(T::zero()); order + 1];
        lin[0] = creal(self.norm.log_k - self.decay * x);
        if order > 0 {
            lin[1] = creal(-self.decay);
        }
        Ok(WallJet {
            power: self.params.nu + T::one(),
            rest: &q * &Jet::from_coeffs(lin).exp(),
        })
    }

    fn jet(&self, x: T, order: usize) -> Result<Jet<T>> {
        let (s, c) = trig::sin_cos_jet(&self.params, x, order);
        let q = trig_poly_jet(&self.coeffs, &s, &c);
        let mut lin = vec![creal(T::zero()); order + 1];
        lin[0] = creal(self.norm.log_k - self.decay * x);
        if order > 0 {
            lin[1] = creal(-self.decay);
        }
        let env = (&Jet::from_coeffs(lin) + &s.ln().scale_real(self.params.nu + T::one())).exp();
        Ok(&q * &env)
    }
}

/// Normalized eigenfunction φ_n^{(m)} of H^{(m)}.
///
/// For m > 0 the state is (2M)^{−m/2} Π_{k<m}(E_{n+m} − E_k)^{−1/2}
/// · A_{m−1} ⋯ A_0 φ_{n+m}^{(0)}.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenFunction<T> {
    params: ModelParams<T>,
    index: LevelIndex,
    // φ_n^{(0)} at ν + m; the chain state equals it up to `sign`
    state: BaseState<T>,
    sign: T,
}

impl<T: Real> EigenFunction<T> {
    /// φ_n^{(m)}, fixed in sign by the ladder chain acting on φ_{n+m}^{(0)}.
    ///
    /// Values come from the equivalent shifted-ν base state, which keeps full
    /// relative accuracy up to the walls where the chain cancels.
    pub fn new(params: &ModelParams<T>, index: LevelIndex) -> Result<Self> {
        params.validate()?;
        let state = BaseState::new(&params.shifted(index.m), index.n)?;
        let mut sign = T::one();
        if index.m > 0 {
            // compare where the state is largest among a few bulk points
            let top = BaseState::unnormalized(params, index.base_level())?;
            let mut best = (T::zero(), T::one());
            for frac in [0.3, 0.5, 0.7, 0.4, 0.6] {
                let x = params.length * T::lit(frac);
                let v = state.value(x)?.re;
                if v.abs() > best.0 {
                    best = (v.abs(), chain_jet(params, index, &top, x, 0)?.value().re * v);
                }
            }
            sign = best.1.signum();
        }
        Ok(Self {
            params: *params,
            index,
            state,
            sign,
        })
    }

    /// φ_n^{(0)} at ν + m with its own phase convention.
    ///
    /// Agrees with [`EigenFunction::new`] up to an overall sign.
    pub fn shape_invariant(params: &ModelParams<T>, index: LevelIndex) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params: *params,
            index,
            state: BaseState::new(&params.shifted(index.m), index.n)?,
            sign: T::one(),
        })
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn index(&self) -> LevelIndex {
        self.index
    }

    pub fn energy(&self) -> T {
        energy(&self.params, self.index)
    }

    /// Normalization of the underlying shifted-ν base state.
    pub fn normalization(&self) -> &NormalizationData<T> {
        &self.state.norm
    }

    /// φ(x) on [0, L]; exactly zero at the walls.
    pub fn eval(&self, x: T) -> Result<Complex<T>> {
        Ok(self.state.value(x)? * self.sign)
    }

    /// φ′(x) on the open interval (0, L).
    pub fn derivative(&self, x: T) -> Result<Complex<T>> {
        check_open(&self.params, x)?;
        Ok(self.state.derivative(x)? * self.sign)
    }
}

impl<T: Real> Operand<T> for EigenFunction<T> {
    fn jet(&self, x: T, order: usize) -> Result<Jet<T>> {
        check_open(&self.params, x)?;
        Ok(self.state.jet(x, order)?.scale_real(self.sign))
    }

    fn wall_jet(&self, x: T, order: usize) -> Result<WallJet<T>> {
        check_open(&self.params, x)?;
        let mut w = self.state.wall_jet(x, order)?;
        w.rest = w.rest.scale_real(self.sign);
        Ok(w)
    }
}

/// Gram matrix ⟨φ_i^{(m)}|φ_j^{(m)}⟩ for i, j ≤ `n_max`, with a quadrature
/// error bound.
///
/// Every state is sampled once on a composite cosine-mapped Gauss-Legendre
/// rule; the rule is doubled until two successive matrices agree to
/// `tol`, and the last difference is returned as the error bound.
pub fn gram_matrix<T: Real>(
    params: &ModelParams<T>,
    m: usize,
    n_max: usize,
    tol: T,
) -> Result<(Vec<Vec<Complex<T>>>, T)> {
    let states = (0..=n_max)
        .map(|n| EigenFunction::new(params, LevelIndex::new(m, n)?))
        .collect::<Result<Vec<_>>>()?;
    let build = |panels: usize| -> Result<Vec<Vec<Complex<T>>>> {
        let mut gram = vec![vec![creal(T::zero()); n_max + 1]; n_max + 1];
        for (x, w) in crate::quadrature::composite_cosine_rule(T::zero(), params.length, panels, 16) {
            let vals = states.iter().map(|s| s.eval(x)).collect::<Result<Vec<_>>>()?;
            for (i, vi) in vals.iter().enumerate() {
                for (j, vj) in vals.iter().enumerate() {
                    gram[i][j] += vi.conj() * vj * w;
                }
            }
        }
        Ok(gram)
    };
    let mut panels = 8;
    let mut prev = build(panels)?;
    loop {
        panels *= 2;
        let next = build(panels)?;
        let diff = prev
            .iter()
            .flatten()
            .zip(next.iter().flatten())
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()));
        if diff <= tol || panels >= 1024 {
            return if diff <= tol {
                Ok((next, diff))
            } else {
                Err(Error::SubdivisionLimit {
                    panels,
                    value: T::of(n_max + 1).as_f64(),
                    err: diff.as_f64(),
                })
            };
        }
        prev = next;
    }
}

/// Jet of φ_n^{(m)} built literally as
/// (2M)^{−m/2} Π_{k<m}(E_{n+m} − E_k)^{−1/2} A_{m−1}…A_0 φ_{n+m}^{(0)}.
///
/// Loses relative accuracy close to the walls, where the factors cancel.
pub fn hierarchy_chain_jet<T: Real>(params: &ModelParams<T>, index: LevelIndex, x: T, order: usize) -> Result<Jet<T>> {
    params.validate()?;
    check_open(params, x)?;
    chain_jet(params, index, &BaseState::new(params, index.base_level())?, x, order)
}

fn chain_jet<T: Real>(
    params: &ModelParams<T>,
    index: LevelIndex,
    top: &BaseState<T>,
    x: T,
    order: usize,
) -> Result<Jet<T>> {
    let base = top.jet(x, order + index.m)?;
    if index.m == 0 {
        return Ok(base);
    }
    let e = base_energy(params, top.n);
    let mut ln_norm = T::of(index.m) * params.two_mass().ln();
    for k in 0..index.m {
        ln_norm += (e - base_energy(params, k)).ln();
    }
    let out = Ladder::new(*params).apply_word_jet(&b_chain(index.m - 1), &base, x);
    Ok(out.scale_real((-T::lit(0.5) * ln_norm).exp()))
}

/// Base-level φ_n^{(0)}(x) on [0, L].
pub fn eval_eigenfunction<T: Real>(params: &ModelParams<T>, n: usize, x: T) -> Result<Complex<T>> {
    EigenFunction::new(params, LevelIndex::new(0, n)?)?.eval(x)
}

/// dφ_n^{(0)}/dx on the open interval (0, L).
pub fn eval_eigenfunction_derivative<T: Real>(params: &ModelParams<T>, n: usize, x: T) -> Result<Complex<T>> {
    EigenFunction::new(params, LevelIndex::new(0, n)?)?.derivative(x)
}

/// φ_n^{(m)}(x) through the ladder chain acting on φ_{n+m}^{(0)}.
pub fn hierarchy_eigenfunction<T: Real>(params: &ModelParams<T>, index: LevelIndex, x: T) -> Result<Complex<T>> {
    EigenFunction::new(params, index)?.eval(x)
}

/// φ_n^{(1)} from its explicit closed form
///
/// K_{n+1} / √(2M(E_{n+1} − E_0)) · s^ν e^{−βπx/(L(ν+n+2))}
/// · [√(2M(n+1)²Δ̄/(2ν+n+3)) cos(θ − α(n)) Q_{n+1} + iπħ(n+2ν+2)/(2L) Q⁺_n],
/// with Δ̄ = (E_{n+1} − E_0)/(n+1) and the phase i^{n+1} of φ_{n+1}^{(0)}.
pub fn first_level_closed_form<T: Real>(params: &ModelParams<T>, n: usize, x: T) -> Result<Complex<T>> {
    params.validate()?;
    LevelIndex::new(1, n)?;
    check_closed(params, x)?;
    if x == T::zero() || x == params.length {
        return Ok(creal(T::zero()));
    }
    let nu = params.nu;
    let gap = base_energy(params, n + 1) - base_energy(params, 0);
    let two_m = params.two_mass();
    let mean_gap = gap / T::of(n + 1);
    let nn = T::of(n + 1);
    let cos_amp = (two_m * nn * nn * mean_gap / (T::lit(2.0) * nu + T::of(n + 3))).sqrt();
    let sin_amp = params.momentum_unit() * (T::of(n + 2) + T::lit(2.0) * nu) / T::lit(2.0);

    let jp = jacobi_params(params, n + 1);
    let d = jacobi_coefficients(&jp);
    let d_raised = jacobi_coefficients(&jp.raised());
    let (s, c) = trig::sin_cos(params, x);
    let theta = params.wavenumber() * x;
    let alpha = phase_alpha(params, n);
    let bracket =
        trig_poly(&d, s, c) * (cos_amp * (theta - alpha).cos()) + ci::<T>() * trig_poly(&d_raised, s, c) * sin_amp;
    let norm = normalization_k(params, n + 1)?;
    let p = nu + T::of(n + 2);
    let ln_env = norm.log_k - params.beta * params.wavenumber() * x / p - T::lit(0.5) * (two_m * gap).ln();
    Ok(bracket * i_pow::<T>(n + 1) * (s.powf(nu) * ln_env.exp()))
}
