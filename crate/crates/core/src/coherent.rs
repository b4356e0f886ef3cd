//! Coherent states of the first-order operator A_m,
//! η_{q,p}(x) = R_m(q) e^{(W_m(q)+ip)x/ħ} φ_0^{(m)}(x), and the resolution
//! of the identity they generate with the measure dq dp/(2πħ).
//!
//! φ_0^{(m)} is the ground state of the shifted problem ν → ν+m, so every
//! integral over x reduces to the master integral
//! ∫₀¹ sin^{2δ+2}(πx) e^{zx} dx.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::operators::{Operand, WallJet};
use crate::quadrature::{composite_cosine_rule, integrate_real_line, QuadratureConfig};
use crate::scalar::{ci, cplx, creal, Real};
use crate::specfun::{ln_abs_gamma_decayed, ln_gamma_real, log_gamma, pochhammer, pochhammer_pair};
use crate::spectrum::{LevelIndex, ModelParams};
use crate::trig;
use crate::wavefn::{normalization_k, EigenFunction};

/// Phase-space label (q, p) with q strictly inside (0, L).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T> {
    pub q: T,
    pub p: T,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(params: &ModelParams<T>, q: T, p: T) -> Result<Self> {
        if !(q > T::zero() && q < params.length) || !p.is_finite() {
            return Err(Error::Domain {
                value: q.as_f64(),
                domain: "phase point with q in (0, L) and finite p",
            });
        }
        Ok(Self { q, p })
    }
}

/// ln of ∫₀¹ sin^{2δ+2}(πx) e^{zx} dx for real z.
///
/// e^{z/2} and |Γ(δ+2+iz/2π)|⁻² both grow like e^{|z|/2}; they are combined
/// analytically so large |z| keeps full absolute accuracy.
fn ln_master_real<T: Real>(delta: T, z: T) -> Result<T> {
    Ok(ln_master_bounded(delta, z)? + z.max(T::zero()))
}

/// ln M(δ, z) − max(z, 0), which only grows logarithmically in |z|.
fn ln_master_bounded<T: Real>(delta: T, z: T) -> Result<T> {
    Ok(ln_gamma_real(T::lit(2.0) * delta + T::lit(3.0))?
        - (delta + T::one()) * T::lit(4.0).ln()
        - T::lit(2.0) * ln_abs_gamma_decayed(delta + T::lit(2.0), z / T::TAU())?)
}

/// ∫₀¹ sin^{2δ+2}(πx) e^{zx} dx
/// = Γ(2δ+3) e^{z/2} / (4^{δ+1} Γ(δ+2+iz/2π) Γ(δ+2−iz/2π)), δ > −3/2.
///
/// Returns zero where either Gamma factor in the denominator has a pole.
pub fn master_integral<T: Real>(delta: T, z: Complex<T>) -> Result<Complex<T>> {
    if !(delta > T::lit(-1.5)) {
        return Err(Error::Domain {
            value: delta.as_f64(),
            domain: "δ > −3/2",
        });
    }
    let a = creal(delta + T::lit(2.0));
    let w = ci::<T>() * z / T::TAU();
    let g = |arg: Complex<T>| match log_gamma(arg) {
        Ok(v) => Ok(Some(v)),
        Err(Error::Pole { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let (Some(g1), Some(g2)) = (g(a + w)?, g(a - w)?) else {
        return Ok(creal(T::zero()));
    };
    let ln = creal(ln_gamma_real(T::lit(2.0) * delta + T::lit(3.0))? - (delta + T::one()) * T::lit(4.0).ln())
        + z / T::lit(2.0)
        - g1
        - g2;
    Ok(ln.exp())
}

/// κ = ν+m+1 and u = cot(πq/L) for the level-m ground state.
fn kappa_u<T: Real>(params: &ModelParams<T>, m: usize, q: T) -> (T, T) {
    let (s, c) = trig::sin_cos(params, q);
    (params.nu + T::of(m + 1), c / s)
}

/// W_m(q) = −(πħ/L)(κ cot(πq/L) − β/κ).
fn superpotential_at<T: Real>(params: &ModelParams<T>, m: usize, q: T) -> T {
    let (kappa, u) = kappa_u(params, m, q);
    -params.momentum_unit() * (kappa * u - params.beta / kappa)
}

fn check_q<T: Real>(params: &ModelParams<T>, q: T) -> Result<()> {
    PhasePoint::new(params, q, T::zero()).map(|_| ())
}

/// ln R_m(q), with R_m(q)^{−2} = ∫₀^L e^{2W_m(q)x/ħ} |φ_0^{(m)}(x)|² dx.
///
/// The weight combines with the ground-state exponential into
/// e^{−2πκ cot(πq/L) x/L}, so R_m(q)^{−2} = M(ν+m, −2πκu) / M(ν+m, −2πβ/κ)
/// with M the master integral.
pub fn cs_normalization<T: Real>(params: &ModelParams<T>, m: usize, q: T) -> Result<T> {
    params.validate()?;
    check_q(params, q)?;
    let (kappa, u) = kappa_u(params, m, q);
    let delta = params.nu + T::of(m);
    let at_q = ln_master_real(delta, -T::TAU() * kappa * u)?;
    let at_beta = ln_master_real(delta, -T::TAU() * params.beta / kappa)?;
    Ok(T::lit(0.5) * (at_beta - at_q))
}

/// ln R_m(q) from the Pochhammer double sum, which normalizes
/// K_m s^{ν+m+1} P_m(i cot) against e^{2W_{m,ν,0}(q)x/ħ} rather than the
/// level-m ground state. Agrees with [`cs_normalization`] only for m = 0.
pub fn cs_normalization_double_sum<T: Real>(params: &ModelParams<T>, m: usize, q: T) -> Result<T> {
    params.validate()?;
    check_q(params, q)?;
    let (kappa, u) = kappa_u(params, m, q);
    let nu = params.nu;
    let bk = params.beta / kappa;
    let mm = T::of(m);
    let top = (creal(-mm), creal(-mm - T::lit(2.0) * nu - T::one()));
    let lower_k = cplx(-mm - nu, -bk);
    let lower_s = cplx(-mm - nu, bk);
    let mut left = Vec::with_capacity(m + 1);
    let mut right = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let fact = T::of((1..=j).product::<usize>());
        let c = pochhammer_pair(top.0, top.1, j);
        let gk = log_gamma(cplx(mm + nu + T::lit(2.0) - T::of(j), kappa * u))?;
        let gs = log_gamma(cplx(mm + nu + T::lit(2.0) - T::of(j), -kappa * u))?;
        left.push(c / (pochhammer(lower_k, j) * fact) * (-gk).exp());
        right.push(c / (pochhammer(lower_s, j) * fact) * (-gs).exp());
    }
    let mut sum = creal(T::zero());
    for (k, lk) in left.iter().enumerate() {
        for (s, rs) in right.iter().enumerate() {
            let g = ln_gamma_real(T::lit(2.0) * (mm + nu) - T::of(s + k) + T::lit(3.0))?.exp();
            sum += lk * rs * g;
        }
    }
    if !(sum.re > T::zero()) {
        return Err(Error::LossOfSignificance {
            what: "coherent-state normalization double sum",
            digits: 0.0,
        });
    }
    let k = normalization_k(params, m)?;
    let poch = pochhammer(cplx(-nu - mm, bk), m).norm();
    let ln_fact = ln_gamma_real(mm + T::one())?;
    let ln_inv_r2 = params.length.ln() + T::lit(2.0) * k.log_k
        - T::lit(2.0) * (kappa * T::lit(2.0).ln() + ln_fact)
        - T::PI() * kappa * u
        + T::lit(2.0) * poch.ln()
        + sum.re.ln();
    Ok(-T::lit(0.5) * ln_inv_r2)
}

/// Normalized coherent state |η_{q,p}⟩ of A_m.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState<T> {
    pub params: ModelParams<T>,
    pub m: usize,
    pub label: PhasePoint<T>,
    pub log_r: T,
    ground: EigenFunction<T>,
}

impl<T: Real> CoherentState<T> {
    pub fn new(params: &ModelParams<T>, m: usize, label: PhasePoint<T>) -> Result<Self> {
        let label = PhasePoint::new(params, label.q, label.p)?;
        Ok(Self {
            params: *params,
            m,
            label,
            log_r: cs_normalization(params, m, label.q)?,
            ground: EigenFunction::new(params, LevelIndex::new(m, 0)?)?,
        })
    }

    /// The A_m eigenvalue z = W_m(q) + ip.
    pub fn eigenvalue(&self) -> Complex<T> {
        cplx(superpotential_at(&self.params, self.m, self.label.q), self.label.p)
    }

    /// True when both states are built on the same Hamiltonian.
    pub fn same_hamiltonian(&self, other: &Self) -> bool {
        self.m == other.m && self.params == other.params
    }

    /// η(x) on [0, L]; exactly zero at the walls.
    pub fn eval(&self, x: T) -> Result<Complex<T>> {
        let l = self.params.length;
        if !(x >= T::zero() && x <= l) {
            return Err(Error::Domain {
                value: x.as_f64(),
                domain: "closed interval [0, L]",
            });
        }
        if x == T::zero() || x == l {
            return Ok(creal(T::zero()));
        }
        Ok(self.jet(x, 0)?.value())
    }

    fn ground_sign(&self) -> Result<T> {
        Ok(self.ground.value(self.params.length * T::lit(0.5))?.re.signum())
    }

    /// log R + z x/ħ as a jet in x.
    fn exponent(&self, x: T, order: usize) -> Jet<T> {
        let z = self.eigenvalue() / self.params.hbar;
        let mut lin = vec![creal(T::zero()); order + 1];
        lin[0] = z * x + self.log_r;
        if order > 0 {
            lin[1] = z;
        }
        Jet::from_coeffs(lin)
    }
}

impl<T: Real> Operand<T> for CoherentState<T> {
    fn jet(&self, x: T, order: usize) -> Result<Jet<T>> {
        let w = self.wall_jet(x, order)?;
        Ok(w.to_jet(&self.params, x))
    }

    fn wall_jet(&self, x: T, order: usize) -> Result<WallJet<T>> {
        let g = self.ground.wall_jet(x, order)?;
        Ok(WallJet {
            power: g.power,
            rest: &g.rest * &self.exponent(x, order).exp(),
        })
    }
}

/// η(x) for a coherent state.
pub fn eval_cs<T: Real>(state: &CoherentState<T>, x: T) -> Result<Complex<T>> {
    state.eval(x)
}

/// ⟨bra|ket⟩ = ∫₀^L conj(η_bra) η_ket dx in closed form.
///
/// With δ = ν̄ + m (ν̄ the mean of the two ν) and
/// z = L[(W + W′)/ħ − b − b′ + i(p − p′)/ħ], the overlap is
/// σσ′ R R′ M(δ, z) / √(M(ν+m, −2πβ/κ) M(ν′+m, −2πβ′/κ′)),
/// where b = βπ/(Lκ) is the ground-state decay and σ its sign.
/// States over different (ν, β) are allowed; see
/// [`CoherentState::same_hamiltonian`].
pub fn cs_overlap<T: Real>(bra: &CoherentState<T>, ket: &CoherentState<T>) -> Result<Complex<T>> {
    if bra.m != ket.m {
        return Err(Error::Incompatible("hierarchy orders differ"));
    }
    if !bra.params.same_units(&ket.params) {
        return Err(Error::Incompatible("ħ, L or M differ"));
    }
    let m = ket.m;
    let l = ket.params.length;
    let hbar = ket.params.hbar;
    let decay = |s: &CoherentState<T>| {
        let kappa = s.params.nu + T::of(m + 1);
        (kappa, s.params.beta * T::PI() / (l * kappa))
    };
    let (kb, bb) = decay(bra);
    let (kk, bk) = decay(ket);
    let wsum = (bra.eigenvalue().re + ket.eigenvalue().re) / hbar - bb - bk;
    let z = cplx(wsum, (ket.label.p - bra.label.p) / hbar) * l;
    let delta = (bra.params.nu + ket.params.nu) / T::lit(2.0) + T::of(m);
    let mb = ln_master_real(bra.params.nu + T::of(m), -T::TAU() * bra.params.beta / kb)?;
    let mk = ln_master_real(ket.params.nu + T::of(m), -T::TAU() * ket.params.beta / kk)?;
    let scale = (bra.log_r + ket.log_r - T::lit(0.5) * (mb + mk)).exp() * bra.ground_sign()? * ket.ground_sign()?;
    Ok(master_integral(delta, z)? * scale)
}

/// G(x) = |φ_0^{(m)}(x)|² ∫₀^L dq R_m(q)² e^{2W_m(q)x/ħ}.
///
/// The p-integral has been done by Plancherel with the measure dp/(2πħ),
/// so G ≡ 1 expresses the resolution of the identity. The q-integral runs
/// over u = cot(πq/L) ∈ ℝ with dq = (L/π) du/(1+u²); the integrand decays
/// like exp(−2πκ min(ξ, 1−ξ)|u|), ξ = x/L.
pub fn resolution_kernel<T: Real>(params: &ModelParams<T>, m: usize, x: T) -> Result<T> {
    resolution_kernel_with(
        params,
        m,
        x,
        &QuadratureConfig::with_tolerances(T::lit(1e-14), T::lit(1e-10)),
    )
}

pub fn resolution_kernel_with<T: Real>(
    params: &ModelParams<T>,
    m: usize,
    x: T,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    params.validate()?;
    check_q(params, x)?;
    let ground = EigenFunction::new(params, LevelIndex::new(m, 0)?)?;
    let density = ground.value(x)?.norm_sqr();
    let kappa = params.nu + T::of(m + 1);
    let delta = params.nu + T::of(m);
    let xi = x / params.length;
    // distance to the wall the integrand runs towards, exact near x = L
    let xi_right = (params.length - x) / params.length;
    let at_beta = ln_master_real(delta, -T::TAU() * params.beta / kappa)? + T::TAU() * xi * params.beta / kappa;
    let jac = params.length / T::PI();
    let integrand = |u: T| -> Result<Complex<T>> {
        // the linear parts of ln M and of the weight e^{−2πξκu} combine to
        // −2πκ|u| times ξ (u > 0) or 1 − ξ (u < 0)
        let side = if u > T::zero() { xi } else { xi_right };
        let exponent = at_beta - ln_master_bounded(delta, -T::TAU() * kappa * u)? - T::TAU() * kappa * u.abs() * side;
        Ok(creal(jac / (T::one() + u * u) * exponent.exp()))
    };
    let decay = T::one() / (T::TAU() * kappa * xi.min(T::one() - xi));
    let q_integral = integrate_real_line(integrand, decay, cfg)?.value.re;
    Ok(density * q_integral)
}

/// max |G(x_i) − 1| and the mean offset over a midpoint grid of `points`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionReport<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    pub max_deviation: T,
    pub mean_offset: T,
}

pub fn resolution_report<T: Real>(params: &ModelParams<T>, m: usize, points: usize) -> Result<ResolutionReport<T>> {
    let grid = crate::operators::interior_grid(params, points);
    let values = grid
        .par_iter()
        .map(|&x| resolution_kernel(params, m, x))
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = values.iter().fold(T::zero(), |acc, g| acc.max((*g - T::one()).abs()));
    let mean_offset = values.iter().fold(T::zero(), |acc, g| acc + (*g - T::one())) / T::of(points.max(1));
    Ok(ResolutionReport {
        grid,
        values,
        max_deviation,
        mean_offset,
    })
}

/// Gram matrix ∫₀^L conj(φ_i^{(m)}) φ_j^{(m)} G(x) dx for i, j ≤ `max_index`.
///
/// G is sampled once on a composite Gauss-Legendre rule of `panels` panels
/// in θ with x = L(1 − cos θ)/2, which clusters nodes at the walls where
/// the states vanish like sin^{ν+m+1}.
pub fn resolution_gram<T: Real>(
    params: &ModelParams<T>,
    m: usize,
    max_index: usize,
    panels: usize,
) -> Result<Vec<Vec<Complex<T>>>> {
    let nodes = composite_cosine_rule(T::zero(), params.length, panels, 16);
    let states = (0..=max_index)
        .map(|n| EigenFunction::new(params, LevelIndex::new(m, n)?))
        .collect::<Result<Vec<_>>>()?;
    let samples = nodes
        .par_iter()
        .map(|&(x, w)| {
            let g = resolution_kernel(params, m, x)?;
            let vals = states.iter().map(|s| s.value(x)).collect::<Result<Vec<_>>>()?;
            Ok((w * g, vals))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut gram = vec![vec![creal(T::zero()); max_index + 1]; max_index + 1];
    for (w, vals) in &samples {
        for (i, vi) in vals.iter().enumerate() {
            for (j, vj) in vals.iter().enumerate() {
                gram[i][j] += vi.conj() * vj * *w;
            }
        }
    }
    Ok(gram)
}

/// ∫_ℝ e^{−itx} / (2π cosh^{2δ+2} x) dx = 4^δ |Γ(δ+1+it/2)|² / (π Γ(2δ+2)), δ > −1.
pub fn cosh_fourier<T: Real>(delta: T, t: T) -> Result<T> {
    if !(delta > -T::one()) {
        return Err(Error::Domain {
            value: delta.as_f64(),
            domain: "δ > −1",
        });
    }
    let g = log_gamma(cplx(delta + T::one(), t / T::lit(2.0)))?.re;
    Ok(
        (delta * T::lit(4.0).ln() + T::lit(2.0) * g - ln_gamma_real(T::lit(2.0) * delta + T::lit(2.0))?).exp()
            / T::PI(),
    )
}

/// The same transform by direct quadrature over ℝ with exponential tail bounds.
pub fn cosh_fourier_numeric<T: Real>(delta: T, t: T, cfg: &QuadratureConfig<T>) -> Result<T> {
    if !(delta > -T::one()) {
        return Err(Error::Domain {
            value: delta.as_f64(),
            domain: "δ > −1",
        });
    }
    let power = T::lit(2.0) * delta + T::lit(2.0);
    let f = |x: T| {
        // ln cosh x = |x| + ln((1 + e^{−2|x|})/2)
        let a = x.abs();
        let ln_cosh = a + ((T::one() + (-T::lit(2.0) * a).exp()) / T::lit(2.0)).ln();
        Ok(creal((t * x).cos() * (-power * ln_cosh).exp() / T::TAU()))
    };
    Ok(integrate_real_line(f, T::one() / power, cfg)?.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{Factor, Ladder};
    use crate::quadrature::integrate_interval;

    fn p(nu: f64, beta: f64) -> ModelParams<f64> {
        ModelParams::dimensionless(nu, beta).unwrap()
    }

    fn cs(q: &ModelParams<f64>, m: usize, x: f64, mom: f64) -> CoherentState<f64> {
        CoherentState::new(q, m, PhasePoint::new(q, x, mom).unwrap()).unwrap()
    }

    fn quad_overlap(a: &CoherentState<f64>, b: &CoherentState<f64>) -> Complex<f64> {
        let cfg = QuadratureConfig::with_tolerances(1e-14, 1e-12);
        integrate_interval(|x| Ok(a.eval(x)?.conj() * b.eval(x)?), 0.0, 1.0, &cfg)
            .unwrap()
            .value
    }

    #[test]
    fn master_integral_trivial_values() {
        assert!((master_integral(0.0, creal(0.0)).unwrap() - 0.5).norm() < 1e-15);
        assert!((master_integral(1.0, creal(0.0)).unwrap() - 0.375).norm() < 1e-15);
        assert!(master_integral(-1.5, creal(0.0)).is_err());
        // Γ(δ+2 − iz/2π) has a pole at z = −2πi(δ+2)
        let pole = master_integral(0.5, cplx(0.0, -std::f64::consts::TAU * 2.5)).unwrap();
        assert_eq!(pole, creal(0.0));
    }

    #[test]
    fn ground_normalization_is_one_at_the_centre() {
        assert!(cs_normalization(&p(0.0, 0.0), 0, 0.5).unwrap().abs() < 1e-15);
    }

    #[test]
    fn normalization_matches_quadrature_and_double_sum_only_at_m_zero() {
        for &(nu, beta, m, q) in &[(1.0, 2.0, 0, 0.3), (0.5, 1.0, 1, 0.6), (1.0, 0.0, 2, 0.2)] {
            let pp = p(nu, beta);
            let state = cs(&pp, m, q, 0.0);
            let norm = quad_overlap(&state, &state);
            assert!((norm - 1.0).norm() < 1e-10, "m={m}: {norm}");
            let double_sum = cs_normalization_double_sum(&pp, m, q).unwrap();
            let closed = state.log_r;
            if m == 0 {
                assert!((double_sum - closed).abs() < 1e-12);
            } else {
                assert!((double_sum - closed).abs() > 1e-3);
            }
        }
    }

    #[test]
    fn coherent_state_is_an_a_eigenvector() {
        let pp = p(1.0, 2.0);
        for m in 0..3 {
            let state = cs(&pp, m, 0.35, 2.0 * std::f64::consts::PI);
            let z = state.eigenvalue();
            let ladder = Ladder::new(pp);
            for &x in &[0.1, 0.5, 0.9] {
                let a = ladder.apply_word(&[Factor::A(m)], &state, x, 0).unwrap().value();
                let v = state.value(x).unwrap();
                assert!((a - z * v).norm() < 1e-10 * (z * v).norm().max(1e-300), "m={m} x={x}");
            }
            assert_eq!(state.eval(0.0).unwrap(), creal(0.0));
        }
    }

    #[test]
    fn overlap_matches_quadrature_and_is_hermitian() {
        let pa = p(0.5, 1.0);
        let pb = p(1.0, 2.0);
        let pairs = [
            (cs(&pa, 1, 0.3, 1.0), cs(&pa, 1, 0.55, -2.0)),
            (cs(&pa, 0, 0.2, 0.0), cs(&pb, 0, 0.7, 3.0)),
            (cs(&pb, 2, 0.5, 6.0), cs(&pb, 2, 0.5, 6.0)),
        ];
        for (a, b) in &pairs {
            let closed = cs_overlap(a, b).unwrap();
            let numeric = quad_overlap(a, b);
            assert!(
                (closed - numeric).norm() < 1e-10 * numeric.norm().max(1e-3),
                "{closed} {numeric}"
            );
            let back = cs_overlap(b, a).unwrap();
            assert!((closed - back.conj()).norm() < 1e-12);
            assert!(closed.norm() <= 1.0 + 1e-10);
        }
        let same = cs_overlap(&pairs[2].0, &pairs[2].1).unwrap();
        assert!((same - 1.0).norm() < 1e-12);
        let other = cs(&pa, 2, 0.5, 0.0);
        assert!(matches!(cs_overlap(&pairs[0].0, &other), Err(Error::Incompatible(_))));
    }

    #[test]
    fn resolution_kernel_is_one() {
        for &(nu, beta, m) in &[(0.0, 0.0, 0), (1.0, 2.0, 1), (0.5, 3.0, 0)] {
            let pp = p(nu, beta);
            for &x in &[0.05, 0.3, 0.5, 0.77, 0.97] {
                let g = resolution_kernel(&pp, m, x).unwrap();
                assert!((g - 1.0).abs() < 1e-8, "ν={nu} β={beta} m={m} x={x}: {g}");
            }
        }
    }

    #[test]
    fn cosh_fourier_pair_holds_numerically() {
        let cfg = QuadratureConfig::with_tolerances(1e-15, 1e-12);
        for &(delta, t) in &[(0.0, 0.0), (0.0, 1.7), (0.5, 3.0), (2.0, -4.5)] {
            let closed: f64 = cosh_fourier(delta, t).unwrap();
            let numeric = cosh_fourier_numeric(delta, t, &cfg).unwrap();
            assert!(
                (closed - numeric).abs() < 1e-10 * closed.abs(),
                "δ={delta} t={t}: {closed} {numeric}"
            );
        }
        // δ = 0, t = 0: ∫ sech² / 2π = 1/π
        assert!((cosh_fourier(0.0, 0.0).unwrap() - 1.0 / std::f64::consts::PI).abs() < 1e-15);
    }
}
