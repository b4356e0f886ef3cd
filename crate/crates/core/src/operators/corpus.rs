//! Test functions for the operator identities: eigenfunctions, smooth
//! compactly supported bumps, and a finite-difference wrapper for operands
//! that only provide values.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Operand;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quadrature::derivative;
use crate::scalar::{ci, cplx, creal, Real};
use crate::spectrum::{LevelIndex, ModelParams};
use crate::wavefn::EigenFunction;

/// Seed of the bump corpus.
pub const BUMP_SEED: u64 = 0x5eed_0b0b;

/// Highest derivative order the finite-difference operand will produce.
pub const MAX_FD_ORDER: usize = 4;

/// a e^{ikx} exp(−1/(1 − t²)) with t = (x − c)/w, zero for |t| ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump<T> {
    pub center: T,
    pub width: T,
    pub wavenumber: T,
    pub amplitude: Complex<T>,
}

impl<T: Real> Operand<T> for Bump<T> {
    fn jet(&self, x: T, order: usize) -> Result<Jet<T>> {
        let t0 = (x - self.center) / self.width;
        if t0.abs() >= T::one() {
            return Ok(Jet::zero(order));
        }
        let mut t = vec![creal(T::zero()); order + 1];
        t[0] = creal(t0);
        if order > 0 {
            t[1] = creal(T::one() / self.width);
        }
        let t = Jet::from_coeffs(t);
        let u = (&t * &t).scale_real(-T::one()).add_scalar(creal(T::one()));
        let one = Jet::constant(creal(T::one()), order);
        let envelope = one.div(&u).scale_real(-T::one()).exp();
        let mut phase = vec![creal(T::zero()); order + 1];
        phase[0] = ci::<T>() * self.wavenumber * x;
        if order > 0 {
            phase[1] = ci::<T>() * self.wavenumber;
        }
        Ok((&envelope * &Jet::from_coeffs(phase).exp()).scale(self.amplitude))
    }
}

/// Four bumps with centers in [0.3, 0.7]L, widths in [0.1, 0.25]L, wave
/// numbers in [−3, 3]π/L and unit-modulus amplitudes, from a frozen seed.
pub fn bump_corpus<T: Real>(params: &ModelParams<T>) -> Vec<Bump<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(BUMP_SEED);
    let l = params.length;
    (0..4)
        .map(|_| {
            let center: f64 = rng.gen_range(0.3..0.7);
            let width: f64 = rng.gen_range(0.1..0.25);
            let k: f64 = rng.gen_range(-3.0..3.0);
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            Bump {
                center: l * T::lit(center),
                width: l * T::lit(width),
                wavenumber: params.wavenumber() * T::lit(k),
                amplitude: cplx(T::lit(phase.cos()), T::lit(phase.sin())),
            }
        })
        .collect()
}

/// The first eight level-m eigenfunctions followed by the bump corpus.
pub fn test_corpus<T: Real>(params: &ModelParams<T>, m: usize) -> Result<Vec<Box<dyn Operand<T> + Send>>> {
    let mut out: Vec<Box<dyn Operand<T> + Send>> = Vec::with_capacity(12);
    for n in 0..8 {
        out.push(Box::new(EigenFunction::new(params, LevelIndex::new(m, n)?)?));
    }
    for b in bump_corpus(params) {
        out.push(Box::new(b));
    }
    Ok(out)
}

/// Jets of a value-only function from nested Richardson differences.
///
/// Orders above [`MAX_FD_ORDER`] are refused: the noise of nested
/// differencing grows like h^{−k}.
pub struct FiniteDifferenceOperand<F> {
    f: F,
    step: f64,
}

impl<F> FiniteDifferenceOperand<F> {
    pub fn new(f: F, step: f64) -> Self {
        Self { f, step }
    }
}

impl<T, F> Operand<T> for FiniteDifferenceOperand<F>
where
    T: Real,
    F: Fn(T) -> Complex<T> + Sync,
{
    fn jet(&self, x: T, order: usize) -> Result<Jet<T>> {
        if order > MAX_FD_ORDER {
            return Err(Error::Depth {
                order,
                max: MAX_FD_ORDER,
            });
        }
        let h = T::lit(self.step);
        let f = &self.f;
        let d1 = |y: T| derivative(f, y, 1, h).map(|d| d.value);
        let d2 = |y: T| derivative(f, y, 2, h).map(|d| d.value);
        let mut coeffs = vec![f(x)];
        if order >= 1 {
            coeffs.push(d1(x)?);
        }
        if order >= 2 {
            coeffs.push(d2(x)? / T::lit(2.0));
        }
        // outer differences use a wider step so the inner noise stays small
        let outer = h * T::lit(4.0);
        if order >= 3 {
            let third = nested(&d2, x, 1, outer)?;
            coeffs.push(third / T::lit(6.0));
        }
        if order >= 4 {
            let fourth = nested(&d2, x, 2, outer)?;
            coeffs.push(fourth / T::lit(24.0));
        }
        Ok(Jet::from_coeffs(coeffs))
    }
}

fn nested<T: Real>(inner: &dyn Fn(T) -> Result<Complex<T>>, x: T, order: usize, h: T) -> Result<Complex<T>> {
    let mut failure = None;
    let g = |y: T| match inner(y) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            cplx(T::nan(), T::nan())
        }
    };
    let d = derivative(g, x, order, h);
    match failure {
        Some(e) => Err(e),
        None => Ok(d?.value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ModelParams<f64> {
        ModelParams::dimensionless(1.0, 2.0).unwrap()
    }

    #[test]
    fn bumps_are_reproducible_and_interior() {
        let a = bump_corpus(&p());
        let b = bump_corpus(&p());
        assert_eq!(a, b);
        for bump in &a {
            assert!(bump.center - bump.width > 0.0 && bump.center + bump.width < 1.0);
            assert!((bump.amplitude.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bump_jet_matches_finite_differences() {
        let bump = bump_corpus(&p())[0];
        let x = bump.center + 0.3 * bump.width;
        let jet = bump.jet(x, 2).unwrap();
        let f = |y: f64| bump.value(y).unwrap();
        let d1 = derivative(f, x, 1, 1e-3).unwrap().value;
        let d2 = derivative(f, x, 2, 1e-3).unwrap().value;
        assert!((jet.derivative(1) - d1).norm() < 1e-7 * d1.norm().max(1.0));
        assert!((jet.derivative(2) - d2).norm() < 1e-5 * d2.norm().max(1.0));
        assert_eq!(bump.value(bump.center + bump.width).unwrap(), creal(0.0));
    }

    #[test]
    fn finite_difference_operand_tracks_analytic_jet() {
        let q = p();
        let phi = EigenFunction::new(&q, LevelIndex::new(0, 1).unwrap()).unwrap();
        let fd = FiniteDifferenceOperand::new(|y: f64| phi.value(y).unwrap(), 1e-3);
        let exact = phi.jet(0.4, 4).unwrap();
        let approx = fd.jet(0.4, 4).unwrap();
        for k in 0..=4 {
            let scale = exact.coeff(k).norm().max(1.0);
            assert!((exact.coeff(k) - approx.coeff(k)).norm() < 1e-4 * scale, "k={k}");
        }
        assert!(matches!(fd.jet(0.4, 5), Err(Error::Depth { .. })));
    }
}
