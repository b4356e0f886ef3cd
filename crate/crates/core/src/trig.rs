//! sin(πx/L) and cos(πx/L) evaluated against the nearer wall, so that both
//! stay accurate to full relative precision as x → 0 and x → L.

use crate::jet::Jet;
use crate::scalar::{creal, Real};
use crate::spectrum::ModelParams;

pub(crate) fn sin_cos<T: Real>(params: &ModelParams<T>, x: T) -> (T, T) {
    let l = params.length;
    if x <= l * T::lit(0.5) {
        (params.wavenumber() * x).sin_cos()
    } else {
        let (s, c) = (params.wavenumber() * (l - x)).sin_cos();
        (s, -c)
    }
}

/// Jets of sin(πx/L) and cos(πx/L) at x.
pub(crate) fn sin_cos_jet<T: Real>(params: &ModelParams<T>, x: T, order: usize) -> (Jet<T>, Jet<T>) {
    let l = params.length;
    let k = params.wavenumber();
    if x <= l * T::lit(0.5) {
        Jet::variable(x, order).scale_real(k).sin_cos()
    } else {
        let mut coeffs = vec![creal(T::zero()); order + 1];
        coeffs[0] = creal(k * (l - x));
        if order > 0 {
            coeffs[1] = creal(-k);
        }
        let (s, c) = Jet::from_coeffs(coeffs).sin_cos();
        (s, -&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflected_values_match_direct() {
        let p = ModelParams::dimensionless(1.0, 0.0).unwrap();
        for &x in &[0.1, 0.5, 0.73, 0.999] {
            let (s, c) = sin_cos(&p, x);
            let (sd, cd) = (std::f64::consts::PI * x).sin_cos();
            assert!((s - sd).abs() < 1e-15 && (c - cd).abs() < 1e-15);
            let (sj, cj) = sin_cos_jet(&p, x, 3);
            assert!((sj.value().re - sd).abs() < 1e-15);
            let pi = std::f64::consts::PI;
            assert!((sj.derivative(1).re - pi * cd).abs() < 1e-13);
            assert!((cj.derivative(2).re + pi * pi * cd).abs() < 1e-12);
        }
        // near the right wall the reflected form keeps relative accuracy
        let (s, _) = sin_cos(&p, 1.0 - 1e-12);
        assert!((s / (std::f64::consts::PI * 1e-12) - 1.0).abs() < 1e-3);
    }
}
