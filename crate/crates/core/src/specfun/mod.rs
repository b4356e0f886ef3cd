//! Complex special functions: log-Gamma, Pochhammer symbols and Jacobi
//! polynomials with complex parameters.

mod jacobi;

pub use jacobi::{
    jacobi_coefficients, jacobi_poly, jacobi_poly_derivative, jacobi_poly_with_cap, jacobi_trig_scaled, JacobiParams,
    DEFAULT_JACOBI_DEGREE_CAP,
};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{ci, cplx, creal, Real};

// Godfrey's coefficients for g = 607/128.
const LANCZOS_G: f64 = 4.742_187_5;
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_140_7e-5,
    3.689_918_265_953_162_4e-6,
];

fn is_pole<T: Real>(z: Complex<T>) -> bool {
    z.im == T::zero() && z.re <= T::zero() && z.re == z.re.round()
}

/// Principal-branch logarithm of Γ(z).
///
/// Lanczos approximation in the right half-plane, reflection formula for
/// `Re z < 1/2`. The imaginary part is reduced to `(-π, π]`, so only
/// `exp(log_gamma(z))` and `Re log_gamma(z)` are branch-independent.
pub fn log_gamma<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    if is_pole(z) {
        return Err(Error::Pole {
            re: z.re.as_f64(),
            im: z.im.as_f64(),
        });
    }
    let raw = if z.re < T::lit(0.5) {
        let pi = T::PI();
        let one = creal(T::one());
        creal(pi.ln()) - ln_sin_pi(z) - lanczos_log_gamma(one - z)
    } else {
        lanczos_log_gamma(z)
    };
    Ok(principal(raw))
}

/// `log_gamma` for real positive arguments, returned as a real.
pub fn ln_gamma_real<T: Real>(x: T) -> Result<T> {
    Ok(log_gamma(creal(x))?.re)
}

/// ln|Γ(a+iy)| + π|y|/2 for a > 0, free of the cancellation between the two
/// terms once |y| is large.
///
/// Beyond |y| = 20 the Stirling series is used with arg(a+iy) written as
/// ±π/2 − atan(a/y), so the linear growth drops out analytically.
pub fn ln_abs_gamma_decayed<T: Real>(a: T, y: T) -> Result<T> {
    if !(a > T::zero()) {
        return Err(Error::Domain {
            value: a.as_f64(),
            domain: "a > 0",
        });
    }
    let half_pi = T::PI() * T::lit(0.5);
    if y.abs() < T::lit(20.0) {
        return Ok(log_gamma(cplx(a, y))?.re + half_pi * y.abs());
    }
    let w = cplx(a, y);
    let half = T::lit(0.5);
    // B_{2k} / (2k(2k−1))
    let stirling = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
    ];
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut power = inv;
    let mut series = creal(T::zero());
    for c in stirling {
        series += power * T::lit(c);
        power *= inv2;
    }
    let ln_sqrt_two_pi = T::lit(0.918_938_533_204_672_8);
    Ok((a - half) * half * (a * a + y * y).ln() + (y * (a / y).atan() - a) + ln_sqrt_two_pi + series.re)
}

fn principal<T: Real>(w: Complex<T>) -> Complex<T> {
    let two_pi = T::TAU();
    let mut im = w.im - two_pi * (w.im / two_pi).round();
    if im <= -T::PI() {
        im += two_pi;
    }
    cplx(w.re, im)
}

fn lanczos_log_gamma<T: Real>(z: Complex<T>) -> Complex<T> {
    let w = z - T::one();
    let half = T::lit(0.5);
    let t = w + T::lit(LANCZOS_G) + half;
    let mut series = creal(T::lit(LANCZOS_COEFFS[0]));
    for (k, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += creal(T::lit(c)) / (w + T::of(k));
    }
    let ln_sqrt_two_pi = T::lit(0.918_938_533_204_672_8);
    creal(ln_sqrt_two_pi) + (w + half) * t.ln() - t + series.ln()
}

/// ln sin(πz), stable for large |Im z|.
fn ln_sin_pi<T: Real>(z: Complex<T>) -> Complex<T> {
    let pi = T::PI();
    let iz = ci::<T>() * z * pi;
    if z.im > T::lit(10.0) {
        // sin(πz) = (e^{-iπz}/(-2i)) (1 - e^{2iπz})
        -iz + (creal(T::one()) - (iz * T::lit(2.0)).exp()).ln() - (cplx(T::zero(), T::lit(-2.0))).ln()
    } else if z.im < T::lit(-10.0) {
        // sin(πz) = (e^{iπz}/(2i)) (1 - e^{-2iπz})
        iz + (creal(T::one()) - (-iz * T::lit(2.0)).exp()).ln() - (cplx(T::zero(), T::lit(2.0))).ln()
    } else {
        (z * pi).sin().ln()
    }
}

/// Rising factorial (a)_k = a(a+1)…(a+k−1), by direct product.
pub fn pochhammer<T: Real>(a: Complex<T>, k: usize) -> Complex<T> {
    (0..k).fold(creal(T::one()), |acc, j| acc * (a + T::of(j)))
}

/// Two-symbol shorthand (a, b)_k = (a)_k (b)_k.
pub fn pochhammer_pair<T: Real>(a: Complex<T>, b: Complex<T>, k: usize) -> Complex<T> {
    pochhammer(a, k) * pochhammer(b, k)
}
