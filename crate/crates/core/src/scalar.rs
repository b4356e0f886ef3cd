//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the library is generic over (`f32` or `f64`).
///
/// Accuracy targets quoted throughout the docs assume `f64`; `f32`
/// instantiations work but carry single-precision error levels.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a small integer (index, degree) into this scalar type.
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("index representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate scalar.
pub type Cplx<T> = Complex<T>;

pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

pub(crate) fn creal<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// The imaginary unit.
pub(crate) fn ci<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

pub(crate) fn is_finite_c<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Neumaier-compensated summation of complex terms.
///
/// Terms are accumulated in descending order of modulus.
pub(crate) fn compensated_sum<T: Real>(terms: &mut [Complex<T>]) -> Complex<T> {
    terms.sort_by(|a, b| {
        b.norm_sqr()
            .partial_cmp(&a.norm_sqr())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let (mut s_re, mut c_re) = (T::zero(), T::zero());
    let (mut s_im, mut c_im) = (T::zero(), T::zero());
    for t in terms.iter() {
        neumaier_step(&mut s_re, &mut c_re, t.re);
        neumaier_step(&mut s_im, &mut c_im, t.im);
    }
    Complex::new(s_re + c_re, s_im + c_im)
}

fn neumaier_step<T: Real>(sum: &mut T, comp: &mut T, x: T) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}
