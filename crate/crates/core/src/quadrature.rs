//! Oracle integration and differentiation.
//!
//! Globally adaptive Gauss-Legendre on finite intervals (with an optional
//! cosine endpoint map), truncated real-line integration with tail bounds,
//! and Ridders-extrapolated central differences.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{creal, is_finite_c, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig<T> {
    /// Gauss-Legendre points per panel.
    pub base_rule_order: usize,
    pub max_subdivisions: usize,
    pub abs_tol: T,
    pub rel_tol: T,
    /// Map x = a + (b-a)(1 - cos θ)/2 before integrating.
    pub endpoint_substitution: bool,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            base_rule_order: 15,
            max_subdivisions: 1 << 14,
            abs_tol: T::lit(1e-12),
            rel_tol: T::lit(1e-10),
            endpoint_substitution: true,
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn with_tolerances(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_rule_order < 4 {
            return Err(Error::InvalidParams {
                name: "base_rule_order",
                value: self.base_rule_order as f64,
            });
        }
        if !(self.abs_tol > T::zero()) {
            return Err(Error::InvalidParams {
                name: "abs_tol",
                value: self.abs_tol.as_f64(),
            });
        }
        if !(self.rel_tol > T::zero()) {
            return Err(Error::InvalidParams {
                name: "rel_tol",
                value: self.rel_tol.as_f64(),
            });
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParams {
                name: "max_subdivisions",
                value: 0.0,
            });
        }
        Ok(())
    }

    fn target(&self, value: Complex<T>) -> T {
        self.abs_tol.max(self.rel_tol * value.norm())
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: Complex<T>,
    pub err: T,
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Nodes and weights of a fixed composite Gauss-Legendre rule on [a, b]:
/// `panels` equal panels in θ ∈ [0, π] under x = a + (b − a)(1 − cos θ)/2,
/// `order` points each. The map clusters nodes at both ends, where the
/// eigenfunction integrands vanish algebraically.
pub fn composite_cosine_rule<T: Real>(a: T, b: T, panels: usize, order: usize) -> Vec<(T, T)> {
    let (gx, gw) = gauss_legendre(order);
    let two = T::lit(2.0);
    let h = T::PI() / T::of(panels);
    let mut out = Vec::with_capacity(panels * order);
    for j in 0..panels {
        let mid = h * (T::of(j) + T::lit(0.5));
        for (&t, &w) in gx.iter().zip(&gw) {
            let theta = mid + h / two * T::lit(t);
            let (sh, ch) = (theta / two).sin_cos();
            let x = if theta <= T::PI() / two {
                a + (b - a) * sh * sh
            } else {
                b - (b - a) * ch * ch
            };
            out.push((x, h / two * T::lit(w) * (b - a) * sh * ch));
        }
    }
    out
}

/// Generalized Gauss-Laguerre nodes and log-weights for ∫₀^∞ y^α e^{−y} f(y) dy.
///
/// The n-point rule is exact for polynomials of degree 2n − 1. Weights are
/// returned as logarithms because they span many decades for large α.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || !(alpha > -1.0) {
        return Err(Error::Domain {
            value: alpha,
            domain: "n ≥ 1 and α > −1",
        });
    }
    let nf = n as f64;
    let ln_scale = crate::specfun::ln_gamma_real(alpha + nf)? - crate::specfun::ln_gamma_real(nf)?;
    let mut nodes: Vec<f64> = Vec::with_capacity(n);
    let mut ln_weights = Vec::with_capacity(n);
    let mut z = 0.0;
    for i in 0..n {
        z = match i {
            0 => (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * nf + 1.8 * alpha),
            1 => z + (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai)) * (z - nodes[i - 2])
                    / (1.0 + 0.3 * alpha)
            }
        };
        // Newton on L_n with the roots already found divided out
        let mut converged = false;
        let mut last_step = f64::INFINITY;
        for _ in 0..200 {
            let (p1, p2) = laguerre_pair(n, alpha, z);
            let pp = (nf * p1 - (nf + alpha) * p2) / z;
            let deflate: f64 = nodes.iter().map(|&r| 1.0 / (z - r)).sum();
            let dz = p1 / (pp - p1 * deflate);
            z -= dz;
            if !z.is_finite() {
                break;
            }
            // stop at a few ulps, or once roundoff keeps the step from shrinking
            let step = dz.abs();
            if step <= 4.0 * f64::EPSILON * z.abs() || (step < 1e-11 * z.abs() && step >= last_step) {
                converged = true;
                break;
            }
            last_step = step;
        }
        if !converged || nodes.last().is_some_and(|&r| z <= r) || z <= 0.0 {
            return Err(Error::LossOfSignificance {
                what: "Gauss-Laguerre node iteration",
                digits: 0.0,
            });
        }
        let (p1, p2) = laguerre_pair(n, alpha, z);
        let pp = (nf * p1 - (nf + alpha) * p2) / z;
        nodes.push(z);
        ln_weights.push(ln_scale - (nf * pp * p2).abs().ln());
    }
    Ok((nodes, ln_weights))
}

/// (L_n^{(α)}(z), L_{n−1}^{(α)}(z)) by the three-term recurrence.
fn laguerre_pair(n: usize, alpha: f64, z: f64) -> (f64, f64) {
    let (mut p1, mut p2) = (1.0, 0.0);
    for j in 0..n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = ((2.0 * jf + 1.0 + alpha - z) * p2 - (jf + alpha) * p3) / (jf + 1.0);
    }
    (p1, p2)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct Rule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> Rule<T> {
    fn new(order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        Self {
            nodes: x.into_iter().map(T::lit).collect(),
            weights: w.into_iter().map(T::lit).collect(),
        }
    }

    /// Returns (∫ g, ∫ |g|) over [lo, hi].
    fn apply(&self, g: &mut dyn FnMut(T) -> Result<Complex<T>>, lo: T, hi: T) -> Result<(Complex<T>, T)> {
        let half = (hi - lo) * T::lit(0.5);
        let mid = lo + half;
        let mut sum = creal(T::zero());
        let mut abs = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = g(mid + half * x)?;
            sum += v * w;
            abs += v.norm() * w;
        }
        Ok((sum * half, abs * half.abs()))
    }
}

struct Panel<T> {
    lo: T,
    hi: T,
    left: Complex<T>,
    right: Complex<T>,
    err: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl<T: Real> Eq for Panel<T> {}

impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// ∫_a^b f(x) dx for a complex-valued integrand.
///
/// Each panel is integrated whole and as two halves; the difference is the
/// panel error estimate and the halves are kept as the value. The panel with
/// the largest estimate is bisected until the summed estimate meets
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_interval<T, F>(mut f: F, a: T, b: T, cfg: &QuadratureConfig<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> Result<Complex<T>>,
{
    cfg.validate()?;
    if !(a < b) {
        return Err(Error::Domain {
            value: (b - a).as_f64(),
            domain: "integration interval with a < b",
        });
    }
    let rule = Rule::new(cfg.base_rule_order);
    let eps = T::epsilon();
    let two = T::lit(2.0);

    let mut g = |t: T| -> Result<Complex<T>> {
        let (x, jac) = if cfg.endpoint_substitution {
            // half-angle forms measured from the nearer end keep x off the endpoints
            let (sh, ch) = (t / two).sin_cos();
            let x = if t <= T::PI() / two {
                a + (b - a) * sh * sh
            } else {
                b - (b - a) * ch * ch
            };
            (x, (b - a) * sh * ch)
        } else {
            (t, T::one())
        };
        let v = f(x)?;
        if !is_finite_c(v) {
            return Err(Error::NonFinite { x: x.as_f64() });
        }
        Ok(v * jac)
    };
    let (lo, hi) = if cfg.endpoint_substitution {
        (T::zero(), T::PI())
    } else {
        (a, b)
    };

    let evaluate = |g: &mut dyn FnMut(T) -> Result<Complex<T>>, lo: T, hi: T, whole: Complex<T>| {
        let mid = (lo + hi) / two;
        let (l, la) = rule.apply(g, lo, mid)?;
        let (r, ra) = rule.apply(g, mid, hi)?;
        let err = (whole - (l + r)).norm().max(T::lit(50.0) * eps * (la + ra));
        Ok::<_, Error>(Panel {
            lo,
            hi,
            left: l,
            right: r,
            err,
        })
    };

    let mut heap = BinaryHeap::new();
    let mut total = creal(T::zero());
    let mut err = T::zero();
    let initial = 4;
    let width = (hi - lo) / T::of(initial);
    for i in 0..initial {
        let p_lo = lo + width * T::of(i);
        let p_hi = if i + 1 == initial { hi } else { p_lo + width };
        let (whole, _) = rule.apply(&mut g, p_lo, p_hi)?;
        let panel = evaluate(&mut g, p_lo, p_hi, whole)?;
        total = total + panel.left + panel.right;
        err += panel.err;
        heap.push(panel);
    }

    loop {
        if err <= cfg.target(total) {
            // re-sum to shed drift from the incremental updates
            let mut exact = creal(T::zero());
            let mut exact_err = T::zero();
            for p in heap.iter() {
                exact = exact + p.left + p.right;
                exact_err += p.err;
            }
            if exact_err <= cfg.target(exact) {
                return Ok(Estimate {
                    value: exact,
                    err: exact_err,
                });
            }
            total = exact;
            err = exact_err;
        }
        if heap.len() >= cfg.max_subdivisions {
            return Err(Error::SubdivisionLimit {
                panels: heap.len(),
                value: total.norm().as_f64(),
                err: err.as_f64(),
            });
        }
        let worst = heap.pop().expect("panel set is never empty");
        total = total - worst.left - worst.right;
        err -= worst.err;
        let mid = (worst.lo + worst.hi) / two;
        for panel in [
            evaluate(&mut g, worst.lo, mid, worst.left)?,
            evaluate(&mut g, mid, worst.hi, worst.right)?,
        ] {
            total = total + panel.left + panel.right;
            err += panel.err;
            heap.push(panel);
        }
    }
}

/// ∫_ℝ f(u) du for an integrand decaying at least like exp(-|u|/decay_scale).
///
/// The core interval [-16s, 16s] is widened by doubling on each side until
/// the remaining tail, bounded by |f(edge)|·s and by the geometric trend of
/// the last two chunks, fits in a quarter of the tolerance.
pub fn integrate_real_line<T, F>(mut f: F, decay_scale: T, cfg: &QuadratureConfig<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> Result<Complex<T>>,
{
    cfg.validate()?;
    if !(decay_scale > T::zero()) || !decay_scale.is_finite() {
        return Err(Error::Domain {
            value: decay_scale.as_f64(),
            domain: "positive finite decay scale",
        });
    }
    let inner = QuadratureConfig {
        endpoint_substitution: false,
        ..*cfg
    };
    let reach = T::lit(16.0) * decay_scale;
    let core = integrate_interval(&mut f, -reach, reach, &inner)?;
    let mut total = core.value;
    let mut err = core.err;

    for sign in [T::one(), -T::one()] {
        let mut edge = reach;
        let mut previous: Option<T> = None;
        let mut satisfied = false;
        let mut tail = T::infinity();
        for _ in 0..64 {
            let (lo, hi) = if sign > T::zero() {
                (edge, edge * T::lit(2.0))
            } else {
                (-edge * T::lit(2.0), -edge)
            };
            let chunk = integrate_interval(&mut f, lo, hi, &inner)?;
            total += chunk.value;
            err += chunk.err;
            edge *= T::lit(2.0);

            let size = chunk.value.norm();
            let at_edge = f(sign * edge)?.norm() * decay_scale;
            let geometric = match previous {
                Some(prev) if prev > T::zero() && size < prev => {
                    let r = size / prev;
                    size * r / (T::one() - r)
                }
                Some(_) if size == T::zero() => T::zero(),
                _ => T::infinity(),
            };
            tail = at_edge.max(geometric);
            previous = Some(size);
            if tail <= T::lit(0.25) * cfg.target(total) {
                satisfied = true;
                break;
            }
        }
        if !satisfied {
            return Err(Error::TailBound {
                tail: tail.as_f64(),
                reach: edge.as_f64(),
            });
        }
        err += tail;
    }
    Ok(Estimate { value: total, err })
}

/// Derivative estimate from Ridders' extrapolation of central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative<T> {
    pub value: Complex<T>,
    pub err: T,
}

/// First or second derivative of `f` at `x`, starting from step `h0`.
///
/// The caller keeps x at least 4·h0 away from any singularity of f.
pub fn derivative<T, F>(mut f: F, x: T, order: usize, h0: T) -> Result<Derivative<T>>
where
    T: Real,
    F: FnMut(T) -> Complex<T>,
{
    if order != 1 && order != 2 {
        return Err(Error::Depth { order, max: 2 });
    }
    let floor = T::lit(16.0) * T::epsilon() * x.abs().max(T::one());
    if !(h0 > floor) {
        return Err(Error::StepUnderflow {
            h: h0.as_f64(),
            x: x.as_f64(),
        });
    }
    const NTAB: usize = 10;
    let con = T::lit(1.4);
    let con2 = con * con;
    let safe = T::lit(2.0);

    let fx = if order == 2 { f(x) } else { creal(T::zero()) };
    let mut diff = |h: T| -> Complex<T> {
        if order == 1 {
            (f(x + h) - f(x - h)) / (h * T::lit(2.0))
        } else {
            (f(x + h) - fx * T::lit(2.0) + f(x - h)) / (h * h)
        }
    };

    let mut table = [[creal(T::zero()); NTAB]; NTAB];
    let mut h = h0;
    table[0][0] = diff(h);
    let mut best = table[0][0];
    let mut err = T::infinity();
    for i in 1..NTAB {
        h /= con;
        table[0][i] = diff(h);
        let mut fac = con2;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - T::one());
            fac *= con2;
            let errt = (table[j][i] - table[j - 1][i])
                .norm()
                .max((table[j][i] - table[j - 1][i - 1]).norm());
            if errt <= err {
                err = errt;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).norm() >= safe * err {
            break;
        }
    }
    Ok(Derivative { value: best, err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn real(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<Complex<f64>> {
        move |x| Ok(creal(f(x)))
    }

    #[test]
    fn gauss_laguerre_integrates_moments_exactly() {
        use crate::specfun::ln_gamma_real;
        for &alpha in &[0.0, 1.0, 3.0, 7.0, 22.0] {
            for n in 1..=12 {
                let (x, lw) = gauss_laguerre(n, alpha).unwrap();
                for k in 0..2 * n {
                    let ln_exact = ln_gamma_real(alpha + k as f64 + 1.0).unwrap();
                    let sum: f64 = x
                        .iter()
                        .zip(&lw)
                        .map(|(&y, &w)| (w + k as f64 * y.ln() - ln_exact).exp())
                        .sum();
                    assert!((sum - 1.0).abs() < 1e-12, "α={alpha} n={n} k={k}: {sum}");
                }
            }
        }
    }

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(15);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m28: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(28)).sum();
        assert!((m28 - 2.0 / 29.0).abs() < 1e-14);
    }

    #[test]
    fn sine_squared_and_inverse_sqrt() {
        let cfg = QuadratureConfig::default();
        let v = integrate_interval(real(|x| (PI * x).sin().powi(2)), 0.0, 1.0, &cfg).unwrap();
        assert!((v.value.re - 0.5).abs() < 1e-13);
        let v = integrate_interval(real(|x| x.powf(-0.5)), 0.0, 1.0, &cfg).unwrap();
        assert!((v.value.re - 2.0).abs() < 1e-10, "{:?}", v);
    }

    #[test]
    fn subdivision_limit_reported() {
        let cfg = QuadratureConfig {
            endpoint_substitution: false,
            max_subdivisions: 8,
            ..QuadratureConfig::default()
        };
        let r = integrate_interval(real(|x| x.powf(-0.5)), 0.0, 1.0, &cfg);
        assert!(matches!(r, Err(Error::SubdivisionLimit { .. })));
    }

    #[test]
    fn non_finite_samples_rejected() {
        let cfg = QuadratureConfig::default();
        let r = integrate_interval(real(|x| if x > 0.5 { f64::NAN } else { x }), 0.0, 1.0, &cfg);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn real_line_gaussian_and_cauchy() {
        let cfg = QuadratureConfig::default();
        let g = integrate_real_line(real(|u| (-u * u).exp()), 1.0, &cfg).unwrap();
        assert!((g.value.re - PI.sqrt()).abs() < 1e-11);
        let c = integrate_real_line(real(|u| 1.0 / (PI * (1.0 + u * u))), 1.0, &cfg).unwrap();
        assert!((c.value.re - 1.0).abs() < 1e-9, "{:?}", c);
        assert!((c.value.re - 1.0).abs() <= 10.0 * c.err);
    }

    #[test]
    fn real_line_tail_violation() {
        let cfg = QuadratureConfig::default();
        let r = integrate_real_line(real(|_| 1.0), 1.0, &cfg);
        assert!(matches!(r, Err(Error::TailBound { .. })));
    }

    #[test]
    fn ridders_first_and_second_derivative() {
        let d = derivative(|x: f64| creal(x.sin()), 0.3, 1, 0.1).unwrap();
        assert!((d.value.re - 0.3f64.cos()).abs() < 1e-12);
        let d2 = derivative(|x: f64| creal(x.sin()), PI / 6.0, 2, 0.1).unwrap();
        assert!((d2.value.re + 0.5).abs() < 1e-9, "{:?}", d2);
        assert!(matches!(
            derivative(|x: f64| creal(x), 1.0, 1, 1e-18),
            Err(Error::StepUnderflow { .. })
        ));
        assert!(matches!(
            derivative(|x: f64| creal(x), 1.0, 3, 0.1),
            Err(Error::Depth { .. })
        ));
    }
}
