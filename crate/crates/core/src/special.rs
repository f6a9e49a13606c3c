//! Log-gamma, regularized incomplete gamma functions and an adaptive
//! Simpson integrator used as the fallback route for the Gamma CDF.

use thiserror::Error;

use crate::scalar::Scalar;

/// Iteration cap for the incomplete-gamma series and continued fraction.
const MAX_ITER: usize = 500;

/// Relative accuracy target for the incomplete gamma routines.
const TARGET_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SpecialError {
    #[error("argument outside the function's domain")]
    Domain,
    #[error("series or continued fraction failed to converge")]
    NoConvergence,
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// Both regularized incomplete gammas `(P(a, x), Q(a, x))`.
///
/// The series is used below `x = a + 1` and the Lentz continued fraction
/// above it, so whichever of P and Q is small keeps full relative accuracy.
pub fn gamma_pq<T: Scalar>(a: T, x: T) -> Result<(T, T), SpecialError> {
    if !(a > T::zero()) || x < T::zero() || x.is_nan() {
        return Err(SpecialError::Domain);
    }
    if x == T::zero() {
        return Ok((T::zero(), T::one()));
    }
    if x.is_infinite() {
        return Ok((T::one(), T::zero()));
    }
    let prefactor = (-x + a * x.ln() - ln_gamma(a)).exp();
    if x < a + T::one() {
        let p = lower_series(a, x)? * prefactor;
        Ok((p, T::one() - p))
    } else {
        let q = upper_fraction(a, x)? * prefactor;
        Ok((T::one() - q, q))
    }
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p<T: Scalar>(a: T, x: T) -> Result<T, SpecialError> {
    gamma_pq(a, x).map(|(p, _)| p)
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn gamma_q<T: Scalar>(a: T, x: T) -> Result<T, SpecialError> {
    gamma_pq(a, x).map(|(_, q)| q)
}

fn eps<T: Scalar>() -> T {
    T::lit(TARGET_EPS).max(T::epsilon())
}

fn lower_series<T: Scalar>(a: T, x: T) -> Result<T, SpecialError> {
    let mut ap = a;
    let mut term = T::one() / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap = ap + T::one();
        term = term * x / ap;
        sum = sum + term;
        if term.abs() < sum.abs() * eps::<T>() {
            return Ok(sum);
        }
    }
    Err(SpecialError::NoConvergence)
}

fn upper_fraction<T: Scalar>(a: T, x: T) -> Result<T, SpecialError> {
    let tiny = T::min_positive_value() / T::epsilon();
    let two = T::lit(2.0);
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let i = T::from_usize_lossy(i);
        let an = -i * (i - a);
        b = b + two;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = d * c;
        h = h * delta;
        if (delta - T::one()).abs() < eps::<T>() {
            return Ok(h);
        }
    }
    Err(SpecialError::NoConvergence)
}

/// Gamma density with shape `alpha` and scale `beta`.
pub fn gamma_pdf<T: Scalar>(t: T, alpha: T, beta: T) -> T {
    if t < T::zero() {
        return T::zero();
    }
    if t == T::zero() {
        return if alpha == T::one() {
            T::one() / beta
        } else if alpha > T::one() {
            T::zero()
        } else {
            T::infinity()
        };
    }
    ((alpha - T::one()) * t.ln() - t / beta - alpha * beta.ln() - ln_gamma(alpha)).exp()
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<T, F>(f: &F, a: T, b: T, tol: T, max_depth: u32) -> T
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

fn simpson<T: Scalar>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T, F>(f: &F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= T::lit(15.0) * tol {
        return left + right + diff / T::lit(15.0);
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol * half, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol * half, depth - 1)
}

/// Gamma CDF by direct quadrature of the density. Only used when the
/// incomplete-gamma routines fail to converge, and as an independent check.
pub fn gamma_cdf_quadrature<T: Scalar>(x: T, alpha: T, beta: T, tol: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let f = |t: T| gamma_pdf(t, alpha, beta);
    // A singular density at the origin (alpha < 1) would stall Simpson; the
    // head [0, h] is integrated analytically from the leading power term.
    if alpha < T::one() {
        let h = x.min(T::lit(1e-6) * beta);
        let head = (h / beta).powf(alpha) / (alpha * ln_gamma(alpha).exp());
        return (head + adaptive_simpson(&f, h, x, tol, 50)).min(T::one());
    }
    adaptive_simpson(&f, T::zero(), x, tol, 50).min(T::one())
}
