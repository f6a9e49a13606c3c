//! Distribution and moments of a ceiling-quantized service time `Y = ceil(X)`.
//!
//! Service times are measured in cell times, so `Y` is the number of whole
//! cell slots a packet of continuous length `X` occupies. Closed forms exist
//! for the exponential, two-phase hyperexponential and two-stage Erlang
//! cases. Anything else (Gamma, or a tabulated CDF) goes through
//! [`quantize_general`], which samples the CDF difference `F(k) − F(k−1)` on
//! the integers and truncates once the remaining tail is negligible.

use std::io::{self, Write};

use thiserror::Error;

use crate::scalar::Scalar;
use crate::special::{self, SpecialError};

/// Largest pmf support [`quantize_general`] will build before giving up.
pub const MAX_PMF_POINTS: usize = 1 << 20;

/// Tolerance on the hyperexponential weights summing to one.
const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantizeError {
    #[error("invalid distribution parameter: {0}")]
    InvalidParameter(String),
    #[error("uniform-remainder heuristic needs Var(X) >= 1/12, got {variance}")]
    HeuristicInapplicable { variance: f64 },
    #[error("moment generating function diverges for t = {t} >= rate {rate}")]
    Divergent { t: f64, rate: f64 },
    #[error("tail mass {achieved_tail:e} still above target after {points} points")]
    Truncation { achieved_tail: f64, points: usize },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

fn invalid(msg: impl Into<String>) -> QuantizeError {
    QuantizeError::InvalidParameter(msg.into())
}

fn check_rate<T: Scalar>(name: &str, v: T) -> Result<(), QuantizeError> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Continuous service-time distribution, time unit = cell times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousDist<T> {
    Exponential { rate: T },
    /// Two-phase hyperexponential: phase `i` is chosen with probability
    /// `weights[i]` and has rate `rates[i]`.
    Hyperexp2 { weights: [T; 2], rates: [T; 2] },
    /// Two-stage Erlang, both stages at `rate`.
    Erlang2 { rate: T },
    Gamma { shape: T, scale: T },
}

impl<T: Scalar> ContinuousDist<T> {
    pub fn validate(&self) -> Result<(), QuantizeError> {
        match *self {
            ContinuousDist::Exponential { rate } | ContinuousDist::Erlang2 { rate } => {
                check_rate("rate", rate)
            }
            ContinuousDist::Hyperexp2 { weights, rates } => {
                check_rate("rate 1", rates[0])?;
                check_rate("rate 2", rates[1])?;
                if weights[0] < T::zero() || weights[1] < T::zero() {
                    return Err(invalid("hyperexponential weights must be non-negative"));
                }
                let sum = weights[0] + weights[1];
                if (sum - T::one()).abs() > T::lit(WEIGHT_TOLERANCE) {
                    return Err(invalid(format!("hyperexponential weights sum to {sum}, not 1")));
                }
                Ok(())
            }
            ContinuousDist::Gamma { shape, scale } => {
                check_rate("shape", shape)?;
                check_rate("scale", scale)
            }
        }
    }

    pub fn mean(&self) -> T {
        match *self {
            ContinuousDist::Exponential { rate } => T::one() / rate,
            ContinuousDist::Hyperexp2 { weights, rates } => {
                weights[0] / rates[0] + weights[1] / rates[1]
            }
            ContinuousDist::Erlang2 { rate } => T::lit(2.0) / rate,
            ContinuousDist::Gamma { shape, scale } => shape * scale,
        }
    }

    pub fn variance(&self) -> T {
        let two = T::lit(2.0);
        match *self {
            ContinuousDist::Exponential { rate } => T::one() / (rate * rate),
            ContinuousDist::Hyperexp2 { weights, rates } => {
                let second = two * (weights[0] / (rates[0] * rates[0]) + weights[1] / (rates[1] * rates[1]));
                let m = self.mean();
                second - m * m
            }
            ContinuousDist::Erlang2 { rate } => two / (rate * rate),
            ContinuousDist::Gamma { shape, scale } => shape * scale * scale,
        }
    }

    /// Closed-form quantized moments, when one exists for this family.
    pub fn closed_form_moments(&self) -> Option<Result<QuantizedMoments<T>, QuantizeError>> {
        match *self {
            ContinuousDist::Exponential { rate } => Some(ceil_exponential_moments(rate)),
            ContinuousDist::Hyperexp2 { weights, rates } => {
                Some(ceil_hyperexp2_moments(weights[0], weights[1], rates[0], rates[1]))
            }
            ContinuousDist::Erlang2 { rate } => Some(ceil_erlang2_moments(rate)),
            ContinuousDist::Gamma { .. } => None,
        }
    }
}

/// Anything with a survival function `P(X > x)` on `x >= 0`.
pub trait Survival<T> {
    fn survival(&self, x: T) -> Result<T, QuantizeError>;
}

impl<T: Scalar> Survival<T> for ContinuousDist<T> {
    fn survival(&self, x: T) -> Result<T, QuantizeError> {
        if x <= T::zero() {
            return Ok(T::one());
        }
        Ok(match *self {
            ContinuousDist::Exponential { rate } => (-rate * x).exp(),
            ContinuousDist::Hyperexp2 { weights, rates } => {
                weights[0] * (-rates[0] * x).exp() + weights[1] * (-rates[1] * x).exp()
            }
            ContinuousDist::Erlang2 { rate } => (T::one() + rate * x) * (-rate * x).exp(),
            ContinuousDist::Gamma { shape, scale } => match special::gamma_q(shape, x / scale) {
                Ok(q) => q,
                Err(SpecialError::NoConvergence) => {
                    let tol = T::lit(1e-14);
                    T::one() - special::gamma_cdf_quadrature(x, shape, scale, tol)
                }
                Err(e) => return Err(e.into()),
            },
        })
    }
}

/// Piecewise-linear CDF through `(x, F(x))` knots, with `F(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf<T> {
    knots: Vec<(T, T)>,
}

impl<T: Scalar> TabulatedCdf<T> {
    pub fn new(mut knots: Vec<(T, T)>) -> Result<Self, QuantizeError> {
        if knots.is_empty() {
            return Err(invalid("tabulated CDF needs at least one knot"));
        }
        if knots[0].0 > T::zero() {
            knots.insert(0, (T::zero(), T::zero()));
        }
        if knots[0].0 < T::zero() || knots[0].1 != T::zero() {
            return Err(invalid("tabulated CDF must start at F(0) = 0 for a positive variable"));
        }
        for w in knots.windows(2) {
            let ((x0, f0), (x1, f1)) = (w[0], w[1]);
            if !(x1 > x0) || f1 < f0 || f1 > T::one() {
                return Err(invalid("tabulated CDF knots must be increasing in x and non-decreasing in [0, 1]"));
            }
        }
        Ok(Self { knots })
    }

    pub fn cdf(&self, x: T) -> T {
        let last = *self.knots.last().expect("non-empty");
        if x >= last.0 {
            return last.1;
        }
        if x <= T::zero() {
            return T::zero();
        }
        let idx = self.knots.partition_point(|&(kx, _)| kx <= x);
        let (x0, f0) = self.knots[idx - 1];
        let (x1, f1) = self.knots[idx];
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }
}

impl<T: Scalar> Survival<T> for TabulatedCdf<T> {
    fn survival(&self, x: T) -> Result<T, QuantizeError> {
        Ok(T::one() - self.cdf(x))
    }
}

/// Mean and variance of the quantized service time, in cell times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizedMoments<T> {
    pub mean: T,
    pub variance: T,
}

impl<T: Scalar> QuantizedMoments<T> {
    pub fn second_moment(&self) -> T {
        self.variance + self.mean * self.mean
    }

    /// Squared coefficient of variation `Var(Y) / E(Y)^2`.
    pub fn scv(&self) -> T {
        self.variance / (self.mean * self.mean)
    }
}

/// Probability mass function of `Y` on `k = 1..=N`, plus the mass beyond `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedPmf<T> {
    probs: Vec<T>,
    tail_mass: T,
}

impl<T: Scalar> QuantizedPmf<T> {
    /// Builds a pmf from `P(Y = 1), P(Y = 2), ...` and the truncated tail.
    pub fn new(probs: Vec<T>, tail_mass: T) -> Result<Self, QuantizeError> {
        if probs.iter().any(|&p| !(p >= T::zero())) {
            return Err(invalid("pmf entries must be non-negative"));
        }
        if !(tail_mass >= T::zero() && tail_mass < T::one()) {
            return Err(invalid(format!("tail mass {tail_mass} outside [0, 1)")));
        }
        Ok(Self { probs, tail_mass })
    }

    /// `(k, P(Y = k))` pairs, `k` starting at 1.
    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (i + 1, p))
    }

    pub fn prob(&self, k: usize) -> T {
        if k == 0 {
            return T::zero();
        }
        self.probs.get(k - 1).copied().unwrap_or_else(T::zero)
    }

    /// Largest `k` with an explicit probability.
    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    pub fn total_mass(&self) -> T {
        self.probs.iter().fold(self.tail_mass, |acc, &p| acc + p)
    }

    /// Writes one `k,p_k` line per support point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,p_k")?;
        for (k, p) in self.iter() {
            writeln!(out, "{k},{p:e}")?;
        }
        Ok(())
    }
}

/// Quantized exponential: `Y` is geometric on `{1, 2, ...}` with ratio `e^{-rate}`.
pub fn ceil_exponential_moments<T: Scalar>(rate: T) -> Result<QuantizedMoments<T>, QuantizeError> {
    check_rate("rate", rate)?;
    let q = (-rate).exp();
    let p = -(-rate).exp_m1();
    Ok(QuantizedMoments { mean: T::one() / p, variance: q / (p * p) })
}

/// Quantized two-phase hyperexponential, a mixture of two geometric pmfs.
pub fn ceil_hyperexp2_moments<T: Scalar>(
    weight1: T,
    weight2: T,
    rate1: T,
    rate2: T,
) -> Result<QuantizedMoments<T>, QuantizeError> {
    ContinuousDist::Hyperexp2 { weights: [weight1, weight2], rates: [rate1, rate2] }.validate()?;
    let (q1, p1) = ((-rate1).exp(), -(-rate1).exp_m1());
    let (q2, p2) = ((-rate2).exp(), -(-rate2).exp_m1());
    let mean = weight1 / p1 + weight2 / p2;
    let second = weight1 * (T::one() + q1) / (p1 * p1) + weight2 * (T::one() + q2) / (p2 * p2);
    Ok(QuantizedMoments { mean, variance: second - mean * mean })
}

/// Quantized two-stage Erlang.
///
/// With `q = e^{-rate}`, `p = 1 - q` and survival `S(j) = (1 + rate·j) q^j`,
/// `E(Y) = Σ S(j)` and `E(Y²) = Σ (2j + 1) S(j)` over `j >= 0`. Summing the
/// geometric series gives the forms below, which are algebraically the
/// textbook expressions but avoid their `O(1)` cancellation when the rate
/// is small.
pub fn ceil_erlang2_moments<T: Scalar>(rate: T) -> Result<QuantizedMoments<T>, QuantizeError> {
    check_rate("rate", rate)?;
    let two = T::lit(2.0);
    let q = (-rate).exp();
    let p = -(-rate).exp_m1();
    let mean = (p + rate * q) / (p * p);
    let second = T::one() / p
        + (two + rate) * q / (p * p)
        + two * rate * q * (T::one() + q) / (p * p * p);
    Ok(QuantizedMoments { mean, variance: second - mean * mean })
}

/// Moment generating function `E[e^{tY}]` of the quantized two-stage Erlang.
///
/// Defined for `t < rate`, where the underlying geometric series converges.
pub fn erlang2_ceiling_mgf<T: Scalar>(rate: T, t: T) -> Result<T, QuantizeError> {
    check_rate("rate", rate)?;
    if !(t < rate) {
        return Err(QuantizeError::Divergent { t: t.to_f64_lossy(), rate: rate.to_f64_lossy() });
    }
    // e^{t-rate} factored through e^t so that large rates do not overflow.
    let one_minus_r = -(t - rate).exp_m1();
    let p = -(-rate).exp_m1();
    let c = rate + (-rate).exp_m1(); // rate - 1 + e^{-rate}
    Ok(t.exp() * (rate * p / (one_minus_r * one_minus_r) - c / one_minus_r))
}

/// Uniform-remainder approximation: `E(Y) = E(X) + 1/2`, `Var(Y) = Var(X) − 1/12`.
pub fn heuristic_moments<T: Scalar>(mean_x: T, var_x: T) -> Result<QuantizedMoments<T>, QuantizeError> {
    check_rate("E(X)", mean_x)?;
    let twelfth = T::one() / T::lit(12.0);
    if !(var_x >= twelfth) {
        return Err(QuantizeError::HeuristicInapplicable { variance: var_x.to_f64_lossy() });
    }
    Ok(QuantizedMoments { mean: mean_x + T::lit(0.5), variance: var_x - twelfth })
}

/// Quantizes any distribution given by its survival function.
///
/// `P(Y = k) = S(k − 1) − S(k)`. The support grows by doubling until the
/// remaining tail `S(N)` drops below `tail_epsilon`, up to
/// [`MAX_PMF_POINTS`].
pub fn quantize_general<T, D>(dist: &D, tail_epsilon: T) -> Result<QuantizedPmf<T>, QuantizeError>
where
    T: Scalar,
    D: Survival<T> + ?Sized,
{
    if !(tail_epsilon > T::zero() && tail_epsilon < T::one()) {
        return Err(invalid(format!("tail epsilon {tail_epsilon} outside (0, 1)")));
    }
    let mut n = 1usize;
    let mut tail = dist.survival(T::one())?;
    while tail >= tail_epsilon {
        if n >= MAX_PMF_POINTS {
            return Err(QuantizeError::Truncation { achieved_tail: tail.to_f64_lossy(), points: n });
        }
        n *= 2;
        tail = dist.survival(T::from_usize_lossy(n))?;
    }
    let mut probs = Vec::with_capacity(n);
    let mut prev = dist.survival(T::zero())?;
    for k in 1..=n {
        let next = if k == n { tail } else { dist.survival(T::from_usize_lossy(k))? };
        probs.push((prev - next).max(T::zero()));
        prev = next;
    }
    QuantizedPmf::new(probs, tail.max(T::zero()))
}

/// Mean and variance of a quantized pmf. The truncated tail is ignored.
pub fn pmf_moments<T: Scalar>(pmf: &QuantizedPmf<T>) -> QuantizedMoments<T> {
    let mean = pmf.iter().fold(T::zero(), |acc, (k, p)| acc + T::from_usize_lossy(k) * p);
    let variance = pmf.iter().fold(T::zero(), |acc, (k, p)| {
        let d = T::from_usize_lossy(k) - mean;
        acc + d * d * p
    });
    QuantizedMoments { mean, variance }
}

/// Two-moment Gamma fit from a sample mean and standard deviation.
/// Returns `(shape, scale)`.
pub fn gamma_fit<T: Scalar>(mean: T, stddev: T) -> Result<(T, T), QuantizeError> {
    check_rate("sample mean", mean)?;
    check_rate("sample standard deviation", stddev)?;
    let ratio = mean / stddev;
    let shape = ratio * ratio;
    Ok((shape, mean / shape))
}

/// Quantized moments by the cheapest available route: closed form where
/// one exists, otherwise the pmf at `tail_epsilon`.
pub fn quantized_moments<T: Scalar>(
    dist: &ContinuousDist<T>,
    tail_epsilon: T,
) -> Result<QuantizedMoments<T>, QuantizeError> {
    dist.validate()?;
    match dist.closed_form_moments() {
        Some(m) => m,
        None => Ok(pmf_moments(&quantize_general(dist, tail_epsilon)?)),
    }
}
