//! M/G/1 analysis with quantized service times.
//!
//! Rates are per cell time. `lambda` is the packet arrival rate and `mu` the
//! rate of the underlying (unquantized) exponential service time, so that the
//! quantized queue M/M^Δ/1 is an M/Geo/1 queue with mean service
//! `1 / (1 − e^{−mu})`.

use thiserror::Error;

use crate::quantize::{self, ContinuousDist, QuantizeError, QuantizedMoments};
use crate::scalar::Scalar;

/// Denominators closer to zero than this are treated as poles.
const POLE_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueueError {
    #[error("quantized load {load} >= 1: queue is unstable")]
    Unstable { load: f64 },
    #[error("invalid queue parameter: {0}")]
    InvalidParameter(String),
    #[error("transform has a pole at z = {z}")]
    Pole { z: f64 },
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
}

fn positive<T: Scalar>(name: &str, v: T) -> Result<(), QueueError> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(QueueError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn require_stable<T: Scalar>(load: T) -> Result<(), QueueError> {
    if load < T::one() {
        Ok(())
    } else {
        Err(QueueError::Unstable { load: load.to_f64_lossy() })
    }
}

/// Arrival rate plus the quantized service moments of one queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueModelParams<T> {
    pub lambda: T,
    pub service: QuantizedMoments<T>,
    /// Rate of the underlying exponential, when the service is M^Δ.
    pub exponential_rate: Option<T>,
}

impl<T: Scalar> QueueModelParams<T> {
    pub fn new(lambda: T, service: QuantizedMoments<T>) -> Result<Self, QueueError> {
        positive("lambda", lambda)?;
        Ok(Self { lambda, service, exponential_rate: None })
    }

    pub fn quantized_exponential(lambda: T, mu: T) -> Result<Self, QueueError> {
        positive("lambda", lambda)?;
        let service = quantize::ceil_exponential_moments(mu)?;
        Ok(Self { lambda, service, exponential_rate: Some(mu) })
    }

    /// `ρ' = λ·E(Y)`.
    pub fn quantized_load(&self) -> T {
        self.lambda * self.service.mean
    }

    pub fn is_stable(&self) -> bool {
        self.quantized_load() < T::one()
    }

    pub fn mean_customers(&self) -> Result<T, QueueError> {
        pk_mean_customers(self.lambda, &self.service)
    }
}

/// Pollaczek-Khinchine mean number in system:
/// `ρ' + ρ'²(1 + Var/E²) / (2(1 − ρ'))`.
pub fn pk_mean_customers<T: Scalar>(lambda: T, moments: &QuantizedMoments<T>) -> Result<T, QueueError> {
    positive("lambda", lambda)?;
    let rho = lambda * moments.mean;
    require_stable(rho)?;
    let two = T::lit(2.0);
    Ok(rho + rho * rho * (T::one() + moments.scv()) / (two * (T::one() - rho)))
}

/// Mean number in system for M/M^Δ/1 in closed form,
/// `(λ/2)·(λ − 2)/(e^{−μ} + λ − 1)`.
pub fn mm1q_mean_customers<T: Scalar>(lambda: T, mu: T) -> Result<T, QueueError> {
    positive("lambda", lambda)?;
    positive("mu", mu)?;
    require_stable(lambda / -(-mu).exp_m1())?;
    let two = T::lit(2.0);
    Ok(lambda / two * ((lambda - two) / ((-mu).exp() + lambda - T::one())))
}

/// M/M^Δ/1 mean number in system from the derivative of the queue-length
/// transform at `z = 1`: `λ(λ − 2)e^μ / (2 − 2(1 − λ)e^μ)`.
pub fn mean_from_transform<T: Scalar>(lambda: T, mu: T) -> Result<T, QueueError> {
    positive("lambda", lambda)?;
    positive("mu", mu)?;
    require_stable(lambda / -(-mu).exp_m1())?;
    let two = T::lit(2.0);
    let e_mu = mu.exp();
    Ok(lambda * (lambda - two) * e_mu / (two - two * (T::one() - lambda) * e_mu))
}

/// Service-time transform `W[(1 − z)λ] = E[e^{−(1−z)λY}]` of the geometric
/// quantized service, `(1 − e^{−μ})u / (1 − e^{−μ}u)` with `u = e^{−(1−z)λ}`.
///
/// Accepts real `z` in `[-1, 1]`.
pub fn laplace_w_mm1q<T: Scalar>(lambda: T, mu: T, z: T) -> Result<T, QueueError> {
    positive("lambda", lambda)?;
    positive("mu", mu)?;
    if !(z >= -T::one() && z <= T::one()) {
        return Err(QueueError::InvalidParameter(format!("z = {z} outside [-1, 1]")));
    }
    let u = (-(T::one() - z) * lambda).exp();
    let q = (-mu).exp();
    let den = T::one() - q * u;
    if den.abs() < T::lit(POLE_TOLERANCE) {
        return Err(QueueError::Pole { z: z.to_f64_lossy() });
    }
    Ok(-(-mu).exp_m1() * u / den)
}

/// Generating function `g(z)` of the M/M^Δ/1 number in system, `z ∈ [0, 1]`.
///
/// The raw closed form is `0/0` at `z = 1`. Dividing numerator and
/// denominator by `w = 1 − z` leaves
/// `g = u·C / (e^μ·(u − 1)/w + e^μ − u)` with `C = (1 − λ)e^μ − 1`, and
/// `(u − 1)/w → −λ` as `w → 0`, which gives `g(1) = 1` exactly.
pub fn pk_transform_mm1q<T: Scalar>(lambda: T, mu: T, z: T) -> Result<T, QueueError> {
    positive("lambda", lambda)?;
    positive("mu", mu)?;
    require_stable(lambda / -(-mu).exp_m1())?;
    if !(z >= T::zero() && z <= T::one()) {
        return Err(QueueError::InvalidParameter(format!("z = {z} outside [0, 1]")));
    }
    let w = T::one() - z;
    let u = (-w * lambda).exp();
    let e_mu = mu.exp();
    let c = (T::one() - lambda) * e_mu - T::one();
    let slope = if w == T::zero() { -lambda } else { (-w * lambda).exp_m1() / w };
    let den = e_mu * slope + e_mu - u;
    if den.abs() < T::lit(POLE_TOLERANCE) {
        return Err(QueueError::Pole { z: z.to_f64_lossy() });
    }
    Ok(u * c / den)
}

/// Numerical `g'(1)` of [`pk_transform_mm1q`], i.e. E(N).
///
/// `g` is only evaluated on `[0, 1]`, so this uses the one-sided stencil
/// `(3g(1) − 4g(1−h) + g(1−2h)) / 2h` at `h` and `h/2`, Richardson-combined.
pub fn transform_slope_at_one<T: Scalar>(lambda: T, mu: T, h: T) -> Result<T, QueueError> {
    if !(h > T::zero() && h <= T::lit(0.25)) {
        return Err(QueueError::InvalidParameter(format!("step {h} outside (0, 0.25]")));
    }
    let g = |z: T| pk_transform_mm1q(lambda, mu, z);
    let g1 = g(T::one())?;
    let stencil = |h: T| -> Result<T, QueueError> {
        let two = T::lit(2.0);
        Ok((T::lit(3.0) * g1 - T::lit(4.0) * g(T::one() - h)? + g(T::one() - two * h)?) / (two * h))
    };
    let coarse = stencil(h)?;
    let fine = stencil(h / T::lit(2.0))?;
    Ok((T::lit(4.0) * fine - coarse) / T::lit(3.0))
}

/// Speed-up needed for the quantized load to equal the offered load:
/// `σ = μ/(1 − e^{−μ})` with `μ = S/L`.
pub fn required_speedup<T: Scalar>(mean_packet_bytes: T, cell_bytes: T) -> T {
    let mu = cell_bytes / mean_packet_bytes;
    mu / -(-mu).exp_m1()
}

/// Mean number in system for any of the quantizable service families, via
/// the P-K formula on the quantized moments.
pub fn quantized_mean_customers<T: Scalar>(
    lambda: T,
    service: &ContinuousDist<T>,
    tail_epsilon: T,
) -> Result<T, QueueError> {
    let moments = quantize::quantized_moments(service, tail_epsilon)?;
    pk_mean_customers(lambda, &moments)
}

/// Exponential packet lengths of mean `L` bytes, Poisson arrivals, `S`-byte
/// cells, offered link utilization `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationScenario<T> {
    pub mean_packet_bytes: T,
    pub cell_bytes: T,
    pub utilization: T,
}

/// One point of a mean-queue-length curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPoint<T> {
    pub utilization: T,
    pub lambda: T,
    pub mu: T,
    pub quantized_load: T,
    /// E(N) of the quantized queue; `None` when `quantized_load >= 1`.
    pub mean_customers: Option<T>,
    /// E(N) = ρ/(1 − ρ) of the unquantized M/M/1, for comparison.
    pub mean_customers_unquantized: Option<T>,
    pub required_speedup: T,
    pub stable: bool,
}

impl<T: Scalar> SegmentationScenario<T> {
    pub fn new(mean_packet_bytes: T, cell_bytes: T, utilization: T) -> Result<Self, QueueError> {
        positive("mean packet length", mean_packet_bytes)?;
        positive("cell size", cell_bytes)?;
        if !(utilization > T::zero() && utilization <= T::one()) {
            return Err(QueueError::InvalidParameter(format!("utilization {utilization} outside (0, 1]")));
        }
        Ok(Self { mean_packet_bytes, cell_bytes, utilization })
    }

    /// Service time `T_s = L/S` cell times, inter-arrival `T_a = T_s/ρ`,
    /// `λ = 1/T_a`, `μ = 1/T_s`.
    pub fn analyze(&self) -> ScenarioPoint<T> {
        let service_time = self.mean_packet_bytes / self.cell_bytes;
        let interarrival = service_time / self.utilization;
        let lambda = T::one() / interarrival;
        let mu = T::one() / service_time;
        let quantized_load = lambda / -(-mu).exp_m1();
        let stable = quantized_load < T::one();
        let mean_customers = if stable { mm1q_mean_customers(lambda, mu).ok() } else { None };
        let rho = self.utilization;
        let mean_customers_unquantized = (rho < T::one()).then(|| rho / (T::one() - rho));
        ScenarioPoint {
            utilization: rho,
            lambda,
            mu,
            quantized_load,
            mean_customers,
            mean_customers_unquantized,
            required_speedup: required_speedup(self.mean_packet_bytes, self.cell_bytes),
            stable,
        }
    }
}

/// Analyses every utilization in `utilizations` for one `(L, S)` pair.
pub fn scenario_curve<T: Scalar>(
    mean_packet_bytes: T,
    cell_bytes: T,
    utilizations: &[T],
) -> Result<Vec<ScenarioPoint<T>>, QueueError> {
    utilizations
        .iter()
        .map(|&rho| SegmentationScenario::new(mean_packet_bytes, cell_bytes, rho).map(|s| s.analyze()))
        .collect()
}
