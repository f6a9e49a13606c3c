//! Cell segmentation overhead in input-buffered switches: quantized service
//! time analysis, a merging segmenter, iSLIP scheduling and a discrete-event
//! switch simulator.
//!
//! The analytic modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix them to `f64`.

// `!(x > 0)` style checks are there to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod islip;
pub mod mg1;
pub mod quantize;
pub mod scalar;
pub mod segmenter;
pub mod sim;
pub mod special;
pub mod traffic;

pub use scalar::Scalar;

pub type Dist = quantize::ContinuousDist<f64>;
pub type Moments = quantize::QuantizedMoments<f64>;
pub type Pmf = quantize::QuantizedPmf<f64>;
pub type Tabulated = quantize::TabulatedCdf<f64>;
pub type QueueParams = mg1::QueueModelParams<f64>;
pub type Scenario = mg1::SegmentationScenario<f64>;
pub type Point = mg1::ScenarioPoint<f64>;
