//! Segmented first-order Markov chains for discretized solar-irradiance
//! time series: ingestion, discretization, fitting, statistical validation,
//! synthetic generation and evaluation.
//!
//! The numeric core is generic over the scalar type (`f32` or `f64`, see
//! [`scalar::Real`]); the `f64` aliases below are what the CLI and most
//! callers use.

pub mod cli;
pub mod config;
pub mod discretize;
pub mod error;
pub mod evaluation;
pub mod fixture;
pub mod generator;
pub mod ingest;
pub mod markov;
pub mod scalar;
pub mod stats;

pub use discretize::{SolarState, StateSequence, STATE_COUNT};
pub use error::{Result, SolarError};
pub use markov::CountMatrix;
pub use scalar::Real;

/// Concrete `f64` aliases for the generic core types.
pub type ThresholdConfig64 = discretize::ThresholdConfig<f64>;
pub type TransitionMatrix64 = markov::TransitionMatrix<f64>;
pub type StateDistribution64 = markov::StateDistribution<f64>;
pub type SegmentedModel64 = generator::SegmentedModel<f64>;
pub type GenerationResult64 = generator::GenerationResult<f64>;
pub type IrradianceSeries64 = ingest::IrradianceSeries<f64>;
pub type RepresentativeDay64 = ingest::RepresentativeDay<f64>;
pub type MarginalVector64 = stats::MarginalVector<f64>;

/// `f32` aliases, for callers trading precision for footprint.
pub type ThresholdConfig32 = discretize::ThresholdConfig<f32>;
pub type TransitionMatrix32 = markov::TransitionMatrix<f32>;
pub type StateDistribution32 = markov::StateDistribution<f32>;
