//! Dataset effects over probing state vectors.
//!
//! A model state is summarized by a vector of probing accuracies, one per
//! linguistic dimension. Fine-tuning on a dataset moves that state; this crate
//! estimates the movement (the dataset's individual effect), the non-additive
//! part of training on two datasets together (their interaction effect), and the
//! significance of both from replicated runs.
//!
//! Modules:
//!
//! - [`records`]: the newline-delimited JSON record format and the record store.
//! - [`statevector`]: seed-mean state estimation.
//! - [`effects`]: individual and interaction effects, persistence, effect algebra.
//! - [`statkernel`]: incomplete beta, t and F tails, pooled t-test, 2×2 ANOVA.
//! - [`planner`]: marker-state experiment enumeration and run manifests.
//! - [`simulator`]: synthetic records from a known additive-plus-interaction model.
//! - [`report`]: significance tables, dataset effect cards, state-plane SVG.
//!
//! Numeric code is generic over [`scalar::Scalar`] / [`scalar::Real`]; the
//! aliases below fix the usual instantiations.

pub mod effects;
pub mod planner;
pub mod records;
pub mod report;
pub mod scalar;
pub mod simulator;
pub mod statevector;
pub mod statkernel;

pub use scalar::{Exact, Real, Scalar};

pub type StateVectorF64 = statevector::StateVector<f64>;
pub type ExactStateVector = statevector::StateVector<Exact>;
pub type EffectVectorF64 = effects::EffectVector<f64>;
pub type ExactEffectVector = effects::EffectVector<Exact>;
pub type EffectResultF64 = effects::EffectResult<f64>;
pub type InteractionResultF64 = effects::InteractionResult<f64>;
pub type TTestResultF64 = statkernel::TTestResult<f64>;
pub type AnovaResultF64 = statkernel::AnovaResult<f64>;
pub type RegressionFitF64 = statkernel::RegressionFit<f64>;
