//! State vectors: per-dimension seed-mean probing accuracy of one condition.

use thiserror::Error;

use crate::effects::EffectVector;
use crate::records::{Condition, ProbeDimension, RecordStore};
use crate::scalar::{mean, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("condition {0} has no records")]
    MissingCondition(Condition),
    #[error("condition {condition} is missing dimensions: {}", names(.missing))]
    MissingDimensions {
        condition: Condition,
        missing: Vec<ProbeDimension>,
    },
    #[error("state vectors have different dimension lists")]
    DimensionMismatch,
    #[error("state vectors belong to different models ({0} vs {1})")]
    ModelMismatch(String, String),
    #[error("accuracy {0} cannot be represented in the chosen scalar type")]
    Unrepresentable(f64),
}

fn names(dims: &[ProbeDimension]) -> String {
    dims.iter().map(ProbeDimension::as_str).collect::<Vec<_>>().join(", ")
}

/// Seed-mean estimate of the state of one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    condition: Condition,
    dims: Vec<ProbeDimension>,
    mean: Vec<T>,
    /// Per dimension: `(seed, accuracy)` with seeds ascending.
    samples: Vec<Vec<(i64, T)>>,
}

impl<T: Scalar> StateVector<T> {
    pub fn condition(&self) -> &Condition {
        &self.condition
    }

    pub fn dims(&self) -> &[ProbeDimension] {
        &self.dims
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn mean_of(&self, dim: &ProbeDimension) -> Option<&T> {
        self.dims.iter().position(|d| d == dim).map(|i| &self.mean[i])
    }

    pub fn samples(&self, index: usize) -> &[(i64, T)] {
        &self.samples[index]
    }

    /// Accuracies only, seeds ascending.
    pub fn sample_values(&self, index: usize) -> Vec<T> {
        self.samples[index].iter().map(|(_, v)| v.clone()).collect()
    }

    /// Smallest per-dimension seed count.
    pub fn n_seeds(&self) -> usize {
        self.samples.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// The mean vector as an effect-space vector (for plotting and algebra).
    pub fn as_vector(&self) -> EffectVector<T> {
        EffectVector::new(self.dims.clone(), self.mean.clone()).expect("dims and means align")
    }
}

/// Estimates the state of `condition` as the per-dimension mean over seeds.
///
/// Dimensions follow the store catalog order; every catalog dimension must have
/// at least one observation.
pub fn estimate_state<T: Scalar>(store: &RecordStore, condition: &Condition) -> Result<StateVector<T>, StateError> {
    if !store.contains_condition(condition) {
        return Err(StateError::MissingCondition(condition.clone()));
    }
    let missing = store.missing_dimensions(condition);
    if !missing.is_empty() {
        return Err(StateError::MissingDimensions {
            condition: condition.clone(),
            missing,
        });
    }
    let dims = store.catalog().dims().to_vec();
    let mut means = Vec::with_capacity(dims.len());
    let mut samples = Vec::with_capacity(dims.len());
    for dim in &dims {
        let seeds = store.samples(condition, dim).expect("checked above");
        let mut row = Vec::with_capacity(seeds.len());
        for (&seed, &acc) in seeds {
            row.push((seed, T::from_accuracy(acc).ok_or(StateError::Unrepresentable(acc))?));
        }
        let values: Vec<T> = row.iter().map(|(_, v)| v.clone()).collect();
        means.push(mean(&values).expect("at least one seed"));
        samples.push(row);
    }
    Ok(StateVector {
        condition: condition.clone(),
        dims,
        mean: means,
        samples,
    })
}

/// `a.mean − b.mean` per dimension.
pub fn state_delta<T: Scalar>(a: &StateVector<T>, b: &StateVector<T>) -> Result<EffectVector<T>, StateError> {
    if a.condition.model() != b.condition.model() {
        return Err(StateError::ModelMismatch(
            a.condition.model().to_string(),
            b.condition.model().to_string(),
        ));
    }
    if a.dims != b.dims {
        return Err(StateError::DimensionMismatch);
    }
    let values = a.mean.iter().zip(&b.mean).map(|(x, y)| x.clone() - y.clone()).collect();
    Ok(EffectVector::new(a.dims.clone(), values).expect("dims and values align"))
}
