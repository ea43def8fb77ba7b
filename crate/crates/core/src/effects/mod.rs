//! Individual effects E(X) = S([X,I]) − S(I), pairwise interaction effects, and
//! persistence of effects across reference states.

mod algebra;
mod individual;
mod interaction;
mod persistence;

use thiserror::Error;

pub use algebra::{effect_add, effect_neg, effect_zero, EffectVector};
pub use individual::{effect_of_set, individual_effect, mean_effect, reference_states, DimensionEffect, EffectResult};
pub use interaction::{
    interaction_effect, interaction_formulations, interaction_pairs, DimensionInteraction, Formulations,
    InteractionResult, FORMULATION_TOLERANCE_PP,
};
pub use persistence::{persistence_summary, DimensionPersistence, PersistenceSummary, Sign, DEFAULT_THRESHOLD};

use crate::records::{Condition, RecordError};
use crate::statevector::StateError;
use crate::statkernel::{StatError, TTestKind};

/// Significance level used for counting and card listings unless overridden.
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EffectError {
    #[error("dataset {dataset} is already part of reference {reference}")]
    Overlap { dataset: String, reference: Condition },
    #[error("interaction needs two distinct datasets, got {0} twice")]
    SameDataset(String),
    #[error("condition {condition} has {got} seed(s) on {dimension}; significance testing needs at least 2")]
    InsufficientSeeds {
        condition: Condition,
        dimension: String,
        got: usize,
    },
    #[error("unequal seed counts across the four interaction cells on {dimension}: {sizes:?}")]
    UnbalancedSeeds { dimension: String, sizes: [usize; 4] },
    #[error("effect vectors have different dimension lists")]
    DimensionMismatch,
    #[error("no reference states given")]
    EmptyReferences,
    #[error("threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error(transparent)]
    Record(#[from] RecordError),
}

impl EffectError {
    /// True when the failure is caused by absent observations rather than bad input.
    pub fn is_missing_data(&self) -> bool {
        matches!(
            self,
            EffectError::State(StateError::MissingCondition(_))
                | EffectError::State(StateError::MissingDimensions { .. })
                | EffectError::InsufficientSeeds { .. }
                | EffectError::UnbalancedSeeds { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectOptions {
    pub test: TTestKind,
    /// With a single seed per condition, report values without p-values instead of failing.
    pub allow_point_estimate: bool,
}

impl Default for EffectOptions {
    fn default() -> Self {
        Self {
            test: TTestKind::Pooled,
            allow_point_estimate: false,
        }
    }
}

fn check_disjoint(dataset: &str, reference: &Condition) -> Result<(), EffectError> {
    if reference.contains(dataset) {
        return Err(EffectError::Overlap {
            dataset: dataset.to_string(),
            reference: reference.clone(),
        });
    }
    Ok(())
}
