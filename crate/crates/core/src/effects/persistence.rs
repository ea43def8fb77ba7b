use std::fmt;

use serde::Serialize;

use super::{individual_effect, EffectError, EffectOptions};
use crate::records::{Condition, ProbeDimension, RecordStore};
use crate::scalar::Real;

/// Fraction of reference states in which an effect must be significant with a
/// consistent sign to count as persistent.
pub const DEFAULT_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionPersistence {
    pub dimension: ProbeDimension,
    pub n_references: usize,
    pub n_significant_pos: usize,
    pub n_significant_neg: usize,
    pub persistent_sign: Option<Sign>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistenceSummary {
    pub dataset: String,
    pub model: String,
    pub threshold: f64,
    pub alpha: f64,
    pub references: Vec<Condition>,
    pub dims: Vec<DimensionPersistence>,
}

impl PersistenceSummary {
    pub fn persistent(&self) -> impl Iterator<Item = (&ProbeDimension, Sign)> {
        self.dims
            .iter()
            .filter_map(|d| d.persistent_sign.map(|s| (&d.dimension, s)))
    }
}

/// Minimum significant count for a persistent verdict: ⌈threshold · n⌉.
pub(crate) fn required_count(threshold: f64, n: usize) -> usize {
    // Tolerate representation error in the threshold (0.7 · 10 must give 7).
    ((threshold * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Counts significant positive and negative individual effects of `x` across
/// `references`. A sign is persistent when its count reaches
/// ⌈threshold · n_references⌉ and the opposite sign is never significant.
pub fn persistence_summary<T: Real>(
    store: &RecordStore,
    x: &str,
    references: &[Condition],
    threshold: f64,
    alpha: f64,
    options: &EffectOptions,
) -> Result<PersistenceSummary, EffectError> {
    if references.is_empty() {
        return Err(EffectError::EmptyReferences);
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(EffectError::InvalidThreshold(threshold));
    }
    let alpha_t = T::lit(alpha);
    let mut dims: Vec<DimensionPersistence> = Vec::new();
    for reference in references {
        let effect = individual_effect::<T>(store, x, reference, options)?;
        if dims.is_empty() {
            dims = effect
                .dims
                .iter()
                .map(|d| DimensionPersistence {
                    dimension: d.dimension.clone(),
                    n_references: 0,
                    n_significant_pos: 0,
                    n_significant_neg: 0,
                    persistent_sign: None,
                })
                .collect();
        }
        for (acc, d) in dims.iter_mut().zip(&effect.dims) {
            acc.n_references += 1;
            if d.p.is_some_and(|p| p < alpha_t) {
                if d.delta > T::zero() {
                    acc.n_significant_pos += 1;
                } else if d.delta < T::zero() {
                    acc.n_significant_neg += 1;
                }
            }
        }
    }
    for d in &mut dims {
        let need = required_count(threshold, d.n_references).max(1);
        d.persistent_sign = if d.n_significant_pos >= need && d.n_significant_neg == 0 {
            Some(Sign::Positive)
        } else if d.n_significant_neg >= need && d.n_significant_pos == 0 {
            Some(Sign::Negative)
        } else {
            None
        };
    }
    let model = references[0].model().to_string();
    Ok(PersistenceSummary {
        dataset: x.to_string(),
        model,
        threshold,
        alpha,
        references: references.to_vec(),
        dims,
    })
}
