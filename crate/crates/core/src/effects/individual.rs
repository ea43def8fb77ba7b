use serde::Serialize;

use super::{check_disjoint, EffectError, EffectOptions, EffectVector};
use crate::records::{Condition, ProbeDimension, RecordStore};
use crate::scalar::{Real, Scalar};
use crate::statevector::{estimate_state, state_delta};
use crate::statkernel::{stars, two_sample_t_test};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionEffect<T> {
    pub dimension: ProbeDimension,
    /// Difference of seed means, as a fraction.
    pub delta: T,
    /// `100 × delta`, percentage points.
    pub delta_pp: T,
    pub t: Option<T>,
    pub dof: Option<T>,
    /// Two-sided p-value; absent in point-estimate mode.
    pub p: Option<T>,
    pub stars: u8,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectResult<T> {
    pub dataset: String,
    pub reference: Condition,
    pub model: String,
    pub n_seeds: usize,
    pub dims: Vec<DimensionEffect<T>>,
}

impl<T: Scalar> EffectResult<T> {
    pub fn delta_vector(&self) -> EffectVector<T> {
        EffectVector::new(
            self.dims.iter().map(|d| d.dimension.clone()).collect(),
            self.dims.iter().map(|d| d.delta.clone()).collect(),
        )
        .expect("aligned")
    }
}

/// Point estimate of the effect of adding `added` to `reference`:
/// S([added, reference]) − S(reference).
pub fn effect_of_set<T: Scalar>(
    store: &RecordStore,
    added: &[&str],
    reference: &Condition,
) -> Result<EffectVector<T>, EffectError> {
    for d in added {
        check_disjoint(d, reference)?;
    }
    let with = reference.with(added)?;
    let s_with = estimate_state::<T>(store, &with)?;
    let s_ref = estimate_state::<T>(store, reference)?;
    Ok(state_delta(&s_with, &s_ref)?)
}

/// Individual effect of dataset `x` relative to `reference`, with a two-sample
/// t-test per dimension between the seed samples of S([X,I]) and S(I).
pub fn individual_effect<T: Real>(
    store: &RecordStore,
    x: &str,
    reference: &Condition,
    options: &EffectOptions,
) -> Result<EffectResult<T>, EffectError> {
    check_disjoint(x, reference)?;
    let with = reference.with(&[x])?;
    let s_with = estimate_state::<T>(store, &with)?;
    let s_ref = estimate_state::<T>(store, reference)?;
    let delta = state_delta(&s_with, &s_ref)?;
    let hundred = T::lit(100.0);

    let mut dims = Vec::with_capacity(delta.dims().len());
    for (i, (dim, d)) in delta.dims().iter().zip(delta.values()).enumerate() {
        let xs = s_with.sample_values(i);
        let ys = s_ref.sample_values(i);
        let (t, dof, p, degenerate) = if xs.len() >= 2 && ys.len() >= 2 {
            let r = two_sample_t_test(&xs, &ys, options.test)?;
            (Some(r.t), Some(r.dof), Some(r.p), r.degenerate)
        } else if options.allow_point_estimate {
            (None, None, None, false)
        } else {
            let (condition, got) = if xs.len() < 2 {
                (with.clone(), xs.len())
            } else {
                (reference.clone(), ys.len())
            };
            return Err(EffectError::InsufficientSeeds {
                condition,
                dimension: dim.to_string(),
                got,
            });
        };
        dims.push(DimensionEffect {
            dimension: dim.clone(),
            delta: *d,
            delta_pp: *d * hundred,
            t,
            dof,
            p,
            stars: p.map(stars).unwrap_or(0),
            degenerate,
        });
    }
    Ok(EffectResult {
        dataset: x.to_string(),
        reference: reference.clone(),
        model: reference.model().to_string(),
        n_seeds: s_with.n_seeds().min(s_ref.n_seeds()),
        dims,
    })
}

/// Every condition R of `model` in the store such that `x ∉ R` and `[x, R]` is
/// also present. Sorted by size, then names, so the initial state comes first.
pub fn reference_states(store: &RecordStore, x: &str, model: &str) -> Vec<Condition> {
    let mut refs: Vec<Condition> = store
        .conditions()
        .filter(|c| c.model() == model && !c.contains(x))
        .filter(|c| c.with(&[x]).is_ok_and(|w| store.contains_condition(&w)))
        .cloned()
        .collect();
    refs.sort_by(|a, b| {
        a.datasets()
            .len()
            .cmp(&b.datasets().len())
            .then_with(|| a.datasets().cmp(b.datasets()))
    });
    refs
}

/// Element-wise mean of several effects' deltas (a descriptive aggregate; it
/// carries no test of its own).
pub fn mean_effect<T: Scalar>(results: &[EffectResult<T>]) -> Result<Option<EffectVector<T>>, EffectError> {
    let Some(first) = results.first() else {
        return Ok(None);
    };
    let mut acc = first.delta_vector();
    for r in &results[1..] {
        acc = acc.checked_add(&r.delta_vector())?;
    }
    let n = T::from_count(results.len());
    Ok(Some(acc.map(|v| v / n.clone())))
}
