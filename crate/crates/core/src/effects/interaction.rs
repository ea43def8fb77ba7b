use std::collections::BTreeSet;

use serde::Serialize;

use super::{check_disjoint, EffectError, EffectOptions, EffectVector};
use crate::records::{Condition, ProbeDimension, RecordStore};
use crate::scalar::{Real, Scalar};
use crate::statevector::{estimate_state, state_delta, StateVector};
use crate::statkernel::{anova_interaction, fit_2x2, stars, CellSamples};

/// Maximum disagreement, in percentage points, tolerated between the three
/// interaction formulations.
pub const FORMULATION_TOLERANCE_PP: f64 = 1e-9;

/// Int(X,Y) computed three independent ways.
#[derive(Debug, Clone, PartialEq)]
pub struct Formulations<T> {
    /// E([X,Y]) − (E(X) + E(Y)).
    pub from_effects: EffectVector<T>,
    /// S([X,Y,I]) − S([X,I]) − S([Y,I]) + S(I).
    pub four_state: EffectVector<T>,
    /// β₃ of the indicator regression fitted on the per-seed samples.
    pub regression: EffectVector<T>,
}

struct FourStates<T> {
    reference: StateVector<T>,
    x: StateVector<T>,
    y: StateVector<T>,
    both: StateVector<T>,
}

impl<T: Scalar> FourStates<T> {
    fn load(store: &RecordStore, x: &str, y: &str, reference: &Condition) -> Result<Self, EffectError> {
        if x == y {
            return Err(EffectError::SameDataset(x.to_string()));
        }
        check_disjoint(x, reference)?;
        check_disjoint(y, reference)?;
        Ok(Self {
            reference: estimate_state(store, reference)?,
            x: estimate_state(store, &reference.with(&[x])?)?,
            y: estimate_state(store, &reference.with(&[y])?)?,
            both: estimate_state(store, &reference.with(&[x, y])?)?,
        })
    }

    fn cells(&self, dim: usize) -> CellSamples<T> {
        CellSamples::new(
            self.reference.sample_values(dim),
            self.x.sample_values(dim),
            self.y.sample_values(dim),
            self.both.sample_values(dim),
        )
    }

    fn formulations(&self) -> Result<Formulations<T>, EffectError> {
        let e_x = state_delta(&self.x, &self.reference)?;
        let e_y = state_delta(&self.y, &self.reference)?;
        let e_xy = state_delta(&self.both, &self.reference)?;
        let from_effects = e_xy.checked_sub(&e_x.checked_add(&e_y)?)?;

        let four_state = self
            .both
            .as_vector()
            .checked_sub(&self.x.as_vector())?
            .checked_sub(&self.y.as_vector())?
            .checked_add(&self.reference.as_vector())?;

        let dims = self.reference.dims().to_vec();
        let mut beta3 = Vec::with_capacity(dims.len());
        for i in 0..dims.len() {
            beta3.push(fit_2x2(&self.cells(i))?.beta[3].clone());
        }
        let regression = EffectVector::new(dims, beta3)?;
        Ok(Formulations {
            from_effects,
            four_state,
            regression,
        })
    }
}

/// Int(X,Y) relative to `reference` by all three formulations, without tests.
///
/// The pair is evaluated in name order, so swapping `x` and `y` yields identical
/// values.
pub fn interaction_formulations<T: Scalar>(
    store: &RecordStore,
    x: &str,
    y: &str,
    reference: &Condition,
) -> Result<Formulations<T>, EffectError> {
    let (a, b) = ordered(x, y);
    FourStates::<T>::load(store, a, b, reference)?.formulations()
}

fn ordered<'a>(x: &'a str, y: &'a str) -> (&'a str, &'a str) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionInteraction<T> {
    pub dimension: ProbeDimension,
    /// Int(X,Y) in percentage points (from E([X,Y]) − E(X) − E(Y)).
    pub int_pp: T,
    /// The four-state formulation, percentage points.
    pub four_state_pp: T,
    /// Regression coefficient β₃, as a fraction.
    pub beta3: T,
    pub f: Option<T>,
    pub df_den: Option<u32>,
    pub p: Option<T>,
    pub stars: u8,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionResult<T> {
    pub x: String,
    pub y: String,
    pub reference: Condition,
    pub model: String,
    pub n_seeds: usize,
    pub dims: Vec<DimensionInteraction<T>>,
    /// All three formulations agree within [`FORMULATION_TOLERANCE_PP`] on every dimension.
    pub formulations_agree: bool,
}

impl<T: Scalar> InteractionResult<T> {
    pub fn int_vector(&self) -> EffectVector<T> {
        EffectVector::new(
            self.dims.iter().map(|d| d.dimension.clone()).collect(),
            self.dims.iter().map(|d| d.int_pp.clone()).collect(),
        )
        .expect("aligned")
    }
}

/// Interaction effect of `x` and `y` relative to `reference`, with a balanced
/// 2×2 ANOVA over seeds for each dimension.
pub fn interaction_effect<T: Real>(
    store: &RecordStore,
    x: &str,
    y: &str,
    reference: &Condition,
    options: &EffectOptions,
) -> Result<InteractionResult<T>, EffectError> {
    let (a, b) = ordered(x, y);
    let states = FourStates::<T>::load(store, a, b, reference)?;
    let forms = states.formulations()?;
    let hundred = T::lit(100.0);
    let tol = T::lit(FORMULATION_TOLERANCE_PP);

    let mut agree = true;
    let mut dims = Vec::new();
    for (i, dim) in states.reference.dims().iter().enumerate() {
        let int_pp = forms.from_effects.values()[i] * hundred;
        let four_state_pp = forms.four_state.values()[i] * hundred;
        let beta3 = forms.regression.values()[i];
        agree &= (int_pp - four_state_pp).abs() <= tol && (int_pp - beta3 * hundred).abs() <= tol;

        let cells = states.cells(i);
        let sizes = cells.sizes();
        let (f, df_den, p, degenerate) = if sizes.iter().any(|&s| s != sizes[0]) {
            return Err(EffectError::UnbalancedSeeds {
                dimension: dim.to_string(),
                sizes,
            });
        } else if sizes[0] >= 2 {
            let r = anova_interaction(&cells)?;
            (Some(r.f), Some(r.df_den), Some(r.p), r.degenerate)
        } else if options.allow_point_estimate {
            (None, None, None, false)
        } else {
            return Err(EffectError::InsufficientSeeds {
                condition: reference.clone(),
                dimension: dim.to_string(),
                got: sizes[0],
            });
        };
        dims.push(DimensionInteraction {
            dimension: dim.clone(),
            int_pp,
            four_state_pp,
            beta3,
            f,
            df_den,
            p,
            stars: p.map(stars).unwrap_or(0),
            degenerate,
        });
    }
    Ok(InteractionResult {
        x: x.to_string(),
        y: y.to_string(),
        reference: reference.clone(),
        model: reference.model().to_string(),
        n_seeds: [&states.reference, &states.x, &states.y, &states.both]
            .iter()
            .map(|s| s.n_seeds())
            .min()
            .unwrap_or(0),
        dims,
        formulations_agree: agree,
    })
}

/// Unordered dataset pairs (x < y) whose four interaction states relative to
/// `reference` are all present in the store.
pub fn interaction_pairs(store: &RecordStore, reference: &Condition) -> Vec<(String, String)> {
    let singles: BTreeSet<&str> = store
        .conditions()
        .filter(|c| c.model() == reference.model() && c.datasets().len() == reference.datasets().len() + 1)
        .filter_map(|c| {
            let extra: Vec<&String> = c.datasets().iter().filter(|d| !reference.contains(d)).collect();
            (extra.len() == 1
                && c.datasets().iter().filter(|d| reference.contains(d)).count() == reference.datasets().len())
            .then(|| extra[0].as_str())
        })
        .collect();
    let singles: Vec<&str> = singles.into_iter().collect();
    let mut pairs = Vec::new();
    if !store.contains_condition(reference) {
        return pairs;
    }
    for (i, a) in singles.iter().enumerate() {
        for b in &singles[i + 1..] {
            if reference.with(&[a, b]).is_ok_and(|c| store.contains_condition(&c)) {
                pairs.push((a.to_string(), b.to_string()));
            }
        }
    }
    pairs
}
