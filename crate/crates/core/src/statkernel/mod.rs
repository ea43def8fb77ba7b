//! Numerical statistics: distribution tails, two-sample t-tests, and the
//! saturated 2×2 factorial model with its interaction ANOVA.

mod factorial;
mod special;
mod ttest;

use thiserror::Error;

pub use factorial::{anova_interaction, fit_2x2, interaction_t_test, AnovaResult, Cell, CellSamples, RegressionFit};
pub use special::{f_sf, ln_gamma, regularized_incomplete_beta, t_sf_two_sided, t_sf_two_sided_real};
pub use ttest::{pooled_t_test, two_sample_t_test, welch_t_test, TTestKind, TTestResult};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sample too small: need at least {needed} observations, got {got}")]
    InsufficientSample { needed: usize, got: usize },
    #[error("cell {0} of the 2x2 design has no observations")]
    EmptyCell(Cell),
    #[error("unbalanced design: cell sizes {0:?}")]
    Unbalanced([usize; 4]),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("singular normal equations")]
    Singular,
}

impl StatError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidArgument(msg.into())
    }
}

/// p-value cut-offs for one, two and three stars.
pub const STAR_THRESHOLDS: [f64; 3] = [0.05, 0.01, 0.001];

/// Number of significance stars (0–3) for a p-value.
pub fn stars<T: Real>(p: T) -> u8 {
    STAR_THRESHOLDS.iter().filter(|&&cut| p < T::lit(cut)).count() as u8
}

pub fn star_suffix(stars: u8) -> &'static str {
    match stars {
        0 => "",
        1 => "*",
        2 => "**",
        _ => "***",
    }
}
