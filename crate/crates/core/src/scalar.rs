//! Scalar abstractions shared by the numeric modules.
//!
//! Two tiers are used:
//!
//! * [`Scalar`] is a field with exact-capable arithmetic. State vectors, effect
//!   vectors and the point-estimate formulations of individual and interaction
//!   effects only need this, so they also run over [`Exact`] rationals, where the
//!   group laws and the interaction decomposition hold with no rounding at all.
//! * [`Real`] adds `Float` for everything needing square roots, logarithms and
//!   tail probabilities (t-tests, ANOVA, the special functions).

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Arithmetic required for state and effect vectors.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Neg<Output = Self> + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Converts a stored accuracy into this scalar.
    ///
    /// Every finite `f64` is representable as a rational, so this only fails for
    /// non-finite input (or overflow in narrower float types).
    fn from_accuracy(value: f64) -> Option<Self> {
        Self::from_f64(value)
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Clone + Debug + PartialOrd + Num + Neg<Output = Self> + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Floating-point scalar for statistics.
pub trait Real: Scalar + Float + Display {
    /// Literal conversion; panics only if `v` is not representable, which never
    /// happens for the constants used in this crate.
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact rational scalar.
pub type Exact = BigRational;

/// Arithmetic mean. Returns `None` for an empty slice.
pub fn mean<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let sum = values.iter().cloned().fold(T::zero(), |acc, v| acc + v);
    Some(sum / T::from_count(values.len()))
}
