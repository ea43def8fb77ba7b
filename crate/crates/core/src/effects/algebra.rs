use std::ops::Neg;

use serde::Serialize;

use super::EffectError;
use crate::records::ProbeDimension;
use crate::scalar::Scalar;

/// A per-dimension change of state, E ∈ ℝᴷ.
///
/// Under element-wise addition, effect vectors over a fixed dimension list form an
/// additive abelian group with the zero vector ("no effect") as identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectVector<T> {
    dims: Vec<ProbeDimension>,
    values: Vec<T>,
}

impl<T: Scalar> EffectVector<T> {
    pub fn new(dims: Vec<ProbeDimension>, values: Vec<T>) -> Result<Self, EffectError> {
        if dims.len() != values.len() {
            return Err(EffectError::DimensionMismatch);
        }
        Ok(Self { dims, values })
    }

    pub fn zero(dims: &[ProbeDimension]) -> Self {
        Self {
            dims: dims.to_vec(),
            values: vec![T::zero(); dims.len()],
        }
    }

    pub fn dims(&self) -> &[ProbeDimension] {
        &self.dims
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, dim: &ProbeDimension) -> Option<&T> {
        self.dims.iter().position(|d| d == dim).map(|i| &self.values[i])
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, EffectError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, EffectError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: &T) -> Self {
        self.map(|v| v * factor.clone())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            dims: self.dims.clone(),
            values: self.values.iter().cloned().map(f).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self, EffectError> {
        if self.dims != other.dims {
            return Err(EffectError::DimensionMismatch);
        }
        Ok(Self {
            dims: self.dims.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(a.clone(), b.clone()))
                .collect(),
        })
    }
}

impl<T: Scalar> Neg for EffectVector<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            dims: self.dims,
            values: self.values.into_iter().map(|v| -v).collect(),
        }
    }
}

impl<T: Scalar> Neg for &EffectVector<T> {
    type Output = EffectVector<T>;

    fn neg(self) -> EffectVector<T> {
        -self.clone()
    }
}

pub fn effect_add<T: Scalar>(a: &EffectVector<T>, b: &EffectVector<T>) -> Result<EffectVector<T>, EffectError> {
    a.checked_add(b)
}

pub fn effect_neg<T: Scalar>(a: &EffectVector<T>) -> EffectVector<T> {
    -a
}

pub fn effect_zero<T: Scalar>(dims: &[ProbeDimension]) -> EffectVector<T> {
    EffectVector::zero(dims)
}
