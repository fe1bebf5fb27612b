use std::ops::{Index, Sub};

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A point of `ℝⁿ` with finite components and the Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVector(SmallVec<[f64; 4]>);

impl AmbientVector {
    pub fn new(components: &[f64]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput(
                "vector must have at least one component".into(),
            ));
        }
        if let Some(bad) = components.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite component {bad}")));
        }
        Ok(Self(SmallVec::from_slice(components)))
    }

    /// Two-dimensional vector. Panics on non-finite input.
    pub fn xy(x: f64, y: f64) -> Self {
        Self::new(&[x, y]).expect("finite components")
    }

    pub fn zeros(dim: usize) -> Self {
        Self(SmallVec::from_elem(0.0, dim))
    }

    pub(crate) fn from_iter_unchecked(it: impl IntoIterator<Item = f64>) -> Self {
        Self(it.into_iter().collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_iter_unchecked(self.0.iter().map(|c| c * s))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

impl Index<usize> for AmbientVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Sub for &AmbientVector {
    type Output = AmbientVector;

    fn sub(self, rhs: &AmbientVector) -> AmbientVector {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        AmbientVector::from_iter_unchecked(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b))
    }
}

/// Euclidean norm without spurious overflow for moderate dimensions.
pub(crate) fn norm(v: &[f64]) -> f64 {
    match v {
        [x] => x.abs(),
        [x, y] => x.hypot(*y),
        _ => v.iter().map(|c| c * c).sum::<f64>().sqrt(),
    }
}
