use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ p_e = 1` accepted without repair.
pub const SUM_TOLERANCE: f64 = 1e-12;
/// Largest deviation of `Σ p_e` from 1 that renormalization will repair.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;

/// A point of the nonnegative orthant ℝ^E_{≥0}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct NonnegPoint(Vec<f64>);

impl NonnegPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some((i, x)) = coords
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_finite() || **x < 0.0)
        {
            return Err(Error::InvalidPoint(format!("coordinate {i} is {x}")));
        }
        Ok(Self(coords))
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn ones(m: usize) -> Self {
        Self(vec![1.0; m])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|x| x * t).collect())
    }

    pub fn midpoint(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (a + b) / 2.0)
                .collect(),
        ))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for NonnegPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<NonnegPoint> for Vec<f64> {
    fn from(p: NonnegPoint) -> Vec<f64> {
        p.0
    }
}

/// A probability distribution on the ground set: a nonnegative vector
/// summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(NonnegPoint);

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let point = Self::checked_point(probs)?;
        let sum: f64 = point.0.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self(point))
    }

    /// Like [`Distribution::new`] but divides by the sum when it is within
    /// [`RENORMALIZE_TOLERANCE`] of 1.
    pub fn new_renormalized(probs: Vec<f64>) -> Result<Self> {
        let point = Self::checked_point(probs)?;
        let sum: f64 = point.0.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, too far from 1 to renormalize"
            )));
        }
        Ok(Self::from_weights_unchecked(point.0))
    }

    /// Normalizes arbitrary nonnegative weights with a positive sum.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let point = Self::checked_point(weights)?;
        let sum: f64 = point.0.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Err(Error::InvalidDistribution(format!("weights sum to {sum}")));
        }
        Ok(Self::from_weights_unchecked(point.0))
    }

    pub(crate) fn from_weights_unchecked(mut w: Vec<f64>) -> Self {
        let sum: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= sum);
        Self(NonnegPoint(w))
    }

    fn checked_point(probs: Vec<f64>) -> Result<NonnegPoint> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution(
                "empty probability vector".into(),
            ));
        }
        NonnegPoint::new(probs).map_err(|e| Error::InvalidDistribution(e.to_string()))
    }

    pub fn uniform(m: usize) -> Self {
        assert!(m > 0, "uniform distribution on an empty set");
        Self(NonnegPoint(vec![1.0 / m as f64; m]))
    }

    pub fn point_mass(m: usize, e: usize) -> Self {
        assert!(e < m, "point mass outside ground set");
        let mut v = vec![0.0; m];
        v[e] = 1.0;
        Self(NonnegPoint(v))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0 .0
    }

    pub fn as_point(&self) -> &NonnegPoint {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_interior(&self) -> bool {
        self.probs().iter().all(|&x| x > 0.0)
    }

    /// ‖self − other‖₂².
    pub fn l2_distance_sq(&self, other: &Distribution) -> f64 {
        self.probs()
            .iter()
            .zip(other.probs())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn linf_distance(&self, other: &Distribution) -> f64 {
        self.probs()
            .iter()
            .zip(other.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Convex combination `(1 − t)·self + t·other`.
    pub fn mix(&self, other: &Distribution, t: f64) -> Result<Distribution> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidDistribution(format!(
                "mixing weight {t} outside [0, 1]"
            )));
        }
        let v = self
            .probs()
            .iter()
            .zip(other.probs())
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        Ok(Self::from_weights_unchecked(v))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0 .0
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(p: Distribution) -> Vec<f64> {
        p.into_inner()
    }
}
