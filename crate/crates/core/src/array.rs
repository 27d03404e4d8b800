use alloc::vec::Vec;
use core::ops::Deref;

use crate::{Error, Result};

/// How the values of an [`FpArray`] were produced.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "kind"))]
pub enum Distribution {
    Uniform { lo: f64, hi: f64 },
    Normal { mu: f64, sigma: f64 },
    Explicit,
}

/// An immutable sequence of finite binary64 values plus its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FpArray {
    values: Vec<f64>,
    dist: Distribution,
    seed: u64,
}

impl FpArray {
    /// Wraps explicit values; rejects NaN and infinities.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_provenance(values, Distribution::Explicit, 0)
    }

    pub fn with_provenance(values: Vec<f64>, dist: Distribution, seed: u64) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(FpArray { values, dist, seed })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn distribution(&self) -> Distribution {
        self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl Deref for FpArray {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl TryFrom<Vec<f64>> for FpArray {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        FpArray::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            FpArray::new(vec![1.0, f64::INFINITY]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(matches!(
            FpArray::new(vec![f64::NAN]),
            Err(Error::NonFinite { index: 0, .. })
        ));
    }

    #[test]
    fn n_matches_len() {
        let a = FpArray::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(a.n(), 3);
        assert_eq!(a.len(), 3);
        assert_eq!(a.distribution(), Distribution::Explicit);
    }
}
