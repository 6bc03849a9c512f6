use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::stats::{exact_sum, ExactSum};

/// Location and scale used to put a covariate on the calibration scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub sd: f64,
}

impl Standardization {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }

    pub fn apply_all(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.apply(x)).collect()
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.sd + self.mean
    }
}

/// Rescales a per-SU column to zero mean and unit sample standard deviation.
pub fn standardize(column: &[f64]) -> Result<(Vec<f64>, Standardization), IngestError> {
    if column.iter().any(|v| !v.is_finite()) {
        return Err(IngestError::NonFinite { column: String::new() });
    }
    let n = column.len();
    if n < 2 {
        return Err(IngestError::ZeroVariance { column: String::new() });
    }
    let mean = exact_sum(column.iter().copied()) / n as f64;
    let mut acc = ExactSum::new();
    column.iter().for_each(|&x| acc.add((x - mean) * (x - mean)));
    let sd = (acc.value() / (n - 1) as f64).sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(IngestError::ZeroVariance { column: String::new() });
    }
    let scale = Standardization { mean, sd };
    Ok((scale.apply_all(column), scale))
}
