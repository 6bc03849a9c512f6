//! Additive logistic model over slope units: term declarations, design assembly
//! and log-posterior evaluation.

pub mod design;
pub mod posterior;
pub mod spec;

use thiserror::Error;

pub use design::{build_design, DesignMatrix, FactorTerm, Layout, ParameterVector, Rw1Term};
pub use posterior::{
    linear_predictor, log_likelihood, log_posterior, project_sum_to_zero, rw1_penalty, LogPosterior,
};
pub use spec::{ModelSpec, Priors, Rw1Spec, REFERENCE_FIXED};

pub use crate::stats::inverse_logit;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model spec: {0}")]
    Spec(String),
    #[error("column {0} not found in table")]
    MissingColumn(String),
    #[error("fixed term {0} must use a standardized column")]
    NotStandardized(String),
    #[error("column {column}: value {value} outside the declared bin edges")]
    OutOfRange { column: String, value: f64 },
    #[error("column {column}: non-finite value {value}")]
    NonFinite { column: String, value: f64 },
    #[error("row {row}: label {value} is not 0 or 1")]
    NonBinaryLabel { row: usize, value: u8 },
    #[error("shape mismatch: {0}")]
    Shape(String),
}
