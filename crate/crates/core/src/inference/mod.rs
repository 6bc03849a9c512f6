//! Posterior sampling, convergence diagnostics, marginal summaries and a
//! grid-quadrature reference for tiny models.

pub mod diagnostics;
pub mod oracle;
pub mod polya_gamma;
pub mod sampler;
pub mod samples;
pub mod summary;

use thiserror::Error;

pub use diagnostics::{compute_diagnostics, ess, split_rhat, Diagnostics, ParameterDiagnostics};
pub use oracle::{quadrature_oracle, OracleConfig, OracleMoments};
pub use sampler::{sample_posterior, PosteriorFit, SamplerConfig};
pub use samples::{PosteriorSamples, SamplerMeta};
pub use summary::{classify_significance, summarize_marginals, MarginalSummary, Significance};

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("{0} retained draws requested; at least 100 are needed")]
    TooFewDraws(usize),
    #[error("log-posterior at the initial state is {0}")]
    NonFiniteInit(f64),
    #[error("quadrature needs at most two parameters and no random terms; model has {0}")]
    NotOracleModel(usize),
    #[error("{0:.3e} of the posterior mass lies on the grid boundary; widen the grid")]
    WidenGrid(f64),
    #[error("unknown term {0}")]
    UnknownTerm(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid sampler settings: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Io(String),
}
