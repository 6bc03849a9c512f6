use serde::{Deserialize, Serialize};

use super::samples::PosteriorSamples;
use super::InferenceError;
use crate::stats::{mean, quantile_sorted, sample_sd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Significance {
    Positive,
    Negative,
    NotSignificant,
}

impl std::fmt::Display for Significance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Positive => "positive",
            Self::Negative => "negative",
            Self::NotSignificant => "not-significant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
}

impl MarginalSummary {
    pub fn from_draws(name: &str, draws: &[f64]) -> Self {
        let mut sorted = draws.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            name: name.to_string(),
            mean: mean(draws),
            sd: sample_sd(draws),
            q025: quantile_sorted(&sorted, 0.025),
            q50: quantile_sorted(&sorted, 0.5),
            q975: quantile_sorted(&sorted, 0.975),
        }
    }

    pub fn ci_width(&self) -> f64 {
        self.q975 - self.q025
    }

    pub fn significance(&self) -> Significance {
        if self.q025 > 0.0 {
            Significance::Positive
        } else if self.q975 < 0.0 {
            Significance::Negative
        } else {
            Significance::NotSignificant
        }
    }
}

/// Mean, sd and the central 95% interval of every parameter column.
pub fn summarize_marginals(samples: &PosteriorSamples) -> Vec<MarginalSummary> {
    samples
        .names()
        .iter()
        .enumerate()
        .map(|(j, name)| MarginalSummary::from_draws(name, &samples.column_at(j)))
        .collect()
}

/// Whether the central 95% interval of `term` lies entirely above or below
/// zero.
pub fn classify_significance(samples: &PosteriorSamples, term: &str) -> Result<Significance, InferenceError> {
    let draws = samples.column(term)?;
    Ok(MarginalSummary::from_draws(term, &draws).significance())
}
