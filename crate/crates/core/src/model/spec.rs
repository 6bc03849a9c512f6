use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Prior hyperparameters shared by every term of a given kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Priors {
    /// Variance of the Gaussian prior on the intercept.
    #[serde(default = "default_var")]
    pub intercept_var: f64,
    /// Variance of the Gaussian prior on each fixed coefficient.
    #[serde(default = "default_var")]
    pub fixed_var: f64,
    /// Gamma shape of every random-effect precision.
    #[serde(default = "default_shape")]
    pub tau_shape: f64,
    /// Gamma rate of every random-effect precision.
    #[serde(default = "default_rate")]
    pub tau_rate: f64,
}

fn default_var() -> f64 {
    1000.0
}
fn default_shape() -> f64 {
    1.0
}
fn default_rate() -> f64 {
    5e-5
}

impl Default for Priors {
    fn default() -> Self {
        Self { intercept_var: default_var(), fixed_var: default_var(), tau_shape: default_shape(), tau_rate: default_rate() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rw1Spec {
    pub col: String,
    #[serde(rename = "K")]
    pub k: usize,
    /// Explicit `K + 1` bin edges; equal-width bins over the observed range
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<f64>>,
    #[serde(default = "default_true")]
    pub sum_to_zero: bool,
}

fn default_true() -> bool {
    true
}

impl Rw1Spec {
    pub fn new(col: &str, k: usize) -> Self {
        Self { col: col.to_string(), k, edges: None, sum_to_zero: true }
    }
}

/// Declarative linear predictor: intercept, fixed slopes on standardized
/// columns, exchangeable (iid) class effects and first-order random-walk
/// effects over binned continuous columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub fixed: Vec<String>,
    #[serde(default)]
    pub iid: Vec<String>,
    #[serde(default)]
    pub rw1: Vec<Rw1Spec>,
    #[serde(default)]
    pub priors: Priors,
}

impl ModelSpec {
    pub fn intercept_only() -> Self {
        Self { fixed: vec![], iid: vec![], rw1: vec![], priors: Priors::default() }
    }

    /// The reference susceptibility model: nine standardized fixed effects
    /// (ground motion among them), lithology and bedding as iid classes,
    /// mean slope and mean relative slope position as 20-bin random walks.
    pub fn reference() -> Self {
        Self {
            fixed: REFERENCE_FIXED.iter().map(|s| format!("{s}_z")).collect(),
            iid: vec!["Geo".into(), "B".into()],
            rw1: vec![Rw1Spec::new("Slope_mu", 20), Rw1Spec::new("RSP_mu", 20)],
            priors: Priors::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| ModelError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serializes")
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = HashSet::new();
        let names = self.fixed.iter().chain(&self.iid).chain(self.rw1.iter().map(|r| &r.col));
        for name in names {
            if !seen.insert(name.as_str()) {
                return Err(ModelError::Spec(format!("column {name} appears in more than one term")));
            }
        }
        for r in &self.rw1 {
            if r.k < 3 {
                return Err(ModelError::Spec(format!("RW1 term {} needs K >= 3, got {}", r.col, r.k)));
            }
            if let Some(e) = &r.edges {
                if e.len() != r.k + 1 {
                    return Err(ModelError::Spec(format!("RW1 term {} needs {} edges, got {}", r.col, r.k + 1, e.len())));
                }
                if e.iter().any(|x| !x.is_finite()) || e.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(ModelError::Spec(format!("RW1 term {} edges must be strictly increasing", r.col)));
                }
            }
        }
        let p = &self.priors;
        for (name, v) in [
            ("intercept_var", p.intercept_var),
            ("fixed_var", p.fixed_var),
            ("tau_shape", p.tau_shape),
            ("tau_rate", p.tau_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelError::Spec(format!("prior {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Raw covariate names entering the reference model linearly.
pub const REFERENCE_FIXED: [&str; 9] = [
    "Elev_mu",
    "Slope_sigma",
    "PRC_mu",
    "PLC_mu",
    "RSP_sigma",
    "TWI_mu",
    "Dist2F_mu",
    "Dist2S_mu",
    "PGA_mu",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_defaults() {
        let spec = ModelSpec::reference();
        spec.validate().unwrap();
        assert_eq!(ModelSpec::from_json(&spec.to_json()).unwrap(), spec);

        let s = ModelSpec::from_json(r#"{"fixed":["a_z"],"rw1":[{"col":"s","K":4}]}"#).unwrap();
        assert_eq!(s.priors, Priors::default());
        assert!(s.rw1[0].sum_to_zero);
        assert!(s.iid.is_empty());
    }

    #[test]
    fn invalid_specs() {
        assert!(ModelSpec::from_json(r#"{"fixed":["a"],"iid":["a"]}"#).is_err());
        assert!(ModelSpec::from_json(r#"{"rw1":[{"col":"s","K":2}]}"#).is_err());
        assert!(ModelSpec::from_json(r#"{"rw1":[{"col":"s","K":3,"edges":[0,1,1,2]}]}"#).is_err());
        assert!(ModelSpec::from_json(r#"{"rw1":[{"col":"s","K":3,"edges":[0,1,2]}]}"#).is_err());
        assert!(ModelSpec::from_json(r#"{"priors":{"tau_rate":0}}"#).is_err());
        assert!(ModelSpec::from_json(r#"{"fixd":[]}"#).is_err());
    }
}
