//! Dense-grid quadrature of the posterior of models with at most two
//! parameters (intercept and one fixed slope).
//!
//! The log-posterior is evaluated here from the raw design columns, without
//! going through the model module, so it can serve as an independent check
//! of the sampler.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::InferenceError;
use crate::model::DesignMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub nodes: usize,
    pub lower: f64,
    pub upper: f64,
    /// Largest tolerated share of posterior mass on the outermost grid ring.
    pub max_edge_mass: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { nodes: 401, lower: -10.0, upper: 10.0, max_edge_mass: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMoments {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl OracleMoments {
    pub fn get(&self, name: &str) -> Option<(f64, f64)> {
        let j = self.names.iter().position(|n| n == name)?;
        Some((self.mean[j], self.sd[j]))
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

struct Problem<'a> {
    x: Option<&'a [f64]>,
    y: &'a [u8],
    var0: f64,
    var1: f64,
}

impl Problem<'_> {
    fn log_density(&self, b0: f64, b1: f64) -> f64 {
        let mut ll = 0.0;
        for (i, &y) in self.y.iter().enumerate() {
            let eta = b0 + self.x.map_or(0.0, |x| b1 * x[i]);
            ll += if y == 1 { -softplus(-eta) } else { -softplus(eta) };
        }
        ll -= b0 * b0 / (2.0 * self.var0);
        if self.x.is_some() {
            ll -= b1 * b1 / (2.0 * self.var1);
        }
        ll
    }
}

struct Grid {
    axes: Vec<Vec<f64>>,
    /// Unnormalized weights, row-major over the axes.
    weights: Vec<f64>,
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn evaluate(problem: &Problem, axes: Vec<Vec<f64>>) -> Grid {
    let a0 = &axes[0];
    let a1: Vec<f64> = axes.get(1).cloned().unwrap_or_else(|| vec![0.0]);
    let logs: Vec<f64> =
        a0.par_iter().flat_map_iter(|&b0| a1.iter().map(move |&b1| problem.log_density(b0, b1))).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights = logs.iter().map(|l| (l - max).exp()).collect();
    Grid { axes, weights }
}

fn moments(grid: &Grid) -> (Vec<f64>, Vec<f64>, f64) {
    let d = grid.axes.len();
    let n1 = if d == 2 { grid.axes[1].len() } else { 1 };
    let n0 = grid.axes[0].len();
    let total: f64 = grid.weights.iter().sum();
    let mut mean = vec![0.0; d];
    let mut second = vec![0.0; d];
    let mut edge = 0.0;
    for i in 0..n0 {
        for j in 0..n1 {
            let w = grid.weights[i * n1 + j] / total;
            let at = [grid.axes[0][i], if d == 2 { grid.axes[1][j] } else { 0.0 }];
            for k in 0..d {
                mean[k] += w * at[k];
                second[k] += w * at[k] * at[k];
            }
            let on_edge = i == 0 || i == n0 - 1 || (d == 2 && (j == 0 || j == n1 - 1));
            if on_edge {
                edge += w;
            }
        }
    }
    let sd = mean.iter().zip(&second).map(|(m, s)| (s - m * m).max(0.0).sqrt()).collect();
    (mean, sd, edge)
}

/// Posterior mean and sd of every parameter by grid integration.
///
/// A first pass covers `[lower, upper]` on every axis; a second pass of the
/// same resolution is centred on the first-pass moments so narrow posteriors
/// are resolved. Either pass leaving more than `max_edge_mass` on the
/// boundary ring is an error.
pub fn quadrature_oracle(
    design: &DesignMatrix,
    labels: &[u8],
    config: &OracleConfig,
) -> Result<OracleMoments, InferenceError> {
    if design.layout.has_random_terms() || design.fixed.len() > 1 {
        return Err(InferenceError::NotOracleModel(design.layout.len()));
    }
    if labels.len() != design.n_rows {
        return Err(InferenceError::Shape(format!("{} labels for {} design rows", labels.len(), design.n_rows)));
    }
    if config.nodes < 3 || !(config.upper > config.lower) {
        return Err(InferenceError::Config("oracle grid needs at least 3 nodes and a positive range".into()));
    }
    let problem = Problem {
        x: design.fixed.first().map(Vec::as_slice),
        y: labels,
        var0: design.priors.intercept_var,
        var1: design.priors.fixed_var,
    };
    let d = 1 + design.fixed.len();

    let coarse = evaluate(&problem, vec![axis(config.lower, config.upper, config.nodes); d]);
    let (mean, sd, edge) = moments(&coarse);
    if !(edge <= config.max_edge_mass) {
        return Err(InferenceError::WidenGrid(edge));
    }
    let step = (config.upper - config.lower) / (config.nodes - 1) as f64;
    let axes = (0..d)
        .map(|k| {
            let half = (12.0 * sd[k]).max(2.0 * step);
            axis(mean[k] - half, mean[k] + half, config.nodes)
        })
        .collect();
    let fine = evaluate(&problem, axes);
    let (mean, sd, edge) = moments(&fine);
    if !(edge <= config.max_edge_mass) {
        return Err(InferenceError::WidenGrid(edge));
    }
    Ok(OracleMoments { names: design.layout.names.clone(), mean, sd })
}
