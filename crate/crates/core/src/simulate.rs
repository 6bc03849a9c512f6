//! Posterior simulation of susceptibility under the calibration ground motion
//! and under historical ground-motion scenarios.
//!
//! Every simulated linear predictor is the correctly rounded sum of its
//! terms. The scenario swap subtracts the calibration PGA contribution and
//! adds the scenario one inside the same exact accumulator, so it agrees bit
//! for bit with a full re-evaluation using the scenario column.

use std::collections::HashMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::inference::PosteriorSamples;
use crate::ingest::{ScenarioField, Standardization};
use crate::model::posterior::for_each_term;
use crate::model::DesignMatrix;
use crate::stats::{exact_sum, inverse_logit, quantile_sorted, ExactSum};

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("posterior columns do not match the design layout: {0}")]
    LayoutMismatch(String),
    #[error("{su_ids} slope-unit ids for {rows} design rows")]
    IdMismatch { su_ids: usize, rows: usize },
    #[error("term {0} is not a fixed term of the design")]
    UnknownTerm(String),
    #[error("scenario {name} lacks {} slope units: {}", missing.len(), list_ids(missing))]
    MissingSlopeUnits { name: String, missing: Vec<u32> },
    #[error("scenario {name} is on scale mean={found_mean}, sd={found_sd}; calibration uses mean={mean}, sd={sd}")]
    ScaleMismatch { name: String, mean: f64, sd: f64, found_mean: f64, found_sd: f64 },
    #[error("summaries cover different slope units: {0}")]
    SuSetMismatch(String),
    #[error("need at least {needed} inputs, got {found}")]
    TooFew { needed: usize, found: usize },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

fn list_ids(ids: &[u32]) -> String {
    ids.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// `S x N` simulated susceptibilities, row-major by draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSimulation {
    pub name: String,
    pub su_ids: Vec<u32>,
    values: Vec<f64>,
    pub posterior_id: String,
    pub scenario_id: String,
}

impl ScenarioSimulation {
    pub fn n_draws(&self) -> usize {
        self.values.len() / self.su_ids.len().max(1)
    }

    pub fn n_su(&self) -> usize {
        self.su_ids.len()
    }

    pub fn draw(&self, s: usize) -> &[f64] {
        let n = self.n_su();
        &self.values[s * n..(s + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Draws of slope unit `i` across all posterior rows.
    pub fn su_draws(&self, i: usize) -> Vec<f64> {
        (0..self.n_draws()).map(|s| self.draw(s)[i]).collect()
    }
}

/// Short content hash of the posterior draws.
pub fn posterior_id(samples: &PosteriorSamples) -> String {
    let mut h = Sha256::new();
    for name in samples.names() {
        h.update(name.as_bytes());
        h.update([0]);
    }
    for row in samples.rows() {
        for v in row {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(&h.finalize()[..8])
}

fn scenario_id(name: &str, ids: &[u32], values: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update(name.as_bytes());
    h.update([0]);
    for (id, v) in ids.iter().zip(values) {
        h.update(id.to_le_bytes());
        h.update(v.to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

fn check_inputs(samples: &PosteriorSamples, design: &DesignMatrix, su_ids: &[u32]) -> Result<(), SimulateError> {
    if samples.names() != design.layout.names.as_slice() {
        return Err(SimulateError::LayoutMismatch(format!(
            "{} posterior columns, {} layout parameters",
            samples.n_params(),
            design.layout.len()
        )));
    }
    if su_ids.len() != design.n_rows {
        return Err(SimulateError::IdMismatch { su_ids: su_ids.len(), rows: design.n_rows });
    }
    Ok(())
}

fn simulate(
    samples: &PosteriorSamples,
    design: &DesignMatrix,
    swap: Option<(usize, &[f64])>,
) -> Vec<f64> {
    let n = design.n_rows;
    let rows: Vec<&[f64]> = samples.rows().collect();
    rows.par_iter()
        .flat_map_iter(|theta| {
            let mut acc = ExactSum::new();
            (0..n).map(move |i| {
                acc.clear();
                for_each_term(theta, design, i, None, |t| acc.add(t));
                if let Some((j, x)) = swap {
                    let beta = theta[1 + j];
                    acc.add(-(beta * design.fixed[j][i]));
                    acc.add(beta * x[i]);
                }
                inverse_logit(acc.value())
            })
        })
        .collect()
}

/// Susceptibility of every slope unit under every posterior draw, using the
/// calibration covariates.
pub fn simulate_reference(
    samples: &PosteriorSamples,
    design: &DesignMatrix,
    su_ids: &[u32],
    name: &str,
) -> Result<ScenarioSimulation, SimulateError> {
    check_inputs(samples, design, su_ids)?;
    Ok(ScenarioSimulation {
        name: name.to_string(),
        su_ids: su_ids.to_vec(),
        values: simulate(samples, design, None),
        posterior_id: posterior_id(samples),
        scenario_id: scenario_id(name, su_ids, &[]),
    })
}

/// Calibration column whose contribution a scenario replaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapTarget {
    /// Fixed term name in the design, e.g. `PGA_mu_z`.
    pub term: String,
    /// Standardization of the raw calibration column.
    pub scale: Standardization,
}

/// Replaces, draw by draw, `beta_s * x_calibration` by `beta_s * x_scenario`
/// in the linear predictor.
pub fn swap_scenario(
    samples: &PosteriorSamples,
    design: &DesignMatrix,
    su_ids: &[u32],
    scenario: &ScenarioField,
    target: &SwapTarget,
) -> Result<ScenarioSimulation, SimulateError> {
    check_inputs(samples, design, su_ids)?;
    let j = design.fixed_position(&target.term).ok_or_else(|| SimulateError::UnknownTerm(target.term.clone()))?;
    let same_bits = |a: f64, b: f64| a.to_bits() == b.to_bits();
    if !same_bits(scenario.scale.mean, target.scale.mean) || !same_bits(scenario.scale.sd, target.scale.sd) {
        return Err(SimulateError::ScaleMismatch {
            name: scenario.name.clone(),
            mean: target.scale.mean,
            sd: target.scale.sd,
            found_mean: scenario.scale.mean,
            found_sd: scenario.scale.sd,
        });
    }
    let x = scenario
        .aligned_to(su_ids)
        .map_err(|missing| SimulateError::MissingSlopeUnits { name: scenario.name.clone(), missing })?;
    Ok(ScenarioSimulation {
        name: scenario.name.clone(),
        su_ids: su_ids.to_vec(),
        values: simulate(samples, design, Some((j, &x))),
        posterior_id: posterior_id(samples),
        scenario_id: scenario_id(&scenario.name, &scenario.su_ids, &scenario.pga_g),
    })
}

/// Per-slope-unit posterior mean and central 95% interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilitySummary {
    pub name: String,
    pub su_ids: Vec<u32>,
    pub mean: Vec<f64>,
    pub q025: Vec<f64>,
    pub q975: Vec<f64>,
    pub ci_width: Vec<f64>,
}

impl SusceptibilitySummary {
    /// Summary of the values `columns[i]` of every slope unit `i`. Means are
    /// exact sums divided by the count, so they do not depend on value
    /// order.
    pub fn from_columns(name: &str, su_ids: Vec<u32>, columns: impl Iterator<Item = Vec<f64>>) -> Self {
        let mut mean = Vec::with_capacity(su_ids.len());
        let mut q025 = Vec::with_capacity(su_ids.len());
        let mut q975 = Vec::with_capacity(su_ids.len());
        for mut v in columns {
            mean.push(exact_sum(v.iter().copied()) / v.len() as f64);
            v.sort_by(f64::total_cmp);
            q025.push(quantile_sorted(&v, 0.025));
            q975.push(quantile_sorted(&v, 0.975));
        }
        let ci_width = q025.iter().zip(&q975).map(|(a, b)| b - a).collect();
        Self { name: name.to_string(), su_ids, mean, q025, q975, ci_width }
    }

    pub fn len(&self) -> usize {
        self.su_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.su_ids.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SimulateError> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| SimulateError::Io(e.to_string());
        w.write_record(["su_id", "mean", "q025", "q975", "ci_width"]).map_err(io)?;
        for i in 0..self.len() {
            w.write_record([
                self.su_ids[i].to_string(),
                self.mean[i].to_string(),
                self.q025[i].to_string(),
                self.q975[i].to_string(),
                self.ci_width[i].to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| SimulateError::Io(e.to_string()))
    }

    pub fn read_csv<R: Read>(name: &str, reader: R) -> Result<Self, SimulateError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| SimulateError::Csv { line: 1, message: e.to_string() })?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if header != ["su_id", "mean", "q025", "q975", "ci_width"] {
            return Err(SimulateError::Csv { line: 1, message: "header must be su_id,mean,q025,q975,ci_width".into() });
        }
        let mut s = Self {
            name: name.to_string(),
            su_ids: vec![],
            mean: vec![],
            q025: vec![],
            q975: vec![],
            ci_width: vec![],
        };
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| SimulateError::Csv { line, message: e.to_string() })?;
            let id = rec[0]
                .trim()
                .parse::<u32>()
                .map_err(|_| SimulateError::Csv { line, message: format!("bad su_id {:?}", &rec[0]) })?;
            let mut vals = [0.0; 4];
            for (k, v) in vals.iter_mut().enumerate() {
                let cell = rec[k + 1].trim();
                *v = cell
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| SimulateError::Csv { line, message: format!("bad value {cell:?}") })?;
            }
            s.su_ids.push(id);
            s.mean.push(vals[0]);
            s.q025.push(vals[1]);
            s.q975.push(vals[2]);
            s.ci_width.push(vals[3]);
        }
        Ok(s)
    }
}

/// Per-slope-unit mean and interpolated 2.5% and 97.5% quantiles over draws.
pub fn summarize_scenario(sim: &ScenarioSimulation) -> SusceptibilitySummary {
    SusceptibilitySummary::from_columns(&sim.name, sim.su_ids.clone(), (0..sim.n_su()).map(|i| sim.su_draws(i)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    /// Statistics across the per-scenario mean maps.
    MeanMaps,
    /// Statistics across all draws of all scenarios.
    PooledDraws,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedSummary {
    pub scenarios: Vec<String>,
    pub mode: CombineMode,
    pub summary: SusceptibilitySummary,
}

/// Maps every summary onto the slope-unit order of the first.
fn align<'a>(ids: &[u32], others: impl Iterator<Item = (&'a str, &'a [u32])>) -> Result<Vec<Vec<usize>>, SimulateError> {
    let mut out = Vec::new();
    for (name, other) in others {
        let pos: HashMap<u32, usize> = other.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        if other.len() != ids.len() || pos.len() != other.len() {
            return Err(SimulateError::SuSetMismatch(format!("{name} has {} slope units, expected {}", other.len(), ids.len())));
        }
        let mut map = Vec::with_capacity(ids.len());
        for id in ids {
            map.push(*pos.get(id).ok_or_else(|| SimulateError::SuSetMismatch(format!("{name} lacks slope unit {id}")))?);
        }
        out.push(map);
    }
    Ok(out)
}

/// Mean and 95% interval across the per-scenario mean maps. The result is
/// invariant under reordering of `summaries`.
pub fn combine_scenarios(summaries: &[SusceptibilitySummary]) -> Result<CombinedSummary, SimulateError> {
    if summaries.len() < 2 {
        return Err(SimulateError::TooFew { needed: 2, found: summaries.len() });
    }
    let ids = &summaries[0].su_ids;
    let maps = align(ids, summaries.iter().map(|s| (s.name.as_str(), s.su_ids.as_slice())))?;
    let columns = (0..ids.len()).map(|i| summaries.iter().zip(&maps).map(|(s, m)| s.mean[m[i]]).collect());
    Ok(CombinedSummary {
        scenarios: summaries.iter().map(|s| s.name.clone()).collect(),
        mode: CombineMode::MeanMaps,
        summary: SusceptibilitySummary::from_columns("combined", ids.clone(), columns),
    })
}

/// Mean and 95% interval across every draw of every scenario.
pub fn combine_pooled(sims: &[ScenarioSimulation]) -> Result<CombinedSummary, SimulateError> {
    if sims.len() < 2 {
        return Err(SimulateError::TooFew { needed: 2, found: sims.len() });
    }
    let ids = &sims[0].su_ids;
    let maps = align(ids, sims.iter().map(|s| (s.name.as_str(), s.su_ids.as_slice())))?;
    let columns = (0..ids.len()).map(|i| {
        sims.iter().zip(&maps).flat_map(|(s, m)| (0..s.n_draws()).map(move |d| s.draw(d)[m[i]])).collect()
    });
    Ok(CombinedSummary {
        scenarios: sims.iter().map(|s| s.name.clone()).collect(),
        mode: CombineMode::PooledDraws,
        summary: SusceptibilitySummary::from_columns("combined", ids.clone(), columns),
    })
}
