use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::InferenceError;

/// Sampler settings and bookkeeping recorded alongside the draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerMeta {
    pub seed: u64,
    pub chains: usize,
    /// Retained draws contributed by every chain, in row order.
    pub chain_lengths: Vec<usize>,
    pub adapt_iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Post-adaptation acceptance rate of every update block, averaged over
    /// chains.
    pub acceptance: BTreeMap<String, f64>,
}

/// `S` joint posterior draws over named parameter columns, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    names: Vec<String>,
    values: Vec<f64>,
    pub meta: SamplerMeta,
}

impl PosteriorSamples {
    pub fn new(names: Vec<String>, values: Vec<f64>, meta: SamplerMeta) -> Result<Self, InferenceError> {
        if names.is_empty() || !values.len().is_multiple_of(names.len()) {
            return Err(InferenceError::Shape(format!("{} values for {} columns", values.len(), names.len())));
        }
        Ok(Self { names, values, meta })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_params(&self) -> usize {
        self.names.len()
    }

    pub fn n_draws(&self) -> usize {
        self.values.len() / self.names.len()
    }

    pub fn row(&self, s: usize) -> &[f64] {
        let p = self.n_params();
        &self.values[s * p..(s + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n_params())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column_at(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, InferenceError> {
        let j = self.index_of(name).ok_or_else(|| InferenceError::UnknownTerm(name.to_string()))?;
        Ok(self.column_at(j))
    }

    /// Draws of chain `c` for column `j`.
    pub fn chain_column(&self, c: usize, j: usize) -> Vec<f64> {
        let start: usize = self.meta.chain_lengths[..c].iter().sum();
        let len = self.meta.chain_lengths[c];
        (start..start + len).map(|s| self.row(s)[j]).collect()
    }

    /// Rows reordered by `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for &s in order {
            values.extend_from_slice(self.row(s));
        }
        Self { names: self.names.clone(), values, meta: self.meta.clone() }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), InferenceError> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| InferenceError::Io(e.to_string());
        w.write_record(&self.names).map_err(io)?;
        for row in self.rows() {
            w.write_record(row.iter().map(|v| format!("{v}"))).map_err(io)?;
        }
        w.flush().map_err(|e| InferenceError::Io(e.to_string()))
    }

    /// Reads draws written by [`PosteriorSamples::write_csv`]; `meta` comes
    /// from the JSON sidecar.
    pub fn read_csv<R: Read>(reader: R, meta: SamplerMeta) -> Result<Self, InferenceError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| InferenceError::Io(format!("line 1: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| InferenceError::Io(format!("line {}: {e}", i + 2)))?;
            for cell in rec.iter() {
                values.push(
                    cell.parse::<f64>()
                        .map_err(|_| InferenceError::Io(format!("line {}: bad value {cell:?}", i + 2)))?,
                );
            }
        }
        let s = Self::new(names, values, meta)?;
        if s.meta.chain_lengths.iter().sum::<usize>() != s.n_draws() {
            return Err(InferenceError::Shape(format!(
                "sidecar lists {} draws, file has {}",
                s.meta.chain_lengths.iter().sum::<usize>(),
                s.n_draws()
            )));
        }
        Ok(s)
    }
}
