//! Zonal statistics of pixel rasters over a slope-unit partition.

use std::collections::{BTreeMap, HashMap};

use super::grid::{Geometry, Grid};
use super::IngestError;
use crate::stats::ExactSum;

/// Slope-unit identifiers laid out cell-for-cell over a raster geometry.
#[derive(Debug, Clone)]
pub struct SuPartition {
    pub geometry: Geometry,
    cells: Vec<Option<u32>>,
    ids: Vec<u32>,
    index: HashMap<u32, usize>,
}

impl SuPartition {
    /// Builds a partition from an integer raster; nodata cells belong to no
    /// slope unit and every other cell must hold a positive integer id.
    pub fn from_grid(grid: &Grid) -> Result<Self, IngestError> {
        let mut cells = Vec::with_capacity(grid.values.len());
        for (i, &v) in grid.values.iter().enumerate() {
            if grid.is_nodata(v) {
                cells.push(None);
                continue;
            }
            if !(v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64) {
                let (row, col) = (i / grid.ncols(), i % grid.ncols());
                return Err(IngestError::InvalidSuId { row, col, value: v });
            }
            cells.push(Some(v as u32));
        }
        Ok(Self::from_cells(grid.geometry, cells))
    }

    pub(crate) fn from_cells(geometry: Geometry, cells: Vec<Option<u32>>) -> Self {
        let mut ids: Vec<u32> = cells.iter().flatten().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        let index = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        Self { geometry, cells, ids, index }
    }

    /// Valid slope-unit ids in ascending order. Per-SU columns produced by
    /// this module follow this order.
    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn position(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<u32> {
        self.cells[row * self.geometry.ncols + col]
    }

    /// Slope unit containing a map coordinate.
    pub fn su_at(&self, x: f64, y: f64) -> Option<u32> {
        let (r, c) = self.geometry.locate(x, y)?;
        self.cell(r, c)
    }

    /// Iterates `(row, col, su_id)` over every cell that belongs to a unit.
    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        let ncols = self.geometry.ncols;
        self.cells.iter().enumerate().filter_map(move |(i, c)| c.map(|id| (i / ncols, i % ncols, id)))
    }

    fn check_aligned(&self, grid: &Grid) -> Result<(), IngestError> {
        if self.geometry.aligned_with(&grid.geometry) {
            Ok(())
        } else {
            Err(IngestError::Misaligned { expected: self.geometry, found: grid.geometry })
        }
    }

    /// Groups the usable cell values of `grid` by slope unit.
    fn collect(&self, grid: &Grid) -> Result<Vec<Vec<f64>>, IngestError> {
        self.check_aligned(grid)?;
        let mut groups = vec![Vec::new(); self.ids.len()];
        for (cell, &v) in self.cells.iter().zip(&grid.values) {
            if let Some(id) = cell {
                if !grid.is_nodata(v) {
                    groups[self.index[id]].push(v);
                }
            }
        }
        Ok(groups)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZonalStat {
    Mean,
    /// Sample (n - 1) standard deviation.
    Sd,
}

/// Mean or sample standard deviation of the usable cells of every slope unit.
///
/// Sums are exact, so the result does not depend on cell order.
pub fn aggregate_to_su(grid: &Grid, part: &SuPartition, stat: ZonalStat) -> Result<Vec<f64>, IngestError> {
    let groups = part.collect(grid)?;
    let needed = match stat {
        ZonalStat::Mean => 1,
        ZonalStat::Sd => 2,
    };
    let mut acc = ExactSum::new();
    groups
        .iter()
        .zip(part.ids())
        .map(|(vals, &su_id)| {
            if vals.len() < needed {
                return Err(IngestError::InsufficientCells { su_id, needed, found: vals.len() });
            }
            acc.clear();
            vals.iter().for_each(|&v| acc.add(v));
            let n = vals.len() as f64;
            let mean = acc.value() / n;
            Ok(match stat {
                ZonalStat::Mean => mean,
                ZonalStat::Sd => {
                    acc.clear();
                    vals.iter().for_each(|&v| acc.add((v - mean) * (v - mean)));
                    (acc.value() / (n - 1.0)).sqrt()
                }
            })
        })
        .collect()
}

/// Most frequent class code per slope unit; ties go to the lowest code.
pub fn majority_class(grid: &Grid, part: &SuPartition) -> Result<Vec<i64>, IngestError> {
    let groups = part.collect(grid)?;
    groups
        .iter()
        .zip(part.ids())
        .map(|(vals, &su_id)| {
            let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
            for &v in vals {
                if v.fract() != 0.0 || v.abs() > 1e15 {
                    return Err(IngestError::NonIntegerClass { su_id, value: v });
                }
                *counts.entry(v as i64).or_default() += 1;
            }
            // BTreeMap iterates codes ascending; strict `>` keeps the lowest on ties
            let mut best: Option<(i64, usize)> = None;
            for (code, n) in counts {
                if best.is_none_or(|(_, m)| n > m) {
                    best = Some((code, n));
                }
            }
            best.map(|(c, _)| c).ok_or(IngestError::InsufficientCells { su_id, needed: 1, found: 0 })
        })
        .collect()
}

/// Samples a coarse raster (e.g. a 500 m ground-motion lattice) at the center
/// of every partition cell using the nearest coarse cell, then averages per
/// slope unit. Returns per-SU `(mean, sd)`; `sd` is NaN for single-cell units.
pub fn resample_nearest_to_su(coarse: &Grid, part: &SuPartition) -> Result<Vec<(f64, f64)>, IngestError> {
    let mut groups = vec![Vec::new(); part.len()];
    for (row, col, id) in part.iter_cells() {
        let (x, y) = part.geometry.cell_center(row, col);
        if let Some(v) = coarse.sample_nearest(x, y) {
            groups[part.index[&id]].push(v);
        }
    }
    let mut acc = ExactSum::new();
    groups
        .iter()
        .zip(part.ids())
        .map(|(vals, &su_id)| {
            if vals.is_empty() {
                return Err(IngestError::InsufficientCells { su_id, needed: 1, found: 0 });
            }
            acc.clear();
            vals.iter().for_each(|&v| acc.add(v));
            let n = vals.len() as f64;
            let mean = acc.value() / n;
            let sd = if vals.len() < 2 {
                f64::NAN
            } else {
                acc.clear();
                vals.iter().for_each(|&v| acc.add((v - mean) * (v - mean)));
                (acc.value() / (n - 1.0)).sqrt()
            };
            Ok((mean, sd))
        })
        .collect()
}
