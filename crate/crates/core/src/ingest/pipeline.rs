//! Raster stack to slope-unit table.

use std::collections::BTreeMap;

use super::bedding::{classify_bedding_grid, Bedding};
use super::grid::Grid;
use super::label::{label_su, Centroid};
use super::standardize::Standardization;
use super::table::SlopeUnitTable;
use super::zonal::{aggregate_to_su, majority_class, resample_nearest_to_su, SuPartition, ZonalStat};
use super::IngestError;

/// Suffix of per-slope-unit means.
pub const MEAN_SUFFIX: &str = "_mu";
/// Suffix of per-slope-unit sample standard deviations.
pub const SD_SUFFIX: &str = "_sigma";
pub const PGA_PREFIX: &str = "PGA";
pub const BEDDING_COLUMN: &str = "B";

/// Everything needed to build the slope-unit table. Covariate rasters must
/// be aligned with the partition; the ground-motion lattice may be coarser.
#[derive(Debug, Clone)]
pub struct IngestInputs {
    pub partition: Grid,
    /// Continuous rasters; each yields `<name>_mu` and `<name>_sigma`.
    pub continuous: Vec<(String, Grid)>,
    /// Class-code rasters; each yields its majority class.
    pub categorical: Vec<(String, Grid)>,
    /// Aspect and dip-direction rasters, in degrees.
    pub bedding: Option<(Grid, Grid)>,
    /// Calibration PGA lattice in g; yields `PGA_mu` and `PGA_sigma`.
    pub pga: Option<Grid>,
    pub centroids: Vec<Centroid>,
}

#[derive(Debug, Clone)]
pub struct IngestOutput {
    pub table: SlopeUnitTable,
    /// Standardization of every raw numeric column, keyed by column name.
    pub scales: BTreeMap<String, Standardization>,
    pub partition: SuPartition,
    pub warnings: Vec<String>,
}

fn check_aligned(part: &SuPartition, name: &str, grid: &Grid) -> Result<(), IngestError> {
    if part.geometry.aligned_with(&grid.geometry) {
        Ok(())
    } else {
        Err(IngestError::Misaligned { expected: part.geometry, found: grid.geometry }.for_column(name))
    }
}

/// Aggregates every raster to the slope units, labels them from the
/// landslide centroids and standardizes every numeric column.
pub fn build_su_table(inputs: &IngestInputs) -> Result<IngestOutput, IngestError> {
    let part = SuPartition::from_grid(&inputs.partition)?;
    let labels = label_su(&inputs.centroids, &part);
    let mut table = SlopeUnitTable::new(part.ids().to_vec(), labels.labels.clone())?;
    let mut numeric = Vec::new();

    for (name, grid) in &inputs.continuous {
        check_aligned(&part, name, grid)?;
        let mu = format!("{name}{MEAN_SUFFIX}");
        let sd = format!("{name}{SD_SUFFIX}");
        table.push_numeric(&mu, aggregate_to_su(grid, &part, ZonalStat::Mean).map_err(|e| e.for_column(&mu))?)?;
        table.push_numeric(&sd, aggregate_to_su(grid, &part, ZonalStat::Sd).map_err(|e| e.for_column(&sd))?)?;
        numeric.push(mu);
        numeric.push(sd);
    }
    if let Some(pga) = &inputs.pga {
        let stats = resample_nearest_to_su(pga, &part)?;
        if let Some((k, _)) = stats.iter().enumerate().find(|(_, s)| s.1.is_nan()) {
            return Err(IngestError::InsufficientCells { su_id: part.ids()[k], needed: 2, found: 1 }
                .for_column(&format!("{PGA_PREFIX}{SD_SUFFIX}")));
        }
        let mu = format!("{PGA_PREFIX}{MEAN_SUFFIX}");
        let sd = format!("{PGA_PREFIX}{SD_SUFFIX}");
        table.push_numeric(&mu, stats.iter().map(|s| s.0).collect())?;
        table.push_numeric(&sd, stats.iter().map(|s| s.1).collect())?;
        numeric.push(mu);
        numeric.push(sd);
    }
    for (name, grid) in &inputs.categorical {
        check_aligned(&part, name, grid)?;
        let codes = majority_class(grid, &part).map_err(|e| e.for_column(name))?;
        table.push_categorical(name, codes.iter().map(i64::to_string).collect())?;
    }
    if let Some((aspect, dip)) = &inputs.bedding {
        check_aligned(&part, "aspect", aspect)?;
        let classes = classify_bedding_grid(aspect, dip)?;
        let codes = majority_class(&classes, &part).map_err(|e| e.for_column(BEDDING_COLUMN))?;
        let labels = codes
            .iter()
            .zip(part.ids())
            .map(|(&c, &su_id)| {
                Bedding::from_code(c).map(|b| b.to_string()).ok_or(IngestError::NonIntegerClass { su_id, value: c as f64 })
            })
            .collect::<Result<Vec<_>, _>>()?;
        table.push_categorical(BEDDING_COLUMN, labels)?;
    }

    let names: Vec<&str> = numeric.iter().map(String::as_str).collect();
    let scales = table.standardize_columns(&names)?;
    Ok(IngestOutput { table, scales, partition: part, warnings: labels.warnings })
}
