//! Raster, table and ground-motion ingestion: from pixel covariates and an SU
//! partition to a standardized per-slope-unit table.

pub mod bedding;
pub mod grid;
pub mod label;
pub mod pipeline;
pub mod scenario;
pub mod shakemap;
pub mod standardize;
pub mod table;
pub mod zonal;

use thiserror::Error;

pub use bedding::{classify_bedding, classify_bedding_grid, Bedding};
pub use grid::{parse_ascii_grid, Geometry, Grid};
pub use label::{label_su, read_centroids, Centroid, Labels};
pub use pipeline::{build_su_table, IngestInputs, IngestOutput};
pub use scenario::{read_scenario_csv, scenario_from_grid, ScenarioField};
pub use shakemap::{parse_shakemap_grid, write_shakemap_grid};
pub use standardize::{standardize, Standardization};
pub use table::{Column, ColumnData, SlopeUnitTable, STANDARDIZED_SUFFIX};
pub use zonal::{aggregate_to_su, majority_class, resample_nearest_to_su, SuPartition, ZonalStat};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed header: {message}")]
    Header { line: usize, message: String },
    #[error("line {line}: non-numeric token {token:?}")]
    Token { line: usize, token: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    CountMismatch { expected: usize, found: usize, line: usize },
    #[error("missing required field {0}")]
    MissingField(String),
    #[error("grid_data row {row}: {message}")]
    ShakemapRow { row: usize, message: String },
    #[error("invalid XML: {0}")]
    Xml(String),
    #[error("raster geometry {found:?} is not aligned with {expected:?}")]
    Misaligned { expected: Geometry, found: Geometry },
    #[error("cell ({row}, {col}) holds {value}, not a positive integer slope-unit id")]
    InvalidSuId { row: usize, col: usize, value: f64 },
    #[error("slope unit {su_id} has {found} usable cells, needs at least {needed}")]
    InsufficientCells { su_id: u32, needed: usize, found: usize },
    #[error("slope unit {su_id}: class code {value} is not an integer")]
    NonIntegerClass { su_id: u32, value: f64 },
    #[error("angle {0} outside [0, 360)")]
    AngleOutOfRange(f64),
    #[error("column {column:?} has zero variance")]
    ZeroVariance { column: String },
    #[error("column {column:?} contains non-finite values")]
    NonFinite { column: String },
    #[error("missing column {0}")]
    MissingColumn(String),
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("{0}")]
    Table(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl IngestError {
    pub(crate) fn for_column(self, name: &str) -> Self {
        match self {
            IngestError::ZeroVariance { .. } => IngestError::ZeroVariance { column: name.to_string() },
            IngestError::NonFinite { .. } => IngestError::NonFinite { column: name.to_string() },
            e => e,
        }
    }
}
