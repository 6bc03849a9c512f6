use std::collections::HashMap;
use std::io::Read;

use super::grid::Grid;
use super::standardize::Standardization;
use super::zonal::{resample_nearest_to_su, SuPartition};
use super::IngestError;

/// Historical ground-motion field for every slope unit: PGA in g and the same
/// values on the calibration standardization scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioField {
    pub name: String,
    pub su_ids: Vec<u32>,
    pub pga_g: Vec<f64>,
    pub standardized: Vec<f64>,
    /// Scale the standardized values were projected with.
    pub scale: Standardization,
}

impl ScenarioField {
    /// Projects per-SU PGA values (in g) onto the calibration scale.
    pub fn new(name: &str, su_ids: Vec<u32>, pga_g: Vec<f64>, scale: Standardization) -> Result<Self, IngestError> {
        if su_ids.len() != pga_g.len() {
            return Err(IngestError::Table(format!("scenario {name}: {} ids, {} values", su_ids.len(), pga_g.len())));
        }
        if let Some((id, v)) = su_ids.iter().zip(&pga_g).find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(IngestError::Table(format!("scenario {name}: PGA {v} at SU {id} must be a non-negative number")));
        }
        let standardized = scale.apply_all(&pga_g);
        Ok(Self { name: name.to_string(), su_ids, pga_g, standardized, scale })
    }

    /// Standardized values re-ordered to `order`; lists every id the
    /// scenario lacks.
    pub fn aligned_to(&self, order: &[u32]) -> Result<Vec<f64>, Vec<u32>> {
        let map: HashMap<u32, f64> = self.su_ids.iter().copied().zip(self.standardized.iter().copied()).collect();
        let mut missing = Vec::new();
        let out: Vec<f64> = order
            .iter()
            .map(|id| {
                map.get(id).copied().unwrap_or_else(|| {
                    missing.push(*id);
                    f64::NAN
                })
            })
            .collect();
        if missing.is_empty() {
            Ok(out)
        } else {
            Err(missing)
        }
    }
}

/// Reads a `su_id,pga_g` table.
pub fn read_scenario_csv<R: Read>(reader: R) -> Result<(Vec<u32>, Vec<f64>), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| IngestError::Csv { line: 1, message: e.to_string() })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.len() != 2 || header[0] != "su_id" || header[1] != "pga_g" {
        return Err(IngestError::Csv { line: 1, message: "scenario header must be su_id,pga_g".into() });
    }
    let mut ids = Vec::new();
    let mut vals = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| IngestError::Csv { line, message: e.to_string() })?;
        let id = rec[0]
            .trim()
            .parse::<u32>()
            .map_err(|_| IngestError::Csv { line, message: format!("bad su_id {:?}", &rec[0]) })?;
        let v = rec[1]
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| IngestError::Csv { line, message: format!("bad pga_g {:?}", &rec[1]) })?;
        ids.push(id);
        vals.push(v);
    }
    Ok((ids, vals))
}

/// Per-SU mean PGA of a ShakeMap lattice by nearest-cell lookup from the
/// partition cell centers.
pub fn scenario_from_grid(
    name: &str,
    pga: &Grid,
    part: &SuPartition,
    scale: Standardization,
) -> Result<ScenarioField, IngestError> {
    let stats = resample_nearest_to_su(pga, part)?;
    ScenarioField::new(name, part.ids().to_vec(), stats.into_iter().map(|(m, _)| m).collect(), scale)
}
