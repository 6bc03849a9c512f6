//! JSON run configuration. Relative paths resolve against the directory of
//! the configuration file; command-line flags override every value.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Retained posterior draws.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ingest: Option<IngestConfig>,
    /// Slope-unit table; `su_table.csv` in the output directory when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    /// Model definition (JSON); the reference model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    /// Partition raster used to sample scenario lattices and draw maps;
    /// `ingest.partition` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PathBuf>,
    /// Raw table column whose standardized form carries ground motion.
    #[serde(default = "default_pga_column")]
    pub pga_column: String,
    /// Name given to the calibration (reference) simulation.
    #[serde(default = "default_reference")]
    pub reference_name: String,
    #[serde(default)]
    pub scenarios: Vec<ScenarioInput>,
    /// Units of the `pga_g` column of scenario CSV files.
    #[serde(default)]
    pub scenario_csv_units: PgaUnits,
    #[serde(default)]
    pub combine: CombineKind,
    /// Landslide areas (`landslide_id,area_m2`) for the frequency-area plot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub areas: Option<PathBuf>,
    #[serde(default = "default_fad_bins")]
    pub fad_bins: usize,
}

fn default_pga_column() -> String {
    "PGA_mu".into()
}
fn default_reference() -> String {
    "reference".into()
}
fn default_fad_bins() -> usize {
    landslide_gam::validate::DEFAULT_FAD_BINS
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    pub partition: PathBuf,
    #[serde(default)]
    pub continuous: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub categorical: BTreeMap<String, PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bedding: Option<BeddingConfig>,
    /// Calibration ShakeMap `grid.xml`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pga: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroids: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeddingConfig {
    pub aspect: PathBuf,
    pub dip_direction: PathBuf,
}

/// A historical ground-motion field: a ShakeMap `grid.xml` or a
/// `su_id,pga_g` table, told apart by extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioInput {
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PgaUnits {
    #[default]
    G,
    /// Percent of g.
    Pctg,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineKind {
    #[default]
    MeanMaps,
    PooledDraws,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::user(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::user(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        cfg.resolve(&base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.out, &mut self.table, &mut self.model, &mut self.partition, &mut self.areas]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        if let Some(ing) = &mut self.ingest {
            fix(&mut ing.partition);
            ing.continuous.values_mut().for_each(fix);
            ing.categorical.values_mut().for_each(fix);
            if let Some(b) = &mut ing.bedding {
                fix(&mut b.aspect);
                fix(&mut b.dip_direction);
            }
            for p in [&mut ing.pga, &mut ing.centroids].into_iter().flatten() {
                fix(p);
            }
        }
        for s in &mut self.scenarios {
            fix(&mut s.path);
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn partition_path(&self) -> Option<PathBuf> {
        self.partition.clone().or_else(|| self.ingest.as_ref().map(|i| i.partition.clone()))
    }

    /// Every input file named by the configuration, for existence checks.
    pub fn referenced_files(&self) -> Vec<PathBuf> {
        let mut out = Vec::new();
        if let Some(ing) = &self.ingest {
            out.push(ing.partition.clone());
            out.extend(ing.continuous.values().cloned());
            out.extend(ing.categorical.values().cloned());
            if let Some(b) = &ing.bedding {
                out.push(b.aspect.clone());
                out.push(b.dip_direction.clone());
            }
            out.extend(ing.pga.iter().cloned());
            out.extend(ing.centroids.iter().cloned());
        }
        out.extend(self.model.iter().cloned());
        out.extend(self.scenarios.iter().map(|s| s.path.clone()));
        out
    }
}
