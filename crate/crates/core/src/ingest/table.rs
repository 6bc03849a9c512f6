use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use super::standardize::{standardize, Standardization};
use super::IngestError;

/// Suffix marking a standardized copy of a raw covariate column.
pub const STANDARDIZED_SUFFIX: &str = "_z";

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
    pub standardized: bool,
}

impl Column {
    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value of row `i` as a class label. Integral numeric codes print
    /// without a fractional part.
    pub fn label_at(&self, i: usize) -> String {
        match &self.data {
            ColumnData::Categorical(v) => v[i].clone(),
            ColumnData::Numeric(v) => {
                let x = v[i];
                if x.fract() == 0.0 && x.abs() < 1e15 {
                    format!("{}", x as i64)
                } else {
                    format!("{x}")
                }
            }
        }
    }
}

/// One row per slope unit: id, landslide label and aggregated covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeUnitTable {
    su_ids: Vec<u32>,
    labels: Vec<u8>,
    columns: Vec<Column>,
}

impl SlopeUnitTable {
    pub fn new(su_ids: Vec<u32>, labels: Vec<u8>) -> Result<Self, IngestError> {
        if su_ids.len() != labels.len() {
            return Err(IngestError::Table(format!("{} ids but {} labels", su_ids.len(), labels.len())));
        }
        let mut seen = HashSet::with_capacity(su_ids.len());
        for &id in &su_ids {
            if !seen.insert(id) {
                return Err(IngestError::Table(format!("duplicate su_id {id}")));
            }
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(IngestError::Table(format!("label {bad} is not 0 or 1")));
        }
        Ok(Self { su_ids, labels, columns: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.su_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.su_ids.is_empty()
    }

    pub fn su_ids(&self) -> &[u32] {
        &self.su_ids
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64], IngestError> {
        match self.column(name).map(|c| &c.data) {
            Some(ColumnData::Numeric(v)) => Ok(v),
            Some(ColumnData::Categorical(_)) => Err(IngestError::Table(format!("column {name} is categorical"))),
            None => Err(IngestError::MissingColumn(name.to_string())),
        }
    }

    fn push(&mut self, column: Column) -> Result<(), IngestError> {
        if column.name == "su_id" || column.name == "label" || self.column(&column.name).is_some() {
            return Err(IngestError::Table(format!("duplicate column {}", column.name)));
        }
        if column.name.is_empty() || column.name.contains([',', '"', '\n', '\r']) {
            return Err(IngestError::Table(format!("invalid column name {:?}", column.name)));
        }
        if column.len() != self.len() {
            return Err(IngestError::Table(format!(
                "column {} has {} rows, table has {}",
                column.name,
                column.len(),
                self.len()
            )));
        }
        self.columns.push(column);
        Ok(())
    }

    pub fn push_numeric(&mut self, name: &str, values: Vec<f64>) -> Result<(), IngestError> {
        let standardized = name.ends_with(STANDARDIZED_SUFFIX);
        self.push(Column { name: name.to_string(), data: ColumnData::Numeric(values), standardized })
    }

    pub fn push_categorical(&mut self, name: &str, values: Vec<String>) -> Result<(), IngestError> {
        self.push(Column { name: name.to_string(), data: ColumnData::Categorical(values), standardized: false })
    }

    /// Adds `<name>_z` for each listed raw column and returns the scales used.
    pub fn standardize_columns(&mut self, names: &[&str]) -> Result<BTreeMap<String, Standardization>, IngestError> {
        let mut scales = BTreeMap::new();
        for &name in names {
            let raw = self.numeric(name)?;
            let (z, scale) = standardize(raw).map_err(|e| e.for_column(name))?;
            self.push_numeric(&format!("{name}{STANDARDIZED_SUFFIX}"), z)?;
            scales.insert(name.to_string(), scale);
        }
        Ok(scales)
    }

    /// Every standardized column must have mean within `tol` of 0 and sample
    /// sd within `tol` of 1.
    pub fn check_standardized(&self, tol: f64) -> Result<(), IngestError> {
        for c in self.columns.iter().filter(|c| c.standardized) {
            if let ColumnData::Numeric(v) = &c.data {
                let m = crate::stats::mean(v);
                let s = crate::stats::sample_sd(v);
                if m.abs() > tol || (s - 1.0).abs() > tol {
                    return Err(IngestError::Table(format!("column {} has mean {m} and sd {s}", c.name)));
                }
            }
        }
        Ok(())
    }

    /// Rows at `rows`, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        let pick_f = |v: &[f64]| rows.iter().map(|&i| v[i]).collect();
        let pick_s = |v: &[String]| rows.iter().map(|&i| v[i].clone()).collect();
        Self {
            su_ids: rows.iter().map(|&i| self.su_ids[i]).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    standardized: c.standardized,
                    data: match &c.data {
                        ColumnData::Numeric(v) => ColumnData::Numeric(pick_f(v)),
                        ColumnData::Categorical(v) => ColumnData::Categorical(pick_s(v)),
                    },
                })
                .collect(),
        }
    }

    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Self, IngestError> {
        let mut t = Self::new(self.su_ids.clone(), labels)?;
        t.columns = self.columns.clone();
        Ok(t)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), IngestError> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| IngestError::Csv { line: 0, message: e.to_string() };
        let mut header = vec!["su_id".to_string(), "label".to_string()];
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        w.write_record(&header).map_err(csv_err)?;
        let mut rec = Vec::with_capacity(header.len());
        for i in 0..self.len() {
            rec.clear();
            rec.push(self.su_ids[i].to_string());
            rec.push(self.labels[i].to_string());
            for c in &self.columns {
                rec.push(match &c.data {
                    ColumnData::Numeric(v) => format!("{}", v[i]),
                    ColumnData::Categorical(v) => v[i].clone(),
                });
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| IngestError::Io(e.to_string()))?;
        Ok(())
    }

    /// Reads `su_id,label,<columns...>`. A column is numeric when every cell
    /// parses as a number, categorical otherwise.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| IngestError::Csv { line: 1, message: e.to_string() })?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if header.len() < 2 || header[0] != "su_id" || header[1] != "label" {
            return Err(IngestError::Csv { line: 1, message: "header must start with su_id,label".into() });
        }
        let ncov = header.len() - 2;
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        let mut raw: Vec<Vec<String>> = vec![Vec::new(); ncov];
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| IngestError::Csv { line, message: e.to_string() })?;
            let id = rec[0]
                .trim()
                .parse::<u32>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| IngestError::Csv { line, message: format!("bad su_id {:?}", &rec[0]) })?;
            let label = match rec[1].trim() {
                "0" => 0,
                "1" => 1,
                other => return Err(IngestError::Csv { line, message: format!("label {other:?} is not 0 or 1") }),
            };
            ids.push(id);
            labels.push(label);
            for (k, col) in raw.iter_mut().enumerate() {
                col.push(rec[k + 2].trim().to_string());
            }
        }
        let mut table = Self::new(ids, labels)?;
        for (name, cells) in header[2..].iter().zip(raw) {
            let parsed: Option<Vec<f64>> = cells.iter().map(|s| s.parse::<f64>().ok()).collect();
            match parsed {
                Some(v) if !cells.is_empty() => table.push_numeric(name, v)?,
                _ => table.push_categorical(name, cells)?,
            }
        }
        Ok(table)
    }
}
