use std::collections::HashMap;
use std::ops::Range;

use super::spec::{ModelSpec, Priors};
use super::ModelError;
use crate::ingest::{ColumnData, SlopeUnitTable};

/// Class-indexed random term (iid or RW1): one effect per class.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTerm {
    pub name: String,
    /// Class labels; effect `k` belongs to `levels[k]`.
    pub levels: Vec<String>,
    /// Class of every row.
    pub index: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rw1Term {
    pub factor: FactorTerm,
    /// `K + 1` strictly increasing edges.
    pub edges: Vec<f64>,
    pub sum_to_zero: bool,
}

impl Rw1Term {
    pub fn k(&self) -> usize {
        self.edges.len() - 1
    }

    /// Bin of `x`; bins are `[e_k, e_{k+1})` except the last, which also
    /// holds its right edge. Values beyond the edges are clamped.
    pub fn bin_of(&self, x: f64) -> usize {
        let k = self.k();
        if x <= self.edges[0] {
            return 0;
        }
        if x >= self.edges[k] {
            return k - 1;
        }
        // first edge strictly greater than x, minus one
        self.edges.partition_point(|&e| e <= x) - 1
    }
}

/// Offsets of every parameter block inside a flat parameter vector:
/// `[intercept | fixed | iid effects... | rw1 effects... | log tau iid... | log tau rw1...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub n_fixed: usize,
    pub iid: Vec<Range<usize>>,
    pub rw1: Vec<Range<usize>>,
    pub log_tau_iid: Vec<usize>,
    pub log_tau_rw1: Vec<usize>,
    pub names: Vec<String>,
}

impl Layout {
    pub const INTERCEPT: usize = 0;

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn fixed(&self) -> Range<usize> {
        1..1 + self.n_fixed
    }

    /// Intercept plus fixed slopes.
    pub fn linear(&self) -> Range<usize> {
        0..1 + self.n_fixed
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn has_random_terms(&self) -> bool {
        !self.iid.is_empty() || !self.rw1.is_empty()
    }
}

pub fn intercept_name() -> &'static str {
    "(Intercept)"
}

pub fn fixed_name(col: &str) -> String {
    format!("beta[{col}]")
}

pub fn effect_name(col: &str, level: &str) -> String {
    format!("f[{col}][{level}]")
}

pub fn log_tau_name(col: &str) -> String {
    format!("log_tau[{col}]")
}

/// Flat vector of every latent coefficient and log-precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn zeros(layout: &Layout) -> Self {
        Self(vec![0.0; layout.len()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Per-row covariate values and class indices for every term of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub n_rows: usize,
    pub fixed_names: Vec<String>,
    /// Column-major fixed covariates: `fixed[j][i]`.
    pub fixed: Vec<Vec<f64>>,
    pub iid: Vec<FactorTerm>,
    pub rw1: Vec<Rw1Term>,
    pub priors: Priors,
    pub layout: Layout,
}

fn natural_levels(labels: &[String]) -> Vec<String> {
    let mut levels: Vec<String> = labels.to_vec();
    levels.sort();
    levels.dedup();
    let numeric: Option<Vec<f64>> = levels.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut pairs: Vec<(f64, String)> = nums.into_iter().zip(levels).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        return pairs.into_iter().map(|(_, s)| s).collect();
    }
    levels
}

/// Assembles the design for `spec` over the rows of `table`.
///
/// Fixed columns must be standardized. RW1 columns are cut into `K`
/// equal-width bins over their observed range unless explicit edges are given.
pub fn build_design(table: &SlopeUnitTable, spec: &ModelSpec) -> Result<DesignMatrix, ModelError> {
    spec.validate()?;
    let n = table.len();
    let col = |name: &str| table.column(name).ok_or_else(|| ModelError::MissingColumn(name.to_string()));

    let mut fixed = Vec::with_capacity(spec.fixed.len());
    for name in &spec.fixed {
        let c = col(name)?;
        match &c.data {
            ColumnData::Numeric(v) if c.standardized => {
                if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                    return Err(ModelError::NonFinite { column: name.clone(), value: *bad });
                }
                fixed.push(v.clone())
            }
            ColumnData::Numeric(_) => return Err(ModelError::NotStandardized(name.clone())),
            ColumnData::Categorical(_) => {
                return Err(ModelError::Spec(format!("fixed term {name} refers to a categorical column")))
            }
        }
    }

    let mut iid = Vec::with_capacity(spec.iid.len());
    for name in &spec.iid {
        let c = col(name)?;
        let labels: Vec<String> = (0..n).map(|i| c.label_at(i)).collect();
        let levels = natural_levels(&labels);
        let lookup: HashMap<&str, usize> = levels.iter().enumerate().map(|(k, l)| (l.as_str(), k)).collect();
        let index = labels.iter().map(|l| lookup[l.as_str()]).collect();
        iid.push(FactorTerm { name: name.clone(), levels, index });
    }

    let mut rw1 = Vec::with_capacity(spec.rw1.len());
    for r in &spec.rw1 {
        let values = table.numeric(&r.col).map_err(|_| ModelError::MissingColumn(r.col.clone()))?;
        if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
            return Err(ModelError::NonFinite { column: r.col.clone(), value: *bad });
        }
        let edges = match &r.edges {
            Some(e) => {
                if let Some(&x) = values.iter().find(|&&x| x < e[0] || x > e[r.k]) {
                    return Err(ModelError::OutOfRange { column: r.col.clone(), value: x });
                }
                e.clone()
            }
            None => equal_width_edges(values, r.k).ok_or_else(|| {
                ModelError::Spec(format!("RW1 column {} is constant; cannot bin", r.col))
            })?,
        };
        let levels = (0..r.k).map(|k| k.to_string()).collect();
        let mut term = Rw1Term {
            factor: FactorTerm { name: r.col.clone(), levels, index: Vec::new() },
            edges,
            sum_to_zero: r.sum_to_zero,
        };
        term.factor.index = values.iter().map(|&x| term.bin_of(x)).collect();
        rw1.push(term);
    }

    let layout = make_layout(&spec.fixed, &iid, &rw1);
    Ok(DesignMatrix { n_rows: n, fixed_names: spec.fixed.clone(), fixed, iid, rw1, priors: spec.priors, layout })
}

/// `k + 1` equal-width edges over `[min, max]` of `values`.
pub fn equal_width_edges(values: &[f64], k: usize) -> Option<Vec<f64>> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return None;
    }
    let w = (hi - lo) / k as f64;
    let mut e: Vec<f64> = (0..=k).map(|i| lo + i as f64 * w).collect();
    e[k] = hi;
    Some(e)
}

fn make_layout(fixed: &[String], iid: &[FactorTerm], rw1: &[Rw1Term]) -> Layout {
    let mut names = vec![intercept_name().to_string()];
    names.extend(fixed.iter().map(|c| fixed_name(c)));
    let mut iid_ranges = Vec::new();
    for t in iid {
        let start = names.len();
        names.extend(t.levels.iter().map(|l| effect_name(&t.name, l)));
        iid_ranges.push(start..names.len());
    }
    let mut rw1_ranges = Vec::new();
    for t in rw1 {
        let start = names.len();
        names.extend(t.factor.levels.iter().map(|l| effect_name(&t.factor.name, l)));
        rw1_ranges.push(start..names.len());
    }
    let mut log_tau_iid = Vec::new();
    for t in iid {
        log_tau_iid.push(names.len());
        names.push(log_tau_name(&t.name));
    }
    let mut log_tau_rw1 = Vec::new();
    for t in rw1 {
        log_tau_rw1.push(names.len());
        names.push(log_tau_name(&t.factor.name));
    }
    Layout { n_fixed: fixed.len(), iid: iid_ranges, rw1: rw1_ranges, log_tau_iid, log_tau_rw1, names }
}

impl DesignMatrix {
    /// Rows at `rows`, keeping bin edges, class levels and parameter layout.
    pub fn subset(&self, rows: &[usize]) -> Self {
        let pick = |v: &[usize]| rows.iter().map(|&i| v[i]).collect();
        Self {
            n_rows: rows.len(),
            fixed_names: self.fixed_names.clone(),
            fixed: self.fixed.iter().map(|c| rows.iter().map(|&i| c[i]).collect()).collect(),
            iid: self.iid.iter().map(|t| FactorTerm { index: pick(&t.index), ..t.clone() }).collect(),
            rw1: self
                .rw1
                .iter()
                .map(|t| Rw1Term { factor: FactorTerm { index: pick(&t.factor.index), ..t.factor.clone() }, ..t.clone() })
                .collect(),
            priors: self.priors,
            layout: self.layout.clone(),
        }
    }

    pub fn fixed_position(&self, name: &str) -> Option<usize> {
        self.fixed_names.iter().position(|n| n == name)
    }

    /// Copy of the design with one fixed column replaced.
    pub fn with_fixed_column(&self, name: &str, values: Vec<f64>) -> Result<Self, ModelError> {
        let j = self.fixed_position(name).ok_or_else(|| ModelError::MissingColumn(name.to_string()))?;
        if values.len() != self.n_rows {
            return Err(ModelError::Shape(format!("column {name} has {} rows, design has {}", values.len(), self.n_rows)));
        }
        let mut out = self.clone();
        out.fixed[j] = values;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::spec::Rw1Spec;

    fn table() -> SlopeUnitTable {
        let mut t = SlopeUnitTable::new(vec![1, 2, 3], vec![0, 1, 0]).unwrap();
        t.push_numeric("x_z", vec![-1.0, 0.0, 1.0]).unwrap();
        t.push_numeric("raw", vec![0.0, 10.0, 40.0]).unwrap();
        t.push_categorical("Geo", vec!["T".into(), "Q".into(), "T".into()]).unwrap();
        t.push_numeric("code", vec![10.0, 2.0, 2.0]).unwrap();
        t
    }

    #[test]
    fn one_fixed_term() {
        let spec = ModelSpec { fixed: vec!["x_z".into()], ..ModelSpec::intercept_only() };
        let d = build_design(&table(), &spec).unwrap();
        assert_eq!(d.n_rows, 3);
        assert_eq!(d.fixed[0], vec![-1.0, 0.0, 1.0]);
        assert_eq!(d.layout.names, vec!["(Intercept)", "beta[x_z]"]);
    }

    #[test]
    fn rw1_binning() {
        let spec = ModelSpec { rw1: vec![Rw1Spec::new("raw", 4)], ..ModelSpec::intercept_only() };
        let d = build_design(&table(), &spec).unwrap();
        let t = &d.rw1[0];
        assert_eq!(t.edges, vec![0.0, 10.0, 20.0, 30.0, 40.0]);
        assert_eq!(t.factor.index, vec![0, 1, 3]);
        assert_eq!(t.bin_of(10.0), 1);
        assert_eq!(t.bin_of(40.0), 3);
        assert_eq!(t.bin_of(-5.0), 0);
        assert_eq!(t.bin_of(99.0), 3);
    }

    #[test]
    fn iid_levels_use_natural_order() {
        let spec = ModelSpec { iid: vec!["Geo".into(), "code".into()], ..ModelSpec::intercept_only() };
        let d = build_design(&table(), &spec).unwrap();
        assert_eq!(d.iid[0].levels, vec!["Q", "T"]);
        assert_eq!(d.iid[0].index, vec![1, 0, 1]);
        assert_eq!(d.iid[1].levels, vec!["2", "10"]);
        assert_eq!(d.iid[1].index, vec![1, 0, 0]);
        assert_eq!(d.layout.len(), 1 + 2 + 2 + 2);
        assert_eq!(d.layout.log_tau_iid, vec![5, 6]);
    }

    #[test]
    fn errors() {
        let missing = ModelSpec { fixed: vec!["nope".into()], ..ModelSpec::intercept_only() };
        assert!(matches!(build_design(&table(), &missing), Err(ModelError::MissingColumn(_))));
        let raw = ModelSpec { fixed: vec!["raw".into()], ..ModelSpec::intercept_only() };
        assert!(matches!(build_design(&table(), &raw), Err(ModelError::NotStandardized(_))));
        let mut r = Rw1Spec::new("raw", 3);
        r.edges = Some(vec![0.0, 5.0, 10.0, 20.0]);
        let out = ModelSpec { rw1: vec![r], ..ModelSpec::intercept_only() };
        assert!(matches!(build_design(&table(), &out), Err(ModelError::OutOfRange { .. })));
    }

    #[test]
    fn subset_keeps_structure() {
        let spec = ModelSpec { fixed: vec!["x_z".into()], rw1: vec![Rw1Spec::new("raw", 4)], ..ModelSpec::intercept_only() };
        let d = build_design(&table(), &spec).unwrap();
        let s = d.subset(&[2]);
        assert_eq!(s.fixed[0], vec![1.0]);
        assert_eq!(s.rw1[0].factor.index, vec![3]);
        assert_eq!(s.layout, d.layout);
    }
}
