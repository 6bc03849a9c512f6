//! Cross-validation, ROC scoring, uncertainty profiles and landslide
//! frequency-area statistics.

use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::inference::{sample_posterior, InferenceError, SamplerConfig};
use crate::ingest::SlopeUnitTable;
use crate::model::{build_design, ModelError, ModelSpec};
use crate::simulate::{simulate_reference, summarize_scenario, SimulateError, SusceptibilitySummary};
use crate::stats::quantile_sorted;

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("{k} folds requested for {n} slope units")]
    TooManyFolds { k: usize, n: usize },
    #[error("at least 2 folds are needed")]
    TooFewFolds,
    #[error("scores and labels have lengths {scores} and {labels}")]
    Length { scores: usize, labels: usize },
    #[error("ROC needs both classes; got {positives} positives and {negatives} negatives")]
    OneClass { positives: usize, negatives: usize },
    #[error("non-finite score {0}")]
    NonFiniteScore(f64),
    #[error("landslide area {0} must be positive and finite")]
    BadArea(f64),
    #[error("no landslide areas")]
    NoAreas,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error("{0}")]
    Io(String),
}

/// Fold index of every slope unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    pub su_ids: Vec<u32>,
    pub fold: Vec<usize>,
}

impl FoldAssignment {
    /// Row positions held out in fold `f`.
    pub fn test_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold.len()).filter(|&i| self.fold[i] == f).collect()
    }

    pub fn train_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold.len()).filter(|&i| self.fold[i] != f).collect()
    }
}

/// Seeded shuffle of the slope units, then round-robin fold assignment.
pub fn make_folds(su_ids: &[u32], k: usize, seed: u64) -> Result<FoldAssignment, ValidateError> {
    if k < 2 {
        return Err(ValidateError::TooFewFolds);
    }
    if k > su_ids.len() {
        return Err(ValidateError::TooManyFolds { k, n: su_ids.len() });
    }
    let mut order: Vec<usize> = (0..su_ids.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; su_ids.len()];
    for (rank, &i) in order.iter().enumerate() {
        fold[i] = rank % k;
    }
    Ok(FoldAssignment { k, seed, su_ids: su_ids.to_vec(), fold })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

impl RocCurve {
    /// Trapezoidal area under the point list.
    pub fn integral(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
    }
}

/// ROC curve by a threshold sweep over the distinct scores, and AUC as the
/// Mann-Whitney statistic with midranks, so a tie between a positive and a
/// negative counts one half.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<RocCurve, ValidateError> {
    if scores.len() != labels.len() {
        return Err(ValidateError::Length { scores: scores.len(), labels: labels.len() });
    }
    if let Some(&bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(ValidateError::NonFiniteScore(bad));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(ValidateError::OneClass { positives, negatives });
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // midrank sum of the positives over ascending scores
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + end) as f64 / 2.0 + 1.0;
        let pos_in_group = order[start..=end].iter().filter(|&&i| labels[i] == 1).count();
        rank_sum += midrank * pos_in_group as f64;
        start = end + 1;
    }
    let (p, n) = (positives as f64, negatives as f64);
    let auc = (rank_sum - p * (p + 1.0) / 2.0) / (p * n);

    // descending sweep; each distinct score admits all its ties at once
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = order.len();
    while k > 0 {
        let s = scores[order[k - 1]];
        while k > 0 && scores[order[k - 1]] == s {
            if labels[order[k - 1]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k -= 1;
        }
        points.push((fp as f64 / n, tp as f64 / p));
    }
    Ok(RocCurve { points, auc })
}

/// Median, interquartile distance and range of a set of AUC values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AucSpread {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub iqr: f64,
    pub min: f64,
    pub max: f64,
    pub range: f64,
}

pub fn auc_spread(aucs: &[f64]) -> Option<AucSpread> {
    if aucs.is_empty() {
        return None;
    }
    let mut v = aucs.to_vec();
    v.sort_by(f64::total_cmp);
    let (q25, median, q75) = (quantile_sorted(&v, 0.25), quantile_sorted(&v, 0.5), quantile_sorted(&v, 0.75));
    let (min, max) = (v[0], v[v.len() - 1]);
    Some(AucSpread { median, q25, q75, iqr: q75 - q25, min, max, range: max - min })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// SHA-256 of the sorted training slope-unit ids.
    pub training_hash: String,
    pub roc: Option<RocCurve>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub draws: usize,
    pub folds: Vec<FoldResult>,
    pub spread: Option<AucSpread>,
    /// Held-out posterior-mean susceptibility of every slope unit, `None`
    /// where its fold was skipped.
    pub predicted: Vec<(u32, Option<f64>)>,
}

impl CvReport {
    pub fn aucs(&self) -> Vec<f64> {
        self.folds.iter().filter_map(|f| f.roc.as_ref().map(|r| r.auc)).collect()
    }
}

pub fn training_hash(ids: &[u32]) -> String {
    let sorted: BTreeSet<u32> = ids.iter().copied().collect();
    let mut h = Sha256::new();
    for id in sorted {
        h.update(id.to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_add((fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// k-fold cross-validation: every fold refits the full model on the other
/// folds and scores its held-out slope units by posterior-mean
/// susceptibility. Bin edges and class levels come from the whole table so
/// every fold shares one parameter layout.
pub fn cross_validate(
    table: &SlopeUnitTable,
    spec: &ModelSpec,
    k: usize,
    seed: u64,
    sampler: &SamplerConfig,
) -> Result<CvReport, ValidateError> {
    let folds = make_folds(table.su_ids(), k, seed)?;
    let design = build_design(table, spec)?;
    let labels = table.labels();
    let ids = table.su_ids();

    type FoldOutput = (FoldResult, Vec<(usize, f64)>);
    let results: Vec<Result<FoldOutput, ValidateError>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train = folds.train_rows(f);
            let test = folds.test_rows(f);
            let train_ids: Vec<u32> = train.iter().map(|&i| ids[i]).collect();
            let train_labels: Vec<u8> = train.iter().map(|&i| labels[i]).collect();
            let test_labels: Vec<u8> = test.iter().map(|&i| labels[i]).collect();
            let mut result = FoldResult {
                fold: f,
                n_train: train.len(),
                n_test: test.len(),
                training_hash: training_hash(&train_ids),
                roc: None,
                warning: None,
            };
            let ones = train_labels.iter().filter(|&&y| y == 1).count();
            if ones == 0 || ones == train_labels.len() {
                result.warning = Some(format!("fold {f}: training labels are all {}; fold skipped", train_labels[0]));
                return Ok((result, Vec::new()));
            }
            let cfg = SamplerConfig { seed: fold_seed(sampler.seed, f), ..sampler.clone() };
            let fit = sample_posterior(&design.subset(&train), &train_labels, &cfg)?;
            let test_ids: Vec<u32> = test.iter().map(|&i| ids[i]).collect();
            let sim = simulate_reference(&fit.samples, &design.subset(&test), &test_ids, "held-out")?;
            let summary = summarize_scenario(&sim);
            match roc_auc(&summary.mean, &test_labels) {
                Ok(roc) => result.roc = Some(roc),
                Err(e) => result.warning = Some(format!("fold {f}: {e}")),
            }
            Ok((result, test.iter().copied().zip(summary.mean).collect()))
        })
        .collect();

    let mut fold_results = Vec::with_capacity(k);
    let mut predicted: Vec<(u32, Option<f64>)> = ids.iter().map(|&id| (id, None)).collect();
    for r in results {
        let (fold, preds) = r?;
        for (i, p) in preds {
            predicted[i].1 = Some(p);
        }
        fold_results.push(fold);
    }
    let aucs: Vec<f64> = fold_results.iter().filter_map(|f| f.roc.as_ref().map(|r| r.auc)).collect();
    Ok(CvReport { k, seed, draws: sampler.draws, folds: fold_results, spread: auc_spread(&aucs), predicted })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorPlot {
    /// `(mean, ci_width)` per slope unit, ascending by mean.
    pub points: Vec<(f64, f64)>,
    /// Mean interval width over slope units with mean below 0.1 or above 0.9.
    pub tail_width: Option<f64>,
    /// Mean interval width over slope units with mean in `[0.4, 0.6]`.
    pub central_width: Option<f64>,
}

fn average(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

pub fn error_plot_data(summary: &SusceptibilitySummary) -> ErrorPlot {
    let mut points: Vec<(f64, f64)> = summary.mean.iter().copied().zip(summary.ci_width.iter().copied()).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let tail_width = average(points.iter().filter(|p| p.0 < 0.1 || p.0 > 0.9).map(|p| p.1));
    let central_width = average(points.iter().filter(|p| (0.4..=0.6).contains(&p.0)).map(|p| p.1));
    ErrorPlot { points, tail_width, central_width }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadBin {
    pub lower: f64,
    pub upper: f64,
    /// Geometric midpoint.
    pub center: f64,
    pub count: usize,
    /// `count / (N * (upper - lower))`, per square metre.
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyArea {
    pub bins: Vec<FadBin>,
    pub n: usize,
    /// Geometric midpoint of the densest bin; needs at least
    /// [`MIN_ROLLOVER_SAMPLE`] areas.
    pub rollover: Option<f64>,
}

pub const DEFAULT_FAD_BINS: usize = 20;
pub const MIN_ROLLOVER_SAMPLE: usize = 20;

impl FrequencyArea {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ValidateError> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| ValidateError::Io(e.to_string());
        w.write_record(["bin_lower", "bin_upper", "bin_center", "count", "density"]).map_err(io)?;
        for b in &self.bins {
            w.write_record([
                b.lower.to_string(),
                b.upper.to_string(),
                b.center.to_string(),
                b.count.to_string(),
                b.density.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| ValidateError::Io(e.to_string()))
    }
}

/// Probability density of landslide area on `bins` equal-width log10 bins
/// spanning the observed range. A sample of identical areas gets a single bin
/// one tenth of a decade wide centred on that area.
pub fn frequency_area(areas: &[f64], bins: usize) -> Result<FrequencyArea, ValidateError> {
    if areas.is_empty() {
        return Err(ValidateError::NoAreas);
    }
    if let Some(&bad) = areas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(ValidateError::BadArea(bad));
    }
    let logs: Vec<f64> = areas.iter().map(|a| a.log10()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi, m) = if hi > lo { (lo, hi, bins.max(1)) } else { (lo - 0.05, hi + 0.05, 1) };
    let step = (hi - lo) / m as f64;
    let mut counts = vec![0usize; m];
    for &l in &logs {
        let k = (((l - lo) / step).floor() as usize).min(m - 1);
        counts[k] += 1;
    }
    let n = areas.len();
    let edges: Vec<f64> = (0..=m).map(|k| 10f64.powf(if k == m { hi } else { lo + step * k as f64 })).collect();
    let bins: Vec<FadBin> = (0..m)
        .map(|k| {
            let (lower, upper) = (edges[k], edges[k + 1]);
            FadBin {
                lower,
                upper,
                center: (lower * upper).sqrt(),
                count: counts[k],
                density: counts[k] as f64 / (n as f64 * (upper - lower)),
            }
        })
        .collect();
    let rollover = (n >= MIN_ROLLOVER_SAMPLE).then(|| {
        let best = bins.iter().enumerate().fold(0, |best, (k, b)| if b.density > bins[best].density { k } else { best });
        bins[best].center
    });
    Ok(FrequencyArea { bins, n, rollover })
}
