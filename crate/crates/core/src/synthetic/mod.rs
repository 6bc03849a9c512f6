//! Data generated from the reference model with known coefficients.

pub mod world;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ingest::{SlopeUnitTable, Standardization, STANDARDIZED_SUFFIX};
use crate::model::spec::REFERENCE_FIXED;
use crate::stats::inverse_logit;

pub use world::{synthetic_world, SyntheticWorld, WorldConfig};

/// Raw covariates behind the reference fixed terms, with sampling ranges.
const RAW_RANGES: [(&str, f64, f64); 9] = [
    ("Elev_mu", 50.0, 1800.0),
    ("Slope_sigma", 1.0, 12.0),
    ("PRC_mu", -0.02, 0.02),
    ("PLC_mu", -0.02, 0.02),
    ("RSP_sigma", 0.05, 0.35),
    ("TWI_mu", 3.0, 12.0),
    ("Dist2F_mu", 0.0, 5000.0),
    ("Dist2S_mu", 0.0, 800.0),
    ("PGA_mu", 0.03, 0.07),
];

/// True slopes of the standardized fixed terms other than PGA.
const OTHER_BETAS: [f64; 8] = [-0.4, 0.3, 0.25, -0.2, 0.0, 0.35, -0.3, -0.45];

pub const PGA_TERM: &str = "PGA_mu_z";
pub const GEOLOGY: &str = "Geo";
pub const BEDDING: &str = "B";
pub const SLOPE: &str = "Slope_mu";
pub const RELIEF: &str = "RSP_mu";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_su: usize,
    pub seed: u64,
    pub beta_pga: f64,
    pub intercept: f64,
    /// Multiplies every true effect except the intercept.
    pub effect_scale: f64,
    pub geology_classes: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { n_su: 1234, seed: 1, beta_pga: 2.5, intercept: -1.5, effect_scale: 1.0, geology_classes: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    pub intercept: f64,
    /// Slope of every standardized fixed term.
    pub fixed: BTreeMap<String, f64>,
    /// Class effects of the categorical terms, keyed by class label.
    pub iid: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub table: SlopeUnitTable,
    pub truth: SyntheticTruth,
    pub scales: BTreeMap<String, Standardization>,
    /// Linear predictor that generated each label.
    pub eta: Vec<f64>,
}

/// Smooth effect of slope steepness in degrees; peaks at mid slopes.
pub fn slope_effect(deg: f64) -> f64 {
    let u = (deg / 60.0).clamp(0.0, 1.0);
    1.2 * (std::f64::consts::PI * u).sin() - 0.75
}

/// Smooth monotone effect of relative slope position in `[0, 1]`.
pub fn relief_effect(r: f64) -> f64 {
    0.8 * (r.clamp(0.0, 1.0) - 0.5)
}

/// Reference-model table of `n_su` slope units with labels drawn from the
/// model itself.
pub fn synthetic_table(cfg: &SyntheticConfig) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_su;
    let s = cfg.effect_scale;

    let raw: Vec<(&str, Vec<f64>)> =
        RAW_RANGES.iter().map(|&(name, lo, hi)| (name, (0..n).map(|_| rng.random_range(lo..hi)).collect())).collect();
    let slope: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..60.0)).collect();
    let relief: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let geo: Vec<String> = (0..n).map(|_| (1 + rng.random_range(0..cfg.geology_classes)).to_string()).collect();
    let bedding: Vec<String> = (0..n).map(|_| format!("B{}", 1 + rng.random_range(0..5))).collect();

    let geo_sd = Normal::new(0.0, 0.6).expect("valid sd");
    let geo_effects: BTreeMap<String, f64> =
        (1..=cfg.geology_classes).map(|k| (k.to_string(), s * geo_sd.sample(&mut rng))).collect();
    let bed_sd = Normal::new(0.0, 0.3).expect("valid sd");
    let bed_effects: BTreeMap<String, f64> = (1..=5).map(|k| (format!("B{k}"), s * bed_sd.sample(&mut rng))).collect();

    let mut table = SlopeUnitTable::new((1..=n as u32).collect(), vec![0; n]).expect("distinct ids");
    for (name, values) in &raw {
        table.push_numeric(name, values.clone()).expect("fresh column");
    }
    table.push_numeric(SLOPE, slope.clone()).expect("fresh column");
    table.push_numeric(RELIEF, relief.clone()).expect("fresh column");
    table.push_categorical(GEOLOGY, geo.clone()).expect("fresh column");
    table.push_categorical(BEDDING, bedding.clone()).expect("fresh column");
    let raw_names: Vec<&str> = RAW_RANGES.iter().map(|r| r.0).collect();
    let scales = table.standardize_columns(&raw_names).expect("non-degenerate columns");

    let mut fixed = BTreeMap::new();
    for (raw, beta) in REFERENCE_FIXED.iter().zip(OTHER_BETAS.iter().chain([&cfg.beta_pga])) {
        let name = format!("{raw}{STANDARDIZED_SUFFIX}");
        let beta = if name == PGA_TERM { *beta } else { s * beta };
        fixed.insert(name, beta);
    }
    debug_assert_eq!(fixed[PGA_TERM], cfg.beta_pga);

    let mut eta = vec![cfg.intercept; n];
    for (name, beta) in &fixed {
        let z = table.numeric(name).expect("standardized column");
        for (e, x) in eta.iter_mut().zip(z) {
            *e += beta * x;
        }
    }
    for i in 0..n {
        eta[i] += geo_effects[&geo[i]] + bed_effects[&bedding[i]];
        eta[i] += s * (slope_effect(slope[i]) + relief_effect(relief[i]));
    }
    let labels: Vec<u8> = eta.iter().map(|&e| u8::from(rng.random::<f64>() < inverse_logit(e))).collect();
    let table = table.with_labels(labels).expect("binary labels");

    let mut iid = BTreeMap::new();
    iid.insert(GEOLOGY.to_string(), geo_effects);
    iid.insert(BEDDING.to_string(), bed_effects);
    SyntheticData { table, truth: SyntheticTruth { intercept: cfg.intercept, fixed, iid }, scales, eta }
}
