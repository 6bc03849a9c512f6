//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, non-zero exit
//! when any criterion fails. Tolerances are pinned as constants below.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use landslide_gam::inference::{
    classify_significance, quadrature_oracle, sample_posterior, MarginalSummary, OracleConfig,
    PosteriorFit, SamplerConfig, Significance,
};
use landslide_gam::ingest::{
    aggregate_to_su, classify_bedding, label_su, parse_ascii_grid, parse_shakemap_grid, standardize, Bedding, Centroid,
    Geometry, Grid, ScenarioField, SlopeUnitTable, SuPartition, ZonalStat,
};
use landslide_gam::model::{
    build_design, linear_predictor, log_posterior, rw1_penalty, DesignMatrix, ModelSpec, ParameterVector, Priors,
};
use landslide_gam::simulate::{
    combine_scenarios, simulate_reference, summarize_scenario, swap_scenario, SusceptibilitySummary, SwapTarget,
};
use landslide_gam::stats::inverse_logit;
use landslide_gam::synthetic::{synthetic_table, SyntheticConfig, SyntheticData, PGA_TERM};
use landslide_gam::validate::{cross_validate, frequency_area};
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, RngAlgorithm, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_REL_TOL: f64 = 0.05;
const ORACLE_DRAWS: usize = 40_000;
const ORACLE_CHAINS: usize = 4;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);

const RECOVERY_TOL: f64 = 0.3;
const RECOVERY_REPLICATES: u64 = 20;
const RECOVERY_MIN_COVERED: usize = 16;
const RECOVERY_BUDGET: Duration = Duration::from_secs(600);

const SWAP_DRAWS: usize = 1000;
const SWAP_UNITS: usize = 50;

const CV_DRAWS: usize = 500;
const CV_FOLDS: usize = 10;
const CV_EFFECT_SCALE: f64 = 2.0;
const CV_MIN_MEDIAN: f64 = 0.9;
const CV_MAX_RANGE: f64 = 0.15;
const CV_NULL_BAND: (f64, f64) = (0.45, 0.55);
const CV_BUDGET: Duration = Duration::from_secs(900);

const GRADIENT_POINTS: usize = 100;
const GRADIENT_REL_TOL: f64 = 1e-5;

const SUM_TO_ZERO_TOL: f64 = 1e-8;
const SHIFT_TOL: f64 = 1e-12;

const PROPERTY_CASES: u32 = 1000;
const STANDARDIZE_TOL: f64 = 1e-9;

const FAD_SAMPLE: usize = 5000;
const FAD_MODE: f64 = 100.0;
const FAD_NORM_TOL: f64 = 1e-9;

const COMBINE_SCENARIOS: usize = 8;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Posterior of the reference model on the default synthetic table, shared by
/// several criteria.
struct Reference {
    data: SyntheticData,
    design: DesignMatrix,
    fit: PosteriorFit,
    elapsed: Duration,
}

fn reference() -> Result<Reference, String> {
    let t0 = Instant::now();
    let data = synthetic_table(&SyntheticConfig::default());
    let design = build_design(&data.table, &ModelSpec::reference()).map_err(|e| e.to_string())?;
    let fit = sample_posterior(&design, data.table.labels(), &SamplerConfig::with_draws(SWAP_DRAWS, 1))
        .map_err(|e| e.to_string())?;
    Ok(Reference { data, design, fit, elapsed: t0.elapsed() })
}

// ---------------------------------------------------------------- 1

/// Labels from a logistic model with one standardized covariate.
fn logistic_table(n: usize, b0: f64, b1: f64, seed: u64) -> SlopeUnitTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y: Vec<u8> = x.iter().map(|&x| u8::from(rng.random::<f64>() < inverse_logit(b0 + b1 * x))).collect();
    let (z, _) = standardize(&x).expect("non-constant covariate");
    let mut t = SlopeUnitTable::new((1..=n as u32).collect(), y).expect("distinct ids");
    t.push_numeric("x_z", z).expect("fresh column");
    t
}

fn intercept_table(ones: usize, n: usize) -> SlopeUnitTable {
    let y = (0..n).map(|i| u8::from(i < ones)).collect();
    SlopeUnitTable::new((1..=n as u32).collect(), y).expect("distinct ids")
}

fn oracle_case(table: &SlopeUnitTable, slope: bool, prior_var: f64, seed: u64) -> Result<f64, String> {
    let spec = ModelSpec {
        fixed: if slope { vec!["x_z".into()] } else { vec![] },
        priors: Priors { intercept_var: prior_var, fixed_var: prior_var, ..Priors::default() },
        ..ModelSpec::intercept_only()
    };
    let design = build_design(table, &spec).map_err(|e| e.to_string())?;
    let grid = OracleConfig { lower: -30.0, upper: 30.0, ..OracleConfig::default() };
    let oracle = quadrature_oracle(&design, table.labels(), &grid).map_err(|e| e.to_string())?;
    let cfg = SamplerConfig { draws: ORACLE_DRAWS, chains: ORACLE_CHAINS, seed, ..SamplerConfig::default() };
    let fit = sample_posterior(&design, table.labels(), &cfg).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (j, name) in oracle.names.iter().enumerate() {
        let s = MarginalSummary::from_draws(name, &fit.samples.column(name).map_err(|e| e.to_string())?);
        let (m, sd) = (oracle.mean[j], oracle.sd[j]);
        // a mean near zero is judged on the posterior sd scale
        worst = worst.max((s.mean - m).abs() / m.abs().max(sd));
        worst = worst.max((s.sd - sd).abs() / sd);
    }
    Ok(worst)
}

fn criterion_oracle() -> Outcome {
    let t0 = Instant::now();
    let cases: Vec<(&str, SlopeUnitTable, bool, f64)> = vec![
        ("balanced intercept", intercept_table(10, 20), false, 1000.0),
        ("skewed intercept", intercept_table(3, 20), false, 1000.0),
        ("all ones, prior var 4", intercept_table(10, 10), false, 4.0),
        ("slope n=20", logistic_table(20, 0.3, 1.2, 4), true, 1000.0),
        ("slope n=60", logistic_table(60, -1.0, 2.0, 9), true, 1000.0),
        ("slope n=200", logistic_table(200, 0.5, -0.8, 11), true, 1000.0),
    ];
    let mut parts = Vec::new();
    let mut worst = 0.0f64;
    for (k, (name, table, slope, var)) in cases.iter().enumerate() {
        let err = oracle_case(table, *slope, *var, 100 + k as u64).map_err(|e| format!("{name}: {e}"))?;
        worst = worst.max(err);
        parts.push(format!("{name} {:.3}", err));
    }
    let elapsed = t0.elapsed();
    check(
        worst < ORACLE_REL_TOL && elapsed < ORACLE_BUDGET && cases.len() >= 5,
        format!(
            "{} cases, worst relative error {:.4} (< {ORACLE_REL_TOL}), {:.1}s (< {}s) [{}]",
            cases.len(),
            worst,
            elapsed.as_secs_f64(),
            ORACLE_BUDGET.as_secs(),
            parts.join(", ")
        ),
    )
}

// ---------------------------------------------------------------- 2

fn criterion_recovery(r: &Reference) -> Outcome {
    let t0 = Instant::now();
    let truth = r.data.truth.fixed[PGA_TERM];
    let pga = MarginalSummary::from_draws(PGA_TERM, &r.fit.samples.column(&beta(PGA_TERM)).map_err(|e| e.to_string())?);
    let sig = classify_significance(&r.fit.samples, &beta(PGA_TERM)).map_err(|e| e.to_string())?;

    let mut covered = 0;
    for seed in 1..=RECOVERY_REPLICATES {
        let data = synthetic_table(&SyntheticConfig { seed, ..SyntheticConfig::default() });
        let design = build_design(&data.table, &ModelSpec::reference()).map_err(|e| e.to_string())?;
        let fit = sample_posterior(&design, data.table.labels(), &SamplerConfig::with_draws(1000, seed))
            .map_err(|e| e.to_string())?;
        let s = MarginalSummary::from_draws(PGA_TERM, &fit.samples.column(&beta(PGA_TERM)).map_err(|e| e.to_string())?);
        if s.q025 <= truth && truth <= s.q975 {
            covered += 1;
        }
    }
    let elapsed = t0.elapsed() + r.elapsed;
    check(
        (pga.mean - truth).abs() <= RECOVERY_TOL
            && sig == Significance::Positive
            && covered >= RECOVERY_MIN_COVERED
            && elapsed < RECOVERY_BUDGET,
        format!(
            "beta_PGA mean {:.3} (truth {truth}, tol {RECOVERY_TOL}), CI [{:.3}, {:.3}] {sig}, coverage {covered}/{RECOVERY_REPLICATES} (>= {RECOVERY_MIN_COVERED}), {:.1}s",
            pga.mean,
            pga.q025,
            pga.q975,
            elapsed.as_secs_f64()
        ),
    )
}

fn beta(term: &str) -> String {
    landslide_gam::model::design::fixed_name(term)
}

// ---------------------------------------------------------------- 3, 4

fn pga_target(r: &Reference) -> Result<(Vec<f64>, SwapTarget), String> {
    let raw = r.data.table.numeric("PGA_mu").map_err(|e| e.to_string())?.to_vec();
    let scale = *r.data.scales.get("PGA_mu").ok_or("no PGA scale")?;
    Ok((raw, SwapTarget { term: PGA_TERM.into(), scale }))
}

fn criterion_swap(r: &Reference) -> Outcome {
    let (raw, target) = pga_target(r)?;
    let rows: Vec<usize> = (0..SWAP_UNITS).collect();
    let design = r.design.subset(&rows);
    let ids: Vec<u32> = r.data.table.su_ids()[..SWAP_UNITS].to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pga: Vec<f64> = raw[..SWAP_UNITS].iter().map(|v| v * rng.random_range(0.2..1.8)).collect();
    let field = ScenarioField::new("perturbed", ids.clone(), pga, target.scale).map_err(|e| e.to_string())?;
    let sim = swap_scenario(&r.fit.samples, &design, &ids, &field, &target).map_err(|e| e.to_string())?;
    let recomputed = design.with_fixed_column(PGA_TERM, field.standardized.clone()).map_err(|e| e.to_string())?;

    let draws = r.fit.samples.n_draws();
    let mut mismatches = 0;
    for s in 0..draws {
        let eta = linear_predictor(&ParameterVector(r.fit.samples.row(s).to_vec()), &recomputed)
            .map_err(|e| e.to_string())?;
        for (a, e) in sim.draw(s).iter().zip(eta) {
            if a.to_bits() != inverse_logit(e).to_bits() {
                mismatches += 1;
            }
        }
    }
    check(
        mismatches == 0 && draws == SWAP_DRAWS,
        format!("{draws} draws x {SWAP_UNITS} SUs, {mismatches} values differ from full recomputation"),
    )
}

fn criterion_identity(r: &Reference) -> Outcome {
    let (raw, target) = pga_target(r)?;
    let ids = r.data.table.su_ids().to_vec();
    let field = ScenarioField::new("calibration", ids.clone(), raw, target.scale).map_err(|e| e.to_string())?;
    let reference = simulate_reference(&r.fit.samples, &r.design, &ids, "reference").map_err(|e| e.to_string())?;
    let swapped = swap_scenario(&r.fit.samples, &r.design, &ids, &field, &target).map_err(|e| e.to_string())?;
    let differ = reference.values().iter().zip(swapped.values()).filter(|(a, b)| a.to_bits() != b.to_bits()).count();
    check(differ == 0, format!("{} values compared, {differ} differ", reference.values().len()))
}

// ---------------------------------------------------------------- 5

fn criterion_cv() -> Outcome {
    let t0 = Instant::now();
    let data = synthetic_table(&SyntheticConfig { effect_scale: CV_EFFECT_SCALE, ..SyntheticConfig::default() });
    let spec = ModelSpec::reference();
    let sampler = SamplerConfig::with_draws(CV_DRAWS, 1);
    let strong = cross_validate(&data.table, &spec, CV_FOLDS, 1, &sampler).map_err(|e| e.to_string())?;
    let strong = strong.spread.ok_or("no scored fold")?;

    let mut labels = data.table.labels().to_vec();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(7));
    let permuted = data.table.with_labels(labels).map_err(|e| e.to_string())?;
    let null = cross_validate(&permuted, &spec, CV_FOLDS, 1, &sampler).map_err(|e| e.to_string())?;
    let null = null.spread.ok_or("no scored fold")?;
    let elapsed = t0.elapsed();
    check(
        strong.median > CV_MIN_MEDIAN
            && strong.range < CV_MAX_RANGE
            && (CV_NULL_BAND.0..=CV_NULL_BAND.1).contains(&null.median)
            && elapsed < CV_BUDGET,
        format!(
            "median AUC {:.3} (> {CV_MIN_MEDIAN}), range {:.3} (< {CV_MAX_RANGE}), IQR {:.3}; permuted median {:.3} (in [{}, {}]); {:.1}s at S={CV_DRAWS}",
            strong.median,
            strong.range,
            strong.iqr,
            null.median,
            CV_NULL_BAND.0,
            CV_NULL_BAND.1,
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 6

fn criterion_gradient() -> Outcome {
    let data = synthetic_table(&SyntheticConfig { n_su: 300, ..SyntheticConfig::default() });
    let design = build_design(&data.table, &ModelSpec::reference()).map_err(|e| e.to_string())?;
    let layout = &design.layout;
    if layout.n_fixed == 0 || layout.iid.is_empty() || layout.rw1.is_empty() {
        return Err("reference design lacks a block type".into());
    }
    let log_taus: Vec<usize> = layout.log_tau_iid.iter().chain(&layout.log_tau_rw1).copied().collect();
    let labels = data.table.labels();
    let f = |theta: &[f64]| log_posterior(&ParameterVector(theta.to_vec()), &design, labels).map(|l| l.value);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..GRADIENT_POINTS {
        let mut theta: Vec<f64> = (0..layout.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        for &j in &log_taus {
            theta[j] = rng.random_range(-2.0..4.0);
        }
        let analytic = log_posterior(&ParameterVector(theta.clone()), &design, labels).map_err(|e| e.to_string())?;
        for j in 0..theta.len() {
            let h = 1e-5 * theta[j].abs().max(1.0);
            let mut up = theta.clone();
            up[j] += h;
            let mut down = theta.clone();
            down[j] -= h;
            let fd = (f(&up).map_err(|e| e.to_string())? - f(&down).map_err(|e| e.to_string())?) / (up[j] - down[j]);
            let g = analytic.gradient[j];
            // components of order one or smaller are compared absolutely
            worst = worst.max((g - fd).abs() / g.abs().max(1.0));
        }
    }
    check(
        worst < GRADIENT_REL_TOL,
        format!(
            "{GRADIENT_POINTS} points x {} parameters (fixed, iid, rw1, log tau), worst relative error {:.2e} (< {GRADIENT_REL_TOL:e})",
            layout.len(),
            worst
        ),
    )
}

// ---------------------------------------------------------------- 7

fn criterion_rw1(r: &Reference) -> Outcome {
    let layout = &r.design.layout;
    let mut worst_sum = 0.0f64;
    for row in r.fit.samples.rows() {
        for range in &layout.rw1 {
            worst_sum = worst_sum.max(row[range.clone()].iter().sum::<f64>().abs());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_shift = 0.0f64;
    for _ in 0..PROPERTY_CASES {
        let k = rng.random_range(2..40);
        let f: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
        let c = rng.random_range(-100.0..100.0);
        let shifted: Vec<f64> = f.iter().map(|v| v + c).collect();
        // first differences of a shifted vector are unchanged, so the
        // penalty is the same quadratic form
        let expected: f64 = f.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
        let base = rw1_penalty(&f);
        let rel = |a: f64| (a - base).abs() / base.max(1.0);
        worst_shift = worst_shift.max(rel(rw1_penalty(&shifted))).max(rel(expected));
    }
    check(
        worst_sum <= SUM_TO_ZERO_TOL && worst_shift <= SHIFT_TOL,
        format!(
            "{} draws x {} RW1 blocks, max |sum| {:.1e} (<= {SUM_TO_ZERO_TOL:e}); {PROPERTY_CASES} shifts, max penalty change {:.1e} (<= {SHIFT_TOL:e})",
            r.fit.samples.n_draws(),
            layout.rw1.len(),
            worst_sum,
            worst_shift
        ),
    )
}

// ---------------------------------------------------------------- 8

/// Attitude classes as tabulated: `(from, to, class)` over `|aspect - dip|`,
/// each interval closed on the left.
const BEDDING_TABLE: [(f64, f64, Bedding); 9] = [
    (0.0, 30.0, Bedding::B4),
    (30.0, 60.0, Bedding::B5),
    (60.0, 120.0, Bedding::B1),
    (120.0, 150.0, Bedding::B3),
    (150.0, 210.0, Bedding::B2),
    (210.0, 240.0, Bedding::B3),
    (240.0, 300.0, Bedding::B1),
    (300.0, 330.0, Bedding::B5),
    (330.0, 360.0, Bedding::B4),
];

fn runner(seed: u8) -> TestRunner {
    let cfg = ProptestConfig { cases: PROPERTY_CASES, failure_persistence: None, ..ProptestConfig::default() };
    TestRunner::new_with_rng(cfg, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

fn property<S: Strategy>(
    name: &str,
    seed: u8,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(seed).run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn criterion_ingest() -> Outcome {
    let worked = [((90.0, 0.0), Bedding::B1), ((0.0, 0.0), Bedding::B4), ((200.0, 20.0), Bedding::B2)];
    for ((a, d), want) in worked {
        let got = classify_bedding(a, d).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("worked example ({a}, {d}) gave {got}, expected {want}"));
        }
    }

    property("bedding totality and symmetry", 1, (0.0f64..360.0, 0.0f64..360.0), |(a, d)| {
        let c = classify_bedding(a, d).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(c, classify_bedding(d, a).map_err(|e| TestCaseError::fail(e.to_string()))?);
        let diff = (a - d).abs();
        let hits: Vec<Bedding> = BEDDING_TABLE.iter().filter(|(lo, hi, _)| *lo <= diff && diff < *hi).map(|t| t.2).collect();
        prop_assert_eq!(hits, vec![c]);
        Ok(())
    })?;
    // grid-aligned angles hit every interval boundary
    property("bedding on boundaries", 2, (0u32..72, 0u32..72), |(a, d)| {
        let (a, d) = (a as f64 * 5.0, d as f64 * 5.0);
        let c = classify_bedding(a, d).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let diff = (a - d).abs();
        prop_assert!(BEDDING_TABLE.iter().any(|(lo, hi, b)| *lo <= diff && diff < *hi && *b == c));
        Ok(())
    })?;

    property("standardization moments", 3, proptest::collection::vec(-1e4f64..1e4, 2..300), |xs| {
        let Ok((z, scale)) = standardize(&xs) else {
            return Ok(());
        };
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let sd = (z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
        prop_assert!(mean.abs() <= STANDARDIZE_TOL, "mean {}", mean);
        prop_assert!((sd - 1.0).abs() <= STANDARDIZE_TOL, "sd {}", sd);
        let again = scale.apply_all(&xs);
        prop_assert!(again.iter().zip(&z).all(|(a, b)| a.to_bits() == b.to_bits()));
        Ok(())
    })?;

    let cells = proptest::collection::vec((1u32..6, -1e3f64..1e3), 2..60);
    property("aggregation permutation invariance", 4, (cells, any::<u64>()), |(cells, seed)| {
        let mut shuffled = cells.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let agg = |cells: &[(u32, f64)], stat| {
            let geometry = Geometry { ncols: cells.len(), nrows: 1, xllcorner: 0.0, yllcorner: 0.0, cellsize: 1.0 };
            let ids = Grid::new(geometry, -9999.0, cells.iter().map(|c| c.0 as f64).collect()).unwrap();
            let values = Grid::new(geometry, -9999.0, cells.iter().map(|c| c.1).collect()).unwrap();
            aggregate_to_su(&values, &SuPartition::from_grid(&ids).unwrap(), stat)
        };
        for stat in [ZonalStat::Mean, ZonalStat::Sd] {
            match (agg(&cells, stat), agg(&shuffled, stat)) {
                (Ok(a), Ok(b)) => prop_assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits())),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "outcome depends on cell order"),
            }
        }
        Ok(())
    })?;

    let partition = {
        let geometry = Geometry { ncols: 6, nrows: 4, xllcorner: 0.0, yllcorner: 0.0, cellsize: 1.0 };
        let ids = (0..24).map(|i| if i % 7 == 3 { -9999.0 } else { (1 + i % 5) as f64 }).collect();
        SuPartition::from_grid(&Grid::new(geometry, -9999.0, ids).unwrap()).unwrap()
    };
    let points = proptest::collection::vec((-1.0f64..7.0, -1.0f64..5.0), 0..30);
    property("labels binary and order free", 5, (points, any::<u64>()), |(points, seed)| {
        let centroids: Vec<Centroid> = points.iter().map(|&(x, y)| Centroid { x, y, landslide_id: None }).collect();
        let mut shuffled = centroids.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = label_su(&centroids, &partition);
        prop_assert!(a.labels.iter().all(|&l| l <= 1));
        prop_assert_eq!(a, label_su(&shuffled, &partition));
        Ok(())
    })?;

    Ok(format!(
        "3 worked bedding examples exact; {PROPERTY_CASES} cases each for bedding totality/symmetry, boundaries, standardization (tol {STANDARDIZE_TOL:e}), aggregation order, labelling order"
    ))
}

// ---------------------------------------------------------------- 9

fn criterion_parsers() -> Outcome {
    let value = prop_oneof![Just(-9999.0), -1e6f64..1e6, (-1000i32..1000).prop_map(f64::from)];
    let grid = (1usize..8, 1usize..8, -1e3f64..1e3, -1e3f64..1e3, 1e-4f64..100.0).prop_flat_map(
        move |(ncols, nrows, x, y, cs)| {
            proptest::collection::vec(value.clone(), ncols * nrows).prop_map(move |values| {
                let geometry = Geometry { ncols, nrows, xllcorner: x, yllcorner: y, cellsize: cs };
                Grid::new(geometry, -9999.0, values).unwrap()
            })
        },
    );
    property("ascii grid fixed point", 9, grid, |g| {
        let text = g.to_ascii();
        let back = parse_ascii_grid(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_ascii(), text);
        Ok(())
    })?;

    let doc = r#"<?xml version="1.0" encoding="US-ASCII"?>
<shakemap_grid event_id="bounds">
<grid_specification lon_min="103.8" lat_min="33.1" lon_max="103.805" lat_max="33.105" nominal_lon_spacing="0.005" nominal_lat_spacing="0.005" nlon="2" nlat="2" />
<grid_field index="1" name="LON" units="dd" />
<grid_field index="2" name="LAT" units="dd" />
<grid_field index="3" name="PGA" units="%g" />
<grid_data>
103.8 33.105 3
103.805 33.105 7
103.8 33.1 3
103.805 33.1 7
</grid_data>
</shakemap_grid>
"#;
    let g = parse_shakemap_grid(doc).map_err(|e| e.to_string())?;
    let lo = g.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = g.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    check(
        lo == 0.03 && hi == 0.07,
        format!("{PROPERTY_CASES} random grids round-trip exactly; ShakeMap %g {{3, 7}} -> [{lo}, {hi}] g"),
    )
}

// ---------------------------------------------------------------- 10

fn criterion_fad() -> Outcome {
    // inverse gamma with shape a and scale b has mode b / (a + 1)
    let shape = 1.4;
    let scale = FAD_MODE * (shape + 1.0);
    let gamma = rand_distr::Gamma::new(shape, 1.0).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let areas: Vec<f64> = (0..FAD_SAMPLE).map(|_| scale / rng.sample(gamma)).collect();
    let fad = frequency_area(&areas, landslide_gam::validate::DEFAULT_FAD_BINS).map_err(|e| e.to_string())?;
    let rollover = fad.rollover.ok_or("no rollover")?;
    let width = fad.bins[0].upper.log10() - fad.bins[0].lower.log10();
    let offset = (rollover.log10() - FAD_MODE.log10()).abs();
    let mass: f64 = fad.bins.iter().map(|b| b.density * (b.upper - b.lower)).sum();
    check(
        offset <= width && (mass - 1.0).abs() <= FAD_NORM_TOL,
        format!(
            "N={FAD_SAMPLE}, rollover {rollover:.1} m2 ({:.2} bins from {FAD_MODE}), integral {mass:.12} (tol {FAD_NORM_TOL:e})",
            offset / width
        ),
    )
}

// ---------------------------------------------------------------- 11

fn criterion_combine(r: &Reference) -> Outcome {
    let (raw, target) = pga_target(r)?;
    let ids = r.data.table.su_ids().to_vec();
    let summaries: Vec<SusceptibilitySummary> = (0..COMBINE_SCENARIOS)
        .map(|k| {
            let factor = 0.25 * (k + 1) as f64;
            let pga = raw.iter().map(|v| v * factor).collect();
            let field = ScenarioField::new(&format!("x{factor}"), ids.clone(), pga, target.scale).map_err(|e| e.to_string())?;
            let sim = swap_scenario(&r.fit.samples, &r.design, &ids, &field, &target).map_err(|e| e.to_string())?;
            Ok(summarize_scenario(&sim))
        })
        .collect::<Result<_, String>>()?;
    let combined = combine_scenarios(&summaries).map_err(|e| e.to_string())?.summary;

    let mut bad_order = 0;
    let mut bad_mean = 0;
    for i in 0..combined.len() {
        if combined.q025[i] > combined.q975[i] {
            bad_order += 1;
        }
        let lo = summaries.iter().map(|s| s.mean[i]).fold(f64::INFINITY, f64::min);
        let hi = summaries.iter().map(|s| s.mean[i]).fold(f64::NEG_INFINITY, f64::max);
        if !(lo <= combined.mean[i] && combined.mean[i] <= hi) {
            bad_mean += 1;
        }
    }
    let bits = |s: &SusceptibilitySummary| -> Vec<u64> {
        s.mean.iter().chain(&s.q025).chain(&s.q975).map(|v| v.to_bits()).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut order_dependent = 0;
    let permutations = 10;
    for _ in 0..permutations {
        let mut p = summaries.clone();
        p.shuffle(&mut rng);
        let c = combine_scenarios(&p).map_err(|e| e.to_string())?.summary;
        if bits(&c) != bits(&combined) || c.su_ids != combined.su_ids {
            order_dependent += 1;
        }
    }
    check(
        bad_order == 0 && bad_mean == 0 && order_dependent == 0,
        format!(
            "{COMBINE_SCENARIOS} scenarios x {} SUs: {bad_order} q025 > q975, {bad_mean} means outside input range, {order_dependent}/{permutations} permutations change the result",
            combined.len()
        ),
    )
}

// ---------------------------------------------------------------- 12

fn lsgam(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_lsgam")).args(args).current_dir(cwd).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("lsgam {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

/// The `make demo` pipeline, run inside `dir`.
fn demo(dir: &Path) -> Result<(), String> {
    let cfg = ["--config", "config.json"];
    lsgam(&["synth", ".", "--seed", "1"], dir)?;
    for step in ["ingest", "fit", "validate", "simulate"] {
        lsgam(&[cfg[0], cfg[1], step], dir)?;
    }
    let mut scenarios: Vec<String> = std::fs::read_dir(dir.join("out/scenarios"))
        .map_err(|e| e.to_string())?
        .map(|e| e.map(|e| format!("out/scenarios/{}", e.file_name().to_string_lossy())))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    scenarios.retain(|s| s.ends_with(".csv"));
    scenarios.sort();
    let mut combine = vec![cfg[0], cfg[1], "combine"];
    combine.extend(scenarios.iter().map(String::as_str));
    lsgam(&combine, dir)?;
    lsgam(&[cfg[0], cfg[1], "fad"], dir)
}

fn tree(root: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
                out.insert(path.strip_prefix(root).expect("under root").to_path_buf(), bytes);
            }
        }
    }
    Ok(out)
}

fn criterion_reproducible() -> Outcome {
    let t0 = Instant::now();
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    demo(a.path())?;
    demo(b.path())?;
    let (ta, tb) = (tree(a.path())?, tree(b.path())?);
    let differing: Vec<String> = ta
        .keys()
        .chain(tb.keys())
        .filter(|k| ta.get(*k) != tb.get(*k))
        .map(|k| k.display().to_string())
        .collect();
    check(
        differing.is_empty() && !ta.is_empty(),
        format!(
            "{} files per run, {} differ{}; two runs in {:.1}s",
            ta.len(),
            differing.len(),
            if differing.is_empty() { String::new() } else { format!(": {}", differing.join(", ")) },
            t0.elapsed().as_secs_f64()
        ),
    )
}

// ----------------------------------------------------------------

fn run(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(format!(
            "panicked: {}",
            p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
        )),
    }
}

fn main() -> ExitCode {
    // the default harness's `--list` probe expects no output
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    // numeric arguments select criteria; everything else is ignored
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: usize| selected.is_empty() || selected.contains(&k);
    let needs_reference = [2, 3, 4, 7, 11].into_iter().any(wanted);
    let reference = if needs_reference {
        catch_unwind(reference).unwrap_or_else(|_| Err("panicked".into()))
    } else {
        Err("not needed".into())
    };
    let with_ref = |f: fn(&Reference) -> Outcome| -> Outcome {
        match &reference {
            Ok(r) => run(|| f(r)),
            Err(e) => Err(format!("reference fit failed: {e}")),
        }
    };

    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("oracle equivalence", Box::new(|| run(criterion_oracle))),
        ("synthetic recovery", Box::new(|| with_ref(criterion_recovery))),
        ("shortcut-recompute equivalence", Box::new(|| with_ref(criterion_swap))),
        ("scenario identity", Box::new(|| with_ref(criterion_identity))),
        ("cross-validation sanity", Box::new(|| run(criterion_cv))),
        ("gradient correctness", Box::new(|| run(criterion_gradient))),
        ("RW1 contract", Box::new(|| with_ref(criterion_rw1))),
        ("standardization and bedding", Box::new(|| run(criterion_ingest))),
        ("parser round-trips", Box::new(|| run(criterion_parsers))),
        ("frequency-area rollover", Box::new(|| run(criterion_fad))),
        ("combined map", Box::new(|| with_ref(criterion_combine))),
        ("reproducibility", Box::new(|| run(criterion_reproducible))),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (k, (name, criterion)) in criteria.iter().enumerate() {
        if !wanted(k + 1) {
            continue;
        }
        ran += 1;
        match criterion() {
            Ok(detail) => println!("[PASS] {} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {} {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", ran - failed, ran);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
