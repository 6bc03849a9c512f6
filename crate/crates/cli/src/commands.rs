use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use landslide_gam::inference::{
    sample_posterior, summarize_marginals, PosteriorSamples, SamplerConfig, SamplerMeta,
};
use landslide_gam::ingest::{
    build_su_table, parse_ascii_grid, parse_shakemap_grid, read_centroids, read_scenario_csv, scenario_from_grid,
    Grid, IngestInputs, ScenarioField, SlopeUnitTable, Standardization, SuPartition, STANDARDIZED_SUFFIX,
};
use landslide_gam::model::{build_design, ModelSpec};
use landslide_gam::simulate::{
    combine_pooled, combine_scenarios, simulate_reference, summarize_scenario, swap_scenario, CombinedSummary,
    ScenarioSimulation, SusceptibilitySummary, SwapTarget,
};
use landslide_gam::synthetic::world::{
    raster_path, shakemap_path, ASPECT_PATH, AREAS_PATH, CALIBRATION_EVENT, CENTROIDS_PATH, CONTINUOUS, DIP_PATH,
    EVENTS, GEOLOGY_PATH, PARTITION_PATH,
};
use landslide_gam::synthetic::{synthetic_world, WorldConfig, GEOLOGY};
use landslide_gam::validate::{cross_validate, error_plot_data, frequency_area};
use serde::{Deserialize, Serialize};

use crate::artifact::Run;
use crate::config::{BeddingConfig, CombineKind, IngestConfig, PgaUnits, RunConfig, ScenarioInput};
use crate::error::CliError;
use crate::svg::{error_svg, fad_svg, map_svg, roc_svg, Panel};
use crate::Common;

pub const TABLE_FILE: &str = "su_table.csv";
pub const POSTERIOR_FILE: &str = "posterior.csv";
pub const POSTERIOR_META_FILE: &str = "posterior.json";

/// Configuration with command-line overrides applied.
struct Settings {
    cfg: RunConfig,
    seed: u64,
    samples: usize,
    chains: usize,
    folds: usize,
    out: PathBuf,
}

fn settings(common: &Common) -> Result<Settings, CliError> {
    let cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for f in cfg.referenced_files() {
        if !f.exists() {
            return Err(CliError::user(format!("input file not found: {}", f.display())));
        }
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.out_dir());
    let s = Settings {
        seed: common.seed.or(cfg.seed).unwrap_or(1),
        samples: common.samples.or(cfg.samples).unwrap_or(1000),
        chains: common.chains.or(cfg.chains).unwrap_or(2),
        folds: common.folds.or(cfg.folds).unwrap_or(10),
        out,
        cfg,
    };
    if s.chains == 0 {
        return Err(CliError::user("--chains must be at least 1"));
    }
    Ok(s)
}

impl Settings {
    fn sampler(&self) -> SamplerConfig {
        SamplerConfig { draws: self.samples, chains: self.chains, seed: self.seed, ..SamplerConfig::default() }
    }

    /// An explicit `--table` wins, then the config, then the output
    /// directory.
    fn table_path(&self, flag: Option<PathBuf>) -> PathBuf {
        flag.or_else(|| self.cfg.table.clone()).unwrap_or_else(|| self.out.join(TABLE_FILE))
    }

    fn scales_path(table: &Path) -> PathBuf {
        table.with_extension("scales.json")
    }
}

fn read_grid(run: &mut Run, path: &Path) -> Result<Grid, CliError> {
    let text = run.read_text(path)?;
    parse_ascii_grid(&text).map_err(|e| CliError::from(e).in_file(path))
}

fn read_shakemap(run: &mut Run, path: &Path) -> Result<Grid, CliError> {
    let text = run.read_text(path)?;
    parse_shakemap_grid(&text).map_err(|e| CliError::from(e).in_file(path))
}

fn read_table(run: &mut Run, path: &Path) -> Result<SlopeUnitTable, CliError> {
    let bytes = run.read_bytes(path)?;
    SlopeUnitTable::read_csv(bytes.as_slice()).map_err(|e| CliError::from(e).in_file(path))
}

fn read_spec(run: &mut Run, path: Option<&Path>) -> Result<ModelSpec, CliError> {
    match path {
        Some(p) => {
            let text = run.read_text(p)?;
            ModelSpec::from_json(&text).map_err(|e| CliError::from(e).in_file(p))
        }
        None => Ok(ModelSpec::reference()),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(run: &mut Run, path: &Path) -> Result<T, CliError> {
    let text = run.read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::user(format!("{}: {e}", path.display())))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// File-name-safe form of a scenario name.
fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn synth(common: &Common, dir: &Path) -> Result<(), CliError> {
    let seed = common.seed.unwrap_or(1);
    let world = synthetic_world(&WorldConfig { seed, ..WorldConfig::default() })
        .map_err(|e| CliError::internal(format!("synthetic world: {e}")))?;
    let run = Run::new("synth", Some(seed), dir.to_path_buf())?;
    for (path, text) in &world.files {
        run.write(path, text.as_bytes())?;
    }
    let mut model = ModelSpec::reference().to_json();
    model.push('\n');
    run.write("model.json", model.as_bytes())?;
    run.write_json("truth.json", &TruthFile::from(&world.truth))?;

    let cfg = RunConfig {
        seed: Some(seed),
        samples: Some(1000),
        chains: Some(2),
        folds: Some(10),
        out: Some(PathBuf::from("out")),
        ingest: Some(IngestConfig {
            partition: PARTITION_PATH.into(),
            continuous: CONTINUOUS.iter().map(|&c| (c.to_string(), PathBuf::from(raster_path(c)))).collect(),
            categorical: [(GEOLOGY.to_string(), PathBuf::from(GEOLOGY_PATH))].into_iter().collect(),
            bedding: Some(BeddingConfig { aspect: ASPECT_PATH.into(), dip_direction: DIP_PATH.into() }),
            pga: Some(shakemap_path(CALIBRATION_EVENT).into()),
            centroids: Some(CENTROIDS_PATH.into()),
        }),
        model: Some("model.json".into()),
        reference_name: CALIBRATION_EVENT.to_string(),
        scenarios: EVENTS[1..]
            .iter()
            .map(|e| ScenarioInput { name: e.0.to_string(), path: shakemap_path(e.0).into() })
            .collect(),
        areas: Some(AREAS_PATH.into()),
        ..RunConfig::default()
    };
    run.write_json("config.json", &cfg)?;
    let positives = world.ingested.table.labels().iter().filter(|&&y| y == 1).count();
    println!(
        "wrote synthetic study area to {}: {} slope units, {} labeled 1, {} landslides",
        dir.display(),
        world.ingested.table.len(),
        positives,
        world.areas.len()
    );
    Ok(())
}

/// `posterior.json`: sampler bookkeeping plus what the draws were fitted to.
#[derive(Serialize, Deserialize)]
struct PosteriorSidecar {
    #[serde(flatten)]
    sampler: SamplerMeta,
    /// SHA-256 of the model definition in canonical JSON.
    model_sha256: String,
    min_ess: f64,
    max_rhat: f64,
    stuck_blocks: Vec<String>,
}

fn model_hash(spec: &ModelSpec) -> String {
    crate::artifact::sha256_hex(spec.to_json().as_bytes())
}

#[derive(Serialize)]
struct TruthFile {
    intercept: f64,
    fixed: BTreeMap<String, f64>,
    iid: BTreeMap<String, BTreeMap<String, f64>>,
}

impl From<&landslide_gam::synthetic::SyntheticTruth> for TruthFile {
    fn from(t: &landslide_gam::synthetic::SyntheticTruth) -> Self {
        Self { intercept: t.intercept, fixed: t.fixed.clone(), iid: t.iid.clone() }
    }
}

#[derive(Serialize)]
struct IngestReport {
    n_su: usize,
    positives: usize,
    centroids: usize,
    warnings: Vec<String>,
}

pub fn ingest(common: &Common) -> Result<(), CliError> {
    let s = settings(common)?;
    let ing = s
        .cfg
        .ingest
        .clone()
        .ok_or_else(|| CliError::user("ingest needs a configuration file with an \"ingest\" section (--config)"))?;
    let mut run = Run::new("ingest", None, s.out.clone())?;
    let partition = read_grid(&mut run, &ing.partition)?;
    let mut continuous = Vec::new();
    for (name, path) in &ing.continuous {
        continuous.push((name.clone(), read_grid(&mut run, path)?));
    }
    let mut categorical = Vec::new();
    for (name, path) in &ing.categorical {
        categorical.push((name.clone(), read_grid(&mut run, path)?));
    }
    let bedding = match &ing.bedding {
        Some(b) => Some((read_grid(&mut run, &b.aspect)?, read_grid(&mut run, &b.dip_direction)?)),
        None => None,
    };
    let pga = match &ing.pga {
        Some(p) => Some(read_shakemap(&mut run, p)?),
        None => None,
    };
    let centroids = match &ing.centroids {
        Some(p) => {
            let bytes = run.read_bytes(p)?;
            read_centroids(bytes.as_slice()).map_err(|e| CliError::from(e).in_file(p))?
        }
        None => Vec::new(),
    };
    let n_centroids = centroids.len();
    let inputs = IngestInputs { partition, continuous, categorical, bedding, pga, centroids };
    let out = build_su_table(&inputs)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let table_bytes = csv_bytes(|b| out.table.write_csv(b).map_err(CliError::from))?;
    run.write(TABLE_FILE, &table_bytes)?;
    let scales_name = Settings::scales_path(Path::new(TABLE_FILE));
    run.write_json(&scales_name.to_string_lossy(), &out.scales)?;
    let positives = out.table.labels().iter().filter(|&&y| y == 1).count();
    run.write_json(
        "ingest_report.json",
        &IngestReport { n_su: out.table.len(), positives, centroids: n_centroids, warnings: out.warnings.clone() },
    )?;
    println!("{} slope units, {} labeled 1, {} columns -> {}", out.table.len(), positives, out.table.columns().len(), run.path(TABLE_FILE).display());
    Ok(())
}

pub fn fit(common: &Common, table: Option<PathBuf>, model: Option<PathBuf>) -> Result<(), CliError> {
    let s = settings(common)?;
    let mut run = Run::new("fit", Some(s.seed), s.out.clone())?;
    let table = read_table(&mut run, &s.table_path(table))?;
    let spec = read_spec(&mut run, model.or_else(|| s.cfg.model.clone()).as_deref())?;
    let design = build_design(&table, &spec)?;
    let fit = sample_posterior(&design, table.labels(), &s.sampler())?;

    let bytes = csv_bytes(|b| fit.samples.write_csv(b).map_err(CliError::from))?;
    run.write(POSTERIOR_FILE, &bytes)?;
    let sidecar = PosteriorSidecar {
        sampler: fit.samples.meta.clone(),
        model_sha256: model_hash(&spec),
        min_ess: fit.diagnostics.min_ess,
        max_rhat: fit.diagnostics.max_rhat,
        stuck_blocks: fit.diagnostics.stuck_blocks.clone(),
    };
    run.write_json(POSTERIOR_META_FILE, &sidecar)?;
    run.write_json("diagnostics.json", &fit.diagnostics)?;
    let marginals = summarize_marginals(&fit.samples);
    let mut summary = String::from("term,mean,sd,q025,q50,q975,significance\n");
    for m in &marginals {
        summary.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            m.name,
            m.mean,
            m.sd,
            m.q025,
            m.q50,
            m.q975,
            m.significance()
        ));
    }
    run.write("summary.csv", summary.as_bytes())?;

    println!("{:<24} {:>9} {:>9} {:>9}  significance", "term", "mean", "q2.5", "q97.5");
    let fixed: Vec<_> = marginals.iter().filter(|m| !m.name.starts_with("f[") && !m.name.starts_with("log_tau")).collect();
    for m in &fixed {
        println!("{:<24} {:>9.3} {:>9.3} {:>9.3}  {}", m.name, m.mean, m.q025, m.q975, m.significance());
    }
    println!(
        "{} random-effect and hyperparameter columns in summary.csv; min ESS {:.0}, max split-Rhat {:.3}",
        marginals.len() - fixed.len(),
        fit.diagnostics.min_ess,
        fit.diagnostics.max_rhat
    );
    if fit.diagnostics.has_divergence() {
        return Err(CliError::internal(format!(
            "sampler stuck: acceptance below threshold in {}; diagnostics written",
            fit.diagnostics.stuck_blocks.join(", ")
        )));
    }
    Ok(())
}

pub fn validate(common: &Common, table: Option<PathBuf>, model: Option<PathBuf>) -> Result<(), CliError> {
    let s = settings(common)?;
    let mut run = Run::new("validate", Some(s.seed), s.out.clone())?;
    let table = read_table(&mut run, &s.table_path(table))?;
    let spec = read_spec(&mut run, model.or_else(|| s.cfg.model.clone()).as_deref())?;
    let report = cross_validate(&table, &spec, s.folds, s.seed, &s.sampler())?;
    for f in &report.folds {
        if let Some(w) = &f.warning {
            eprintln!("warning: {w}");
        }
    }
    run.write_json("cv_report.json", &report)?;
    let mut curves = Vec::new();
    for f in &report.folds {
        if let Some(roc) = &f.roc {
            let mut csv = String::from("fpr,tpr\n");
            for (x, y) in &roc.points {
                csv.push_str(&format!("{x},{y}\n"));
            }
            run.write(&format!("roc_{}.csv", f.fold), csv.as_bytes())?;
            curves.push((format!("fold {}", f.fold), roc));
        }
    }
    run.write("roc.svg", roc_svg(&curves).as_bytes())?;
    for f in &report.folds {
        if let Some(roc) = &f.roc {
            println!("fold {:>2}: AUC {:.4} ({} held out)", f.fold, roc.auc, f.n_test);
        }
    }
    match &report.spread {
        Some(sp) => println!("median AUC {:.4}, IQR {:.4}, range {:.4}", sp.median, sp.iqr, sp.range),
        None => return Err(CliError::internal("no fold produced an ROC curve")),
    }
    Ok(())
}

fn load_partition(run: &mut Run, s: &Settings) -> Result<SuPartition, CliError> {
    let path = s
        .cfg
        .partition_path()
        .ok_or_else(|| CliError::user("simulate needs the slope-unit partition raster (config \"partition\")"))?;
    let grid = read_grid(run, &path)?;
    SuPartition::from_grid(&grid).map_err(|e| CliError::from(e).in_file(&path))
}

fn load_scenario(
    run: &mut Run,
    input: &ScenarioInput,
    part: &SuPartition,
    scale: Standardization,
    units: PgaUnits,
) -> Result<ScenarioField, CliError> {
    let is_csv = input.path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let bytes = run.read_bytes(&input.path)?;
        let (ids, mut pga) = read_scenario_csv(bytes.as_slice()).map_err(|e| CliError::from(e).in_file(&input.path))?;
        if units == PgaUnits::Pctg {
            pga.iter_mut().for_each(|v| *v /= 100.0);
        }
        ScenarioField::new(&input.name, ids, pga, scale).map_err(|e| CliError::from(e).in_file(&input.path))
    } else {
        let grid = read_shakemap(run, &input.path)?;
        scenario_from_grid(&input.name, &grid, part, scale).map_err(|e| CliError::from(e).in_file(&input.path))
    }
}

#[derive(Serialize)]
struct ScenarioReport {
    name: String,
    mean_susceptibility: f64,
    posterior_id: String,
    scenario_id: String,
}

fn area_mean(s: &SusceptibilitySummary) -> f64 {
    landslide_gam::stats::exact_sum(s.mean.iter().copied()) / s.len() as f64
}

#[derive(Serialize)]
struct ErrorPlotReport {
    scenario: String,
    tail_width: Option<f64>,
    central_width: Option<f64>,
}

/// Interval width against mean for the calibration simulation.
fn write_error_plot(run: &Run, reference: &SusceptibilitySummary) -> Result<(), CliError> {
    let plot = error_plot_data(reference);
    let mut csv = String::from("mean,ci_width\n");
    for (m, w) in &plot.points {
        csv.push_str(&format!("{m},{w}\n"));
    }
    run.write("error_plot.csv", csv.as_bytes())?;
    run.write("error_plot.svg", error_svg(&reference.name, &plot).as_bytes())?;
    run.write_json(
        "error_plot.json",
        &ErrorPlotReport { scenario: reference.name.clone(), tail_width: plot.tail_width, central_width: plot.central_width },
    )?;
    Ok(())
}

fn write_summary(run: &Run, name: &str, s: &SusceptibilitySummary) -> Result<(), CliError> {
    let bytes = csv_bytes(|b| s.write_csv(b).map_err(CliError::from))?;
    run.write(name, &bytes)?;
    Ok(())
}

/// Values of `s` in partition id order.
fn by_partition(part: &SuPartition, ids: &[u32], values: &[f64]) -> Result<Vec<f64>, CliError> {
    let mut out = vec![f64::NAN; part.len()];
    for (id, v) in ids.iter().zip(values) {
        if let Some(i) = part.position(*id) {
            out[i] = *v;
        }
    }
    if let Some(k) = out.iter().position(|v| v.is_nan()) {
        return Err(CliError::user(format!("slope unit {} of the partition has no value", part.ids()[k])));
    }
    Ok(out)
}

fn write_map(run: &Run, part: &SuPartition, s: &SusceptibilitySummary, mean_max: f64, ci_max: f64) -> Result<(), CliError> {
    let mean = by_partition(part, &s.su_ids, &s.mean)?;
    let ci = by_partition(part, &s.su_ids, &s.ci_width)?;
    let svg = map_svg(
        &s.name,
        part,
        &[
            Panel { title: "Mean susceptibility".into(), values: &mean, range: (0.0, mean_max) },
            Panel { title: "95% CI width".into(), values: &ci, range: (0.0, ci_max) },
        ],
    );
    run.write(&format!("maps/{}.svg", file_stem(&s.name)), svg.as_bytes())?;
    Ok(())
}

pub fn simulate(
    common: &Common,
    table: Option<PathBuf>,
    model: Option<PathBuf>,
    posterior: Option<PathBuf>,
    extra: &[PathBuf],
) -> Result<(), CliError> {
    let s = settings(common)?;
    let mut run = Run::new("simulate", Some(s.seed), s.out.clone())?;
    let table_path = s.table_path(table);
    let table = read_table(&mut run, &table_path)?;
    let scales: BTreeMap<String, Standardization> = read_json(&mut run, &Settings::scales_path(&table_path))?;
    let spec = read_spec(&mut run, model.or_else(|| s.cfg.model.clone()).as_deref())?;
    let post_dir = posterior.unwrap_or_else(|| s.out.clone());
    let meta_path = post_dir.join(POSTERIOR_META_FILE);
    let sidecar: PosteriorSidecar = read_json(&mut run, &meta_path)?;
    if sidecar.model_sha256 != model_hash(&spec) {
        return Err(CliError::user(format!(
            "{} was fitted with a different model definition",
            meta_path.display()
        )));
    }
    let post_path = post_dir.join(POSTERIOR_FILE);
    let bytes = run.read_bytes(&post_path)?;
    let samples = PosteriorSamples::read_csv(bytes.as_slice(), sidecar.sampler)
        .map_err(|e| CliError::user(e.to_string()).in_file(&post_path))?;
    let design = build_design(&table, &spec)?;
    let part = load_partition(&mut run, &s)?;

    let pga = &s.cfg.pga_column;
    let scale = *scales
        .get(pga)
        .ok_or_else(|| CliError::user(format!("no standardization recorded for column {pga}")))?;
    let target = SwapTarget { term: format!("{pga}{STANDARDIZED_SUFFIX}"), scale };
    let mut inputs = s.cfg.scenarios.clone();
    for p in extra {
        let name = p.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string());
        inputs.push(ScenarioInput { name, path: p.clone() });
    }
    let mut fields = Vec::new();
    for input in &inputs {
        fields.push(load_scenario(&mut run, input, &part, scale, s.cfg.scenario_csv_units)?);
    }
    let mut seen = std::collections::HashSet::new();
    for name in std::iter::once(&s.cfg.reference_name).chain(fields.iter().map(|f| &f.name)) {
        if !seen.insert(file_stem(name)) {
            return Err(CliError::user(format!("duplicate scenario name {name}")));
        }
    }

    let ids = table.su_ids();
    let pooled = s.cfg.combine == CombineKind::PooledDraws;
    let mut sims: Vec<ScenarioSimulation> = Vec::new();
    let mut summaries = Vec::new();
    let mut reports = Vec::new();
    let mut record = |sim: ScenarioSimulation, sims: &mut Vec<ScenarioSimulation>| {
        let summary = summarize_scenario(&sim);
        reports.push(ScenarioReport {
            name: sim.name.clone(),
            mean_susceptibility: area_mean(&summary),
            posterior_id: sim.posterior_id.clone(),
            scenario_id: sim.scenario_id.clone(),
        });
        summaries.push(summary);
        if pooled {
            sims.push(sim);
        }
    };
    record(simulate_reference(&samples, &design, ids, &s.cfg.reference_name)?, &mut sims);
    for field in &fields {
        record(swap_scenario(&samples, &design, ids, field, &target)?, &mut sims);
    }

    for summary in &summaries {
        write_summary(&run, &format!("scenarios/{}.csv", file_stem(&summary.name)), summary)?;
    }
    let combined: Option<CombinedSummary> = if summaries.len() >= 2 {
        Some(if pooled { combine_pooled(&sims)? } else { combine_scenarios(&summaries)? })
    } else {
        None
    };
    let all = summaries.iter().chain(combined.iter().map(|c| &c.summary));
    let mean_max = all.clone().flat_map(|x| x.mean.iter().copied()).fold(0.0, f64::max);
    let ci_max = all.clone().flat_map(|x| x.ci_width.iter().copied()).fold(0.0, f64::max);
    for summary in all {
        write_map(&run, &part, summary, mean_max, ci_max)?;
    }
    if let Some(c) = &combined {
        write_summary(&run, "combined.csv", &c.summary)?;
    }
    write_error_plot(&run, &summaries[0])?;
    run.write_json("simulate_report.json", &reports)?;
    for r in &reports {
        println!("{:<28} mean susceptibility {:.4}", r.name, r.mean_susceptibility);
    }
    if let Some(c) = &combined {
        println!("{:<28} mean susceptibility {:.4} ({} maps)", "combined", area_mean(&c.summary), c.scenarios.len());
    }
    Ok(())
}

pub fn combine(common: &Common, inputs: &[PathBuf]) -> Result<(), CliError> {
    let s = settings(common)?;
    if inputs.len() < 2 {
        return Err(CliError::user(format!("combine needs at least 2 summary CSVs, got {}", inputs.len())));
    }
    let mut run = Run::new("combine", Some(s.seed), s.out.clone())?;
    let mut summaries = Vec::new();
    for p in inputs {
        let name = p.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let bytes = run.read_bytes(p)?;
        summaries.push(SusceptibilitySummary::read_csv(&name, bytes.as_slice()).map_err(|e| CliError::from(e).in_file(p))?);
    }
    let combined = combine_scenarios(&summaries)?;
    write_summary(&run, "combined.csv", &combined.summary)?;
    println!("combined {} summaries over {} slope units -> {}", summaries.len(), combined.summary.len(), run.path("combined.csv").display());
    Ok(())
}

fn read_areas(bytes: &[u8], path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::str::from_utf8(bytes).map_err(|_| CliError::user(format!("{} is not UTF-8", path.display())))?;
    let mut lines = text.lines().enumerate();
    let header: Vec<&str> = lines.next().map(|(_, h)| h.split(',').map(str::trim).collect()).unwrap_or_default();
    let col = header
        .iter()
        .position(|h| *h == "area_m2")
        .ok_or_else(|| CliError::user(format!("{}: line 1: no area_m2 column", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cell = line.split(',').nth(col).map(str::trim).unwrap_or("");
        let v = cell
            .parse::<f64>()
            .map_err(|_| CliError::user(format!("{}: line {}: bad area {cell:?}", path.display(), i + 1)))?;
        out.push(v);
    }
    Ok(out)
}

pub fn fad(common: &Common, areas: Option<PathBuf>) -> Result<(), CliError> {
    let s = settings(common)?;
    let path = areas
        .or_else(|| s.cfg.areas.clone())
        .ok_or_else(|| CliError::user("fad needs --areas or an \"areas\" entry in the configuration"))?;
    let mut run = Run::new("fad", None, s.out.clone())?;
    let bytes = run.read_bytes(&path)?;
    let areas = read_areas(&bytes, &path)?;
    let fad = frequency_area(&areas, s.cfg.fad_bins)?;
    let bytes = csv_bytes(|b| fad.write_csv(b).map_err(CliError::from))?;
    run.write("fad.csv", &bytes)?;
    run.write_json("fad.json", &fad)?;
    run.write("fad.svg", fad_svg(&fad).as_bytes())?;
    match fad.rollover {
        Some(r) => println!("{} landslides, rollover at {:.1} m^2", fad.n, r),
        None => println!("{} landslides, too few for a rollover estimate", fad.n),
    }
    Ok(())
}
