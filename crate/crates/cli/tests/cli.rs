use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;

fn lsgam(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsgam")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

/// Synthetic study area ingested and fitted once with a short chain.
fn fitted() -> &'static Path {
    static DIR: OnceLock<TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        ok(lsgam(&["synth", "."], dir.path()));
        ok(lsgam(&["--config", "config.json", "ingest"], dir.path()));
        ok(lsgam(&["--config", "config.json", "--samples", "200", "fit"], dir.path()));
        dir
    })
    .path()
}

const TOY_PARTITION: &str = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 10\nNODATA_value -9999\n1 2\n1 2\n";
const TOY_SLOPE: &str = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 10\nNODATA_value -9999\n10 30\n20 45\n";

fn toy_dir(with_slope: bool) -> TempDir {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("su.asc"), TOY_PARTITION).unwrap();
    if with_slope {
        std::fs::write(dir.path().join("slope.asc"), TOY_SLOPE).unwrap();
    }
    std::fs::write(dir.path().join("centroids.csv"), "x,y\n15,5\n").unwrap();
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"out": "out", "ingest": {"partition": "su.asc", "continuous": {"Slope": "slope.asc"}, "centroids": "centroids.csv"}}"#,
    )
    .unwrap();
    dir
}

#[test]
fn ingest_toy_rasters() {
    let dir = toy_dir(true);
    ok(lsgam(&["--config", "config.json", "ingest"], dir.path()));
    let table = read(dir.path().join("out/su_table.csv"));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3, "{table}");
    assert!(lines[0].starts_with("su_id,label,Slope_mu,Slope_sigma"));
    assert!(lines[1].starts_with("1,0,15,"));
    assert!(lines[2].starts_with("2,1,37.5,"));
    let scales: serde_json::Value = serde_json::from_str(&read(dir.path().join("out/su_table.scales.json"))).unwrap();
    assert_eq!(scales["Slope_mu"]["mean"], 26.25);
    let sidecar: serde_json::Value = serde_json::from_str(&read(dir.path().join("out/su_table.csv.meta.json"))).unwrap();
    assert_eq!(sidecar["tool"], "lsgam");
    assert!(sidecar["inputs"]["slope.asc"].as_str().unwrap().len() == 64);
}

#[test]
fn ingest_rerun_is_byte_identical() {
    let dir = toy_dir(true);
    ok(lsgam(&["--config", "config.json", "ingest"], dir.path()));
    let first = std::fs::read(dir.path().join("out/su_table.csv")).unwrap();
    let first_meta = std::fs::read(dir.path().join("out/su_table.csv.meta.json")).unwrap();
    ok(lsgam(&["--config", "config.json", "ingest"], dir.path()));
    assert_eq!(first, std::fs::read(dir.path().join("out/su_table.csv")).unwrap());
    assert_eq!(first_meta, std::fs::read(dir.path().join("out/su_table.csv.meta.json")).unwrap());
}

#[test]
fn missing_raster_exits_2_and_names_it() {
    let dir = toy_dir(false);
    let out = lsgam(&["--config", "config.json", "ingest"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("slope.asc"), "{err}");
}

#[test]
fn malformed_raster_exits_2_with_file_and_line() {
    let dir = toy_dir(true);
    std::fs::write(dir.path().join("slope.asc"), TOY_SLOPE.replace("20 45", "20 abc")).unwrap();
    let out = lsgam(&["--config", "config.json", "ingest"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("slope.asc") && err.contains("line 8"), "{err}");
}

#[test]
fn bad_flag_exits_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(lsgam(&["fit", "--no-such-flag"], dir.path()).status.code(), Some(2));
    assert_eq!(lsgam(&["--threads", "0", "fad", "--areas", "x.csv"], dir.path()).status.code(), Some(2));
}

#[test]
fn fit_reports_positive_ground_motion_term() {
    let dir = fitted();
    let summary = read(dir.join("out/summary.csv"));
    let pga = summary.lines().find(|l| l.starts_with("beta[PGA_mu_z],")).expect("PGA row");
    assert!(pga.ends_with(",positive"), "{pga}");
    let diag: serde_json::Value = serde_json::from_str(&read(dir.join("out/diagnostics.json"))).unwrap();
    assert!(diag["min_ess"].as_f64().unwrap() > 0.0);
    for f in ["posterior.csv", "posterior.json", "diagnostics.json", "summary.csv"] {
        let meta: serde_json::Value = serde_json::from_str(&read(dir.join(format!("out/{f}.meta.json")))).unwrap();
        assert_eq!(meta["seed"], 1, "{f}");
    }
}

#[test]
fn smoke_fit_is_fast_and_seed_changes_draws() {
    let dir = fitted();
    let t0 = std::time::Instant::now();
    let fit = |seed: &str, out: &str| {
        let args = ["--config", "config.json", "--samples", "100", "--seed", seed, "--out", out, "fit", "--table", "out/su_table.csv"];
        ok(lsgam(&args, dir));
    };
    fit("7", "seed7");
    assert!(t0.elapsed().as_secs() < 60);
    fit("8", "seed8");
    let a = read(dir.join("seed7/posterior.csv"));
    let b = read(dir.join("seed8/posterior.csv"));
    assert_eq!(a.lines().next(), b.lines().next());
    assert_ne!(a, b);
}

#[test]
fn validate_writes_roc_svg_and_consistent_report() {
    let dir = fitted();
    // the table lives in `out`, so point validate at it explicitly
    let args = ["--config", "config.json", "--samples", "100", "--folds", "3", "--out", "cv", "validate", "--table", "out/su_table.csv"];
    ok(lsgam(&args, dir));
    let svg = read(dir.join("cv/roc.svg"));
    let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
    let paths: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("path")).collect();
    assert_eq!(paths.len(), 3);
    for p in &paths {
        for pair in p.attribute("d").unwrap().split(['M', 'L']).filter(|s| !s.trim().is_empty()) {
            let (x, y) = pair.trim().split_once(',').unwrap();
            let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
            // unit square drawn at (70, 30) with side 400
            assert!((70.0..=470.0).contains(&x) && (30.0..=430.0).contains(&y));
        }
    }
    let report: serde_json::Value = serde_json::from_str(&read(dir.join("cv/cv_report.json"))).unwrap();
    for fold in report["folds"].as_array().unwrap() {
        let roc = &fold["roc"];
        let pts: Vec<(f64, f64)> = roc["points"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap()))
            .collect();
        assert_eq!(pts.first(), Some(&(0.0, 0.0)));
        assert_eq!(pts.last(), Some(&(1.0, 1.0)));
        let integral: f64 = pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum();
        assert!((integral - roc["auc"].as_f64().unwrap()).abs() < 1e-9);
        let csv = read(dir.join(format!("cv/roc_{}.csv", fold["fold"])));
        assert_eq!(csv.lines().count(), pts.len() + 1);
    }
}

fn summary_rows(path: PathBuf) -> Vec<(u32, f64, f64, f64)> {
    read(path)
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            (v[0].parse().unwrap(), v[1].parse().unwrap(), v[2].parse().unwrap(), v[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn simulate_identity_ordering_and_lower_ground_motion() {
    let dir = fitted();
    std::fs::copy(dir.join("shakemaps/2017_Jiuzhaigou.xml"), dir.join("calibration_copy.xml")).unwrap();
    let args = ["--config", "config.json", "--out", "sim", "simulate", "--table", "out/su_table.csv", "--posterior", "out", "calibration_copy.xml"];
    ok(lsgam(&args, dir));
    assert_eq!(
        std::fs::read(dir.join("sim/scenarios/calibration_copy.csv")).unwrap(),
        std::fs::read(dir.join("sim/scenarios/2017_Jiuzhaigou.csv")).unwrap()
    );
    let combined = summary_rows(dir.join("sim/combined.csv"));
    assert_eq!(combined.len(), 1234);
    assert!(combined.iter().all(|r| r.2 <= r.3));
    let mean = |rows: &[(u32, f64, f64, f64)]| rows.iter().map(|r| r.1).sum::<f64>() / rows.len() as f64;
    let reference = mean(&summary_rows(dir.join("sim/scenarios/2017_Jiuzhaigou.csv")));
    // the 1974 event is the farthest and weakest of the bundled scenarios
    let weak = mean(&summary_rows(dir.join("sim/scenarios/1974_Songpan.csv")));
    assert!(weak < reference);
    let svg = read(dir.join("sim/maps/combined.svg"));
    roxmltree::Document::parse(&svg).expect("well-formed map");

    let errors = read(dir.join("sim/error_plot.csv"));
    assert_eq!(errors.lines().count(), 1235);
    let widths: serde_json::Value = serde_json::from_str(&read(dir.join("sim/error_plot.json"))).unwrap();
    // logistic draws are tighter near 0 and 1 than around 0.5
    assert!(widths["tail_width"].as_f64().unwrap() < widths["central_width"].as_f64().unwrap());
    roxmltree::Document::parse(&read(dir.join("sim/error_plot.svg"))).expect("well-formed error plot");
}

#[test]
fn combine_and_fad_commands() {
    let dir = fitted();
    let args = ["--config", "config.json", "--out", "sim2", "simulate", "--table", "out/su_table.csv", "--posterior", "out"];
    ok(lsgam(&args, dir));
    ok(lsgam(
        &[
            "--out",
            "comb",
            "combine",
            "sim2/scenarios/1933_Diexi.csv",
            "sim2/scenarios/1960_Songpan.csv",
            "sim2/scenarios/2017_Jiuzhaigou.csv",
        ],
        dir,
    ));
    let rows = summary_rows(dir.join("comb/combined.csv"));
    assert_eq!(rows.len(), 1234);
    let one = lsgam(&["--out", "comb", "combine", "sim2/scenarios/1933_Diexi.csv"], dir);
    assert_eq!(one.status.code(), Some(2));

    ok(lsgam(&["--config", "config.json", "--out", "fad", "fad"], dir));
    let fad: serde_json::Value = serde_json::from_str(&read(dir.join("fad/fad.json"))).unwrap();
    assert!(fad["rollover"].as_f64().unwrap() > 10.0);
    assert!(read(dir.join("fad/fad.csv")).starts_with("bin_lower,bin_upper,bin_center,count,density\n"));
}

#[test]
fn simulate_rejects_posterior_from_another_model() {
    let dir = fitted();
    std::fs::write(dir.join("pga_only.json"), r#"{"fixed": ["PGA_mu_z"]}"#).unwrap();
    let args = ["--config", "config.json", "--out", "other", "simulate", "--table", "out/su_table.csv", "--posterior", "out", "--model", "pga_only.json"];
    let out = lsgam(&args, dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different model"));
    let meta: serde_json::Value = serde_json::from_str(&read(dir.join("out/posterior.json"))).unwrap();
    assert_eq!(meta["model_sha256"].as_str().unwrap().len(), 64);
    assert!(meta["max_rhat"].as_f64().unwrap() > 0.0);
}
