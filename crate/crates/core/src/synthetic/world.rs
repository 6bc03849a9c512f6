//! A complete synthetic study area: partition and covariate rasters,
//! ShakeMap documents for a calibration event and seven historical events,
//! landslide centroids and planimetric areas. Labels are drawn from the
//! reference model applied to the table that ingest rebuilds from these very
//! files, so re-ingesting reproduces them exactly.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};

use super::{relief_effect, slope_effect, SyntheticTruth, BEDDING, GEOLOGY, OTHER_BETAS, PGA_TERM, RELIEF, SLOPE};
use crate::ingest::{
    build_su_table, parse_ascii_grid, parse_shakemap_grid, write_shakemap_grid, Centroid, Geometry, Grid, IngestError,
    IngestInputs, IngestOutput, STANDARDIZED_SUFFIX,
};
use crate::model::spec::REFERENCE_FIXED;
use crate::stats::inverse_logit;

const NODATA: f64 = -9999.0;
const TILE: usize = 8;

/// Calibration event name.
pub const CALIBRATION_EVENT: &str = "2017_Jiuzhaigou";

/// `(name, latitude, longitude, magnitude, depth km)`.
pub const EVENTS: [(&str, f64, f64, f64, f64); 8] = [
    (CALIBRATION_EVENT, 33.193, 103.855, 6.5, 9.0),
    ("1933_Diexi", 32.012, 103.676, 7.3, 15.0),
    ("1960_Songpan", 32.706, 103.629, 6.3, 25.0),
    ("1973_Songpan", 32.995, 104.015, 6.1, 33.0),
    ("1974_Songpan", 32.913, 104.203, 5.7, 33.0),
    ("1976a_Songpan-Pingwu", 32.752, 104.157, 6.9, 16.0),
    ("1976b_Songpan-Pingwu", 32.571, 104.249, 6.4, 33.0),
    ("1976c_Songpan-Pingwu", 32.492, 104.181, 6.7, 33.0),
];

/// Continuous covariate rasters, each summarized as `_mu` and `_sigma`.
pub const CONTINUOUS: [&str; 8] = ["Elev", "Slope", "PRC", "PLC", "RSP", "TWI", "Dist2F", "Dist2S"];

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub seed: u64,
    /// Partition tiles across and down; one slope unit seed per tile.
    pub tiles_x: usize,
    pub tiles_y: usize,
    /// Tiles in the south-west corner left without slope units.
    pub dropped_tiles: usize,
    pub xllcorner: f64,
    pub yllcorner: f64,
    /// Cell size in degrees.
    pub cellsize: f64,
    /// ShakeMap lattice spacing in degrees.
    pub shakemap_spacing: f64,
    pub beta_pga: f64,
    pub intercept: f64,
    pub effect_scale: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            tiles_x: 40,
            tiles_y: 31,
            dropped_tiles: 6,
            xllcorner: 103.80,
            yllcorner: 33.00,
            cellsize: 0.00075,
            shakemap_spacing: 0.005,
            beta_pga: 2.5,
            intercept: -1.5,
            effect_scale: 1.0,
        }
    }
}

/// A generated study area. `files` holds every input file as
/// `(relative path, contents)`; `inputs` holds the same data parsed back.
#[derive(Debug, Clone)]
pub struct SyntheticWorld {
    pub files: Vec<(String, String)>,
    pub inputs: IngestInputs,
    /// Parsed ShakeMap lattices in `EVENTS` order.
    pub shakemaps: Vec<(String, Grid)>,
    pub ingested: IngestOutput,
    pub truth: SyntheticTruth,
    /// Planimetric landslide areas in square meters, one per centroid.
    pub areas: Vec<f64>,
}

pub fn raster_path(name: &str) -> String {
    format!("rasters/{name}.asc")
}

pub fn shakemap_path(event: &str) -> String {
    format!("shakemaps/{event}.xml")
}

pub const PARTITION_PATH: &str = "rasters/slope_units.asc";
pub const GEOLOGY_PATH: &str = "rasters/Geo.asc";
pub const ASPECT_PATH: &str = "rasters/aspect.asc";
pub const DIP_PATH: &str = "rasters/dip_direction.asc";
pub const CENTROIDS_PATH: &str = "landslides.csv";
pub const AREAS_PATH: &str = "landslide_areas.csv";

/// Sum of randomly oriented plane waves scaled to `[-1, 1]`.
struct SmoothField {
    waves: Vec<(f64, f64, f64, f64)>,
}

impl SmoothField {
    fn new(rng: &mut ChaCha8Rng, components: usize, max_freq: f64) -> Self {
        let waves: Vec<(f64, f64, f64, f64)> = (0..components)
            .map(|_| {
                let theta = rng.random_range(0.0..PI);
                let freq = rng.random_range(0.5..max_freq);
                (freq * theta.cos(), freq * theta.sin(), rng.random_range(0.0..2.0 * PI), rng.random_range(0.3..1.0))
            })
            .collect();
        Self { waves }
    }

    fn at(&self, u: f64, v: f64) -> f64 {
        let total: f64 = self.waves.iter().map(|w| w.3).sum();
        self.waves.iter().map(|&(fx, fy, ph, a)| a * (2.0 * PI * (fx * u + fy * v) + ph).sin()).sum::<f64>() / total
    }
}

fn round_to(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

fn wrap_degrees(x: f64) -> f64 {
    let w = x.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Distance in km between two points given in degrees.
fn distance_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let mean_lat = (0.5 * (lat1 + lat2)).to_radians();
    let dx = (lon2 - lon1) * 111.32 * mean_lat.cos();
    let dy = (lat2 - lat1) * 110.54;
    (dx * dx + dy * dy).sqrt()
}

/// Log-linear attenuation with magnitude scaling and a shared site term.
fn pga_g(event: &(&str, f64, f64, f64, f64), lat: f64, lon: f64, site: f64) -> f64 {
    let (_, elat, elon, mag, depth) = *event;
    let d = distance_km(lat, lon, elat, elon);
    let r = (d * d + depth * depth).sqrt();
    (-2.3 + (mag - 6.5) - 0.68 * ((r + 10.0) / 10.0).ln() + 0.1 * site).exp()
}

/// Voronoi partition over one jittered seed per tile; returns SU ids per
/// cell (0 for no slope unit) and the number of slope units.
fn voronoi_partition(cfg: &WorldConfig, rng: &mut ChaCha8Rng) -> (Vec<u32>, usize) {
    let (tx, ty) = (cfg.tiles_x, cfg.tiles_y);
    let (ncols, nrows) = (tx * TILE, ty * TILE);
    let seeds: Vec<(f64, f64)> = (0..tx * ty)
        .map(|t| {
            let (i, j) = (t % tx, t / tx);
            let lo = 1.0;
            let hi = TILE as f64 - 1.0;
            ((i * TILE) as f64 + rng.random_range(lo..hi), (j * TILE) as f64 + rng.random_range(lo..hi))
        })
        .collect();
    // tiles counted from the south-west corner, row by row
    let dropped = |t: usize| {
        let (i, j) = (t % tx, ty - 1 - t / tx);
        let width = cfg.dropped_tiles.div_ceil(2).max(1);
        j < 2 && i < width && j * width + i < cfg.dropped_tiles
    };
    let mut ids = vec![0u32; tx * ty];
    let mut next = 1;
    for (t, id) in ids.iter_mut().enumerate() {
        if !dropped(t) {
            *id = next;
            next += 1;
        }
    }
    let mut cells = vec![0u32; ncols * nrows];
    for row in 0..nrows {
        for col in 0..ncols {
            let (x, y) = (col as f64 + 0.5, row as f64 + 0.5);
            let (ti, tj) = (col / TILE, row / TILE);
            let mut best = (f64::INFINITY, 0);
            for j in tj.saturating_sub(1)..(tj + 2).min(ty) {
                for i in ti.saturating_sub(1)..(ti + 2).min(tx) {
                    let t = j * tx + i;
                    let d = (seeds[t].0 - x).powi(2) + (seeds[t].1 - y).powi(2);
                    if d < best.0 {
                        best = (d, t);
                    }
                }
            }
            cells[row * ncols + col] = ids[best.1];
        }
    }
    (cells, next as usize - 1)
}

fn grid_text(geometry: Geometry, values: Vec<f64>) -> (String, Grid) {
    let text = Grid::new(geometry, NODATA, values).expect("shape matches geometry").to_ascii();
    let grid = parse_ascii_grid(&text).expect("generated grid parses");
    (text, grid)
}

/// Generates the study area. Every random choice flows from `cfg.seed`.
pub fn synthetic_world(cfg: &WorldConfig) -> Result<SyntheticWorld, IngestError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (ncols, nrows) = (cfg.tiles_x * TILE, cfg.tiles_y * TILE);
    let geometry = Geometry { ncols, nrows, xllcorner: cfg.xllcorner, yllcorner: cfg.yllcorner, cellsize: cfg.cellsize };
    let (cells, _) = voronoi_partition(cfg, &mut rng);
    let mut files = Vec::new();

    let (text, partition) =
        grid_text(geometry, cells.iter().map(|&id| if id == 0 { NODATA } else { id as f64 }).collect());
    files.push((PARTITION_PATH.to_string(), text));

    let fields: Vec<SmoothField> = (0..10).map(|k| SmoothField::new(&mut rng, 4, if k < 8 { 3.0 } else { 9.0 })).collect();
    let site = SmoothField::new(&mut rng, 3, 2.0);
    let unit = |row: usize, col: usize| ((col as f64 + 0.5) / ncols as f64, 1.0 - (row as f64 + 0.5) / nrows as f64);
    let elevation = |u: f64, v: f64| 2600.0 + 900.0 * fields[0].at(u, v) + 300.0 * v;
    let fault = |u: f64, v: f64| {
        // NE-SW trace through the middle of the area, in km
        let (x, y) = (u - 0.5, v - 0.45);
        let km_per_unit = ncols as f64 * cfg.cellsize * 111.32 * (cfg.yllcorner.to_radians()).cos();
        (x * 0.6 - y * 0.8).abs() * km_per_unit
    };
    let noise = |rng: &mut ChaCha8Rng, sd: f64| Normal::new(0.0, sd).expect("positive sd").sample(rng);

    let mut continuous = Vec::new();
    for (k, &name) in CONTINUOUS.iter().enumerate() {
        let mut values = Vec::with_capacity(ncols * nrows);
        for row in 0..nrows {
            for col in 0..ncols {
                let (u, v) = unit(row, col);
                let s = fields[k].at(u, v);
                let x = match name {
                    "Elev" => round_to(elevation(u, v) + noise(&mut rng, 25.0), 0.1),
                    "Slope" => round_to((30.0 + 14.0 * s + noise(&mut rng, 4.0)).clamp(0.0, 70.0), 0.01),
                    "PRC" | "PLC" => round_to(0.01 * s + noise(&mut rng, 0.006), 1e-5),
                    "RSP" => round_to((0.5 + 0.35 * s + noise(&mut rng, 0.08)).clamp(0.0, 1.0), 1e-4),
                    "TWI" => round_to(7.5 + 2.5 * s + noise(&mut rng, 0.8), 1e-3),
                    "Dist2F" => round_to(1000.0 * fault(u, v) + noise(&mut rng, 20.0).abs(), 0.1),
                    _ => round_to((400.0 + 350.0 * s + noise(&mut rng, 30.0)).max(0.0), 0.1),
                };
                values.push(x);
            }
        }
        let (text, grid) = grid_text(geometry, values);
        files.push((raster_path(name), text));
        continuous.push((name.to_string(), grid));
    }

    let class_dip: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..360.0)).collect();
    let mut geo = Vec::with_capacity(ncols * nrows);
    let mut aspect = Vec::with_capacity(ncols * nrows);
    let mut dip = Vec::with_capacity(ncols * nrows);
    for row in 0..nrows {
        for col in 0..ncols {
            let (u, v) = unit(row, col);
            let theta = fields[8].at(u, v).atan2(fields[9].at(u, v));
            let class = (((theta + PI) / (2.0 * PI) * 8.0).floor() as usize).min(7);
            geo.push((class + 1) as f64);
            let h = 1e-4;
            let dzdx = (elevation(u + h, v) - elevation(u - h, v)) / (2.0 * h);
            let dzdy = (elevation(u, v + h) - elevation(u, v - h)) / (2.0 * h);
            // compass bearing of steepest descent
            let bearing = (-dzdx).atan2(-dzdy).to_degrees();
            aspect.push(round_to(wrap_degrees(bearing + noise(&mut rng, 10.0)), 0.01).min(359.99));
            dip.push(round_to(wrap_degrees(class_dip[class] + noise(&mut rng, 8.0)), 0.01).min(359.99));
        }
    }
    let (text, geo_grid) = grid_text(geometry, geo);
    files.push((GEOLOGY_PATH.to_string(), text));
    let (text, aspect_grid) = grid_text(geometry, aspect);
    files.push((ASPECT_PATH.to_string(), text));
    let (text, dip_grid) = grid_text(geometry, dip);
    files.push((DIP_PATH.to_string(), text));

    // ShakeMap lattices extend past the study area on every side
    let margin = 0.04;
    let sp = cfg.shakemap_spacing;
    let sm_cols = ((ncols as f64 * cfg.cellsize + 2.0 * margin) / sp).ceil() as usize;
    let sm_rows = ((nrows as f64 * cfg.cellsize + 2.0 * margin) / sp).ceil() as usize;
    let sm_geom =
        Geometry { ncols: sm_cols, nrows: sm_rows, xllcorner: cfg.xllcorner - margin, yllcorner: cfg.yllcorner - margin, cellsize: sp };
    let mut shakemaps = Vec::new();
    for event in &EVENTS {
        let mut values = Vec::with_capacity(sm_cols * sm_rows);
        for row in 0..sm_rows {
            for col in 0..sm_cols {
                let (lon, lat) = sm_geom.cell_center(row, col);
                let u = (lon - cfg.xllcorner) / (ncols as f64 * cfg.cellsize);
                let v = (lat - cfg.yllcorner) / (nrows as f64 * cfg.cellsize);
                values.push(round_to(pga_g(event, lat, lon, site.at(u, v)), 1e-5));
            }
        }
        let grid = Grid::new(sm_geom, NODATA, values)?;
        let text = write_shakemap_grid(&grid, event.0);
        let parsed = parse_shakemap_grid(&text)?;
        files.push((shakemap_path(event.0), text));
        shakemaps.push((event.0.to_string(), parsed));
    }

    let mut inputs = IngestInputs {
        partition,
        continuous,
        categorical: vec![(GEOLOGY.to_string(), geo_grid)],
        bedding: Some((aspect_grid, dip_grid)),
        pga: Some(shakemaps[0].1.clone()),
        centroids: Vec::new(),
    };
    let unlabeled = build_su_table(&inputs)?;
    let table = &unlabeled.table;
    let n = table.len();

    let s = cfg.effect_scale;
    let mut fixed = BTreeMap::new();
    for (raw, beta) in REFERENCE_FIXED.iter().zip(OTHER_BETAS.iter().chain([&cfg.beta_pga])) {
        let name = format!("{raw}{STANDARDIZED_SUFFIX}");
        let beta = if name == PGA_TERM { *beta } else { s * beta };
        fixed.insert(name, beta);
    }
    let geo_sd = Normal::new(0.0, 0.6).expect("valid sd");
    let geo_effects: BTreeMap<String, f64> = (1..=8).map(|k| (k.to_string(), s * geo_sd.sample(&mut rng))).collect();
    let bed_sd = Normal::new(0.0, 0.3).expect("valid sd");
    let bed_effects: BTreeMap<String, f64> = (1..=5).map(|k| (format!("B{k}"), s * bed_sd.sample(&mut rng))).collect();

    let mut eta = vec![cfg.intercept; n];
    for (name, beta) in &fixed {
        for (e, x) in eta.iter_mut().zip(table.numeric(name)?) {
            *e += beta * x;
        }
    }
    let slope = table.numeric(SLOPE)?;
    let relief = table.numeric(RELIEF)?;
    let geo_col = table.column(GEOLOGY).ok_or_else(|| IngestError::MissingColumn(GEOLOGY.into()))?;
    let bed_col = table.column(BEDDING).ok_or_else(|| IngestError::MissingColumn(BEDDING.into()))?;
    for i in 0..n {
        eta[i] += geo_effects[&geo_col.label_at(i)] + bed_effects[&bed_col.label_at(i)];
        eta[i] += s * (slope_effect(slope[i]) + relief_effect(relief[i]));
    }
    let labels: Vec<bool> = eta.iter().map(|&e| rng.random::<f64>() < inverse_logit(e)).collect();

    let part = &unlabeled.partition;
    let mut su_cells: Vec<Vec<(usize, usize)>> = vec![Vec::new(); part.len()];
    for (row, col, id) in part.iter_cells() {
        su_cells[part.position(id).expect("partition id")].push((row, col));
    }
    let area_dist = Gamma::new(1.4, 1.0).expect("valid shape");
    let mut centroids = Vec::new();
    let mut areas = Vec::new();
    let mut centroid_csv = String::from("x,y,landslide_id\n");
    let mut area_csv = String::from("landslide_id,area_m2\n");
    for (i, _) in labels.iter().enumerate().filter(|(_, &y)| y) {
        let count = rng.random_range(1..=8);
        for _ in 0..count {
            let (row, col) = su_cells[i][rng.random_range(0..su_cells[i].len())];
            let (cx, cy) = geometry.cell_center(row, col);
            let x = round_to(cx + rng.random_range(-0.4..0.4) * cfg.cellsize, 1e-7);
            let y = round_to(cy + rng.random_range(-0.4..0.4) * cfg.cellsize, 1e-7);
            let id = format!("LS{:05}", centroids.len() + 1);
            // inverse gamma with shape 1.4 and scale 240; mode 100 m^2
            let area = round_to(240.0 / area_dist.sample(&mut rng), 0.1).max(0.1);
            centroid_csv.push_str(&format!("{x},{y},{id}\n"));
            area_csv.push_str(&format!("{id},{area}\n"));
            centroids.push(Centroid { x, y, landslide_id: Some(id) });
            areas.push(area);
        }
    }
    files.push((CENTROIDS_PATH.to_string(), centroid_csv));
    files.push((AREAS_PATH.to_string(), area_csv));

    inputs.centroids = centroids;
    let ingested = build_su_table(&inputs)?;
    if ingested.table.labels().iter().zip(&labels).any(|(&a, &b)| (a == 1) != b) {
        return Err(IngestError::Table("re-ingested labels differ from the drawn labels".into()));
    }
    let mut iid = BTreeMap::new();
    iid.insert(GEOLOGY.to_string(), geo_effects);
    iid.insert(BEDDING.to_string(), bed_effects);
    let truth = SyntheticTruth { intercept: cfg.intercept, fixed, iid };
    Ok(SyntheticWorld { files, inputs, shakemaps, ingested, truth, areas })
}
