use std::fmt::Write as _;

use super::IngestError;

/// Cell geometry shared by a raster and anything aligned with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub ncols: usize,
    pub nrows: usize,
    pub xllcorner: f64,
    pub yllcorner: f64,
    pub cellsize: f64,
}

impl Geometry {
    /// Same shape and, up to a relative 1e-9, the same corner and cell size.
    pub fn aligned_with(&self, other: &Geometry) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        self.ncols == other.ncols
            && self.nrows == other.nrows
            && close(self.xllcorner, other.xllcorner)
            && close(self.yllcorner, other.yllcorner)
            && close(self.cellsize, other.cellsize)
    }

    /// Map coordinates of the center of cell `(row, col)`; row 0 is the
    /// northernmost row.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        let x = self.xllcorner + (col as f64 + 0.5) * self.cellsize;
        let y = self.yllcorner + ((self.nrows - row) as f64 - 0.5) * self.cellsize;
        (x, y)
    }

    /// Cell containing `(x, y)`, or `None` outside the raster extent.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let cf = ((x - self.xllcorner) / self.cellsize).floor();
        let rf = ((y - self.yllcorner) / self.cellsize).floor();
        if !(cf >= 0.0 && rf >= 0.0) || cf >= self.ncols as f64 || rf >= self.nrows as f64 {
            return None;
        }
        Some((self.nrows - 1 - rf as usize, cf as usize))
    }

    /// Nearest cell to `(x, y)`, clamping points beyond the extent onto the
    /// border cells.
    pub fn nearest(&self, x: f64, y: f64) -> (usize, usize) {
        let cf = ((x - self.xllcorner) / self.cellsize).floor();
        let rf = ((y - self.yllcorner) / self.cellsize).floor();
        let col = cf.clamp(0.0, (self.ncols - 1) as f64) as usize;
        let rup = rf.clamp(0.0, (self.nrows - 1) as f64) as usize;
        (self.nrows - 1 - rup, col)
    }

    pub fn len(&self) -> usize {
        self.ncols * self.nrows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A single-band raster in ESRI ASCII layout, values stored row-major from
/// the north edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub geometry: Geometry,
    pub nodata: f64,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn new(geometry: Geometry, nodata: f64, values: Vec<f64>) -> Result<Self, IngestError> {
        if !(geometry.cellsize > 0.0) {
            return Err(IngestError::Header {
                line: 0,
                message: format!("cellsize must be positive, got {}", geometry.cellsize),
            });
        }
        if values.len() != geometry.len() {
            return Err(IngestError::CountMismatch {
                expected: geometry.len(),
                found: values.len(),
                line: 0,
            });
        }
        Ok(Self { geometry, nodata, values })
    }

    pub fn ncols(&self) -> usize {
        self.geometry.ncols
    }

    pub fn nrows(&self) -> usize {
        self.geometry.nrows
    }

    #[inline]
    pub fn is_nodata(&self, v: f64) -> bool {
        v == self.nodata || v.is_nan()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.geometry.ncols + col]
    }

    /// Value at `(row, col)`, `None` for nodata cells.
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        let v = self.get(row, col);
        (!self.is_nodata(v)).then_some(v)
    }

    /// Value of the cell nearest to a map coordinate.
    pub fn sample_nearest(&self, x: f64, y: f64) -> Option<f64> {
        let (r, c) = self.geometry.nearest(x, y);
        self.value(r, c)
    }

    /// Renders the grid back to ESRI ASCII text. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_ascii(&self) -> String {
        let g = &self.geometry;
        let mut out = String::with_capacity(64 + self.values.len() * 6);
        let _ = writeln!(out, "ncols {}", g.ncols);
        let _ = writeln!(out, "nrows {}", g.nrows);
        let _ = writeln!(out, "xllcorner {}", g.xllcorner);
        let _ = writeln!(out, "yllcorner {}", g.yllcorner);
        let _ = writeln!(out, "cellsize {}", g.cellsize);
        let _ = writeln!(out, "NODATA_value {}", self.nodata);
        for row in self.values.chunks(g.ncols.max(1)) {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

const HEADER_KEYS: [&str; 6] = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"];

/// Parses an ESRI ASCII grid: six `key value` header lines (keys in any
/// order, case-insensitive; `xllcenter`/`yllcenter` accepted) followed by
/// `nrows * ncols` whitespace-separated numbers.
pub fn parse_ascii_grid(text: &str) -> Result<Grid, IngestError> {
    let mut header: [Option<f64>; 6] = [None; 6];
    let mut center_x = false;
    let mut center_y = false;
    let mut lines = text.lines().enumerate();

    for _ in 0..6 {
        let (idx, line) = lines.next().ok_or(IngestError::Header {
            line: text.lines().count() + 1,
            message: "header ended early; expected six lines".into(),
        })?;
        let lineno = idx + 1;
        let mut parts = line.split_whitespace();
        let (key, val) = match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(v), None) => (k.to_ascii_lowercase(), v),
            _ => {
                return Err(IngestError::Header {
                    line: lineno,
                    message: format!("expected `key value`, got {line:?}"),
                })
            }
        };
        let slot = match key.as_str() {
            "xllcenter" => {
                center_x = true;
                2
            }
            "yllcenter" => {
                center_y = true;
                3
            }
            k => HEADER_KEYS.iter().position(|h| *h == k).ok_or_else(|| IngestError::Header {
                line: lineno,
                message: format!("unknown header key {key:?}"),
            })?,
        };
        if header[slot].is_some() {
            return Err(IngestError::Header { line: lineno, message: format!("duplicate header key {key:?}") });
        }
        let v: f64 = val.parse().map_err(|_| IngestError::Header {
            line: lineno,
            message: format!("non-numeric header value {val:?}"),
        })?;
        header[slot] = Some(v);
    }

    let missing: Vec<&str> = HEADER_KEYS
        .iter()
        .zip(header.iter())
        .filter(|(_, v)| v.is_none())
        .map(|(k, _)| *k)
        .collect();
    if !missing.is_empty() {
        return Err(IngestError::Header { line: 6, message: format!("missing header keys: {}", missing.join(", ")) });
    }
    let [ncols, nrows, mut xll, mut yll, cellsize, nodata] = header.map(|v| v.unwrap());
    let as_count = |v: f64, name: &str, line: usize| -> Result<usize, IngestError> {
        if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
            Ok(v as usize)
        } else {
            Err(IngestError::Header { line, message: format!("{name} must be a positive integer, got {v}") })
        }
    };
    let ncols = as_count(ncols, "ncols", 1)?;
    let nrows = as_count(nrows, "nrows", 2)?;
    if !(cellsize > 0.0) || !cellsize.is_finite() {
        return Err(IngestError::Header { line: 5, message: format!("cellsize must be positive, got {cellsize}") });
    }
    if center_x {
        xll -= cellsize / 2.0;
    }
    if center_y {
        yll -= cellsize / 2.0;
    }

    let expected = ncols
        .checked_mul(nrows)
        .filter(|n| *n <= 1 << 32)
        .ok_or(IngestError::Header { line: 1, message: "raster dimensions too large".into() })?;
    let mut values = Vec::with_capacity(expected.min(1 << 24));
    let mut last_line = 6;
    for (idx, line) in lines {
        let lineno = idx + 1;
        for tok in line.split_whitespace() {
            if values.len() == expected {
                return Err(IngestError::CountMismatch { expected, found: expected + 1, line: lineno });
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| IngestError::Token { line: lineno, token: tok.chars().take(32).collect() })?;
            values.push(v);
            last_line = lineno;
        }
    }
    if values.len() != expected {
        return Err(IngestError::CountMismatch { expected, found: values.len(), line: last_line });
    }
    Ok(Grid { geometry: Geometry { ncols, nrows, xllcorner: xll, yllcorner: yll, cellsize }, nodata, values })
}
