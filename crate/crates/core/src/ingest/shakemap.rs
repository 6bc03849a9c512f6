//! Reader for the USGS ShakeMap `grid.xml` product.
//!
//! Only the pieces needed for a single ground-motion layer are read: the
//! `grid_specification` lattice, the ordered `grid_field` declarations and the
//! whitespace-separated `grid_data` block.

use super::grid::{Geometry, Grid};
use super::IngestError;

pub const SHAKEMAP_NODATA: f64 = -9999.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub index: usize,
    pub name: String,
    pub units: Option<String>,
}

/// Lattice declared by `grid_specification`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub lon_min: f64,
    pub lat_min: f64,
    pub lon_max: f64,
    pub lat_max: f64,
    pub nlon: usize,
    pub nlat: usize,
}

/// Divisor that converts a PGA column into g.
fn unit_divisor(units: Option<&str>) -> Result<f64, IngestError> {
    match units.map(|u| u.trim().to_ascii_lowercase()) {
        None => Ok(1.0),
        Some(u) => match u.as_str() {
            "g" => Ok(1.0),
            "%g" | "pctg" | "percent_g" => Ok(100.0),
            _ => Err(IngestError::Xml(format!("unsupported PGA units {u:?}"))),
        },
    }
}

fn attr_f64(node: roxmltree::Node, name: &str) -> Result<f64, IngestError> {
    let raw = node
        .attribute(name)
        .ok_or_else(|| IngestError::Xml(format!("grid_specification lacks attribute {name}")))?;
    raw.trim()
        .parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| IngestError::Xml(format!("attribute {name}={raw:?} is not a finite number")))
}

fn attr_count(node: roxmltree::Node, name: &str) -> Result<usize, IngestError> {
    let v = attr_f64(node, name)?;
    if v >= 1.0 && v.fract() == 0.0 && v <= 1e6 {
        Ok(v as usize)
    } else {
        Err(IngestError::Xml(format!("attribute {name}={v} is not a positive count")))
    }
}

/// Parses a ShakeMap grid and returns the PGA layer in g on the declared
/// lon/lat lattice. Values in `%g` (or `pctg`) are divided by 100.
///
/// When `LON`/`LAT` columns are present each row is placed at the lattice node
/// nearest to its coordinates; otherwise rows are taken in file order, north
/// row first and longitude increasing.
pub fn parse_shakemap_grid(xml: &str) -> Result<Grid, IngestError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| IngestError::Xml(e.to_string()))?;
    let find = |name: &str| doc.descendants().find(|n| n.is_element() && n.tag_name().name() == name);

    let spec_node = find("grid_specification")
        .ok_or_else(|| IngestError::MissingField("grid_specification".into()))?;
    let lattice = LatticeSpec {
        lon_min: attr_f64(spec_node, "lon_min")?,
        lat_min: attr_f64(spec_node, "lat_min")?,
        lon_max: attr_f64(spec_node, "lon_max")?,
        lat_max: attr_f64(spec_node, "lat_max")?,
        nlon: attr_count(spec_node, "nlon")?,
        nlat: attr_count(spec_node, "nlat")?,
    };

    let mut fields = Vec::new();
    for n in doc.descendants().filter(|n| n.is_element() && n.tag_name().name() == "grid_field") {
        let index = n
            .attribute("index")
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|i| *i >= 1)
            .ok_or_else(|| IngestError::Xml("grid_field without a valid 1-based index".into()))?;
        let name = n.attribute("name").ok_or_else(|| IngestError::Xml("grid_field without name".into()))?;
        fields.push(GridField { index, name: name.to_string(), units: n.attribute("units").map(str::to_string) });
    }
    let pga = fields
        .iter()
        .find(|f| f.name.eq_ignore_ascii_case("PGA"))
        .ok_or_else(|| IngestError::MissingField("PGA".into()))?;
    let divisor = unit_divisor(pga.units.as_deref())?;
    let col_of = |name: &str| fields.iter().find(|f| f.name.eq_ignore_ascii_case(name)).map(|f| f.index - 1);
    let lon_col = col_of("LON");
    let lat_col = col_of("LAT");
    let width = fields.iter().map(|f| f.index).max().unwrap_or(0);

    let data = find("grid_data").ok_or_else(|| IngestError::MissingField("grid_data".into()))?;
    let text = data.text().unwrap_or("");

    let step = |lo: f64, hi: f64, n: usize, nominal: Option<f64>| -> f64 {
        if n > 1 {
            (hi - lo) / (n - 1) as f64
        } else {
            nominal.unwrap_or(1.0)
        }
    };
    let nominal_lon = attr_f64(spec_node, "nominal_lon_spacing").ok();
    let nominal_lat = attr_f64(spec_node, "nominal_lat_spacing").ok();
    let dx = step(lattice.lon_min, lattice.lon_max, lattice.nlon, nominal_lon.or(nominal_lat));
    let dy = step(lattice.lat_min, lattice.lat_max, lattice.nlat, nominal_lat.or(nominal_lon));
    if !(dx > 0.0 && dy > 0.0) {
        return Err(IngestError::Xml("lattice extent must be increasing".into()));
    }
    if (dx - dy).abs() > 1e-6 * dx.max(dy) {
        return Err(IngestError::Xml(format!("anisotropic lattice (dlon={dx}, dlat={dy}) is not supported")));
    }

    let expected = lattice.nlon * lattice.nlat;
    if expected > 1 << 26 {
        return Err(IngestError::Xml(format!("lattice of {expected} nodes is too large")));
    }
    let mut values = vec![f64::NAN; expected];
    let mut row_no = 0usize;
    let mut tokens = Vec::with_capacity(width);
    for line in text.lines() {
        tokens.clear();
        tokens.extend(line.split_whitespace());
        if tokens.is_empty() {
            continue;
        }
        row_no += 1;
        if row_no > expected {
            return Err(IngestError::ShakemapRow {
                row: row_no,
                message: format!("more rows than nlat x nlon = {expected}"),
            });
        }
        if tokens.len() < width {
            return Err(IngestError::ShakemapRow {
                row: row_no,
                message: format!("expected {width} columns, found {}", tokens.len()),
            });
        }
        let num = |i: usize| -> Result<f64, IngestError> {
            tokens[i].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| IngestError::ShakemapRow {
                row: row_no,
                message: format!("non-numeric value {:?}", tokens[i]),
            })
        };
        let cell = match (lon_col, lat_col) {
            (Some(lc), Some(bc)) => {
                let lon = num(lc)?;
                let lat = num(bc)?;
                let c = ((lon - lattice.lon_min) / dx).round();
                let r = ((lattice.lat_max - lat) / dy).round();
                if c < 0.0 || r < 0.0 || c >= lattice.nlon as f64 || r >= lattice.nlat as f64 {
                    return Err(IngestError::ShakemapRow {
                        row: row_no,
                        message: format!("point ({lon}, {lat}) lies outside the declared lattice"),
                    });
                }
                r as usize * lattice.nlon + c as usize
            }
            _ => row_no - 1,
        };
        if !values[cell].is_nan() {
            return Err(IngestError::ShakemapRow { row: row_no, message: "duplicate lattice node".into() });
        }
        let v = num(pga.index - 1)?;
        if v < 0.0 {
            return Err(IngestError::ShakemapRow { row: row_no, message: format!("negative PGA {v}") });
        }
        values[cell] = v / divisor;
    }
    if row_no != expected {
        return Err(IngestError::ShakemapRow {
            row: row_no + 1,
            message: format!("found {row_no} rows, nlat x nlon = {expected}"),
        });
    }

    let geometry = Geometry {
        ncols: lattice.nlon,
        nrows: lattice.nlat,
        xllcorner: lattice.lon_min - dx / 2.0,
        yllcorner: lattice.lat_min - dy / 2.0,
        cellsize: dx,
    };
    Grid::new(geometry, SHAKEMAP_NODATA, values)
}

/// Writes a minimal ShakeMap document (LON, LAT, PGA in `%g`) for a grid in g.
pub fn write_shakemap_grid(grid: &Grid, event_id: &str) -> String {
    use std::fmt::Write as _;
    let g = &grid.geometry;
    let lon_min = g.xllcorner + g.cellsize / 2.0;
    let lat_min = g.yllcorner + g.cellsize / 2.0;
    let lon_max = lon_min + (g.ncols - 1) as f64 * g.cellsize;
    let lat_max = lat_min + (g.nrows - 1) as f64 * g.cellsize;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="US-ASCII" standalone="yes"?>"#);
    let _ = writeln!(
        s,
        r#"<shakemap_grid xmlns="http://earthquake.usgs.gov/eqcenter/shakemap" event_id="{event_id}" shakemap_id="{event_id}">"#
    );
    let _ = writeln!(
        s,
        r#"<grid_specification lon_min="{lon_min}" lat_min="{lat_min}" lon_max="{lon_max}" lat_max="{lat_max}" nominal_lon_spacing="{cs}" nominal_lat_spacing="{cs}" nlon="{}" nlat="{}" />"#,
        g.ncols,
        g.nrows,
        cs = g.cellsize
    );
    let _ = writeln!(s, r#"<grid_field index="1" name="LON" units="dd" />"#);
    let _ = writeln!(s, r#"<grid_field index="2" name="LAT" units="dd" />"#);
    let _ = writeln!(s, r#"<grid_field index="3" name="PGA" units="pctg" />"#);
    s.push_str("<grid_data>\n");
    for r in 0..g.nrows {
        for c in 0..g.ncols {
            let (x, y) = g.cell_center(r, c);
            let v = grid.get(r, c);
            let _ = writeln!(s, "{x} {y} {}", v * 100.0);
        }
    }
    s.push_str("</grid_data>\n</shakemap_grid>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(fields: &str, rows: &str) -> String {
        format!(
            r#"<?xml version="1.0"?>
<shakemap_grid xmlns="http://earthquake.usgs.gov/eqcenter/shakemap">
<grid_specification lon_min="103.0" lat_min="33.0" lon_max="103.5" lat_max="33.5" nominal_lon_spacing="0.5" nominal_lat_spacing="0.5" nlon="2" nlat="2"/>
{fields}
<grid_data>
{rows}
</grid_data>
</shakemap_grid>"#
        )
    }

    const FIELDS_G: &str = r#"<grid_field index="1" name="LON" units="dd"/>
<grid_field index="2" name="LAT" units="dd"/>
<grid_field index="3" name="PGA" units="g"/>
<grid_field index="4" name="PGV" units="cms"/>"#;

    #[test]
    fn minimal_two_by_two() {
        let xml = doc(FIELDS_G, "103.0 33.5 0.1 9\n103.5 33.5 0.2 9\n103.0 33.0 0.3 9\n103.5 33.0 0.4 9");
        let g = parse_shakemap_grid(&xml).unwrap();
        assert_eq!(g.values, vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(g.geometry.cellsize, 0.5);
        assert_eq!(g.geometry.xllcorner, 102.75);
        assert_eq!(g.sample_nearest(103.49, 33.01), Some(0.4));
    }

    #[test]
    fn rows_are_placed_by_coordinates() {
        let xml = doc(FIELDS_G, "103.0 33.0 0.3 9\n103.5 33.5 0.2 9\n103.5 33.0 0.4 9\n103.0 33.5 0.1 9");
        assert_eq!(parse_shakemap_grid(&xml).unwrap().values, vec![0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn percent_g_is_normalized() {
        let fields = r#"<grid_field index="1" name="LON" units="dd"/>
<grid_field index="2" name="LAT" units="dd"/>
<grid_field index="3" name="PGA" units="%g"/>"#;
        let xml = doc(fields, "103.0 33.5 3\n103.5 33.5 7\n103.0 33.0 3\n103.5 33.0 7");
        let g = parse_shakemap_grid(&xml).unwrap();
        assert_eq!(g.values, vec![0.03, 0.07, 0.03, 0.07]);
    }

    #[test]
    fn missing_pga_field() {
        let fields = r#"<grid_field index="1" name="LON" units="dd"/><grid_field index="2" name="LAT" units="dd"/>"#;
        let xml = doc(fields, "103.0 33.5\n103.5 33.5\n103.0 33.0\n103.5 33.0");
        assert!(matches!(parse_shakemap_grid(&xml), Err(IngestError::MissingField(f)) if f == "PGA"));
    }

    #[test]
    fn row_count_errors_point_at_row() {
        let xml = doc(FIELDS_G, "103.0 33.5 0.1 9\n103.5 33.5 0.2 9\n103.0 33.0 0.3 9");
        assert!(matches!(parse_shakemap_grid(&xml), Err(IngestError::ShakemapRow { row: 4, .. })));
        let xml = doc(FIELDS_G, "103.0 33.5 0.1 9\n103.5 33.5 0.2 9\n103.0 33.0 0.3 9\n103.5 33.0 0.4 9\n103.5 33.0 0.4 9");
        assert!(matches!(parse_shakemap_grid(&xml), Err(IngestError::ShakemapRow { row: 5, .. })));
        let xml = doc(FIELDS_G, "103.0 33.5 0.1 9\n103.5 33.5 0.2\n103.0 33.0 0.3 9\n103.5 33.0 0.4 9");
        assert!(matches!(parse_shakemap_grid(&xml), Err(IngestError::ShakemapRow { row: 2, .. })));
    }

    #[test]
    fn writer_round_trips() {
        let xml = doc(FIELDS_G, "103.0 33.5 0.1 9\n103.5 33.5 0.2 9\n103.0 33.0 0.3 9\n103.5 33.0 0.4 9");
        let g = parse_shakemap_grid(&xml).unwrap();
        let again = parse_shakemap_grid(&write_shakemap_grid(&g, "test")).unwrap();
        for (a, b) in g.values.iter().zip(&again.values) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(g.geometry.aligned_with(&again.geometry));
    }
}
