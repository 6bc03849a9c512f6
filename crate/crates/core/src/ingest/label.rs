use std::io::Read;

use super::zonal::SuPartition;
use super::IngestError;

#[derive(Debug, Clone, PartialEq)]
pub struct Centroid {
    pub x: f64,
    pub y: f64,
    pub landslide_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    /// One entry per partition id, in `SuPartition::ids` order.
    pub labels: Vec<u8>,
    /// Centroids that fell outside the partition or on a nodata cell.
    pub dropped: usize,
    pub warnings: Vec<String>,
}

/// Marks every slope unit containing at least one landslide centroid.
pub fn label_su(centroids: &[Centroid], part: &SuPartition) -> Labels {
    let mut labels = vec![0u8; part.len()];
    let mut dropped = 0;
    let mut warnings = Vec::new();
    if centroids.is_empty() {
        warnings.push("no landslide centroids supplied; every slope unit is labeled 0".to_string());
    }
    for c in centroids {
        match part.su_at(c.x, c.y).and_then(|id| part.position(id)) {
            Some(i) => labels[i] = 1,
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        warnings.push(format!("{dropped} centroid(s) fell outside the slope-unit partition"));
    }
    Labels { labels, dropped, warnings }
}

/// Reads `x,y[,landslide_id]` with a header row.
pub fn read_centroids<R: Read>(reader: R) -> Result<Vec<Centroid>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| IngestError::Csv { line: 1, message: e.to_string() })?.clone();
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if names.len() < 2 || names[0] != "x" || names[1] != "y" {
        return Err(IngestError::Csv { line: 1, message: "centroid header must start with x,y".into() });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| IngestError::Csv { line, message: e.to_string() })?;
        let num = |k: usize| -> Result<f64, IngestError> {
            let raw = rec.get(k).unwrap_or("").trim();
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IngestError::Csv { line, message: format!("bad coordinate {raw:?}") })
        };
        out.push(Centroid {
            x: num(0)?,
            y: num(1)?,
            landslide_id: rec.get(2).map(|s| s.trim().to_string()).filter(|s| !s.is_empty()),
        });
    }
    Ok(out)
}
