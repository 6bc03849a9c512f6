//! Plain SVG plots: ROC curves, slope-unit maps and the frequency-area
//! density.

use std::fmt::Write as _;

use landslide_gam::ingest::SuPartition;
use landslide_gam::validate::{ErrorPlot, FrequencyArea, RocCurve};

const RAMP: [(u8, u8, u8); 5] = [(68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37)];
const FOLD_COLORS: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Color of `t` in `[0, 1]` on a perceptually ordered ramp.
pub fn ramp(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (RAMP.len() - 1) as f64;
    let k = (x.floor() as usize).min(RAMP.len() - 2);
    let f = x - k as f64;
    let mix = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
    let (a, b) = (RAMP[k], RAMP[k + 1]);
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
}

/// Unit-square axes at `(x0, y0)` (top-left) with side `size` and ticks
/// every 0.2.
fn unit_axes(out: &mut String, x0: f64, y0: f64, size: f64, xlabel: &str, ylabel: &str) {
    let (x1, y1) = (x0 + size, y0 + size);
    let _ = writeln!(out, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let x = x0 + t * size;
        let y = y1 - t * size;
        let _ = writeln!(out, r#"<line x1="{x:.1}" y1="{y1}" x2="{x:.1}" y2="{:.1}"/>"#, y1 + 5.0);
        let _ = writeln!(out, r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0}" y2="{y:.1}"/>"#, x0 - 5.0);
    }
    let _ = writeln!(out, "</g>");
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{t:.1}</text>"#, x0 + t * size, y1 + 18.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{t:.1}</text>"#, x0 - 8.0, y1 - t * size + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, x0 + size / 2.0, y1 + 36.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        x0 - 40.0,
        y0 + size / 2.0,
        x0 - 40.0,
        y0 + size / 2.0,
        escape(ylabel)
    );
}

/// One `<path>` per curve over the unit square, with the chance diagonal as
/// a dashed line.
pub fn roc_svg(curves: &[(String, &RocCurve)]) -> String {
    let (x0, y0, size) = (70.0, 30.0, 400.0);
    let mut out = String::new();
    header(&mut out, 640.0, 500.0);
    let _ = writeln!(
        out,
        r#"<line x1="{x0}" y1="{:.1}" x2="{:.1}" y2="{y0}" stroke="gray" stroke-dasharray="4 4"/>"#,
        y0 + size,
        x0 + size
    );
    for (k, (label, roc)) in curves.iter().enumerate() {
        let mut d = String::new();
        for (i, &(fpr, tpr)) in roc.points.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, x0 + fpr * size, y0 + (1.0 - tpr) * size);
        }
        let color = FOLD_COLORS[k % FOLD_COLORS.len()];
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"><title>{}</title></path>"#, escape(label));
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{} AUC {:.3}</text>"#,
            x0 + size + 15.0,
            y0 + 15.0 + 16.0 * k as f64,
            escape(label),
            roc.auc
        );
    }
    unit_axes(&mut out, x0, y0, size, "False positive rate", "True positive rate");
    out.push_str("</svg>\n");
    out
}

/// A map panel: per-slope-unit values (in partition id order) and the
/// color range.
pub struct Panel<'a> {
    pub title: String,
    pub values: &'a [f64],
    pub range: (f64, f64),
}

/// Side-by-side choropleth panels drawn through the partition raster; runs
/// of equal slope units along a row become one rectangle.
pub fn map_svg(title: &str, part: &SuPartition, panels: &[Panel]) -> String {
    let g = part.geometry;
    let scale = (360.0 / g.ncols.max(g.nrows) as f64).min(4.0);
    let (pw, ph) = (g.ncols as f64 * scale, g.nrows as f64 * scale);
    let width = 20.0 + panels.len() as f64 * (pw + 30.0);
    let height = ph + 110.0;
    let mut out = String::new();
    header(&mut out, width, height);
    let _ = writeln!(out, r#"<text x="20" y="22" font-size="15">{}</text>"#, escape(title));
    for (p, panel) in panels.iter().enumerate() {
        let x0 = 20.0 + p as f64 * (pw + 30.0);
        let y0 = 50.0;
        let (lo, hi) = panel.range;
        let span = if hi > lo { hi - lo } else { 1.0 };
        let _ = writeln!(out, r#"<text x="{x0:.1}" y="42">{}</text>"#, escape(&panel.title));
        let _ = writeln!(out, r#"<g transform="translate({x0:.1} {y0:.1}) scale({scale:.6})" shape-rendering="crispEdges">"#);
        for row in 0..g.nrows {
            let mut col = 0;
            while col < g.ncols {
                let Some(id) = part.cell(row, col) else {
                    col += 1;
                    continue;
                };
                let start = col;
                while col < g.ncols && part.cell(row, col) == Some(id) {
                    col += 1;
                }
                let i = part.position(id).expect("partition id");
                let color = ramp((panel.values[i] - lo) / span);
                let _ = writeln!(out, r#"<rect x="{start}" y="{row}" width="{}" height="1" fill="{color}"/>"#, col - start);
            }
        }
        out.push_str("</g>\n");
        let _ = writeln!(out, r#"<rect x="{x0:.1}" y="{y0:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#);
        // legend
        let ly = y0 + ph + 15.0;
        let steps = 50;
        for s in 0..steps {
            let t = s as f64 / (steps - 1) as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{ly:.1}" width="{:.2}" height="12" fill="{}"/>"#,
                x0 + t * (pw - pw / steps as f64),
                pw / steps as f64 + 0.5,
                ramp(t)
            );
        }
        let _ = writeln!(out, r#"<text x="{x0:.1}" y="{:.1}">{lo:.3}</text>"#, ly + 28.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{hi:.3}</text>"#, x0 + pw, ly + 28.0);
    }
    out.push_str("</svg>\n");
    out
}

/// Log-log density of the frequency-area distribution with the rollover
/// marked.
pub fn fad_svg(fad: &FrequencyArea) -> String {
    let (x0, y0, w, h) = (80.0, 30.0, 480.0, 340.0);
    let mut out = String::new();
    header(&mut out, 600.0, 430.0);
    let pts: Vec<(f64, f64)> =
        fad.bins.iter().filter(|b| b.count > 0).map(|b| (b.center.log10(), b.density.log10())).collect();
    let (xmin, xmax) = (fad.bins[0].lower.log10(), fad.bins[fad.bins.len() - 1].upper.log10());
    let ymin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor();
    let ymax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil();
    let xspan = if xmax > xmin { xmax - xmin } else { 1.0 };
    let yspan = if ymax > ymin { ymax - ymin } else { 1.0 };
    let px = |x: f64| x0 + (x - xmin) / xspan * w;
    let py = |y: f64| y0 + (1.0 - (y - ymin) / yspan) * h;
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="black"/>"#);
    let mut d = String::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, px(x), py(y));
    }
    let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="black" stroke-width="1.5"/>"#);
    for &(x, y) in &pts {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, px(x), py(y));
    }
    if let Some(r) = fad.rollover {
        let x = px(r.log10());
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="red" stroke-dasharray="4 4"/>"#, y0 + h);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{}" fill="red">rollover {r:.0} m²</text>"#, x + 5.0, y0 + 15.0);
    }
    let mut e = xmin.ceil() as i32;
    while (e as f64) <= xmax {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{}" text-anchor="middle">1e{e}</text>"#, px(e as f64), y0 + h + 18.0);
        e += 1;
    }
    let mut e = ymin as i32;
    while (e as f64) <= ymax {
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"#, x0 - 6.0, py(e as f64) + 4.0);
        e += 1;
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">Landslide area (m²)</text>"#, x0 + w / 2.0, y0 + h + 40.0);
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">Probability density</text>"#,
        y0 + h / 2.0,
        y0 + h / 2.0
    );
    out.push_str("</svg>\n");
    out
}

/// Interval width against posterior mean, one dot per slope unit.
pub fn error_svg(title: &str, plot: &ErrorPlot) -> String {
    let (x0, y0, size) = (70.0, 40.0, 400.0);
    let mut out = String::new();
    header(&mut out, 500.0, 500.0);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle">{}</text>"#, x0 + size / 2.0, escape(title));
    unit_axes(&mut out, x0, y0, size, "Posterior mean susceptibility", "95% CI width");
    let _ = writeln!(out, r##"<g fill="#3b528b" fill-opacity="0.5">"##);
    for &(m, w) in &plot.points {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5"/>"#,
            x0 + m.clamp(0.0, 1.0) * size,
            y0 + (1.0 - w.clamp(0.0, 1.0)) * size
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}
