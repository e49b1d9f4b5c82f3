//! Minimal deterministic SVG line/marker charts for the scree and k-scan
//! tables. Output depends only on the input numbers, so identical tables
//! produce byte-identical files.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 52.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Columns: rank, observed eigenvalue, reference eigenvalue.
    Scree,
    /// Columns: k, mean silhouette, cost (cost is not drawn).
    SilhouetteScan,
}

/// Numeric rows; each row holds at least two columns.
pub type PlotTable = [Vec<f64>];

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x_min, x_max) = bounds(xs);
        let (mut y_min, mut y_max) = bounds(ys);
        if y_min > 0.0 {
            y_min = 0.0;
        }
        if y_max == y_min {
            y_max = y_min + 1.0;
        }
        let pad = 0.05 * (y_max - y_min);
        Frame {
            x_min,
            x_max: if x_max == x_min { x_min + 1.0 } else { x_max },
            y_min,
            y_max: y_max + pad,
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (WIDTH + MARGIN_LEFT - MARGIN_RIGHT) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
}

fn axes(out: &mut String, frame: &Frame, x_ticks: &[f64]) {
    let x0 = MARGIN_LEFT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="black"/>"#,
        WIDTH - MARGIN_RIGHT
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{MARGIN_TOP:.2}" stroke="black"/>"#
    );
    for &t in x_ticks {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            frame.x(t),
            y0 + 16.0,
            t
        );
    }
    for i in 0..=4 {
        let v = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            x0 - 6.0,
            frame.y(v) + 4.0
        );
    }
}

fn polyline(out: &mut String, frame: &Frame, points: &[(f64, f64)], class: &str, style: &str) {
    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.x(x), frame.y(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline class="{class}" points="{}" fill="none" {style}/>"#,
        coords.join(" ")
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `table` as an SVG document.
pub fn render(table: &PlotTable, kind: PlotKind) -> Result<String> {
    if table.is_empty() {
        return Err(Error::Parameter("cannot plot an empty table".into()));
    }
    let need = match kind {
        PlotKind::Scree => 3,
        PlotKind::SilhouetteScan => 2,
    };
    if let Some(row) = table.iter().find(|r| r.len() < need || r.iter().any(|v| !v.is_finite())) {
        return Err(Error::Parameter(format!(
            "plot rows need {need} finite columns, got {row:?}"
        )));
    }
    match kind {
        PlotKind::Scree => scree(table),
        PlotKind::SilhouetteScan => kscan(table),
    }
}

fn scree(table: &PlotTable) -> Result<String> {
    if table.len() < 2 {
        return Err(Error::Parameter("a scree plot needs at least 2 ranks".into()));
    }
    let frame = Frame::new(
        table.iter().map(|r| r[0]),
        table.iter().flat_map(|r| [r[1], r[2]]),
    );
    let mut out = String::new();
    header(&mut out, "Parallel analysis scree plot", "factor rank", "eigenvalue");
    let ticks: Vec<f64> = table.iter().map(|r| r[0]).collect();
    axes(&mut out, &frame, &ticks);
    let observed: Vec<(f64, f64)> = table.iter().map(|r| (r[0], r[1])).collect();
    let reference: Vec<(f64, f64)> = table.iter().map(|r| (r[0], r[2])).collect();
    polyline(&mut out, &frame, &observed, "observed", r##"stroke="#1f77b4" stroke-width="2""##);
    polyline(
        &mut out,
        &frame,
        &reference,
        "reference",
        r##"stroke="#d62728" stroke-width="2" stroke-dasharray="6 4""##,
    );
    let lx = WIDTH - MARGIN_RIGHT - 150.0;
    let _ = writeln!(
        out,
        r##"<text x="{lx:.2}" y="{:.2}" fill="#1f77b4">observed data</text>"##,
        MARGIN_TOP + 14.0
    );
    let _ = writeln!(
        out,
        r##"<text x="{lx:.2}" y="{:.2}" fill="#d62728">simulated reference</text>"##,
        MARGIN_TOP + 30.0
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn kscan(table: &PlotTable) -> Result<String> {
    let frame = Frame::new(table.iter().map(|r| r[0]), table.iter().map(|r| r[1]));
    let mut out = String::new();
    header(&mut out, "Mean silhouette by number of clusters", "k", "mean silhouette");
    let ticks: Vec<f64> = table.iter().map(|r| r[0]).collect();
    axes(&mut out, &frame, &ticks);
    let points: Vec<(f64, f64)> = table.iter().map(|r| (r[0], r[1])).collect();
    if points.len() > 1 {
        polyline(&mut out, &frame, &points, "silhouette", r##"stroke="#1f77b4" stroke-width="2""##);
    }
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.1 > points[best].1 {
            best = i;
        }
        let _ = writeln!(
            out,
            r##"<circle class="marker" cx="{:.2}" cy="{:.2}" r="4" fill="#1f77b4"/>"##,
            frame.x(p.0),
            frame.y(p.1)
        );
    }
    let (bx, by) = points[best];
    let _ = writeln!(
        out,
        r##"<text class="best" x="{:.2}" y="{:.2}" text-anchor="middle" fill="#d62728">k = {bx} ({by:.3})</text>"##,
        frame.x(bx),
        frame.y(by) - 10.0
    );
    out.push_str("</svg>\n");
    Ok(out)
}
