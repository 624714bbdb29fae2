//! Drawing quality (crossings, CRE, NELD), component arrangement and export.

use std::fmt::Write as _;
use std::io::BufRead;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{GraphError, MetricsError};
use crate::graph::{Graph, Layout, Point, VertexId};
use crate::seed::mix_seed;

/// Perturbation size relative to the drawing's diameter.
const PERTURBATION: f64 = 1e-9;

/// Edge endpoints nudged by a tiny ID-keyed offset so that no three
/// endpoints are collinear by accident of the input.
fn perturbed_segments(g: &Graph, layout: &Layout) -> Vec<(VertexId, VertexId, Point, Point)> {
    let scale = layout
        .bounding_box()
        .map(|(lo, hi)| (hi - lo).norm())
        .filter(|d| *d > 0.0)
        .unwrap_or(1.0);
    let nudge = |id: VertexId| {
        let h = mix_seed(&[id, 0xc2055]);
        let unit = |bits: u64| (bits >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        let p = layout.get(id).expect("layout covers the graph");
        p + Point::new(unit(h), unit(mix_seed(&[h]))) * (PERTURBATION * scale)
    };
    g.edges().map(|(u, v, _)| (u, v, nudge(u), nudge(v))).collect()
}

fn orient(p: Point, q: Point, r: Point) -> f64 {
    (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
}

fn proper_cross(a: &(VertexId, VertexId, Point, Point), b: &(VertexId, VertexId, Point, Point)) -> bool {
    if a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1 {
        return false;
    }
    let (o1, o2) = (orient(a.2, a.3, b.2), orient(a.2, a.3, b.3));
    let (o3, o4) = (orient(b.2, b.3, a.2), orient(b.2, b.3, a.3));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Number of edge pairs whose open segments properly intersect. Edges are
/// swept by their left end; each is tested only against edges whose
/// x-extent is still active.
pub fn count_crossings(g: &Graph, layout: &Layout) -> u64 {
    let segments = perturbed_segments(g, layout);
    let span = |s: &(VertexId, VertexId, Point, Point)| (s.2.x.min(s.3.x), s.2.x.max(s.3.x));
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by(|&a, &b| span(&segments[a]).0.total_cmp(&span(&segments[b]).0).then(a.cmp(&b)));
    let mut active: Vec<usize> = Vec::new();
    let mut crossings = 0;
    for i in order {
        let (left, _) = span(&segments[i]);
        active.retain(|&j| span(&segments[j]).1 >= left);
        crossings += active.iter().filter(|&&j| proper_cross(&segments[i], &segments[j])).count() as u64;
        active.push(i);
    }
    crossings
}

/// Quadratic reference count with the same perturbation.
pub fn count_crossings_brute_force(g: &Graph, layout: &Layout) -> u64 {
    let segments = perturbed_segments(g, layout);
    let mut crossings = 0;
    for i in 0..segments.len() {
        for j in i + 1..segments.len() {
            if proper_cross(&segments[i], &segments[j]) {
                crossings += 1;
            }
        }
    }
    crossings
}

fn edge_lengths(g: &Graph, layout: &Layout) -> Vec<f64> {
    g.edges()
        .map(|(u, v, _)| layout.get(u).expect("layout covers u").distance(layout.get(v).expect("layout covers v")))
        .collect()
}

/// Population standard deviation of the edge lengths over their mean.
pub fn neld(g: &Graph, layout: &Layout) -> Result<f64, MetricsError> {
    let lengths = edge_lengths(g, layout);
    if lengths.is_empty() {
        return Err(MetricsError::NoEdges);
    }
    let n = lengths.len() as f64;
    let mean = lengths.iter().sum::<f64>() / n;
    if mean <= 0.0 {
        return Err(MetricsError::DegenerateDrawing);
    }
    let var = lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt() / mean)
}

/// Crossings per edge, charging each crossing to both of its edges.
pub fn cre(crossings: u64, edge_count: usize) -> f64 {
    if edge_count == 0 {
        0.0
    } else {
        2.0 * crossings as f64 / edge_count as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QualityReport {
    pub cre: f64,
    pub neld: f64,
    pub crossings_total: u64,
    pub edge_count: usize,
    pub mean_edge_length: f64,
}

pub fn quality(g: &Graph, layout: &Layout) -> Result<QualityReport, MetricsError> {
    let lengths = edge_lengths(g, layout);
    if lengths.is_empty() {
        return Err(MetricsError::NoEdges);
    }
    let crossings = count_crossings(g, layout);
    Ok(QualityReport {
        cre: cre(crossings, g.edge_count()),
        neld: neld(g, layout)?,
        crossings_total: crossings,
        edge_count: g.edge_count(),
        mean_edge_length: lengths.iter().sum::<f64>() / lengths.len() as f64,
    })
}

/// Translates component layouts into the cells of a near-square matrix,
/// largest component first. Cells are as large as the largest bounding box
/// plus a margin of a tenth of the largest box dimension on every side.
pub fn arrange_components(components: &[(Graph, Layout)]) -> Layout {
    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(components[i].0.vertex_count()), i));
    let boxes: Vec<(Point, Point)> = components
        .iter()
        .map(|(_, l)| l.bounding_box().unwrap_or((Point::ORIGIN, Point::ORIGIN)))
        .collect();
    let max_w = boxes.iter().map(|(lo, hi)| hi.x - lo.x).fold(0.0, f64::max);
    let max_h = boxes.iter().map(|(lo, hi)| hi.y - lo.y).fold(0.0, f64::max);
    let margin = 0.1 * max_w.max(max_h).max(1.0);
    let (cell_w, cell_h) = (max_w + 2.0 * margin, max_h + 2.0 * margin);
    let cols = (components.len() as f64).sqrt().ceil().max(1.0) as usize;
    let mut out = Layout::new();
    for (slot, &i) in order.iter().enumerate() {
        let (row, col) = (slot / cols, slot % cols);
        let target = Point::new(col as f64 * cell_w, row as f64 * cell_h);
        out.extend(&components[i].1.translated(target - boxes[i].0));
    }
    out
}

/// Number of matrix rows and columns used for `count` components.
pub fn matrix_shape(count: usize) -> (usize, usize) {
    let cols = (count as f64).sqrt().ceil().max(1.0) as usize;
    (count.div_ceil(cols), cols)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Svg,
    Coords,
    JsonReport,
}

impl FromStr for ExportFormat {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, MetricsError> {
        match s {
            "svg" => Ok(ExportFormat::Svg),
            "coords" => Ok(ExportFormat::Coords),
            "json-report" | "json" => Ok(ExportFormat::JsonReport),
            other => Err(MetricsError::UnsupportedFormat(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentSummary {
    pub vertices: usize,
    pub edges: usize,
    pub level_sizes: Vec<usize>,
}

/// Run summary written by the `json-report` export.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub cre: f64,
    pub neld: f64,
    pub crossings: u64,
    pub edge_count: usize,
    pub mean_edge_length: f64,
    /// Level sizes of the largest component's hierarchy, finest first.
    pub levels: Vec<usize>,
    pub supersteps: u64,
    pub messages: u64,
    pub message_bytes: u64,
    pub pruned_leaves: usize,
    pub reinsertion_crossing_delta: i64,
    pub components: Vec<ComponentSummary>,
}

impl RunReport {
    pub fn from_quality(q: &QualityReport) -> Self {
        RunReport {
            cre: q.cre,
            neld: q.neld,
            crossings: q.crossings_total,
            edge_count: q.edge_count,
            mean_edge_length: q.mean_edge_length,
            ..RunReport::default()
        }
    }
}

fn svg(g: &Graph, layout: &Layout) -> String {
    let (lo, hi) = layout.bounding_box().unwrap_or((Point::ORIGIN, Point::ORIGIN));
    let extent = (hi.x - lo.x).max(hi.y - lo.y);
    let pad = if extent > 0.0 { 0.05 * extent } else { 1.0 };
    let lengths = edge_lengths(g, layout);
    let unit = if lengths.is_empty() {
        pad
    } else {
        lengths.iter().sum::<f64>() / lengths.len() as f64
    };
    let radius = 0.15 * unit;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}">"#,
        lo.x - pad,
        lo.y - pad,
        hi.x - lo.x + 2.0 * pad,
        hi.y - lo.y + 2.0 * pad
    );
    let _ = writeln!(out, r##"<g stroke="#555" stroke-width="{}">"##, radius / 3.0);
    for (u, v, _) in g.edges() {
        let (a, b) = (layout.get(u).expect("layout covers u"), layout.get(v).expect("layout covers v"));
        let _ = writeln!(out, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, a.x, a.y, b.x, b.y);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g fill="#c33">"##);
    for (_, p) in layout.iter() {
        let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{}"/>"#, p.x, p.y, radius);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

fn coords(layout: &Layout) -> String {
    let mut out = String::new();
    for (id, p) in layout.iter() {
        let _ = writeln!(out, "{id} {} {}", p.x, p.y);
    }
    out
}

/// Renders the drawing. `json-report` uses `report` when given and
/// otherwise measures the drawing itself.
pub fn export(
    g: &Graph,
    layout: &Layout,
    format: ExportFormat,
    report: Option<&RunReport>,
) -> Result<String, MetricsError> {
    match format {
        ExportFormat::Svg => Ok(svg(g, layout)),
        ExportFormat::Coords => Ok(coords(layout)),
        ExportFormat::JsonReport => {
            let owned;
            let report = match report {
                Some(r) => r,
                None => {
                    owned = RunReport::from_quality(&quality(g, layout)?);
                    &owned
                }
            };
            Ok(serde_json::to_string_pretty(report).expect("report serializes") + "\n")
        }
    }
}

/// Parses `id x y` lines as written by the `coords` export.
pub fn load_coords<R: BufRead>(source: R) -> Result<Layout, GraphError> {
    let mut layout = Layout::new();
    for (i, line) in source.lines().enumerate() {
        let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
        let parse_err = |message: String| GraphError::Parse { line: i + 1, message };
        let mut it = line.split_whitespace();
        let Some(id) = it.next() else { continue };
        let id: VertexId = id.parse().map_err(|_| parse_err(format!("bad vertex id {id:?}")))?;
        let mut coord = || -> Result<f64, GraphError> {
            let tok = it.next().ok_or_else(|| parse_err("missing coordinate".into()))?;
            tok.parse().map_err(|_| parse_err(format!("bad coordinate {tok:?}")))
        };
        let (x, y) = (coord()?, coord()?);
        if it.next().is_some() {
            return Err(parse_err("trailing tokens".into()));
        }
        layout.insert(id, Point::new(x, y));
    }
    Ok(layout)
}
