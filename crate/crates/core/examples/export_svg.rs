//! Lays out a graph with two components and writes SVG, coordinates and a
//! JSON report.
//!
//! `cargo run --release --example export_svg [out_dir]`

use std::path::PathBuf;

use multigila::config::PipelineConfig;
use multigila::generators;
use multigila::graph::Graph;
use multigila::metrics::{export, ExportFormat};
use multigila::pipeline::layout_graph;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/export_svg".into()));
    std::fs::create_dir_all(&dir)?;
    let mut edges: Vec<(u64, u64)> = generators::sierpinski(4).edges().map(|(u, v, _)| (u, v)).collect();
    edges.extend(generators::tree(3, 3).edges().map(|(u, v, _)| (u + 1000, v + 1000)));
    let g = Graph::from_edges(edges);
    let out = layout_graph(&g, &PipelineConfig::default()).expect("layout");
    for (name, format) in [("graph.svg", ExportFormat::Svg), ("graph.coords", ExportFormat::Coords), ("report.json", ExportFormat::JsonReport)] {
        let text = export(&g, &out.layout, format, Some(&out.report)).expect("export");
        std::fs::write(dir.join(name), text)?;
    }
    println!("{} components, cre {:.4}; wrote {}", out.components.len(), out.report.cre, dir.display());
    Ok(())
}
