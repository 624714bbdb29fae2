//! The full pipeline on an in-memory graph: prune, coarsen, lay out level by
//! level, reinsert leaves, measure.
//!
//! `cargo run --release --example multilevel_layout [workers]`

use multigila::config::PipelineConfig;
use multigila::generators;
use multigila::pipeline::layout_graph;

fn main() {
    let workers: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let g = generators::grid(30, 30);
    let cfg = PipelineConfig { workers, verify: true, ..PipelineConfig::default() };
    let out = layout_graph(&g, &cfg).expect("layout");
    let comp = &out.components[0];
    for (i, (placed, refined)) in comp.level_layouts.iter().enumerate() {
        let lg = &comp.hierarchy.levels[i].graph;
        let x = |l| multigila::metrics::count_crossings(lg, l);
        println!("level {i}: n={:<4} crossings placed {:<5} refined {}", lg.vertex_count(), x(placed), x(refined));
    }
    let r = &out.report;
    println!("cre {:.4} neld {:.3} supersteps {} messages {}", r.cre, r.neld, r.supersteps, r.messages);
}
