//! Lays out the benchmark families and prints CRE, NELD, depth and time.
//!
//! Run with `cargo run --release --example benchmark_quality [seeds]`.

use std::time::Instant;

use multigila::config::PipelineConfig;
use multigila::generators;
use multigila::pipeline::layout_graph;

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let graphs = [
        ("grid_20_20", generators::grid(20, 20)),
        ("grid_40_40", generators::grid(40, 40)),
        ("sierpinski_06", generators::sierpinski(6)),
        ("tree_06_04", generators::tree(6, 4)),
        ("karate", generators::karate_club()),
    ];
    println!("{:<14} {:>4} {:>8} {:>7} {:>7} {:<22} {:>8}", "graph", "seed", "cross", "cre", "neld", "levels", "secs");
    for (name, g) in &graphs {
        for seed in 0..seeds {
            let cfg = PipelineConfig { seed, ..PipelineConfig::default() };
            let t = Instant::now();
            let out = layout_graph(g, &cfg).expect("layout");
            let r = &out.report;
            println!(
                "{:<14} {:>4} {:>8} {:>7.4} {:>7.3} {:<22} {:>8.2}",
                name,
                seed,
                r.crossings,
                r.cre,
                r.neld,
                format!("{:?}", r.levels),
                t.elapsed().as_secs_f64()
            );
        }
    }
}
