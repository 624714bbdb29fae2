//! Runs the single-level force-directed layout from a random start, without
//! coarsening.
//!
//! `cargo run --release --example single_level_layout`

use multigila::engine::EngineConfig;
use multigila::generators;
use multigila::gila::{choose_k, random_square, run_single_level, LayoutParams};
use multigila::metrics::quality;

fn main() {
    let g = generators::grid(12, 12);
    let params = LayoutParams { k: choose_k(g.edge_count()), iterations: 500, ..LayoutParams::default() };
    let start = random_square(&g, params.ideal_length, 1);
    let before = quality(&g, &start).expect("metrics");
    let (layout, stats) = run_single_level(&g, &start, None, 0, &params, &EngineConfig::with_workers(2)).expect("layout");
    let after = quality(&g, &layout).expect("metrics");
    println!("k = {}", params.k);
    println!("random start: crossings {} neld {:.3}", before.crossings_total, before.neld);
    println!("after layout: crossings {} neld {:.3}", after.crossings_total, after.neld);
    println!("supersteps {} messages {}", stats.supersteps_executed, stats.total_messages());
}
