//! Sweep-line crossing count against the brute-force oracle, plus NELD and
//! CRE of a random drawing.
//!
//! `cargo run --release --example crossings_metrics`

use std::time::Instant;

use multigila::generators;
use multigila::gila::random_square;
use multigila::metrics::{count_crossings, count_crossings_brute_force, cre, neld};

fn main() {
    let g = generators::random_connected(600, 1000, 5);
    let layout = random_square(&g, 1.0, 9);
    let t = Instant::now();
    let sweep = count_crossings(&g, &layout);
    let sweep_time = t.elapsed();
    let t = Instant::now();
    let brute = count_crossings_brute_force(&g, &layout);
    let brute_time = t.elapsed();
    println!("sweep {sweep} in {sweep_time:.2?}, brute force {brute} in {brute_time:.2?}");
    println!("cre {:.3} neld {:.3}", cre(sweep, g.edge_count()), neld(&g, &layout).expect("edges"));
}
