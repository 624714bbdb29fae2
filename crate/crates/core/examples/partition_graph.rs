//! Balanced label-propagation partitioning of a grid.
//!
//! `cargo run --release --example partition_graph [parts]`

use multigila::generators;
use multigila::partition::{capacity, partition};

fn main() {
    let parts: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let g = generators::grid(40, 40);
    let map = partition(&g, parts, 0.05, 30, 7);
    println!("{} vertices, {} edges into {parts} parts", g.vertex_count(), g.edge_count());
    println!("sizes {:?} (capacity {})", map.sizes(), capacity(g.vertex_count(), parts, 0.05));
    println!("cut edges {} of {}", map.cut_edges(&g), g.edge_count());
}
