//! Builds a solar-system hierarchy and checks it against the sequential
//! quotient oracle.
//!
//! `cargo run --release --example coarsen_hierarchy`

use std::collections::BTreeMap;

use multigila::generators;
use multigila::merger::{build_hierarchy, checks, MergerConfig, Role};

fn main() {
    let g = generators::sierpinski(6);
    let h = build_hierarchy(&g, &BTreeMap::new(), &MergerConfig { seed: 3, ..MergerConfig::default() }).expect("coarsening");
    println!("level sizes {:?}", h.level_sizes());
    for (i, level) in h.levels.iter().enumerate() {
        let count = |r: Role| level.attrs.iter().filter(|a| a.role == r).count();
        println!(
            "level {i}: n={} m={} suns={} planets={} moons={} mass={} links={}",
            level.graph.vertex_count(),
            level.graph.edge_count(),
            count(Role::Sun),
            count(Role::Planet),
            count(Role::Moon),
            level.total_mass(),
            level.links.len()
        );
    }
    match checks::verify_hierarchy(&h) {
        Ok(()) => println!("all hierarchy invariants hold"),
        Err(e) => println!("invariant violated: {e}"),
    }
}
