//! Benchmark graph families: grids, paths, trees, Sierpinski gaskets,
//! seeded random graphs and Zachary's karate club.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, VertexId};

/// `rows x cols` grid, vertex `r * cols + c`.
pub fn grid(rows: u64, cols: u64) -> Graph {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    Graph::new(0..rows * cols, edges.into_iter().map(|(u, v)| (u, v, 1.0)))
}

/// Grid with one diagonal per cell, a triangle mesh of
/// `3rc - 2r - 2c + 1` edges.
pub fn triangulated_grid(rows: u64, cols: u64) -> Graph {
    let mut edges: Vec<(u64, u64)> = grid(rows, cols).edges().map(|(u, v, _)| (u, v)).collect();
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols.saturating_sub(1) {
            edges.push((r * cols + c, (r + 1) * cols + c + 1));
        }
    }
    Graph::from_edges(edges)
}

pub fn path(n: u64) -> Graph {
    Graph::new(0..n, (1..n).map(|i| (i - 1, i, 1.0)))
}

pub fn cycle(n: u64) -> Graph {
    Graph::from_edges((0..n).map(|i| (i, (i + 1) % n)))
}

pub fn complete(n: u64) -> Graph {
    Graph::from_edges((0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

/// Center 0 with leaves `1..=leaves`.
pub fn star(leaves: u64) -> Graph {
    Graph::from_edges((1..=leaves).map(|i| (0, i)))
}

/// Complete `branching`-ary tree with `depth` levels below the root
/// (`tree(6, 4)` has 1,555 vertices).
pub fn tree(branching: u64, depth: u32) -> Graph {
    let mut edges = Vec::new();
    let mut frontier = vec![0u64];
    let mut next_id = 1u64;
    for _ in 0..depth {
        let mut next = Vec::new();
        for &parent in &frontier {
            for _ in 0..branching {
                edges.push((parent, next_id));
                next.push(next_id);
                next_id += 1;
            }
        }
        frontier = next;
    }
    Graph::new([0], edges.into_iter().map(|(u, v)| (u, v, 1.0)))
}

/// Sierpinski gasket graph with `3^depth` elementary triangles
/// (`sierpinski(6)`: 1,095 vertices, 2,187 edges).
pub fn sierpinski(depth: u32) -> Graph {
    let side = 1i64 << depth;
    let mut ids: HashMap<(i64, i64), VertexId> = HashMap::new();
    let mut edges = Vec::new();
    let mut stack = vec![((0i64, 0i64), (side, 0i64), (0i64, side), depth)];
    while let Some((a, b, c, d)) = stack.pop() {
        if d == 0 {
            let mut id = |p: (i64, i64)| {
                let next = ids.len() as VertexId;
                *ids.entry(p).or_insert(next)
            };
            let (ia, ib, ic) = (id(a), id(b), id(c));
            edges.extend([(ia, ib), (ib, ic), (ic, ia)]);
            continue;
        }
        let mid = |p: (i64, i64), q: (i64, i64)| ((p.0 + q.0) / 2, (p.1 + q.1) / 2);
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        stack.push((a, ab, ca, d - 1));
        stack.push((ab, b, bc, d - 1));
        stack.push((ca, bc, c, d - 1));
    }
    Graph::from_edges(edges)
}

/// Connected random graph: a random spanning tree plus uniformly random
/// extra edges until `m` distinct edges exist (capped at `n(n-1)/2`).
pub fn random_connected(n: u64, m: u64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: BTreeSet<(u64, u64)> = BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.insert((u, v));
    }
    let target = m.min(n * n.saturating_sub(1) / 2) as usize;
    while edges.len() < target {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    Graph::new(0..n, edges.into_iter().map(|(u, v)| (u, v, 1.0)))
}

/// Two triangles {0,1,2} and {3,4,5} joined by the bridge 2-3.
pub fn two_triangles_bridge() -> Graph {
    Graph::from_edges([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)])
}

const KARATE: [(u64, u64); 78] = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11), (0, 12),
    (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7), (1, 13), (1, 17),
    (1, 19), (1, 21), (1, 30), (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32),
    (3, 7), (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16), (6, 16), (8, 30),
    (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33), (15, 32), (15, 33), (18, 32),
    (18, 33), (19, 33), (20, 32), (20, 33), (22, 32), (22, 33), (23, 25), (23, 27), (23, 29),
    (23, 32), (23, 33), (24, 25), (24, 27), (24, 31), (25, 31), (26, 29), (26, 33), (27, 33),
    (28, 31), (28, 33), (29, 32), (29, 33), (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
];

/// Zachary's karate club: 34 vertices, 78 edges.
pub fn karate_club() -> Graph {
    Graph::from_edges(KARATE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::connected_components;

    #[test]
    fn benchmark_sizes() {
        let sizes = |g: Graph| (g.vertex_count(), g.edge_count());
        assert_eq!(sizes(grid(20, 20)), (400, 760));
        assert_eq!(sizes(grid(40, 40)), (1600, 3120));
        assert_eq!(sizes(sierpinski(4)), (123, 243));
        assert_eq!(sizes(sierpinski(6)), (1095, 2187));
        assert_eq!(sizes(sierpinski(8)), (9843, 19683));
        assert_eq!(sizes(tree(6, 4)), (1555, 1554));
        assert_eq!(sizes(karate_club()), (34, 78));
        assert_eq!(sizes(triangulated_grid(130, 130)), (16_900, 50_181));
    }

    #[test]
    fn random_graphs_are_connected() {
        let g = random_connected(500, 1200, 1);
        assert_eq!(g.edge_count(), 1200);
        assert_eq!(connected_components(&g).len(), 1);
    }
}
