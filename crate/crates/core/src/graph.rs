//! Undirected weighted graphs with stable vertex IDs, edge-list loading,
//! connected components, degree-one pruning and leaf reinsertion.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::TAU;
use std::io::BufRead;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

pub type VertexId = u64;

/// Immutable adjacency structure. Vertices are kept sorted by ID and
/// addressed internally by their rank (`index`), so neighbor lists sorted by
/// index are also sorted by ID.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    ids: Vec<VertexId>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl Graph {
    /// Builds a normalized graph: self-loops are dropped, parallel edges
    /// collapse (keeping the maximum weight) and symmetry is enforced.
    /// Every endpoint and every entry of `vertices` becomes a vertex.
    pub fn new<V, E>(vertices: V, edges: E) -> Self
    where
        V: IntoIterator<Item = VertexId>,
        E: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut ids: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut pairs: BTreeMap<(VertexId, VertexId), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            ids.insert(u);
            ids.insert(v);
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            let entry = pairs.entry(key).or_insert(w);
            if w > *entry {
                *entry = w;
            }
        }
        let ids: Vec<VertexId> = ids.into_iter().collect();
        let index = |id: VertexId| ids.binary_search(&id).expect("endpoint registered") as u32;
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); ids.len()];
        for (&(u, v), &w) in &pairs {
            let (iu, iv) = (index(u), index(v));
            adj[iu as usize].push((iv, w));
            adj[iv as usize].push((iu, w));
        }
        let mut offsets = Vec::with_capacity(ids.len() + 1);
        let mut targets = Vec::with_capacity(pairs.len() * 2);
        let mut weights = Vec::with_capacity(pairs.len() * 2);
        offsets.push(0);
        for mut list in adj {
            list.sort_by_key(|&(t, _)| t);
            for (t, w) in list {
                targets.push(t);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Graph { ids, offsets, targets, weights }
    }

    /// Unit-weight graph from an edge list.
    pub fn from_edges<E>(edges: E) -> Self
    where
        E: IntoIterator<Item = (VertexId, VertexId)>,
    {
        Graph::new(std::iter::empty(), edges.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Vertex IDs in ascending order.
    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> VertexId {
        self.ids[index]
    }

    pub fn index_of(&self, id: VertexId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn contains(&self, id: VertexId) -> bool {
        self.index_of(id).is_some()
    }

    pub fn degree(&self, index: usize) -> usize {
        self.offsets[index + 1] - self.offsets[index]
    }

    /// Neighbor indices of `index`, ascending.
    pub fn neighbor_indices(&self, index: usize) -> &[u32] {
        &self.targets[self.offsets[index]..self.offsets[index + 1]]
    }

    pub fn neighbor_weights(&self, index: usize) -> &[f64] {
        &self.weights[self.offsets[index]..self.offsets[index + 1]]
    }

    /// `(neighbor id, weight)` pairs of `index`, ascending by ID.
    pub fn neighbors(&self, index: usize) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.neighbor_indices(index)
            .iter()
            .zip(self.neighbor_weights(index))
            .map(move |(&t, &w)| (self.ids[t as usize], w))
    }

    /// Position of `target` in the neighbor list of `index`, if adjacent.
    pub fn neighbor_slot(&self, index: usize, target: VertexId) -> Option<usize> {
        let list = self.neighbor_indices(index);
        let pos = list.partition_point(|&t| self.ids[t as usize] < target);
        (pos < list.len() && self.ids[list[pos] as usize] == target).then_some(pos)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.index_of(u).and_then(|iu| self.neighbor_slot(iu, v)).is_some()
    }

    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<f64> {
        let iu = self.index_of(u)?;
        let slot = self.neighbor_slot(iu, v)?;
        Some(self.neighbor_weights(iu)[slot])
    }

    /// Each undirected edge once, as `(u, v, weight)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        (0..self.ids.len()).flat_map(move |i| {
            let u = self.ids[i];
            self.neighbors(i).filter(move |&(v, _)| u < v).map(move |(v, w)| (u, v, w))
        })
    }

    pub fn induced_subgraph(&self, keep: &BTreeSet<VertexId>) -> Graph {
        let edges = self
            .edges()
            .filter(|(u, v, _)| keep.contains(u) && keep.contains(v));
        Graph::new(keep.iter().copied().filter(|&id| self.contains(id)), edges)
    }

    /// Hop distances from `source` up to `max_depth` (inclusive), by BFS.
    pub fn bfs_distances(&self, source: VertexId, max_depth: usize) -> BTreeMap<VertexId, usize> {
        let mut dist = BTreeMap::new();
        let Some(start) = self.index_of(source) else {
            return dist;
        };
        let mut seen = vec![usize::MAX; self.ids.len()];
        seen[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            dist.insert(self.ids[i], seen[i]);
            if seen[i] == max_depth {
                continue;
            }
            for &t in self.neighbor_indices(i) {
                let t = t as usize;
                if seen[t] == usize::MAX {
                    seen[t] = seen[i] + 1;
                    queue.push_back(t);
                }
            }
        }
        dist
    }

    /// Writes the graph back out as a SNAP-style edge list.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v, _) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// Parses a whitespace-separated `u v` edge list; `#` starts a comment line.
pub fn load_edge_list<R: BufRead>(source: R) -> Result<Graph, GraphError> {
    let mut edges = Vec::new();
    for (number, line) in source.lines().enumerate() {
        let line_no = number + 1;
        let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next = || -> Result<VertexId, GraphError> {
            let token = tokens.next().ok_or_else(|| GraphError::Parse {
                line: line_no,
                message: "expected two vertex IDs".into(),
            })?;
            token.parse().map_err(|_| GraphError::Parse {
                line: line_no,
                message: format!("invalid vertex ID {token:?}"),
            })
        };
        let u = next()?;
        let v = next()?;
        if let Some(extra) = tokens.next() {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("unexpected token {extra:?}"),
            });
        }
        edges.push((u, v));
    }
    let g = Graph::from_edges(edges);
    if g.edge_count() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    Ok(g)
}

/// Maximal connected subgraphs, largest first; ties by smallest contained ID.
pub fn connected_components(g: &Graph) -> Vec<Graph> {
    let n = g.vertex_count();
    let mut label = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let comp = members.len();
        label[start] = comp;
        let mut queue = VecDeque::from([start]);
        let mut list = Vec::new();
        while let Some(i) = queue.pop_front() {
            list.push(i);
            for &t in g.neighbor_indices(i) {
                if label[t as usize] == usize::MAX {
                    label[t as usize] = comp;
                    queue.push_back(t as usize);
                }
            }
        }
        members.push(list);
    }
    // BFS from ascending starts means each component's first member is its minimum.
    members.sort_by(|a, b| b.len().cmp(&a.len()).then(a.iter().min().cmp(&b.iter().min())));
    if members.len() == 1 {
        return vec![g.clone()];
    }
    members
        .into_iter()
        .map(|list| {
            let keep: BTreeSet<VertexId> = list.iter().map(|&i| g.id(i)).collect();
            g.induced_subgraph(&keep)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Point::new(radius * angle.cos(), radius * angle.sin())
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Vertex positions for one graph, in layout units.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Layout {
    positions: BTreeMap<VertexId, Point>,
}

impl Layout {
    pub fn new() -> Self {
        Layout::default()
    }

    pub fn insert(&mut self, id: VertexId, p: Point) {
        self.positions.insert(id, p);
    }

    pub fn get(&self, id: VertexId) -> Option<Point> {
        self.positions.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, Point)> + '_ {
        self.positions.iter().map(|(&id, &p)| (id, p))
    }

    pub fn extend(&mut self, other: &Layout) {
        self.positions.extend(other.positions.iter());
    }

    /// True if every vertex of `g` has a finite position.
    pub fn covers(&self, g: &Graph) -> bool {
        g.ids().iter().all(|&id| self.get(id).is_some_and(Point::is_finite))
    }

    /// `(min, max)` corners, or `None` when empty.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let mut it = self.positions.values();
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| {
            (
                Point::new(lo.x.min(p.x), lo.y.min(p.y)),
                Point::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        }))
    }

    pub fn translated(&self, by: Point) -> Layout {
        self.map(|p| p + by)
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Layout {
        Layout {
            positions: self.positions.iter().map(|(&id, &p)| (id, f(p))).collect(),
        }
    }

    /// Positions aligned with the graph's vertex indices.
    pub fn to_dense(&self, g: &Graph) -> Option<Vec<Point>> {
        g.ids().iter().map(|&id| self.get(id)).collect()
    }

    pub fn from_dense(g: &Graph, points: &[Point]) -> Layout {
        Layout {
            positions: g.ids().iter().copied().zip(points.iter().copied()).collect(),
        }
    }
}

impl FromIterator<(VertexId, Point)> for Layout {
    fn from_iter<I: IntoIterator<Item = (VertexId, Point)>>(iter: I) -> Self {
        Layout { positions: iter.into_iter().collect() }
    }
}

/// Degree-one vertices removed before layout, grouped by pruning pass.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PruneRecord {
    pub passes: Vec<Vec<(VertexId, VertexId)>>,
}

impl PruneRecord {
    /// All `(leaf, anchor)` pairs in removal order.
    pub fn removed(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.passes.iter().flatten().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.passes.iter().all(Vec::is_empty)
    }

    /// Number of pruned vertices hanging from each vertex. With a single
    /// pass this is the count of removed neighbors; in iterated mode a leaf
    /// removed later carries the vertices that were pruned off it earlier.
    pub fn leaf_counts(&self) -> BTreeMap<VertexId, usize> {
        let mut carried: BTreeMap<VertexId, usize> = BTreeMap::new();
        for pass in &self.passes {
            for &(leaf, anchor) in pass {
                let own = carried.get(&leaf).copied().unwrap_or(0);
                *carried.entry(anchor).or_insert(0) += 1 + own;
            }
        }
        let removed: BTreeSet<VertexId> = self.removed().map(|(leaf, _)| leaf).collect();
        carried.retain(|id, _| !removed.contains(id));
        carried
    }
}

/// One simultaneous pass removing every degree-one vertex.
pub fn prune_degree_one(g: &Graph) -> Result<(Graph, PruneRecord), GraphError> {
    prune_degree_one_iterated(g, 1)
}

/// Repeats the simultaneous degree-one pass up to `iterations` times.
pub fn prune_degree_one_iterated(
    g: &Graph,
    iterations: usize,
) -> Result<(Graph, PruneRecord), GraphError> {
    let mut core = g.clone();
    let mut record = PruneRecord::default();
    for _ in 0..iterations {
        let pass: Vec<(VertexId, VertexId)> = (0..core.vertex_count())
            .filter(|&i| core.degree(i) == 1)
            .map(|i| (core.id(i), core.id(core.neighbor_indices(i)[0] as usize)))
            .collect();
        if pass.is_empty() {
            break;
        }
        if pass.len() == core.vertex_count() {
            return Err(GraphError::CoreEmpty);
        }
        let removed: BTreeSet<VertexId> = pass.iter().map(|&(leaf, _)| leaf).collect();
        let keep: BTreeSet<VertexId> =
            core.ids().iter().copied().filter(|id| !removed.contains(id)).collect();
        core = core.induced_subgraph(&keep);
        record.passes.push(pass);
    }
    Ok((core, record))
}

/// Fraction of the distance to the nearest drawn neighbor used as the
/// reinsertion radius.
pub const REINSERT_RADIUS_FACTOR: f64 = 0.25;

/// Reinsertion radius for leaves of `anchor`, given what is already drawn.
pub fn reinsertion_radius(anchor: VertexId, layout: &Layout, original: &Graph) -> f64 {
    let Some(center) = layout.get(anchor) else {
        return REINSERT_RADIUS_FACTOR;
    };
    let nearest = original
        .index_of(anchor)
        .into_iter()
        .flat_map(|i| original.neighbors(i))
        .filter_map(|(v, _)| layout.get(v))
        .map(|p| p.distance(center))
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let base = if nearest.is_finite() { nearest } else { 1.0 };
    REINSERT_RADIUS_FACTOR * base
}

/// Largest angular gap `(start, width)` between the given directions; the
/// whole circle starting at angle 0 when there are none.
pub fn largest_angular_gap(angles: &[f64]) -> (f64, f64) {
    if angles.is_empty() {
        return (0.0, TAU);
    }
    let mut sorted: Vec<f64> = angles.iter().map(|a| a.rem_euclid(TAU)).collect();
    sorted.sort_by(f64::total_cmp);
    let mut best = (sorted[sorted.len() - 1], sorted[0] + TAU - sorted[sorted.len() - 1]);
    for pair in sorted.windows(2) {
        let width = pair[1] - pair[0];
        if width > best.1 {
            best = (pair[0], width);
        }
    }
    best
}

/// Places pruned leaves back around their anchors, latest pass first.
/// Leaves of one anchor fan out at equal angles inside the anchor's widest
/// free angular gap, on a circle of radius [`reinsertion_radius`].
pub fn reinsert(layout: &Layout, rec: &PruneRecord, original: &Graph) -> Layout {
    let mut out = layout.clone();
    for pass in rec.passes.iter().rev() {
        let mut by_anchor: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for &(leaf, anchor) in pass {
            by_anchor.entry(anchor).or_default().push(leaf);
        }
        let mut placed = Vec::new();
        for (anchor, mut leaves) in by_anchor {
            leaves.sort_unstable();
            let center = out.get(anchor).unwrap_or(Point::ORIGIN);
            let radius = reinsertion_radius(anchor, &out, original);
            let angles: Vec<f64> = original
                .index_of(anchor)
                .into_iter()
                .flat_map(|i| original.neighbors(i))
                .filter_map(|(v, _)| out.get(v))
                .map(|p| p - center)
                .filter(|d| d.norm() > 0.0)
                .map(|d| d.y.atan2(d.x))
                .collect();
            let (start, width) = largest_angular_gap(&angles);
            let step = width / (leaves.len() + 1) as f64;
            for (j, leaf) in leaves.into_iter().enumerate() {
                let angle = start + step * (j + 1) as f64;
                placed.push((leaf, center + Point::from_polar(radius, angle)));
            }
        }
        // Leaves of this pass become visible to the next (earlier) pass only.
        for (leaf, p) in placed {
            out.insert(leaf, p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Graph, GraphError> {
        load_edge_list(s.as_bytes())
    }

    #[test]
    fn minimal_parse() {
        let g = parse("1 2\n2 3").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 2));
    }

    #[test]
    fn loops_and_duplicates_are_removed() {
        let g = parse("1 1\n1 2\n2 1").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
    }

    #[test]
    fn malformed_token_reports_line() {
        assert_eq!(
            parse("1 x"),
            Err(GraphError::Parse { line: 1, message: "invalid vertex ID \"x\"".into() })
        );
        assert!(matches!(parse("# c\n1 2\n3"), Err(GraphError::Parse { line: 3, .. })));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(parse(""), Err(GraphError::EmptyGraph));
        assert_eq!(parse("# only\n5 5\n"), Err(GraphError::EmptyGraph));
    }

    #[test]
    fn reserialization_is_idempotent() {
        let g = parse("5 3\n3 5\n1 9\n9 9\n# x\n2 1\n").unwrap();
        let again = parse(&g.to_edge_list()).unwrap();
        assert_eq!(g, again);
        assert_eq!(g.to_edge_list(), again.to_edge_list());
    }

    #[test]
    fn components_are_ordered() {
        // path(5) on 10..14, K4 on 0..3, isolated edge 20-21
        let mut edges = vec![(10, 11), (11, 12), (12, 13), (13, 14), (20, 21)];
        for u in 0..4 {
            for v in u + 1..4 {
                edges.push((u, v));
            }
        }
        let comps = connected_components(&Graph::from_edges(edges));
        let sizes: Vec<usize> = comps.iter().map(Graph::vertex_count).collect();
        assert_eq!(sizes, vec![5, 4, 2]);
        assert_eq!(comps[1].edge_count(), 6);
    }

    #[test]
    fn equal_components_break_ties_by_min_id() {
        let g = Graph::from_edges([(7, 8), (8, 9), (9, 7), (1, 2), (2, 3), (3, 1)]);
        let comps = connected_components(&g);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].ids(), &[1, 2, 3]);
        assert_eq!(comps[1].ids(), &[7, 8, 9]);
    }

    #[test]
    fn star_prunes_to_center() {
        let g = Graph::from_edges((1..=5).map(|i| (0, i)));
        let (core, rec) = prune_degree_one(&g).unwrap();
        assert_eq!(core.ids(), &[0]);
        assert_eq!(rec.removed().count(), 5);
        assert!(rec.removed().all(|(_, a)| a == 0));
        assert_eq!(rec.leaf_counts()[&0], 5);
    }

    #[test]
    fn cycle_is_a_fixed_point() {
        let g = Graph::from_edges((0..6).map(|i| (i, (i + 1) % 6)));
        let (core, rec) = prune_degree_one(&g).unwrap();
        assert_eq!(core, g);
        assert!(rec.is_empty());
    }

    #[test]
    fn pruning_is_single_pass() {
        let g = Graph::from_edges([(1, 2), (2, 3), (3, 4)]);
        let (core, rec) = prune_degree_one(&g).unwrap();
        assert_eq!(core.ids(), &[2, 3]);
        assert_eq!(core.edge_count(), 1);
        assert_eq!(rec.passes[0], vec![(1, 2), (4, 3)]);
    }

    #[test]
    fn single_edge_has_empty_core() {
        let g = Graph::from_edges([(1, 2)]);
        assert_eq!(prune_degree_one(&g), Err(GraphError::CoreEmpty));
    }

    #[test]
    fn iterated_pruning_carries_subtree_counts() {
        // 1-2-3-4-5 with a triangle 5-6-7: two passes strip 1 then 2.
        let g = Graph::from_edges([(1, 2), (2, 3), (3, 5), (5, 6), (6, 7), (7, 5)]);
        let (core, rec) = prune_degree_one_iterated(&g, 2).unwrap();
        assert_eq!(core.ids(), &[3, 5, 6, 7]);
        assert_eq!(rec.leaf_counts()[&3], 2);
    }

    #[test]
    fn single_leaf_goes_to_widest_gap() {
        // anchor 0 at origin, drawn neighbor 1 at (4,0); leaf 2 hangs on 0.
        let g = Graph::from_edges([(0, 1), (0, 2)]);
        let layout: Layout = [(0, Point::ORIGIN), (1, Point::new(4.0, 0.0))].into_iter().collect();
        let rec = PruneRecord { passes: vec![vec![(2, 0)]] };
        let out = reinsert(&layout, &rec, &g);
        let leaf = out.get(2).unwrap();
        assert!((leaf.norm() - 1.0).abs() < 1e-12);
        // gap is the full circle minus the edge at angle 0: centered at pi
        assert!((leaf.x + 1.0).abs() < 1e-12 && leaf.y.abs() < 1e-12);
    }

    #[test]
    fn fan_spacing_divides_the_gap() {
        let (start, width) = largest_angular_gap(&[0.0, std::f64::consts::PI]);
        assert!((width - std::f64::consts::PI).abs() < 1e-12);
        // anchor 0 with drawn neighbors at angles 0 and pi, so the gap is 180 degrees
        let g = Graph::from_edges([(0, 1), (0, 2), (0, 10), (0, 11), (0, 12)]);
        let layout: Layout = [
            (0, Point::ORIGIN),
            (1, Point::new(2.0, 0.0)),
            (2, Point::new(-2.0, 0.0)),
        ]
        .into_iter()
        .collect();
        let rec = PruneRecord { passes: vec![vec![(10, 0), (11, 0), (12, 0)]] };
        let out = reinsert(&layout, &rec, &g);
        let angle = |id| {
            let p = out.get(id).unwrap();
            p.y.atan2(p.x).rem_euclid(TAU)
        };
        let step = std::f64::consts::FRAC_PI_4;
        let off = (angle(10) - (start + step)).rem_euclid(TAU);
        assert!(off < 1e-9 || TAU - off < 1e-9);
        assert!((angle(11) - angle(10) - step).abs() < 1e-9);
        assert!((angle(12) - angle(11) - step).abs() < 1e-9);
        assert!((out.get(10).unwrap().norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_record_is_identity() {
        let g = Graph::from_edges([(0, 1)]);
        let layout: Layout = [(0, Point::ORIGIN), (1, Point::new(1.0, 1.0))].into_iter().collect();
        assert_eq!(reinsert(&layout, &PruneRecord::default(), &g), layout);
    }

    #[test]
    fn bfs_truncates_at_depth() {
        let g = Graph::from_edges([(1, 2), (2, 3), (3, 4), (4, 5)]);
        let d = g.bfs_distances(3, 1);
        assert_eq!(d.into_iter().collect::<Vec<_>>(), vec![(2, 1), (3, 0), (4, 1)]);
    }
}
