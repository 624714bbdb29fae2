//! Single-level force-directed refinement on the BSP engine.
//!
//! Each iteration floods positions `k` hops out, so every vertex knows its
//! k-neighborhood, then moves by the Fruchterman-Reingold forces it feels:
//! repulsion from the neighborhood, attraction along its edges, with the
//! displacement clamped by a cooling schedule.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{self, Context, EngineConfig, Incoming, RunStats, VertexProgram};
use crate::error::EngineError;
use crate::graph::{Graph, Layout, Point, VertexId};
use crate::seed::mix_seed;

/// Distance used for coincident points.
pub const COINCIDENCE_EPSILON: f64 = 1e-6;

/// Neighborhood radius for a level with `m` edges.
pub fn choose_k(m: usize) -> usize {
    match m {
        0..=999 => 6,
        1_000..=4_999 => 5,
        5_000..=9_999 => 4,
        10_000..=99_999 => 3,
        100_000..=999_999 => 2,
        _ => 1,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayoutParams {
    pub k: usize,
    pub iterations: usize,
    pub ideal_length: f64,
    pub repulsion_constant: f64,
    pub initial_max_displacement: f64,
    pub cooling_exponent: f64,
    /// Scale repulsion by the repelling vertex's mass over the level mean.
    pub mass_repulsion: bool,
    /// Re-flood the full neighborhood every this many iterations; in between
    /// only direct neighbors exchange positions.
    pub reflood_period: usize,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            k: 6,
            iterations: 300,
            ideal_length: 1.0,
            repulsion_constant: 1.0,
            initial_max_displacement: 2.0,
            cooling_exponent: 1.0,
            mass_repulsion: true,
            reflood_period: 1,
        }
    }
}

impl LayoutParams {
    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be positive and finite, got {x}"))
            }
        };
        if self.k == 0 {
            return Err("k must be at least 1".into());
        }
        if self.reflood_period == 0 {
            return Err("reflood_period must be at least 1".into());
        }
        positive("ideal_length", self.ideal_length)?;
        positive("repulsion_constant", self.repulsion_constant)?;
        positive("initial_max_displacement", self.initial_max_displacement)?;
        positive("cooling_exponent", self.cooling_exponent)?;
        if self.cooling_exponent > 1.0 {
            return Err(format!("cooling_exponent must be at most 1, got {}", self.cooling_exponent));
        }
        Ok(())
    }

    /// Displacement bound in iteration `t`.
    pub fn max_displacement(&self, t: usize) -> f64 {
        let left = 1.0 - t as f64 / self.iterations.max(1) as f64;
        self.initial_max_displacement * left.max(0.0).powf(self.cooling_exponent)
    }

    /// Desired length of an edge with `weight`; coarse weights count the
    /// vertices on the link path, so weight 2 maps to the ideal length.
    pub fn desired_length(&self, weight: f64, level: u32) -> f64 {
        if level == 0 {
            self.ideal_length
        } else {
            self.ideal_length * weight / 2.0
        }
    }
}

/// One entry of a vertex's k-neighborhood.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ViewEntry {
    pub id: VertexId,
    pub pos: Point,
    pub mass: f64,
    pub hop: u32,
}

/// The k-neighborhood of one vertex, sorted by ID.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NeighborhoodView {
    pub entries: Vec<ViewEntry>,
}

impl NeighborhoodView {
    pub fn get(&self, id: VertexId) -> Option<&ViewEntry> {
        self.entries.binary_search_by_key(&id, |e| e.id).ok().map(|i| &self.entries[i])
    }

    pub fn hops(&self) -> impl Iterator<Item = (VertexId, u32)> + '_ {
        self.entries.iter().map(|e| (e.id, e.hop))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Level-wide inputs of the force computation.
#[derive(Clone, Copy, Debug)]
pub struct ForceSetting<'a> {
    pub params: &'a LayoutParams,
    pub level: u32,
    pub mean_mass: f64,
    pub seed: u64,
}

/// Unit direction from `from` to `to`, and their distance. Coincident points
/// get a seeded direction that flips with the pair's order.
fn direction(from: (VertexId, Point), to: (VertexId, Point), iteration: usize, seed: u64) -> (Point, f64) {
    let delta = to.1 - from.1;
    let d = delta.norm();
    if d >= COINCIDENCE_EPSILON {
        return (delta * (1.0 / d), d);
    }
    let (lo, hi) = (from.0.min(to.0), from.0.max(to.0));
    let angle = TAU * (mix_seed(&[seed, iteration as u64, lo, hi]) >> 11) as f64 / (1u64 << 53) as f64;
    let unit = Point::from_polar(1.0, angle);
    (if from.0 < to.0 { unit } else { unit * -1.0 }, COINCIDENCE_EPSILON)
}

/// Repulsive force on `v` exerted by `u`.
pub fn repulsion(v: (VertexId, Point), u: (VertexId, Point), mass_u: f64, set: &ForceSetting<'_>, iteration: usize) -> Point {
    let (dir, d) = direction(u, v, iteration, set.seed);
    let l = set.params.ideal_length;
    let scale = if set.params.mass_repulsion { mass_u / set.mean_mass } else { 1.0 };
    dir * (set.params.repulsion_constant * l * l / d * scale)
}

/// Attractive force on `v` along the edge to `u`.
pub fn attraction(v: (VertexId, Point), u: (VertexId, Point), desired: f64, set: &ForceSetting<'_>, iteration: usize) -> Point {
    let (dir, d) = direction(v, u, iteration, set.seed);
    dir * (d * d / desired)
}

/// Clamped displacement of vertex `v` in iteration `t`. `view` must be
/// sorted by ID and contain every neighbor listed in `edges`.
pub fn displacement(
    v: (VertexId, Point),
    view: &[ViewEntry],
    edges: impl Iterator<Item = (VertexId, f64)>,
    set: &ForceSetting<'_>,
    t: usize,
) -> Point {
    let mut force = Point::ORIGIN;
    for e in view {
        force = force + repulsion(v, (e.id, e.pos), e.mass, set, t);
    }
    for (u, w) in edges {
        if let Ok(i) = view.binary_search_by_key(&u, |e| e.id) {
            force = force + attraction(v, (u, view[i].pos), set.params.desired_length(w, set.level), set, t);
        }
    }
    let limit = set.params.max_displacement(t);
    let norm = force.norm();
    if norm > limit && norm > 0.0 {
        force * (limit / norm)
    } else if norm.is_finite() {
        force
    } else {
        Point::ORIGIN
    }
}

/// Sequential force step over a whole layout from precomputed views.
pub fn step_forces(
    g: &Graph,
    layout: &Layout,
    views: &[NeighborhoodView],
    set: &ForceSetting<'_>,
    t: usize,
) -> Layout {
    (0..g.vertex_count())
        .map(|i| {
            let id = g.id(i);
            let p = layout.get(id).expect("layout covers the graph");
            (id, p + displacement((id, p), &views[i].entries, g.neighbors(i), set, t))
        })
        .collect()
}

/// Uniform scale factor that balances the layout's forces. Under scaling
/// by `s` the attractive work `sum d^3 / l_uv` grows as `s^3` while the
/// repulsive work `C l^2` per neighborhood pair does not, so the balanced
/// scale is the cube root of their ratio.
pub fn equilibrium_scale(g: &Graph, layout: &Layout, views: &[NeighborhoodView], set: &ForceSetting<'_>) -> f64 {
    let p = set.params;
    let mut attractive = 0.0;
    for (u, v, w) in g.edges() {
        let d = layout.get(u).expect("layout covers u").distance(layout.get(v).expect("layout covers v"));
        attractive += d.powi(3) / p.desired_length(w, set.level);
    }
    let mut repulsive = 0.0;
    for view in views {
        for e in &view.entries {
            let scale = if p.mass_repulsion { e.mass / set.mean_mass } else { 1.0 };
            repulsive += 0.5 * p.repulsion_constant * p.ideal_length * p.ideal_length * scale;
        }
    }
    if attractive > 0.0 && repulsive > 0.0 && attractive.is_finite() {
        (repulsive / attractive).cbrt()
    } else {
        1.0
    }
}

/// Scales `layout` about its centroid by `factor`.
pub fn scale_about_centroid(layout: &Layout, factor: f64) -> Layout {
    if layout.is_empty() {
        return layout.clone();
    }
    let n = layout.len() as f64;
    let centroid = layout.iter().fold(Point::ORIGIN, |acc, (_, p)| acc + p) * (1.0 / n);
    layout.map(|p| centroid + (p - centroid) * factor)
}

/// Rescales a placed layout to its force-balanced size before refinement.
/// Crossings and relative edge lengths are unchanged.
pub fn prescale(
    g: &Graph,
    layout: &Layout,
    masses: Option<&[f64]>,
    level: u32,
    params: &LayoutParams,
    config: &EngineConfig,
) -> Result<(Layout, f64), EngineError> {
    let views = flood_neighborhoods(g, layout, masses, params.k, config)?;
    let set = ForceSetting { params, level, mean_mass: mean(masses), seed: config.seed };
    let factor = equilibrium_scale(g, layout, &views, &set);
    Ok((scale_about_centroid(layout, factor), factor))
}

/// Uniform random placement in a square of side `sqrt(n) * ideal_length`.
pub fn random_square(g: &Graph, ideal_length: f64, seed: u64) -> Layout {
    let side = (g.vertex_count() as f64).sqrt() * ideal_length;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    g.ids()
        .iter()
        .map(|&id| (id, Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Emit {
    /// Start a new flood: clear the view and send the own entry.
    Flood,
    /// Send the own position to direct neighbors only.
    Refresh,
}

#[derive(Clone, Copy, Debug, Default)]
struct Step {
    /// Incoming entries are recorded at this hop distance.
    absorb_hop: Option<u32>,
    /// Incoming entries only refresh positions already in the view.
    refresh: bool,
    /// Forward newly found entries one hop further.
    forward: bool,
    force: Option<usize>,
    emit: Option<Emit>,
}

fn build_schedule(k: usize, iterations: Option<usize>, period: usize) -> Vec<Step> {
    let mut steps: Vec<Step> = Vec::new();
    let start = |steps: &mut Vec<Step>, emit: Emit| match steps.last_mut() {
        Some(last) if last.force.is_some() => last.emit = Some(emit),
        _ => steps.push(Step { emit: Some(emit), ..Step::default() }),
    };
    let flood = |steps: &mut Vec<Step>| {
        for hop in 1..=k as u32 {
            steps.push(Step { absorb_hop: Some(hop), forward: (hop as usize) < k, ..Step::default() });
        }
    };
    match iterations {
        None => {
            start(&mut steps, Emit::Flood);
            flood(&mut steps);
        }
        Some(iterations) => {
            for t in 0..iterations {
                if t % period == 0 {
                    start(&mut steps, Emit::Flood);
                    flood(&mut steps);
                } else {
                    start(&mut steps, Emit::Refresh);
                    steps.push(Step { absorb_hop: Some(1), refresh: true, ..Step::default() });
                }
                steps.last_mut().expect("step pushed").force = Some(t);
            }
        }
    }
    steps
}

type Batch = Arc<Vec<ViewEntry>>;

#[derive(Clone, Debug)]
struct GilaVertex {
    pos: Point,
    mass: f64,
    view: Vec<ViewEntry>,
}

struct GilaProgram<'a> {
    schedule: Vec<Step>,
    params: &'a LayoutParams,
    level: u32,
    mean_mass: f64,
    seed: u64,
}

impl VertexProgram for GilaProgram<'_> {
    type State = GilaVertex;
    type Message = Batch;

    fn compute(
        &self,
        ctx: &mut Context<'_, Batch>,
        v: &mut GilaVertex,
        inbox: Vec<Incoming<Batch>>,
    ) -> Result<(), EngineError> {
        let s = ctx.superstep() as usize;
        let Some(step) = self.schedule.get(s).copied() else {
            ctx.vote_to_halt();
            return Ok(());
        };
        let id = ctx.id();
        if let Some(hop) = step.absorb_hop {
            if step.refresh {
                for m in &inbox {
                    for e in m.msg.iter() {
                        if let Ok(i) = v.view.binary_search_by_key(&e.id, |x| x.id) {
                            v.view[i].pos = e.pos;
                        }
                    }
                }
            } else {
                let mut fresh: Vec<ViewEntry> = inbox
                    .iter()
                    .flat_map(|m| m.msg.iter().copied())
                    .filter(|e| e.id != id)
                    .collect();
                fresh.sort_by_key(|e| e.id);
                fresh.dedup_by_key(|e| e.id);
                fresh.retain(|e| v.view.binary_search_by_key(&e.id, |x| x.id).is_err());
                for e in &mut fresh {
                    e.hop = hop;
                }
                v.view.extend_from_slice(&fresh);
                v.view.sort_by_key(|e| e.id);
                if step.forward && !fresh.is_empty() {
                    ctx.send_to_neighbors(Arc::new(fresh));
                }
            }
        }
        if let Some(t) = step.force {
            let set = ForceSetting { params: self.params, level: self.level, mean_mass: self.mean_mass, seed: self.seed };
            v.pos = v.pos + displacement((id, v.pos), &v.view, ctx.neighbors(), &set, t);
        }
        match step.emit {
            Some(Emit::Flood) => {
                v.view.clear();
                ctx.send_to_neighbors(Arc::new(vec![ViewEntry { id, pos: v.pos, mass: v.mass, hop: 0 }]));
            }
            Some(Emit::Refresh) => {
                ctx.send_to_neighbors(Arc::new(vec![ViewEntry { id, pos: v.pos, mass: v.mass, hop: 1 }]));
            }
            None => {}
        }
        if s + 1 >= self.schedule.len() {
            ctx.vote_to_halt();
        }
        Ok(())
    }

    fn message_size(&self, batch: &Batch) -> usize {
        32 * batch.len()
    }

    fn state_size(&self, v: &GilaVertex) -> usize {
        24 + 36 * v.view.len()
    }
}

fn initial_states(g: &Graph, layout: &Layout, masses: Option<&[f64]>) -> Result<Vec<GilaVertex>, EngineError> {
    (0..g.vertex_count())
        .map(|i| {
            let id = g.id(i);
            let pos = layout.get(id).ok_or_else(|| EngineError::Program {
                vertex: id,
                message: "vertex has no initial position".into(),
            })?;
            Ok(GilaVertex { pos, mass: masses.map_or(1.0, |m| m[i]), view: Vec::new() })
        })
        .collect()
}

fn mean(masses: Option<&[f64]>) -> f64 {
    match masses {
        Some(m) if !m.is_empty() => m.iter().sum::<f64>() / m.len() as f64,
        _ => 1.0,
    }
}

/// Collects every vertex's k-neighborhood by flooding.
pub fn flood_neighborhoods(
    g: &Graph,
    layout: &Layout,
    masses: Option<&[f64]>,
    k: usize,
    config: &EngineConfig,
) -> Result<Vec<NeighborhoodView>, EngineError> {
    let params = LayoutParams { k, ..LayoutParams::default() };
    let program = GilaProgram {
        schedule: build_schedule(k.max(1), None, 1),
        params: &params,
        level: 0,
        mean_mass: mean(masses),
        seed: config.seed,
    };
    let out = engine::run(g, &program, initial_states(g, layout, masses)?, config)?.converged(config.max_supersteps)?;
    Ok(out.states.into_iter().map(|s| NeighborhoodView { entries: s.view }).collect())
}

/// Runs `params.iterations` flood-and-move iterations on one level.
/// `masses` is aligned with vertex indices (all 1 when absent).
pub fn run_single_level(
    g: &Graph,
    initial: &Layout,
    masses: Option<&[f64]>,
    level: u32,
    params: &LayoutParams,
    config: &EngineConfig,
) -> Result<(Layout, RunStats), EngineError> {
    params.validate().map_err(EngineError::InvalidConfig)?;
    let schedule = build_schedule(params.k, Some(params.iterations), params.reflood_period);
    if schedule.len() as u64 > config.max_supersteps {
        return Err(EngineError::SuperstepCapExceeded { cap: config.max_supersteps });
    }
    let program = GilaProgram { schedule, params, level, mean_mass: mean(masses), seed: config.seed };
    let out = engine::run(g, &program, initial_states(g, initial, masses)?, config)?.converged(config.max_supersteps)?;
    let layout = out.states.iter().enumerate().map(|(i, s)| (g.id(i), s.pos)).collect();
    Ok((layout, out.stats))
}
