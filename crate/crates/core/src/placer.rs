//! Solar placer: initial positions for level `i` from a drawing of level
//! `i + 1`.
//!
//! Two vertex programs run back to back. On the coarse graph every vertex
//! broadcasts its coordinates, so each coarse vertex learns where its linked
//! neighbors are. On the fine graph each sun then positions the members of
//! its system: a member lying on inter-system link paths is put at the mean of
//! its interpolants along those paths, any other member lands at a random
//! point of a small disc around the sun. Planets receive their coordinates
//! directly, moons through a two-hop message.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;

use rand::Rng;

use crate::engine::{self, Context, EngineConfig, Incoming, RunStats, VertexProgram};
use crate::error::{EngineError, PlacerError};
use crate::graph::{Graph, Layout, Point, VertexId};
use crate::merger::{Level, LinkPath, Role};

/// Fallback disc radius as a fraction of the mean incident coarse edge length.
pub const DISC_RADIUS_FACTOR: f64 = 0.5;
/// Fallback disc radius for coarse vertices without edges.
pub const ISOLATED_DISC_RADIUS: f64 = 1.0;

pub struct PlacementInput<'a> {
    pub level: &'a Level,
    pub coarse_graph: &'a Graph,
    pub coarse_layout: &'a Layout,
    /// Level vertex to coarse image.
    pub parent: &'a BTreeMap<VertexId, VertexId>,
}

/// Interpolant for the vertex at `index` on `path`.
pub fn interpolate(from: Point, to: Point, index: usize, hops: usize) -> Point {
    from + (to - from) * (index as f64 / hops as f64)
}

/// Disc radius around a sun whose image has the given incident coarse edge
/// lengths.
pub fn disc_radius(incident_lengths: &[f64]) -> f64 {
    if incident_lengths.is_empty() {
        return ISOLATED_DISC_RADIUS;
    }
    let mean = incident_lengths.iter().sum::<f64>() / incident_lengths.len() as f64;
    if mean > 0.0 && mean.is_finite() {
        DISC_RADIUS_FACTOR * mean
    } else {
        ISOLATED_DISC_RADIUS
    }
}

struct BroadcastProgram;

impl VertexProgram for BroadcastProgram {
    type State = (Point, BTreeMap<VertexId, Point>);
    type Message = Point;

    fn compute(
        &self,
        ctx: &mut Context<'_, Point>,
        state: &mut Self::State,
        inbox: Vec<Incoming<Point>>,
    ) -> Result<(), EngineError> {
        if ctx.superstep() == 0 {
            ctx.send_to_neighbors(state.0);
        }
        for m in inbox {
            state.1.insert(m.sender, m.msg);
        }
        ctx.vote_to_halt();
        Ok(())
    }

    fn message_size(&self, _: &Point) -> usize {
        16
    }

    fn state_size(&self, state: &Self::State) -> usize {
        16 + 24 * state.1.len()
    }
}

#[derive(Clone, Debug)]
enum PlaceMsg {
    Relay { target: VertexId, pos: Point },
    Deliver(Point),
}

#[derive(Clone, Debug, Default)]
struct SunView {
    own: Point,
    neighbor_suns: BTreeMap<VertexId, Point>,
    links: Vec<LinkPath>,
    /// Planets of the system, and moons with the planet that relays to them.
    planets: BTreeSet<VertexId>,
    moons: BTreeMap<VertexId, VertexId>,
}

#[derive(Clone, Debug, Default)]
struct PlaceVertex {
    sun: Option<SunView>,
    pos: Option<Point>,
}

struct PlaceProgram;

impl PlaceProgram {
    fn place_system(ctx: &mut Context<'_, PlaceMsg>, view: &SunView) -> Result<BTreeMap<VertexId, Point>, EngineError> {
        let members: BTreeSet<VertexId> = view.planets.iter().chain(view.moons.keys()).copied().collect();
        let mut candidates: BTreeMap<VertexId, (Point, usize)> = BTreeMap::new();
        for path in &view.links {
            let target = path.to_sun();
            let to = *view.neighbor_suns.get(&target).ok_or_else(|| EngineError::Program {
                vertex: ctx.id(),
                message: format!("no coordinates for linked sun {target}"),
            })?;
            let hops = path.hops();
            for (d, v) in path.0.iter().enumerate().take(hops).skip(1) {
                if members.contains(v) {
                    let entry = candidates.entry(*v).or_insert((Point::ORIGIN, 0));
                    entry.0 = entry.0 + interpolate(view.own, to, d, hops);
                    entry.1 += 1;
                }
            }
        }
        let lengths: Vec<f64> = view.neighbor_suns.values().map(|p| p.distance(view.own)).collect();
        let rho = disc_radius(&lengths);
        let mut placed = BTreeMap::new();
        for &v in &members {
            let p = match candidates.get(&v) {
                Some(&(sum, count)) => sum * (1.0 / count as f64),
                None => {
                    let rng = ctx.rng();
                    let r = rho * rng.gen::<f64>().sqrt();
                    let angle = TAU * rng.gen::<f64>();
                    view.own + Point::from_polar(r, angle)
                }
            };
            placed.insert(v, p);
        }
        Ok(placed)
    }
}

impl VertexProgram for PlaceProgram {
    type State = PlaceVertex;
    type Message = PlaceMsg;

    fn compute(
        &self,
        ctx: &mut Context<'_, PlaceMsg>,
        state: &mut PlaceVertex,
        inbox: Vec<Incoming<PlaceMsg>>,
    ) -> Result<(), EngineError> {
        if ctx.superstep() == 0 {
            if let Some(view) = &state.sun {
                state.pos = Some(view.own);
                let placed = Self::place_system(ctx, view)?;
                for (v, p) in placed {
                    match view.moons.get(&v) {
                        Some(&via) => ctx.send_relay(via, v, PlaceMsg::Relay { target: v, pos: p })?,
                        None => ctx.send(v, PlaceMsg::Deliver(p))?,
                    }
                }
            }
        }
        for m in inbox {
            match m.msg {
                PlaceMsg::Relay { target, pos } => ctx.send(target, PlaceMsg::Deliver(pos))?,
                PlaceMsg::Deliver(pos) => state.pos = Some(pos),
            }
        }
        ctx.vote_to_halt();
        Ok(())
    }

    fn message_size(&self, msg: &PlaceMsg) -> usize {
        match msg {
            PlaceMsg::Relay { .. } => 24,
            PlaceMsg::Deliver(_) => 16,
        }
    }

    fn state_size(&self, state: &PlaceVertex) -> usize {
        let sun = state.sun.as_ref().map_or(0, |s| {
            24 * s.neighbor_suns.len()
                + s.links.iter().map(|p| 8 * p.0.len()).sum::<usize>()
                + 8 * s.planets.len()
                + 16 * s.moons.len()
        });
        24 + sun
    }
}

/// Positions every vertex of `input.level` from the coarse drawing.
/// `fine` runs on the level graph, `coarse` on the coarse graph.
pub fn place_level(
    input: &PlacementInput<'_>,
    fine: &EngineConfig,
    coarse: &EngineConfig,
) -> Result<(Layout, RunStats), PlacerError> {
    let cg = input.coarse_graph;
    let mut init = Vec::with_capacity(cg.vertex_count());
    for &id in cg.ids() {
        let p = input.coarse_layout.get(id).ok_or(PlacerError::MissingCoarsePosition(id))?;
        init.push((p, BTreeMap::new()));
    }
    let broadcast = engine::run(cg, &BroadcastProgram, init, coarse)?.converged(coarse.max_supersteps)?;
    let mut stats = broadcast.stats;

    let level = input.level;
    let g = &level.graph;
    let mut states: Vec<PlaceVertex> = vec![PlaceVertex::default(); g.vertex_count()];
    for a in &level.attrs {
        if a.role == Role::Sun {
            let image = *input.parent.get(&a.id).ok_or(PlacerError::MissingCoarsePosition(a.id))?;
            let ci = cg.index_of(image).ok_or(PlacerError::MissingCoarsePosition(image))?;
            let (own, neighbor_suns) = broadcast.states[ci].clone();
            let links = level.links.neighbors_of(a.id).flat_map(|(_, paths)| paths.iter().cloned()).collect();
            states[g.index_of(a.id).expect("attrs aligned")].sun = Some(SunView {
                own,
                neighbor_suns,
                links,
                planets: a.planet_list.clone(),
                moons: BTreeMap::new(),
            });
        }
    }
    for a in &level.attrs {
        if a.role == Role::Moon {
            let sun = a.system_sun.expect("moon has a sun");
            let via = *a.system_planets.first().expect("moon has planets");
            if let Some(view) = states[g.index_of(sun).expect("sun in level")].sun.as_mut() {
                view.moons.insert(a.id, via);
            }
        }
    }
    let out = engine::run(g, &PlaceProgram, states, fine)?.converged(fine.max_supersteps)?;
    stats.absorb(&out.stats);
    let mut layout = Layout::new();
    for (i, s) in out.states.iter().enumerate() {
        let p = s.pos.ok_or_else(|| {
            PlacerError::Engine(EngineError::Program { vertex: g.id(i), message: "vertex was not placed".into() })
        })?;
        layout.insert(g.id(i), p);
    }
    Ok((layout, stats))
}
