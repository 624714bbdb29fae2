//! Distributed solar merger: builds the coarsening hierarchy with four
//! vertex programs per level (sun election, solar-system growth, inter-system
//! link discovery, next-level generation).
//!
//! A solar system is a sun together with its planets (distance 1) and moons
//! (distance 2). Suns are kept at pairwise distance at least three, so every
//! system has diameter at most four. Every edge between two systems is
//! recorded by both suns as a sun-to-sun [`LinkPath`]; these become the
//! weighted edges of the next, coarser level.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use crate::engine::{self, Context, EngineConfig, Incoming, RunStats, VertexProgram};
use crate::error::{EngineError, MergerError};
use crate::exec::ExecutionSettings;
use crate::graph::{Graph, VertexId};
use crate::partition::PartitionMap;
use crate::seed::mix_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Sun,
    Planet,
    Moon,
    Unassigned,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexAttrs {
    pub id: VertexId,
    pub level: u32,
    pub mass: f64,
    pub role: Role,
    pub system_sun: Option<VertexId>,
    /// Planets of this sun's system (suns only).
    pub planet_list: BTreeSet<VertexId>,
    /// Same-system planets adjacent to this moon (moons only).
    pub system_planets: BTreeSet<VertexId>,
}

impl VertexAttrs {
    pub fn new(id: VertexId, level: u32, mass: f64) -> Self {
        VertexAttrs {
            id,
            level,
            mass,
            role: Role::Unassigned,
            system_sun: None,
            planet_list: BTreeSet::new(),
            system_planets: BTreeSet::new(),
        }
    }

    /// The sun of this vertex's system (itself for suns).
    pub fn sun(&self) -> Option<VertexId> {
        match self.role {
            Role::Sun => Some(self.id),
            Role::Planet | Role::Moon => self.system_sun,
            Role::Unassigned => None,
        }
    }

    /// Path from this vertex's sun down to the vertex itself.
    fn prefix(&self) -> Option<Vec<VertexId>> {
        match self.role {
            Role::Sun => Some(vec![self.id]),
            Role::Planet => Some(vec![self.system_sun?, self.id]),
            Role::Moon => Some(vec![self.system_sun?, *self.system_planets.first()?, self.id]),
            Role::Unassigned => None,
        }
    }
}

/// Sun-to-sun path through an inter-system edge, endpoints included.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LinkPath(pub Vec<VertexId>);

impl LinkPath {
    /// Number of vertices on the path.
    pub fn vertex_count(&self) -> usize {
        self.0.len()
    }

    pub fn hops(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn reversed(&self) -> LinkPath {
        LinkPath(self.0.iter().rev().copied().collect())
    }

    pub fn from_sun(&self) -> VertexId {
        self.0[0]
    }

    pub fn to_sun(&self) -> VertexId {
        *self.0.last().expect("nonempty path")
    }
}

/// Per-sun record of the paths to each neighboring sun.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InterLinkTable {
    by_sun: BTreeMap<VertexId, BTreeMap<VertexId, BTreeSet<LinkPath>>>,
}

impl InterLinkTable {
    pub fn insert(&mut self, path: LinkPath) {
        self.by_sun
            .entry(path.from_sun())
            .or_default()
            .entry(path.to_sun())
            .or_default()
            .insert(path);
    }

    pub fn neighbors_of(&self, sun: VertexId) -> impl Iterator<Item = (VertexId, &BTreeSet<LinkPath>)> {
        self.by_sun.get(&sun).into_iter().flatten().map(|(&t, paths)| (t, paths))
    }

    pub fn paths(&self) -> impl Iterator<Item = &LinkPath> {
        self.by_sun.values().flat_map(|m| m.values().flatten())
    }

    pub fn len(&self) -> usize {
        self.paths().count()
    }

    pub fn is_empty(&self) -> bool {
        self.by_sun.values().all(|m| m.is_empty())
    }

    /// Every path's reversal is recorded by the sun at its other end.
    pub fn is_symmetric(&self) -> bool {
        self.paths().all(|p| {
            self.by_sun
                .get(&p.to_sun())
                .and_then(|m| m.get(&p.from_sun()))
                .is_some_and(|set| set.contains(&p.reversed()))
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Level {
    #[serde(skip)]
    pub graph: Graph,
    /// Attributes aligned with `graph` vertex indices.
    pub attrs: Vec<VertexAttrs>,
    pub links: InterLinkTable,
}

impl Level {
    pub fn attrs_of(&self, id: VertexId) -> Option<&VertexAttrs> {
        self.graph.index_of(id).map(|i| &self.attrs[i])
    }

    pub fn total_mass(&self) -> f64 {
        self.attrs.iter().map(|a| a.mass).sum()
    }
}

#[derive(Clone, Debug)]
pub struct Hierarchy {
    pub levels: Vec<Level>,
    /// `parents[i]` maps every level-`i` vertex to its image at level `i + 1`.
    pub parents: Vec<BTreeMap<VertexId, VertexId>>,
    /// Worker partition used for each level graph (`None`: contiguous blocks).
    pub partitions: Vec<Option<PartitionMap>>,
    pub stats: RunStats,
}

impl Hierarchy {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.graph.vertex_count()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct MergerConfig {
    pub sun_probability: f64,
    /// Coarsening stops once a level has fewer vertices than this.
    pub coarsen_threshold: usize,
    pub seed: u64,
    pub execution: ExecutionSettings,
}

impl Default for MergerConfig {
    fn default() -> Self {
        MergerConfig {
            sun_probability: 0.2,
            coarsen_threshold: 30,
            seed: 0,
            execution: ExecutionSettings::default(),
        }
    }
}

#[derive(Clone, Debug)]
enum Payload {
    MoonConfirm(VertexId),
    Link(LinkPath),
    Withdraw(VertexId),
    Mass(f64),
}

impl Payload {
    fn size(&self) -> usize {
        match self {
            Payload::Link(p) => 1 + 8 * p.0.len(),
            _ => 9,
        }
    }
}

#[derive(Clone, Debug)]
enum MergerMsg {
    Beacon { sun: VertexId, hops: u8 },
    Offer { sun: VertexId, via: Option<VertexId> },
    Confirm,
    /// First leg of a two-hop message; the receiver forwards it to `target`.
    Relay { target: VertexId, payload: Payload },
    Deliver(Payload),
    Discovery { prefix: Vec<VertexId> },
}

#[derive(Clone, Debug)]
struct MergerVertex {
    attrs: VertexAttrs,
    fresh: bool,
    moons: BTreeSet<VertexId>,
    links: BTreeMap<VertexId, BTreeSet<LinkPath>>,
    system_mass: f64,
    /// Suns told about a conflict path through this moon, with the planet
    /// used to reach them.
    conflict_peers: Vec<(VertexId, VertexId)>,
}

impl MergerVertex {
    fn new(attrs: VertexAttrs) -> Self {
        MergerVertex {
            attrs,
            fresh: false,
            moons: BTreeSet::new(),
            links: BTreeMap::new(),
            system_mass: 0.0,
            conflict_peers: Vec::new(),
        }
    }

    fn accept(&mut self, payload: Payload) {
        match payload {
            Payload::MoonConfirm(m) => {
                self.moons.insert(m);
            }
            Payload::Link(path) => {
                self.links.entry(path.to_sun()).or_default().insert(path);
            }
            Payload::Withdraw(w) => {
                self.moons.remove(&w);
                for paths in self.links.values_mut() {
                    paths.retain(|p| !p.0.contains(&w));
                }
                self.links.retain(|_, paths| !paths.is_empty());
            }
            Payload::Mass(m) => self.system_mass += m,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Phase {
    Elect { probability: f64, forced: Option<VertexId> },
    Grow,
    Discover,
    Mass,
}

struct MergerProgram {
    phase: Phase,
}

fn program_error(ctx: &Context<'_, MergerMsg>, message: &str) -> EngineError {
    EngineError::Program { vertex: ctx.id(), message: message.into() }
}

/// Sends `payload` to this vertex's own sun: directly from a planet, via the
/// first system planet from a moon.
fn send_to_own_sun(
    ctx: &mut Context<'_, MergerMsg>,
    v: &mut MergerVertex,
    payload: Payload,
) -> Result<(), EngineError> {
    match v.attrs.role {
        Role::Sun => {
            v.accept(payload);
            Ok(())
        }
        Role::Planet => {
            let sun = v.attrs.system_sun.ok_or_else(|| program_error(ctx, "planet without sun"))?;
            ctx.send(sun, MergerMsg::Deliver(payload))
        }
        Role::Moon => {
            let sun = v.attrs.system_sun.ok_or_else(|| program_error(ctx, "moon without sun"))?;
            let via = *v
                .attrs
                .system_planets
                .first()
                .ok_or_else(|| program_error(ctx, "moon without planets"))?;
            ctx.send_relay(via, sun, MergerMsg::Relay { target: sun, payload })
        }
        Role::Unassigned => Err(program_error(ctx, "unassigned vertex has no sun")),
    }
}

impl MergerProgram {
    fn elect(
        &self,
        ctx: &mut Context<'_, MergerMsg>,
        v: &mut MergerVertex,
        inbox: Vec<Incoming<MergerMsg>>,
        probability: f64,
        forced: Option<VertexId>,
    ) -> Result<(), EngineError> {
        let id = ctx.id();
        match ctx.superstep() {
            0 => {
                if v.attrs.role == Role::Unassigned {
                    let elected = match forced {
                        Some(f) => f == id,
                        None => ctx.rng().gen_bool(probability),
                    };
                    if elected {
                        v.attrs.role = Role::Sun;
                        v.attrs.system_sun = None;
                        v.fresh = true;
                        return Ok(());
                    }
                }
            }
            1 => {
                if v.fresh {
                    ctx.send_to_neighbors(MergerMsg::Beacon { sun: id, hops: 1 });
                }
            }
            _ => {
                let mut heard = Vec::new();
                for m in inbox {
                    if let MergerMsg::Beacon { sun, hops } = m.msg {
                        if sun != id {
                            heard.push((m.sender, sun, hops));
                        }
                    }
                }
                if v.fresh && heard.iter().any(|&(_, sun, _)| sun > id) {
                    v.fresh = false;
                    v.attrs.role = Role::Unassigned;
                }
                if ctx.superstep() == 2 {
                    for (sender, sun, _) in heard {
                        for (n, _) in ctx.neighbors() {
                            if n != sender {
                                ctx.send(n, MergerMsg::Beacon { sun, hops: 2 })?;
                            }
                        }
                    }
                }
            }
        }
        ctx.vote_to_halt();
        Ok(())
    }

    fn grow(
        &self,
        ctx: &mut Context<'_, MergerMsg>,
        v: &mut MergerVertex,
        inbox: Vec<Incoming<MergerMsg>>,
    ) -> Result<(), EngineError> {
        let id = ctx.id();
        if ctx.superstep() == 0 && v.fresh {
            v.fresh = false;
            ctx.send_to_neighbors(MergerMsg::Offer { sun: id, via: None });
        }
        let mut direct: Option<VertexId> = None;
        let mut forwarded: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for m in inbox {
            match m.msg {
                MergerMsg::Offer { sun, via: None } => direct = direct.max(Some(sun)),
                MergerMsg::Offer { sun, via: Some(p) } => {
                    forwarded.entry(sun).or_default().insert(p);
                }
                MergerMsg::Confirm => {
                    v.attrs.planet_list.insert(m.sender);
                }
                MergerMsg::Relay { target, payload } if target != id => {
                    ctx.send(target, MergerMsg::Deliver(payload))?;
                }
                MergerMsg::Relay { payload, .. } | MergerMsg::Deliver(payload) => v.accept(payload),
                MergerMsg::Beacon { .. } | MergerMsg::Discovery { .. } => {}
            }
        }

        if let Some(sun) = direct {
            let capturable = v.attrs.role == Role::Moon && v.attrs.system_sun != Some(sun);
            if v.attrs.role == Role::Unassigned || capturable {
                if capturable {
                    let old_sun = v.attrs.system_sun.expect("moon has a sun");
                    let via = *v.attrs.system_planets.first().expect("moon has planets");
                    ctx.send_relay(via, old_sun, MergerMsg::Relay {
                        target: old_sun,
                        payload: Payload::Withdraw(id),
                    })?;
                    for (peer, q) in std::mem::take(&mut v.conflict_peers) {
                        ctx.send_relay(q, peer, MergerMsg::Relay { target: peer, payload: Payload::Withdraw(id) })?;
                    }
                }
                v.attrs.role = Role::Planet;
                v.attrs.system_sun = Some(sun);
                v.attrs.system_planets.clear();
                ctx.send(sun, MergerMsg::Confirm)?;
                for (n, _) in ctx.neighbors() {
                    if n != sun {
                        ctx.send(n, MergerMsg::Offer { sun, via: Some(id) })?;
                    }
                }
            }
        }

        if v.attrs.role == Role::Unassigned {
            if let Some((&sun, vias)) = forwarded.iter().next_back() {
                let planets = vias.clone();
                let via = *planets.first().expect("offer has a forwarder");
                v.attrs.role = Role::Moon;
                v.attrs.system_sun = Some(sun);
                v.attrs.system_planets = planets;
                ctx.send_relay(via, sun, MergerMsg::Relay { target: sun, payload: Payload::MoonConfirm(id) })?;
                for (&other, other_vias) in forwarded.range(..sun) {
                    for &q in other_vias {
                        let path = LinkPath(vec![other, q, id, via, sun]);
                        v.conflict_peers.push((other, q));
                        ctx.send_relay(q, other, MergerMsg::Relay {
                            target: other,
                            payload: Payload::Link(path.clone()),
                        })?;
                        ctx.send_relay(via, sun, MergerMsg::Relay {
                            target: sun,
                            payload: Payload::Link(path.reversed()),
                        })?;
                    }
                }
            }
        }
        ctx.vote_to_halt();
        Ok(())
    }

    fn discover(
        &self,
        ctx: &mut Context<'_, MergerMsg>,
        v: &mut MergerVertex,
        inbox: Vec<Incoming<MergerMsg>>,
    ) -> Result<(), EngineError> {
        let id = ctx.id();
        let own = v.attrs.prefix().ok_or_else(|| program_error(ctx, "vertex not assigned to a system"))?;
        if ctx.superstep() == 0 {
            ctx.send_to_neighbors(MergerMsg::Discovery { prefix: own.clone() });
        }
        for m in inbox {
            match m.msg {
                MergerMsg::Discovery { prefix } => {
                    if prefix[0] != own[0] {
                        let path: Vec<VertexId> = own.iter().chain(prefix.iter().rev()).copied().collect();
                        send_to_own_sun(ctx, v, Payload::Link(LinkPath(path)))?;
                    }
                }
                MergerMsg::Relay { target, payload } if target != id => {
                    ctx.send(target, MergerMsg::Deliver(payload))?;
                }
                MergerMsg::Relay { payload, .. } | MergerMsg::Deliver(payload) => v.accept(payload),
                _ => {}
            }
        }
        ctx.vote_to_halt();
        Ok(())
    }

    fn mass(
        &self,
        ctx: &mut Context<'_, MergerMsg>,
        v: &mut MergerVertex,
        inbox: Vec<Incoming<MergerMsg>>,
    ) -> Result<(), EngineError> {
        let id = ctx.id();
        if ctx.superstep() == 0 {
            if v.attrs.role == Role::Sun {
                v.system_mass = v.attrs.mass;
            } else {
                send_to_own_sun(ctx, v, Payload::Mass(v.attrs.mass))?;
            }
        }
        for m in inbox {
            match m.msg {
                MergerMsg::Relay { target, payload } if target != id => {
                    ctx.send(target, MergerMsg::Deliver(payload))?;
                }
                MergerMsg::Relay { payload, .. } | MergerMsg::Deliver(payload) => v.accept(payload),
                _ => {}
            }
        }
        ctx.vote_to_halt();
        Ok(())
    }
}

impl VertexProgram for MergerProgram {
    type State = MergerVertex;
    type Message = MergerMsg;

    fn compute(
        &self,
        ctx: &mut Context<'_, MergerMsg>,
        v: &mut MergerVertex,
        inbox: Vec<Incoming<MergerMsg>>,
    ) -> Result<(), EngineError> {
        match self.phase {
            Phase::Elect { probability, forced } => self.elect(ctx, v, inbox, probability, forced),
            Phase::Grow => self.grow(ctx, v, inbox),
            Phase::Discover => self.discover(ctx, v, inbox),
            Phase::Mass => self.mass(ctx, v, inbox),
        }
    }

    fn message_size(&self, msg: &MergerMsg) -> usize {
        match msg {
            MergerMsg::Beacon { .. } => 9,
            MergerMsg::Offer { .. } => 17,
            MergerMsg::Confirm => 1,
            MergerMsg::Relay { payload, .. } => 8 + payload.size(),
            MergerMsg::Deliver(payload) => payload.size(),
            MergerMsg::Discovery { prefix } => 8 * prefix.len(),
        }
    }

    fn state_size(&self, v: &MergerVertex) -> usize {
        let paths: usize = v.links.values().flatten().map(|p| 8 * p.0.len()).sum();
        48 + 8 * (v.attrs.planet_list.len() + v.attrs.system_planets.len() + v.moons.len()) + paths
    }
}

/// Runs one merger phase over `states`.
fn run_phase(
    graph: &Graph,
    phase: Phase,
    states: Vec<MergerVertex>,
    config: &EngineConfig,
    stats: &mut RunStats,
) -> Result<Vec<MergerVertex>, EngineError> {
    let out = engine::run(graph, &MergerProgram { phase }, states, config)?.converged(config.max_supersteps)?;
    stats.absorb(&out.stats);
    Ok(out.states)
}

/// Result of coarsening one level.
#[derive(Clone, Debug)]
pub struct Coarsened {
    pub attrs: Vec<VertexAttrs>,
    pub links: InterLinkTable,
    pub coarse: Graph,
    pub coarse_attrs: Vec<VertexAttrs>,
    pub parent: BTreeMap<VertexId, VertexId>,
}

fn to_attrs(states: &[MergerVertex]) -> Vec<VertexAttrs> {
    states.iter().map(|s| s.attrs.clone()).collect()
}

fn from_attrs(attrs: Vec<VertexAttrs>) -> Vec<MergerVertex> {
    attrs.into_iter().map(MergerVertex::new).collect()
}

/// Sun election on the unassigned vertices of `graph`.
pub fn elect_suns(
    graph: &Graph,
    attrs: Vec<VertexAttrs>,
    probability: f64,
    config: &EngineConfig,
) -> Result<Vec<VertexAttrs>, EngineError> {
    let mut stats = RunStats::default();
    let states = run_phase(graph, Phase::Elect { probability, forced: None }, from_attrs(attrs), config, &mut stats)?;
    Ok(to_attrs(&states))
}

fn elect_and_grow(
    graph: &Graph,
    mut states: Vec<MergerVertex>,
    probability: f64,
    config: &EngineConfig,
    stats: &mut RunStats,
) -> Result<Vec<MergerVertex>, MergerError> {
    let n = graph.vertex_count();
    let mut round = 0u64;
    while states.iter().any(|s| s.attrs.role == Role::Unassigned) {
        if round > n as u64 {
            return Err(MergerError::NoProgress(format!("{round} rounds on {n} vertices")));
        }
        let cfg = EngineConfig { seed: mix_seed(&[config.seed, round]), ..config.clone() };
        states = run_phase(graph, Phase::Elect { probability, forced: None }, states, &cfg, stats)?;
        if !states.iter().any(|s| s.fresh) {
            let forced = states
                .iter()
                .find(|s| s.attrs.role == Role::Unassigned)
                .map(|s| s.attrs.id);
            states = run_phase(graph, Phase::Elect { probability, forced }, states, &cfg, stats)?;
            if !states.iter().any(|s| s.fresh) {
                return Err(MergerError::NoProgress("forced election produced no sun".into()));
            }
        }
        states = run_phase(graph, Phase::Grow, states, &cfg, stats)?;
        round += 1;
    }
    Ok(states)
}

/// Grows solar systems until every vertex is assigned, repeating election on
/// the remaining unassigned vertices. Returns the attributes and the link
/// paths found through conflicting offers.
pub fn grow_systems(
    graph: &Graph,
    attrs: Vec<VertexAttrs>,
    probability: f64,
    config: &EngineConfig,
) -> Result<(Vec<VertexAttrs>, InterLinkTable), MergerError> {
    let mut stats = RunStats::default();
    let mut states = from_attrs(attrs);
    for s in &mut states {
        s.fresh = s.attrs.role == Role::Sun && s.attrs.planet_list.is_empty();
    }
    if states.iter().any(|s| s.fresh) {
        states = run_phase(graph, Phase::Grow, states, config, &mut stats)?;
    }
    let states = elect_and_grow(graph, states, probability, config, &mut stats)?;
    Ok((to_attrs(&states), collect_links(&states)))
}

fn collect_links(states: &[MergerVertex]) -> InterLinkTable {
    let mut table = InterLinkTable::default();
    for s in states {
        for path in s.links.values().flatten() {
            table.insert(path.clone());
        }
    }
    table
}

/// Inter-system link discovery; `attrs` must assign every vertex.
pub fn discover_links(
    graph: &Graph,
    attrs: Vec<VertexAttrs>,
    known: &InterLinkTable,
    config: &EngineConfig,
) -> Result<InterLinkTable, EngineError> {
    let mut states = from_attrs(attrs);
    seed_links(graph, &mut states, known);
    let mut stats = RunStats::default();
    let states = run_phase(graph, Phase::Discover, states, config, &mut stats)?;
    Ok(collect_links(&states))
}

fn seed_links(graph: &Graph, states: &mut [MergerVertex], known: &InterLinkTable) {
    for path in known.paths() {
        if let Some(i) = graph.index_of(path.from_sun()) {
            states[i].links.entry(path.to_sun()).or_default().insert(path.clone());
        }
    }
}

/// Collapses every solar system into one coarse vertex with the sun's ID.
pub fn build_next_level(
    graph: &Graph,
    attrs: Vec<VertexAttrs>,
    links: &InterLinkTable,
    config: &EngineConfig,
) -> Result<Coarsened, EngineError> {
    let mut states = from_attrs(attrs);
    seed_links(graph, &mut states, links);
    let mut stats = RunStats::default();
    let states = run_phase(graph, Phase::Mass, states, config, &mut stats)?;
    Ok(materialize(graph, &states))
}

fn materialize(graph: &Graph, states: &[MergerVertex]) -> Coarsened {
    let mut suns = Vec::new();
    let mut edges = Vec::new();
    let mut coarse_attrs = Vec::new();
    for s in states.iter().filter(|s| s.attrs.role == Role::Sun) {
        suns.push(s.attrs.id);
        coarse_attrs.push(VertexAttrs::new(s.attrs.id, s.attrs.level + 1, s.system_mass));
        for (&t, paths) in &s.links {
            let weight = paths.iter().map(LinkPath::vertex_count).max().unwrap_or(2);
            edges.push((s.attrs.id, t, weight as f64));
        }
    }
    let coarse = Graph::new(suns, edges);
    let parent = states
        .iter()
        .enumerate()
        .map(|(i, s)| (graph.id(i), s.attrs.sun().expect("assigned")))
        .collect();
    Coarsened {
        attrs: to_attrs(states),
        links: collect_links(states),
        coarse,
        coarse_attrs,
        parent,
    }
}

/// Full coarsening step for one level: election and growth until every
/// vertex is assigned, link discovery, then next-level generation.
pub fn coarsen_level(
    graph: &Graph,
    attrs: Vec<VertexAttrs>,
    probability: f64,
    config: &EngineConfig,
    stats: &mut RunStats,
) -> Result<Coarsened, MergerError> {
    let states = elect_and_grow(graph, from_attrs(attrs), probability, config, stats)?;
    let states = run_phase(graph, Phase::Discover, states, config, stats)?;
    let states = run_phase(graph, Phase::Mass, states, config, stats)?;
    Ok(materialize(graph, &states))
}

/// Level-0 masses: one plus the number of pruned leaves hanging on a vertex.
pub fn initial_attrs(graph: &Graph, leaf_counts: &BTreeMap<VertexId, usize>) -> Vec<VertexAttrs> {
    graph
        .ids()
        .iter()
        .map(|&id| VertexAttrs::new(id, 0, 1.0 + leaf_counts.get(&id).copied().unwrap_or(0) as f64))
        .collect()
}

/// Coarsens `component` until a level has fewer than the threshold vertices
/// (or a single vertex).
pub fn build_hierarchy(
    component: &Graph,
    leaf_counts: &BTreeMap<VertexId, usize>,
    cfg: &MergerConfig,
) -> Result<Hierarchy, MergerError> {
    let mut stats = RunStats::default();
    let mut levels = Vec::new();
    let mut parents = Vec::new();
    let mut partitions = Vec::new();
    let mut graph = component.clone();
    let mut attrs = initial_attrs(component, leaf_counts);
    let mut base_partition: Option<PartitionMap> = None;
    let mut index = 0u64;
    while graph.vertex_count() >= cfg.coarsen_threshold && graph.vertex_count() > 1 {
        let seed = mix_seed(&[cfg.seed, 0x50_1a4, index]);
        let partition = cfg.execution.partition_for(&graph, seed, base_partition.as_ref());
        if base_partition.is_none() {
            base_partition.clone_from(&partition);
        }
        let engine_cfg = cfg.execution.engine_config(partition.clone(), seed);
        partitions.push(partition);
        let step = coarsen_level(&graph, attrs, cfg.sun_probability, &engine_cfg, &mut stats)?;
        let shrunk = step.coarse.vertex_count() < graph.vertex_count();
        levels.push(Level { graph, attrs: step.attrs, links: step.links });
        parents.push(step.parent);
        graph = step.coarse;
        attrs = step.coarse_attrs;
        index += 1;
        if !shrunk {
            return Err(MergerError::NoProgress("coarse level did not shrink".into()));
        }
    }
    let seed = mix_seed(&[cfg.seed, 0x50_1a4, index]);
    partitions.push(cfg.execution.partition_for(&graph, seed, base_partition.as_ref()));
    levels.push(Level { graph, attrs, links: InterLinkTable::default() });
    Ok(Hierarchy { levels, parents, partitions, stats })
}

/// Sequential checks of the coarsening invariants, used by tests and the
/// acceptance suite.
pub mod checks {
    use super::*;

    /// Pairs of suns closer than three hops.
    pub fn close_suns(level: &Level) -> Vec<(VertexId, VertexId)> {
        let mut bad = Vec::new();
        for a in level.attrs.iter().filter(|a| a.role == Role::Sun) {
            for (v, d) in level.graph.bfs_distances(a.id, 2) {
                if d > 0 && v > a.id && level.attrs_of(v).is_some_and(|b| b.role == Role::Sun) {
                    bad.push((a.id, v));
                }
            }
        }
        bad
    }

    /// Every vertex is in exactly one system and reaches its sun inside the
    /// system in at most two hops, through a recorded planet for moons.
    pub fn systems_well_formed(level: &Level) -> Result<(), String> {
        let g = &level.graph;
        for a in &level.attrs {
            match a.role {
                Role::Unassigned => return Err(format!("{} unassigned", a.id)),
                Role::Sun => {
                    if a.system_sun.is_some() {
                        return Err(format!("sun {} has a system_sun", a.id));
                    }
                }
                Role::Planet => {
                    let s = a.system_sun.ok_or(format!("planet {} without sun", a.id))?;
                    if !g.has_edge(a.id, s) || level.attrs_of(s).map(|x| x.role) != Some(Role::Sun) {
                        return Err(format!("planet {} not adjacent to sun {s}", a.id));
                    }
                    if !level.attrs_of(s).unwrap().planet_list.contains(&a.id) {
                        return Err(format!("planet {} missing from planet list of {s}", a.id));
                    }
                }
                Role::Moon => {
                    let s = a.system_sun.ok_or(format!("moon {} without sun", a.id))?;
                    if a.system_planets.is_empty() {
                        return Err(format!("moon {} has no planets", a.id));
                    }
                    for &p in &a.system_planets {
                        let pa = level.attrs_of(p).ok_or(format!("unknown planet {p}"))?;
                        if pa.role != Role::Planet || pa.system_sun != Some(s) || !g.has_edge(a.id, p) {
                            return Err(format!("moon {} lists bad planet {p}", a.id));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest hop distance between two members of one system, measured in
    /// the whole level graph.
    pub fn max_system_diameter(level: &Level) -> usize {
        let mut members: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for a in &level.attrs {
            if let Some(s) = a.sun() {
                members.entry(s).or_default().insert(a.id);
            }
        }
        let mut diameter = 0;
        for set in members.values() {
            for &u in set {
                let dist = level.graph.bfs_distances(u, usize::MAX);
                for &v in set {
                    diameter = diameter.max(dist.get(&v).copied().unwrap_or(usize::MAX));
                }
            }
        }
        diameter
    }

    /// Quotient of `fine` under `parent`, as a set of unordered coarse pairs.
    pub fn quotient_edges(fine: &Graph, parent: &BTreeMap<VertexId, VertexId>) -> BTreeSet<(VertexId, VertexId)> {
        fine.edges()
            .filter_map(|(u, v, _)| {
                let (a, b) = (parent[&u], parent[&v]);
                (a != b).then(|| (a.min(b), a.max(b)))
            })
            .collect()
    }

    pub fn edge_set(g: &Graph) -> BTreeSet<(VertexId, VertexId)> {
        g.edges().map(|(u, v, _)| (u, v)).collect()
    }

    /// All hierarchy invariants; returns the first violation found.
    pub fn verify_hierarchy(h: &Hierarchy) -> Result<(), String> {
        for (i, level) in h.levels.iter().enumerate() {
            if i + 1 == h.levels.len() {
                break;
            }
            let next = &h.levels[i + 1];
            let close = close_suns(level);
            if !close.is_empty() {
                return Err(format!("level {i}: suns too close {:?}", &close[..close.len().min(3)]));
            }
            systems_well_formed(level).map_err(|e| format!("level {i}: {e}"))?;
            let d = max_system_diameter(level);
            if d > 4 {
                return Err(format!("level {i}: system diameter {d}"));
            }
            if !level.links.is_symmetric() {
                return Err(format!("level {i}: link table not symmetric"));
            }
            for p in level.links.paths() {
                if !(2..=6).contains(&p.vertex_count()) {
                    return Err(format!("level {i}: link path {:?}", p.0));
                }
            }
            let n = level.graph.vertex_count();
            if n >= 2 && next.graph.vertex_count() > n.div_ceil(2) {
                return Err(format!("level {i}: {n} -> {} vertices", next.graph.vertex_count()));
            }
            if (level.total_mass() - next.total_mass()).abs() > 0.0 {
                return Err(format!("level {i}: mass {} -> {}", level.total_mass(), next.total_mass()));
            }
            let parent = &h.parents[i];
            if parent.len() != n {
                return Err(format!("level {i}: parent map covers {} of {n}", parent.len()));
            }
            if quotient_edges(&level.graph, parent) != edge_set(&next.graph) {
                return Err(format!("level {i}: coarse edges differ from the quotient"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::checks::*;
    use super::*;
    use crate::generators;

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    fn attrs(g: &Graph) -> Vec<VertexAttrs> {
        initial_attrs(g, &BTreeMap::new())
    }

    fn with_suns(g: &Graph, suns: &[VertexId]) -> Vec<VertexAttrs> {
        let mut a = attrs(g);
        for x in &mut a {
            if suns.contains(&x.id) {
                x.role = Role::Sun;
            }
        }
        a
    }

    fn role_of(g: &Graph, a: &[VertexAttrs], id: VertexId) -> Role {
        a[g.index_of(id).unwrap()].role
    }

    #[test]
    fn single_vertex_is_forced_sun() {
        let g = Graph::new([7], std::iter::empty());
        let out = elect_suns(&g, attrs(&g), 1.0, &cfg()).unwrap();
        assert_eq!(out[0].role, Role::Sun);
    }

    #[test]
    fn highest_id_survives_on_a_path() {
        let g = generators::path(3);
        let out = elect_suns(&g, attrs(&g), 1.0, &cfg()).unwrap();
        let roles: Vec<Role> = out.iter().map(|a| a.role).collect();
        assert_eq!(roles, vec![Role::Unassigned, Role::Unassigned, Role::Sun]);
    }

    #[test]
    fn distance_three_suns_both_survive() {
        let g = generators::path(4);
        let mut a = attrs(&g);
        for i in [1, 2] {
            a[i].role = Role::Planet;
            a[i].system_sun = Some(90 + i as u64);
        }
        let out = elect_suns(&g, a, 1.0, &cfg()).unwrap();
        assert_eq!(out[0].role, Role::Sun);
        assert_eq!(out[3].role, Role::Sun);
    }

    #[test]
    fn lower_candidate_at_distance_two_is_demoted() {
        let g = generators::path(3);
        let mut a = attrs(&g);
        a[1].role = Role::Planet;
        a[1].system_sun = Some(99);
        let out = elect_suns(&g, a, 1.0, &cfg()).unwrap();
        assert_eq!(out[0].role, Role::Unassigned);
        assert_eq!(out[2].role, Role::Sun);
    }

    #[test]
    fn conflicting_offers_go_to_the_greater_sun() {
        // sun 1 - 3 - 5 - 4 - 2 sun: vertex 5 hears both suns at hop two.
        let g = Graph::from_edges([(1, 3), (3, 5), (5, 4), (4, 2)]);
        let (a, links) = grow_systems(&g, with_suns(&g, &[1, 2]), 0.0, &cfg()).unwrap();
        let five = &a[g.index_of(5).unwrap()];
        assert_eq!(five.role, Role::Moon);
        assert_eq!(five.system_sun, Some(2));
        assert_eq!(five.system_planets, BTreeSet::from([4]));
        let to_two: Vec<_> = links.neighbors_of(2).collect();
        assert_eq!(to_two.len(), 1);
        assert!(to_two[0].1.contains(&LinkPath(vec![2, 4, 5, 3, 1])));
        assert!(links.neighbors_of(1).any(|(t, p)| t == 2 && p.contains(&LinkPath(vec![1, 3, 5, 4, 2]))));
    }

    #[test]
    fn star_center_takes_all_planets() {
        let g = generators::star(4);
        let (a, _) = grow_systems(&g, with_suns(&g, &[0]), 0.0, &cfg()).unwrap();
        assert_eq!(a[0].planet_list.len(), 4);
        assert!(a[1..].iter().all(|x| x.role == Role::Planet && x.system_sun == Some(0)));
    }

    #[test]
    fn middle_sun_of_path_five() {
        let g = generators::path(5);
        let (a, _) = grow_systems(&g, with_suns(&g, &[2]), 0.0, &cfg()).unwrap();
        assert_eq!(role_of(&g, &a, 1), Role::Planet);
        assert_eq!(role_of(&g, &a, 3), Role::Planet);
        assert_eq!(a[0].role, Role::Moon);
        assert_eq!(a[0].system_planets, BTreeSet::from([1]));
        assert_eq!(a[4].system_planets, BTreeSet::from([3]));
    }

    fn assigned(g: &Graph, suns_of: &[(VertexId, Role, Option<VertexId>, &[VertexId])]) -> Vec<VertexAttrs> {
        let mut a = attrs(g);
        for &(id, role, sun, planets) in suns_of {
            let x = &mut a[g.index_of(id).unwrap()];
            x.role = role;
            x.system_sun = sun;
            x.system_planets = planets.iter().copied().collect();
        }
        a
    }

    #[test]
    fn adjacent_suns_link_directly() {
        let g = Graph::from_edges([(1, 2)]);
        let a = assigned(&g, &[(1, Role::Sun, None, &[]), (2, Role::Sun, None, &[])]);
        let links = discover_links(&g, a.clone(), &InterLinkTable::default(), &cfg()).unwrap();
        assert!(links.neighbors_of(1).any(|(_, p)| p.contains(&LinkPath(vec![1, 2]))));
        let next = build_next_level(&g, a, &links, &cfg()).unwrap();
        assert_eq!(next.coarse.edge_weight(1, 2), Some(2.0));
    }

    #[test]
    fn planet_planet_link() {
        let g = Graph::from_edges([(1, 11), (11, 12), (12, 2)]);
        let a = assigned(&g, &[
            (1, Role::Sun, None, &[]),
            (2, Role::Sun, None, &[]),
            (11, Role::Planet, Some(1), &[]),
            (12, Role::Planet, Some(2), &[]),
        ]);
        let links = discover_links(&g, a, &InterLinkTable::default(), &cfg()).unwrap();
        assert_eq!(links.len(), 2);
        assert!(links.neighbors_of(1).any(|(_, p)| p.contains(&LinkPath(vec![1, 11, 12, 2]))));
        assert!(links.neighbors_of(2).any(|(_, p)| p.contains(&LinkPath(vec![2, 12, 11, 1]))));
    }

    #[test]
    fn moon_moon_link_has_six_vertices() {
        let g = Graph::from_edges([(1, 11), (11, 21), (21, 22), (22, 12), (12, 2)]);
        let a = assigned(&g, &[
            (1, Role::Sun, None, &[]),
            (2, Role::Sun, None, &[]),
            (11, Role::Planet, Some(1), &[]),
            (12, Role::Planet, Some(2), &[]),
            (21, Role::Moon, Some(1), &[11]),
            (22, Role::Moon, Some(2), &[12]),
        ]);
        let links = discover_links(&g, a.clone(), &InterLinkTable::default(), &cfg()).unwrap();
        let path = LinkPath(vec![1, 11, 21, 22, 12, 2]);
        assert!(links.neighbors_of(1).any(|(_, p)| p.contains(&path)));
        assert!(links.is_symmetric());
        let next = build_next_level(&g, a, &links, &cfg()).unwrap();
        assert_eq!(next.coarse.edge_weight(1, 2), Some(6.0));
    }

    #[test]
    fn masses_sum_per_system() {
        let g = Graph::from_edges([(1, 11), (11, 12), (12, 2)]);
        let mut a = assigned(&g, &[
            (1, Role::Sun, None, &[]),
            (2, Role::Sun, None, &[]),
            (11, Role::Planet, Some(1), &[]),
            (12, Role::Planet, Some(2), &[]),
        ]);
        // masses {1 + 2, 1 + 4}
        a[g.index_of(11).unwrap()].mass = 2.0;
        a[g.index_of(12).unwrap()].mass = 4.0;
        let links = discover_links(&g, a.clone(), &InterLinkTable::default(), &cfg()).unwrap();
        let next = build_next_level(&g, a, &links, &cfg()).unwrap();
        assert_eq!(next.coarse.vertex_count(), 2);
        assert_eq!(next.coarse.edge_count(), 1);
        let masses: Vec<f64> = next.coarse_attrs.iter().map(|x| x.mass).collect();
        assert_eq!(masses, vec![3.0, 5.0]);
    }

    #[test]
    fn one_system_covering_a_cycle() {
        let g = generators::cycle(5);
        let (a, links) = grow_systems(&g, with_suns(&g, &[0]), 0.0, &cfg()).unwrap();
        let links = discover_links(&g, a.clone(), &links, &cfg()).unwrap();
        let next = build_next_level(&g, a, &links, &cfg()).unwrap();
        assert_eq!(next.coarse.vertex_count(), 1);
        assert_eq!(next.coarse.edge_count(), 0);
        assert_eq!(next.coarse_attrs[0].mass, 5.0);
    }

    #[test]
    fn cycle_six_needs_a_second_sun() {
        // vertex 3 is three hops from sun 0, so it becomes the next sun and
        // captures moons 2 and 4 as planets
        let g = generators::cycle(6);
        let (a, links) = grow_systems(&g, with_suns(&g, &[0]), 0.0, &cfg()).unwrap();
        assert_eq!(a[3].role, Role::Sun);
        assert_eq!(a[2].system_sun, Some(3));
        assert_eq!(a[4].system_sun, Some(3));
        let links = discover_links(&g, a.clone(), &links, &cfg()).unwrap();
        let next = build_next_level(&g, a, &links, &cfg()).unwrap();
        assert_eq!(next.coarse.edge_weight(0, 3), Some(4.0));
        let masses: Vec<f64> = next.coarse_attrs.iter().map(|x| x.mass).collect();
        assert_eq!(masses, vec![3.0, 3.0]);
    }

    #[test]
    fn captured_moon_withdraws_conflict_paths() {
        // 5 is a moon of 2 with a conflict path through it to 1; a later sun
        // 6 captures it, so neither old sun may keep a path through 5
        let g = Graph::from_edges([(1, 3), (3, 5), (5, 4), (4, 2), (5, 6), (6, 7), (7, 8), (8, 9)]);
        // with no random suns the next forced sun is the smallest unassigned ID, 6
        let (a, links) = grow_systems(&g, with_suns(&g, &[1, 2]), 0.0, &cfg()).unwrap();
        assert_eq!(a[g.index_of(5).unwrap()].system_sun, Some(6));
        assert!(links.paths().all(|p| !p.0.contains(&5)), "{links:?}");
        let links = discover_links(&g, a.clone(), &links, &cfg()).unwrap();
        assert!(links.is_symmetric());
        let next = build_next_level(&g, a, &links, &cfg()).unwrap();
        assert!(!next.coarse.has_edge(1, 2));
    }

    #[test]
    fn small_component_is_not_coarsened() {
        let g = generators::path(10);
        let h = build_hierarchy(&g, &BTreeMap::new(), &MergerConfig::default()).unwrap();
        assert_eq!(h.depth(), 1);
    }

    #[test]
    fn path_hundred_depth_is_bounded() {
        let g = generators::path(100);
        for seed in 0..10 {
            let h = build_hierarchy(&g, &BTreeMap::new(), &MergerConfig { seed, ..MergerConfig::default() }).unwrap();
            assert!((2..=5).contains(&h.depth()), "seed {seed}: {:?}", h.level_sizes());
            assert!(*h.level_sizes().last().unwrap() < 30);
            verify_hierarchy(&h).unwrap();
        }
    }

    #[test]
    fn grid_mass_is_conserved() {
        let g = generators::grid(20, 20);
        for seed in 0..5 {
            let h = build_hierarchy(&g, &BTreeMap::new(), &MergerConfig { seed, ..MergerConfig::default() }).unwrap();
            for level in &h.levels {
                assert_eq!(level.total_mass(), 400.0);
            }
            verify_hierarchy(&h).unwrap();
        }
    }

    #[test]
    fn leaf_counts_seed_masses() {
        let g = generators::cycle(40);
        let leaves = BTreeMap::from([(3, 2), (17, 5)]);
        let h = build_hierarchy(&g, &leaves, &MergerConfig::default()).unwrap();
        assert_eq!(h.levels[0].total_mass(), 47.0);
        assert_eq!(h.levels.last().unwrap().total_mass(), 47.0);
    }

    #[test]
    fn hierarchy_is_worker_independent() {
        let g = generators::random_connected(400, 900, 3);
        let base = build_hierarchy(&g, &BTreeMap::new(), &MergerConfig::default()).unwrap();
        for workers in [2, 4] {
            let cfg = MergerConfig { execution: ExecutionSettings::with_workers(workers), ..MergerConfig::default() };
            let h = build_hierarchy(&g, &BTreeMap::new(), &cfg).unwrap();
            assert_eq!(h.level_sizes(), base.level_sizes());
            for (a, b) in h.levels.iter().zip(&base.levels) {
                assert_eq!(a.attrs, b.attrs);
                assert_eq!(a.links, b.links);
            }
        }
    }

    #[test]
    fn order_insensitive_under_shuffled_inboxes() {
        let g = generators::grid(15, 15);
        let mut cfg = MergerConfig::default();
        let base = build_hierarchy(&g, &BTreeMap::new(), &cfg).unwrap();
        cfg.execution.shuffle_inboxes = true;
        let h = build_hierarchy(&g, &BTreeMap::new(), &cfg).unwrap();
        assert_eq!(h.level_sizes(), base.level_sizes());
        assert_eq!(h.levels[0].links, base.levels[0].links);
    }
}
