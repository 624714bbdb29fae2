//! Superstep-synchronous, vertex-centric execution engine.
//!
//! A [`VertexProgram`] runs once per active vertex per superstep. Messages
//! sent during superstep `t` are delivered at the barrier and become visible
//! in the receiver's inbox at `t + 1`, ordered by `(sender id, emission
//! order)`. Sends are only allowed along graph edges; longer routes must be
//! relayed hop by hop by the program itself.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::EngineError;
use crate::graph::{Graph, VertexId};
use crate::partition::PartitionMap;
use crate::seed::mix_seed;

/// A message as seen by its receiver.
#[derive(Clone, Debug, PartialEq)]
pub struct Incoming<M> {
    pub sender: VertexId,
    pub msg: M,
}

pub trait VertexProgram: Sync {
    type State: Send;
    type Message: Send;

    fn compute(
        &self,
        ctx: &mut Context<'_, Self::Message>,
        state: &mut Self::State,
        inbox: Vec<Incoming<Self::Message>>,
    ) -> Result<(), EngineError>;

    /// Semantic size of a message in bytes, used for per-superstep accounting.
    fn message_size(&self, _msg: &Self::Message) -> usize {
        std::mem::size_of::<Self::Message>()
    }

    /// Semantic size of a vertex state in bytes.
    fn state_size(&self, _state: &Self::State) -> usize {
        std::mem::size_of::<Self::State>()
    }

    /// Optional per-target combiner. Returning `None` means `next` was folded
    /// into `acc`; returning `Some(next)` keeps it as a separate message.
    fn combine(&self, _acc: &mut Self::Message, next: Self::Message) -> Option<Self::Message> {
        Some(next)
    }
}

/// Global aggregates with Pregel semantics: written during superstep `t`,
/// readable during `t + 1`. Only order-independent reductions are offered so
/// results do not depend on the worker count.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Aggregates {
    sums: BTreeMap<&'static str, i64>,
    maxima: BTreeMap<&'static str, f64>,
    minima: BTreeMap<&'static str, f64>,
}

impl Aggregates {
    pub fn sum(&self, name: &str) -> i64 {
        self.sums.get(name).copied().unwrap_or(0)
    }

    pub fn max(&self, name: &str) -> Option<f64> {
        self.maxima.get(name).copied()
    }

    pub fn min(&self, name: &str) -> Option<f64> {
        self.minima.get(name).copied()
    }

    fn add(&mut self, name: &'static str, value: i64) {
        *self.sums.entry(name).or_insert(0) += value;
    }

    fn put_max(&mut self, name: &'static str, value: f64) {
        let slot = self.maxima.entry(name).or_insert(value);
        *slot = slot.max(value);
    }

    fn put_min(&mut self, name: &'static str, value: f64) {
        let slot = self.minima.entry(name).or_insert(value);
        *slot = slot.min(value);
    }

    fn merge(&mut self, other: Aggregates) {
        for (k, v) in other.sums {
            self.add(k, v);
        }
        for (k, v) in other.maxima {
            self.put_max(k, v);
        }
        for (k, v) in other.minima {
            self.put_min(k, v);
        }
    }
}

struct Pending<M> {
    target: u32,
    sender: u32,
    msg: M,
}

/// Per-vertex view of the current superstep.
pub struct Context<'a, M> {
    superstep: u64,
    index: usize,
    graph: &'a Graph,
    seed: u64,
    owner: &'a [u32],
    previous: &'a Aggregates,
    written: &'a mut Aggregates,
    outbox: &'a mut [Vec<Pending<M>>],
    sends: &'a mut u64,
    halted: bool,
    rng: Option<ChaCha8Rng>,
}

impl<'a, M> Context<'a, M> {
    pub fn superstep(&self) -> u64 {
        self.superstep
    }

    pub fn id(&self) -> VertexId {
        self.graph.id(self.index)
    }

    pub fn graph(&self) -> &'a Graph {
        self.graph
    }

    pub fn degree(&self) -> usize {
        self.graph.degree(self.index)
    }

    /// `(neighbor id, edge weight)`, ascending by ID.
    pub fn neighbors(&self) -> impl Iterator<Item = (VertexId, f64)> + 'a {
        self.graph.neighbors(self.index)
    }

    pub fn is_neighbor(&self, target: VertexId) -> bool {
        self.graph.neighbor_slot(self.index, target).is_some()
    }

    /// Aggregates written during the previous superstep.
    pub fn aggregates(&self) -> &Aggregates {
        self.previous
    }

    pub fn aggregate_sum(&mut self, name: &'static str, value: i64) {
        self.written.add(name, value);
    }

    pub fn aggregate_max(&mut self, name: &'static str, value: f64) {
        self.written.put_max(name, value);
    }

    pub fn aggregate_min(&mut self, name: &'static str, value: f64) {
        self.written.put_min(name, value);
    }

    /// Queues `msg` for an adjacent vertex; it is readable next superstep.
    pub fn send(&mut self, target: VertexId, msg: M) -> Result<(), EngineError> {
        let slot = self.graph.neighbor_slot(self.index, target).ok_or(
            EngineError::MessageToNonNeighbor { superstep: self.superstep, from: self.id(), to: target },
        )?;
        let target = self.graph.neighbor_indices(self.index)[slot];
        self.push(target, msg);
        Ok(())
    }

    pub fn send_to_neighbors(&mut self, msg: M)
    where
        M: Clone,
    {
        let targets = self.graph.neighbor_indices(self.index);
        for &t in targets {
            self.push(t, msg.clone());
        }
    }

    /// First leg of a two-hop relay: checks that `via` is adjacent to this
    /// vertex and `target` is adjacent to `via`, then sends `msg` to `via`.
    /// The program at `via` is responsible for forwarding it.
    pub fn send_relay(&mut self, via: VertexId, target: VertexId, msg: M) -> Result<(), EngineError> {
        if !self.graph.has_edge(via, target) {
            return Err(EngineError::MessageToNonNeighbor {
                superstep: self.superstep,
                from: via,
                to: target,
            });
        }
        self.send(via, msg)
    }

    pub fn vote_to_halt(&mut self) {
        self.halted = true;
    }

    /// Deterministic per-(seed, superstep, vertex) random stream.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        let (seed, step, id) = (self.seed, self.superstep, self.id());
        self.rng
            .get_or_insert_with(|| ChaCha8Rng::seed_from_u64(mix_seed(&[seed, step, id])))
    }

    fn push(&mut self, target: u32, msg: M) {
        let dest = self.owner[target as usize] as usize;
        self.outbox[dest].push(Pending { target, sender: self.index as u32, msg });
        *self.sends += 1;
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub num_workers: usize,
    pub max_supersteps: u64,
    /// Vertex to partition assignment; partitions map onto workers modulo
    /// `num_workers`. `None` splits the ID range into contiguous blocks.
    pub partition: Option<PartitionMap>,
    pub seed: u64,
    /// Test mode: shuffle every inbox with the seed before delivery.
    pub shuffle_inboxes: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            num_workers: 1,
            max_supersteps: 100_000,
            partition: None,
            seed: 0,
            shuffle_inboxes: false,
        }
    }
}

impl EngineConfig {
    pub fn with_workers(num_workers: usize) -> Self {
        EngineConfig { num_workers, ..EngineConfig::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub supersteps_executed: u64,
    pub messages_per_superstep: Vec<u64>,
    pub bytes_per_superstep: Vec<u64>,
    pub max_state_bytes_per_superstep: Vec<u64>,
    /// Set when the run was stopped by `max_supersteps` before quiescence.
    pub capped: bool,
}

impl RunStats {
    pub fn total_messages(&self) -> u64 {
        self.messages_per_superstep.iter().sum()
    }

    pub fn total_bytes(&self) -> u64 {
        self.bytes_per_superstep.iter().sum()
    }

    /// Appends another run's counters, as if the runs were consecutive.
    pub fn absorb(&mut self, other: &RunStats) {
        self.supersteps_executed += other.supersteps_executed;
        self.messages_per_superstep.extend(&other.messages_per_superstep);
        self.bytes_per_superstep.extend(&other.bytes_per_superstep);
        self.max_state_bytes_per_superstep.extend(&other.max_state_bytes_per_superstep);
        self.capped |= other.capped;
    }
}

#[derive(Debug)]
pub struct RunOutcome<S> {
    /// Final states aligned with the graph's vertex indices.
    pub states: Vec<S>,
    pub stats: RunStats,
    pub aggregates: Aggregates,
}

impl<S> RunOutcome<S> {
    /// Turns a capped run into [`EngineError::SuperstepCapExceeded`].
    pub fn converged(self, cap: u64) -> Result<Self, EngineError> {
        if self.stats.capped {
            Err(EngineError::SuperstepCapExceeded { cap })
        } else {
            Ok(self)
        }
    }
}

struct Worker<S, M> {
    vertices: Vec<u32>,
    states: Vec<S>,
    halted: Vec<bool>,
    inbox: Vec<Vec<Incoming<M>>>,
    outbox: Vec<Vec<Pending<M>>>,
    sends: u64,
    bytes: u64,
    max_state: u64,
    written: Aggregates,
    error: Option<(u32, EngineError)>,
}

fn worker_assignment(
    graph: &Graph,
    config: &EngineConfig,
) -> Result<Vec<u32>, EngineError> {
    let n = graph.vertex_count();
    let workers = config.num_workers;
    match &config.partition {
        None => Ok((0..n).map(|i| (i * workers / n.max(1)) as u32).collect()),
        Some(map) => {
            if map.len() != n {
                return Err(EngineError::InvalidPartition(format!(
                    "{} entries for {} vertices",
                    map.len(),
                    n
                )));
            }
            graph
                .ids()
                .iter()
                .map(|&id| {
                    map.get(id)
                        .map(|p| (p % workers) as u32)
                        .ok_or_else(|| EngineError::InvalidPartition(format!("vertex {id} unassigned")))
                })
                .collect()
        }
    }
}

/// Runs `program` from `init` (aligned with `graph` indices) until every
/// vertex has voted to halt with no messages in flight, or the superstep cap
/// is reached.
pub fn run<P: VertexProgram>(
    graph: &Graph,
    program: &P,
    init: Vec<P::State>,
    config: &EngineConfig,
) -> Result<RunOutcome<P::State>, EngineError> {
    let n = graph.vertex_count();
    if n == 0 {
        return Err(EngineError::InvalidConfig("graph has no vertices".into()));
    }
    if config.num_workers == 0 || config.max_supersteps == 0 {
        return Err(EngineError::InvalidConfig(
            "num_workers and max_supersteps must be positive".into(),
        ));
    }
    if init.len() != n {
        return Err(EngineError::InvalidConfig(format!(
            "{} initial states for {} vertices",
            init.len(),
            n
        )));
    }
    let num_workers = config.num_workers;
    let owner = worker_assignment(graph, config)?;
    let mut local = vec![0u32; n];
    let mut workers: Vec<Worker<P::State, P::Message>> = (0..num_workers)
        .map(|_| Worker {
            vertices: Vec::new(),
            states: Vec::new(),
            halted: Vec::new(),
            inbox: Vec::new(),
            outbox: (0..num_workers).map(|_| Vec::new()).collect(),
            sends: 0,
            bytes: 0,
            max_state: 0,
            written: Aggregates::default(),
            error: None,
        })
        .collect();
    for (i, state) in init.into_iter().enumerate() {
        let w = &mut workers[owner[i] as usize];
        local[i] = w.vertices.len() as u32;
        w.vertices.push(i as u32);
        w.states.push(state);
        w.halted.push(false);
        w.inbox.push(Vec::new());
    }

    let pool = if num_workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(num_workers)
                .build()
                .map_err(|e| EngineError::InvalidConfig(e.to_string()))?,
        )
    } else {
        None
    };
    type WorkerFn<'f, S, M> = dyn Fn(usize, &mut Worker<S, M>) + Sync + 'f;
    let for_each_worker = |workers: &mut Vec<Worker<P::State, P::Message>>, f: &WorkerFn<'_, P::State, P::Message>| {
        match &pool {
            Some(pool) => pool.install(|| {
                workers.par_iter_mut().enumerate().for_each(|(w, worker)| f(w, worker))
            }),
            None => workers.iter_mut().enumerate().for_each(|(w, worker)| f(w, worker)),
        }
    };

    let mut stats = RunStats::default();
    let mut aggregates = Aggregates::default();
    let mut superstep = 0u64;
    loop {
        if superstep >= config.max_supersteps {
            stats.capped = true;
            break;
        }
        let previous = &aggregates;
        let owner_ref = &owner;
        let compute = |_: usize, worker: &mut Worker<P::State, P::Message>| {
            worker.sends = 0;
            worker.max_state = 0;
            worker.written = Aggregates::default();
            for slot in 0..worker.vertices.len() {
                let mut inbox = std::mem::take(&mut worker.inbox[slot]);
                if worker.halted[slot] && inbox.is_empty() {
                    continue;
                }
                let index = worker.vertices[slot] as usize;
                if config.shuffle_inboxes && inbox.len() > 1 {
                    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[
                        config.seed,
                        superstep,
                        graph.id(index),
                        0x5eed,
                    ]));
                    inbox.shuffle(&mut rng);
                }
                let mut ctx = Context {
                    superstep,
                    index,
                    graph,
                    seed: config.seed,
                    owner: owner_ref,
                    previous,
                    written: &mut worker.written,
                    outbox: &mut worker.outbox,
                    sends: &mut worker.sends,
                    halted: false,
                    rng: None,
                };
                let result = program.compute(&mut ctx, &mut worker.states[slot], inbox);
                let halted = ctx.halted;
                worker.halted[slot] = halted;
                let size = program.state_size(&worker.states[slot]) as u64;
                worker.max_state = worker.max_state.max(size);
                if let Err(e) = result {
                    worker.error = Some((index as u32, e));
                    break;
                }
            }
        };
        for_each_worker(&mut workers, &compute);
        stats.supersteps_executed += 1;

        if let Some((_, err)) = workers
            .iter_mut()
            .filter_map(|w| w.error.take())
            .min_by_key(|(index, _)| *index)
        {
            return Err(err);
        }

        // Barrier: route outboxes to their destination workers.
        let mut routed: Vec<Vec<Vec<Pending<P::Message>>>> =
            (0..num_workers).map(|_| Vec::with_capacity(num_workers)).collect();
        let mut sends = 0u64;
        let mut max_state = 0u64;
        let mut written = Aggregates::default();
        for worker in workers.iter_mut() {
            sends += worker.sends;
            max_state = max_state.max(worker.max_state);
            written.merge(std::mem::take(&mut worker.written));
            for (dest, out) in worker.outbox.iter_mut().enumerate() {
                routed[dest].push(std::mem::take(out));
            }
        }
        let routed = std::sync::Mutex::new(routed.into_iter().map(Some).collect::<Vec<_>>());
        let local_ref = &local;
        let deliver = |w: usize, worker: &mut Worker<P::State, P::Message>| {
            let batches = routed.lock().expect("routing table")[w].take().unwrap_or_default();
            let mut touched = Vec::new();
            worker.bytes = 0;
            for batch in batches {
                for p in batch {
                    worker.bytes += program.message_size(&p.msg) as u64;
                    let slot = local_ref[p.target as usize] as usize;
                    let inbox = &mut worker.inbox[slot];
                    if inbox.is_empty() {
                        touched.push(slot);
                    }
                    inbox.push(Incoming { sender: p.sender as VertexId, msg: p.msg });
                }
            }
            for slot in touched {
                let inbox = &mut worker.inbox[slot];
                // Senders were recorded as indices; ascending index is ascending ID.
                inbox.sort_by_key(|m| m.sender);
                for m in inbox.iter_mut() {
                    m.sender = graph.id(m.sender as usize);
                }
                if inbox.len() > 1 {
                    let mut merged: Vec<Incoming<P::Message>> = Vec::with_capacity(inbox.len());
                    for m in inbox.drain(..) {
                        match merged.last_mut() {
                            Some(last) => {
                                if let Some(rest) = program.combine(&mut last.msg, m.msg) {
                                    merged.push(Incoming { sender: m.sender, msg: rest });
                                }
                            }
                            None => merged.push(m),
                        }
                    }
                    *inbox = merged;
                }
            }
        };
        for_each_worker(&mut workers, &deliver);
        let bytes: u64 = workers.iter().map(|w| w.bytes).sum();

        stats.messages_per_superstep.push(sends);
        stats.bytes_per_superstep.push(bytes);
        stats.max_state_bytes_per_superstep.push(max_state);
        aggregates = written;
        superstep += 1;

        let all_halted = workers.iter().all(|w| w.halted.iter().all(|&h| h));
        if sends == 0 && all_halted {
            break;
        }
    }

    let mut states: Vec<Option<P::State>> = (0..n).map(|_| None).collect();
    for worker in workers {
        for (index, state) in worker.vertices.into_iter().zip(worker.states) {
            states[index as usize] = Some(state);
        }
    }
    Ok(RunOutcome {
        states: states.into_iter().map(|s| s.expect("every vertex owned")).collect(),
        stats,
        aggregates,
    })
}
