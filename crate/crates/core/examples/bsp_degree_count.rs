//! A minimal vertex program: every vertex tells its neighbors it exists and
//! counts the greetings it receives. Also demonstrates aggregates.
//!
//! `cargo run --release --example bsp_degree_count`

use multigila::engine::{run, Context, EngineConfig, Incoming, VertexProgram};
use multigila::error::EngineError;
use multigila::generators;

struct DegreeCount;

impl VertexProgram for DegreeCount {
    type State = usize;
    type Message = ();

    fn compute(&self, ctx: &mut Context<'_, ()>, state: &mut usize, inbox: Vec<Incoming<()>>) -> Result<(), EngineError> {
        if ctx.superstep() == 0 {
            ctx.send_to_neighbors(());
        } else {
            *state = inbox.len();
            ctx.aggregate_sum("edges_seen", inbox.len() as i64);
            ctx.vote_to_halt();
        }
        Ok(())
    }
}

fn main() -> Result<(), EngineError> {
    let g = generators::karate_club();
    let out = run(&g, &DegreeCount, vec![0; g.vertex_count()], &EngineConfig::with_workers(4))?;
    for (i, d) in out.states.iter().enumerate().take(5) {
        println!("vertex {} degree {d}", g.id(i));
    }
    println!("sum of degrees {} (2m = {})", out.aggregates.sum("edges_seen"), 2 * g.edge_count());
    println!("supersteps {} messages {}", out.stats.supersteps_executed, out.stats.total_messages());
    Ok(())
}
