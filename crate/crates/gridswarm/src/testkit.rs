//! Test support: surgical world edits and read-only peeks that integration
//! tests and the acceptance suite need. Not used by the engine itself.

use std::collections::BTreeMap;

use crate::grid::{AgentId, GridWorld, Pos};
use crate::hhta::{self, HhtaParams, RecruitMessage};
use crate::policy::AgentState;
use crate::rng::RngStream;
use crate::Real;

/// Re-places one agent with an explicit position and state.
pub fn override_agent<F: Real>(
    world: &mut GridWorld<F>,
    id: AgentId,
    pos: Pos,
    state: AgentState<F>,
) {
    assert!(world.in_bounds(pos));
    let agent = &mut world.agents[id as usize];
    agent.pos = pos;
    agent.state = state;
    world.rebuild_occupancy();
}

/// Directly sets a vertex's residual demand (never above its demand) and
/// fixes the world's running total.
pub fn set_residual_demand<F: Real>(world: &mut GridWorld<F>, pos: Pos, rd: u32) {
    let idx = world.idx(pos);
    assert!(rd <= world.vertices[idx].demand);
    world.vertices[idx].residual_demand = rd;
    let total: u64 = world.vertices.iter().map(|v| v.residual_demand as u64).sum();
    world.total_residual = total;
}

/// Runs the recruitment message pre-pass for the upcoming round without
/// touching any counters, returning who would receive what.
pub fn peek_deliveries<F: Real>(
    world: &GridWorld<F>,
    params: &HhtaParams<F>,
    round: u64,
    stream: &RngStream,
) -> BTreeMap<AgentId, Vec<RecruitMessage>> {
    let mut scratch = vec![0u64; world.agents().len()];
    hhta::deliver_recruitment_messages(world, params, round, stream, &mut scratch)
}
