//! Policy dispatch: the three agent behaviors and the glue that routes each
//! agent through its transition function.

use crate::error::ConfigError;
use crate::grid::{Agent, AgentOutcome, AgentId, Direction, GridWorld, Pos};
use crate::hhta::{self, HhtaAgentState, HhtaParams, RecruitMessage};
use crate::levy::{next_step, LevyParams, WalkState};
use crate::prop::{self, FollowerState, PropParams, PropagatorState};
use crate::rng::RngStream;
use crate::Real;

/// State of one agent, depending on the policy it runs under.
#[derive(Clone, PartialEq, Debug)]
pub enum AgentState<F: Real = f64> {
    Walker(WalkerState<F>),
    Hhta(HhtaAgentState<F>),
    Propagator(PropagatorState),
    Follower(FollowerState<F>),
}

/// Random-walk baseline agent: levy-walks, heads for any open task it
/// senses, claims on arrival and then stays there for good.
#[derive(Clone, PartialEq, Debug)]
pub struct WalkerState<F: Real = f64> {
    pub walk: WalkState<F>,
    pub destination_task: Option<Pos>,
    pub committed_task: Option<Pos>,
}

/// Parameters of the random-walk baseline.
#[derive(Clone, PartialEq, Debug)]
pub struct RwParams<F: Real = f64> {
    pub influence_radius: i32,
    pub levy: LevyParams<F>,
}

impl<F: Real> RwParams<F> {
    pub fn new(influence_radius: i32, mu: f64, max_leg: f64) -> Result<Self, ConfigError> {
        if mu <= 1.0 {
            return Err(ConfigError::BadLevyExponent(mu));
        }
        Ok(Self {
            influence_radius,
            levy: LevyParams::new(crate::num::real(mu), crate::num::real(max_leg)),
        })
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum Policy<F: Real = f64> {
    Rw(RwParams<F>),
    Hhta(HhtaParams<F>),
    Prop(PropParams<F>),
}

impl<F: Real> Policy<F> {
    pub fn describe(&self) -> String {
        match self {
            Policy::Rw(p) => format!("RW(I={})", p.influence_radius),
            Policy::Hhta(p) => format!(
                "HHTA(I={},P_c={},P_e={},r_m={})",
                p.influence_radius, p.p_commit, p.p_explore, p.message_rate
            ),
            Policy::Prop(p) => format!(
                "PROP(d_p={},r_p={})",
                p.max_propagation_radius, p.propagation_timeout
            ),
        }
    }

    /// Starting state for a task-performing agent placed at `pos`.
    pub fn initial_state(&self, pos: Pos) -> AgentState<F> {
        match self {
            Policy::Rw(_) => AgentState::Walker(WalkerState {
                walk: WalkState::exhausted(pos),
                destination_task: None,
                committed_task: None,
            }),
            Policy::Hhta(_) => AgentState::Hhta(HhtaAgentState::home(pos)),
            Policy::Prop(_) => AgentState::Follower(FollowerState {
                walk: WalkState::exhausted(pos),
                destination_task: None,
                committed_task: None,
            }),
        }
    }
}

/// Routes one agent through its policy's transition function. Propagators
/// are ticked separately by the engine and never reach this.
pub(crate) fn agent_transition<F: Real>(
    policy: &Policy<F>,
    world: &GridWorld<F>,
    agent: &Agent<F>,
    inbox: &[RecruitMessage],
    rng: &mut RngStream,
) -> AgentOutcome<F> {
    match (policy, &agent.state) {
        (Policy::Rw(p), AgentState::Walker(s)) => {
            walker_transition(p, world, agent.id, agent.pos, s, rng)
        }
        (Policy::Hhta(p), AgentState::Hhta(s)) => {
            hhta::transition(p, world, agent.id, agent.pos, s, inbox, rng)
        }
        (Policy::Prop(p), AgentState::Follower(s)) => {
            prop::follower_transition(p, world, agent.id, agent.pos, s, rng)
        }
        _ => panic!("agent {} state does not match policy", agent.id),
    }
}

fn walker_transition<F: Real>(
    p: &RwParams<F>,
    world: &GridWorld<F>,
    id: AgentId,
    pos: Pos,
    s: &WalkerState<F>,
    rng: &mut RngStream,
) -> AgentOutcome<F> {
    let mut next = s.clone();
    if next.committed_task.is_some() {
        return walker_outcome(id, next, Direction::Stay, false);
    }
    if let Some(dest) = next.destination_task {
        if world.vertex(dest).residual_demand == 0 {
            next.destination_task = None;
            return walker_outcome(id, next, Direction::Stay, false);
        }
        if pos == dest {
            next.destination_task = None;
            next.committed_task = Some(pos);
            return walker_outcome(id, next, Direction::Stay, true);
        }
        let dir = greedy_step_toward(pos, dest, rng);
        return walker_outcome(id, next, dir, false);
    }
    if let Some((loc, _rd)) = world.nearest_open_task(pos, p.influence_radius, rng) {
        next.destination_task = Some(loc);
        let dir = if loc == pos {
            Direction::Stay
        } else {
            greedy_step_toward(pos, loc, rng)
        };
        return walker_outcome(id, next, dir, false);
    }
    let dir = next_step(&mut next.walk, pos, &p.levy, rng);
    walker_outcome(id, next, dir, false)
}

fn walker_outcome<F: Real>(
    id: AgentId,
    state: WalkerState<F>,
    direction: Direction,
    claims_task: bool,
) -> AgentOutcome<F> {
    AgentOutcome {
        agent: id,
        state: AgentState::Walker(state),
        direction,
        claims_task,
    }
}

/// Axis-greedy unit step from `pos` toward `target`; the axis with the
/// larger remaining offset wins, exact ties by coin flip. `pos != target`.
pub(crate) fn greedy_step_toward(pos: Pos, target: Pos, rng: &mut RngStream) -> Direction {
    debug_assert_ne!(pos, target);
    let dx = target.x - pos.x;
    let dy = target.y - pos.y;
    let step_x = if dx.abs() > dy.abs() {
        true
    } else if dy.abs() > dx.abs() {
        false
    } else {
        rng.coin()
    };
    if step_x {
        if dx > 0 {
            Direction::Right
        } else {
            Direction::Left
        }
    } else if dy > 0 {
        Direction::Up
    } else {
        Direction::Down
    }
}
