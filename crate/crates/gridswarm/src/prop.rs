//! Propagation-based allocation.
//!
//! A stationary propagator sits on every vertex and gossips task knowledge:
//! the propagator at a task refreshes its entry from the vertex each round,
//! and every `r_p` rounds each propagator forwards whatever entries changed
//! since its last wave to its eight surrounding neighbors, but only to
//! neighbors within Euclidean distance `d_p` of the task in question.
//! Incoming values merge by minimum, since residual demand only falls.
//!
//! Mobile followers do the actual work: they claim any open task they sense
//! directly, and otherwise ask the propagator under their feet for known
//! tasks, drawing a travel target with probability proportional to
//! `rd / distance^2` (redrawn every round). With no information at all they
//! levy-walk.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::ConfigError;
use crate::grid::{AgentId, AgentOutcome, Direction, GridWorld, Pos};
use crate::levy::{next_step, LevyParams, WalkState};
use crate::num::{from_u32, real, Real};
use crate::policy::{greedy_step_toward, AgentState};
use crate::rng::RngStream;
use crate::task::VertexState;

#[derive(Clone, PartialEq, Debug)]
pub struct PropParams<F: Real = f64> {
    /// Maximum Euclidean distance a task's information may travel.
    pub max_propagation_radius: F,
    /// Rounds between gossip waves.
    pub propagation_timeout: u32,
    pub follower_influence_radius: i32,
    pub levy: LevyParams<F>,
}

impl<F: Real> PropParams<F> {
    pub fn new(
        width: i32,
        height: i32,
        max_propagation_radius: f64,
        propagation_timeout: u32,
        follower_influence_radius: i32,
        mu: f64,
    ) -> Result<Self, ConfigError> {
        if propagation_timeout == 0 {
            return Err(ConfigError::ZeroPropagationTimeout);
        }
        if !(max_propagation_radius >= 0.0) {
            return Err(ConfigError::NegativePropagationRadius(
                max_propagation_radius,
            ));
        }
        if mu <= 1.0 {
            return Err(ConfigError::BadLevyExponent(mu));
        }
        Ok(Self {
            max_propagation_radius: real(max_propagation_radius),
            propagation_timeout,
            follower_influence_radius,
            levy: LevyParams::for_grid(real(mu), width, height),
        })
    }
}

/// Stationary gossip node pinned to `assigned_vertex`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PropagatorState {
    pub assigned_vertex: Pos,
    /// Known task locations and the smallest residual demand heard so far.
    pub task_info: BTreeMap<Pos, u32>,
    /// Entries changed since the last wave.
    pub newly_updated: BTreeSet<Pos>,
    /// Rounds since the last wave; fires when it reaches the timeout.
    pub propagation_ctr: u32,
}

impl PropagatorState {
    pub fn new(assigned_vertex: Pos) -> Self {
        Self {
            assigned_vertex,
            task_info: BTreeMap::new(),
            newly_updated: BTreeSet::new(),
            propagation_ctr: 0,
        }
    }
}

/// Mobile task-performing agent of the propagation policy.
#[derive(Clone, PartialEq, Debug)]
pub struct FollowerState<F: Real = f64> {
    pub walk: WalkState<F>,
    pub destination_task: Option<Pos>,
    pub committed_task: Option<Pos>,
}

/// One gossip batch bound for the propagator at `to`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Delivery {
    pub to: Pos,
    pub entries: Vec<(Pos, u32)>,
}

/// Min-merges an incoming `(location, residual demand)` into `state`.
/// Returns true (and marks the entry fresh) when the stored value changed.
pub fn merge_task_info(state: &mut PropagatorState, loc: Pos, rd: u32) -> bool {
    let changed = match state.task_info.get(&loc) {
        Some(&old) => rd < old,
        None => true,
    };
    if changed {
        state.task_info.insert(loc, rd);
        state.newly_updated.insert(loc);
    }
    changed
}

/// The neighbors a wave may carry task `task` to: in-grid Chebyshev-1
/// neighbors of `assigned` whose Euclidean distance to the task is at most
/// `d_p`.
pub fn propagation_targets<F: Real>(
    assigned: Pos,
    task: Pos,
    d_p: F,
    width: i32,
    height: i32,
) -> Vec<Pos> {
    chebyshev1_neighbors(assigned, width, height)
        .filter(|n| within_radius(*n, task, d_p))
        .collect()
}

fn within_radius<F: Real>(v: Pos, task: Pos, d_p: F) -> bool {
    let d2: F = F::from_i64(v.dist2(task)).expect("distance representable");
    d2 <= d_p * d_p
}

fn chebyshev1_neighbors(p: Pos, width: i32, height: i32) -> impl Iterator<Item = Pos> {
    (-1..=1)
        .flat_map(move |dy| (-1..=1).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| !(dx == 0 && dy == 0))
        .map(move |(dx, dy)| Pos::new(p.x + dx, p.y + dy))
        .filter(move |n| n.x >= 0 && n.x < width && n.y >= 0 && n.y < height)
}

/// Travel-target distribution over known open tasks, weighted by residual
/// demand over squared distance. `entries` must be non-empty, hold positive
/// demands, and not contain `pos` itself.
pub fn task_choice_distribution<F: Real>(entries: &[(Pos, u32)], pos: Pos) -> Vec<F> {
    debug_assert!(!entries.is_empty());
    let weights: Vec<F> = entries
        .iter()
        .map(|&(loc, rd)| {
            debug_assert!(rd > 0);
            debug_assert_ne!(loc, pos);
            let d2: F = F::from_i64(pos.dist2(loc)).expect("distance representable");
            from_u32::<F>(rd) / d2
        })
        .collect();
    let total: F = weights.iter().copied().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Adds one propagator per vertex, ids continuing after the task agents.
/// Propagators start on their assigned vertices at round 0; if a deployment
/// march is to be charged, add `deployment_offset_rounds` to reported
/// completion times instead of simulating it.
pub(crate) fn deploy_propagators<F: Real>(world: &mut GridWorld<F>) {
    let base = world.agents.len() as AgentId;
    let (w, h) = (world.width, world.height);
    for y in 0..h {
        for x in 0..w {
            let pos = Pos::new(x, y);
            world.agents.push(crate::grid::Agent {
                id: base + (y * w + x) as AgentId,
                pos,
                state: AgentState::Propagator(PropagatorState::new(pos)),
            });
        }
    }
}

/// Rounds it takes the propagator swarm to march to its assigned vertices.
pub fn deployment_offset_rounds(width: i32, height: i32) -> u64 {
    ((width + height) / 2) as u64
}

/// Reported completion time for a trial, optionally charging the deployment
/// march.
pub fn reported_completion(engine_rounds: u64, width: i32, height: i32, charge_deployment: bool) -> u64 {
    if charge_deployment {
        engine_rounds + deployment_offset_rounds(width, height)
    } else {
        engine_rounds
    }
}

/// Advances every propagator by one round, in place.
///
/// Must run after mobile proposals are collected (followers read propagator
/// state) and before this round's claims apply (propagators read their own
/// vertex's residual demand). Wave sends are buffered as deliveries and
/// merged after the move phase, so they become visible next round.
pub(crate) fn tick_propagators<F: Real>(
    world: &mut GridWorld<F>,
    params: &PropParams<F>,
    counters: &mut [u64],
    deliveries: &mut Vec<Delivery>,
) {
    let (width, height) = (world.width, world.height);
    for i in world.n_task_agents as usize..world.agents.len() {
        let pos = world.agents[i].pos;
        let vertex_idx = (pos.y * width + pos.x) as usize;
        let vertex: &VertexState = &world.vertices[vertex_idx];
        let (is_task, rd) = (vertex.is_task, vertex.residual_demand);
        let AgentState::Propagator(state) = &mut world.agents[i].state else {
            unreachable!("ids past n_task_agents are propagators");
        };
        debug_assert_eq!(state.assigned_vertex, pos);
        if is_task {
            merge_task_info(state, pos, rd);
        }
        state.propagation_ctr += 1;
        if state.propagation_ctr >= params.propagation_timeout {
            if !state.newly_updated.is_empty() {
                for neighbor in chebyshev1_neighbors(pos, width, height) {
                    let entries: Vec<(Pos, u32)> = state
                        .newly_updated
                        .iter()
                        .filter(|task| {
                            within_radius(neighbor, **task, params.max_propagation_radius)
                        })
                        .map(|task| (*task, state.task_info[task]))
                        .collect();
                    if !entries.is_empty() {
                        counters[i] += 1;
                        deliveries.push(Delivery {
                            to: neighbor,
                            entries,
                        });
                    }
                }
                state.newly_updated.clear();
            }
            state.propagation_ctr = 0;
        }
    }
}

/// Merges buffered wave contents into their recipients.
pub(crate) fn apply_deliveries<F: Real>(world: &mut GridWorld<F>, deliveries: &[Delivery]) {
    let width = world.width;
    let base = world.n_task_agents as usize;
    for d in deliveries {
        let idx = base + (d.to.y * width + d.to.x) as usize;
        let AgentState::Propagator(state) = &mut world.agents[idx].state else {
            unreachable!("delivery target is a propagator");
        };
        for &(loc, rd) in &d.entries {
            merge_task_info(state, loc, rd);
        }
    }
}

pub(crate) fn follower_transition<F: Real>(
    p: &PropParams<F>,
    world: &GridWorld<F>,
    id: AgentId,
    pos: Pos,
    s: &FollowerState<F>,
    rng: &mut RngStream,
) -> AgentOutcome<F> {
    let mut next = s.clone();
    if next.committed_task.is_some() {
        return outcome(id, next, Direction::Stay, false);
    }
    if let Some(dest) = next.destination_task {
        // Stale-destination check straight from the follower pseudocode: the
        // destination's live residual demand is peeked even from afar.
        if world.vertex(dest).residual_demand == 0 {
            next.destination_task = None;
            return outcome(id, next, Direction::Stay, false);
        }
        if pos == dest {
            next.destination_task = None;
            next.committed_task = Some(pos);
            return outcome(id, next, Direction::Stay, true);
        }
        let dir = greedy_step_toward(pos, dest, rng);
        return outcome(id, next, dir, false);
    }
    if let Some((loc, _rd)) = world.nearest_open_task(pos, p.follower_influence_radius, rng) {
        next.destination_task = Some(loc);
        let dir = if loc == pos {
            Direction::Stay
        } else {
            greedy_step_toward(pos, loc, rng)
        };
        return outcome(id, next, dir, false);
    }
    let info = world
        .propagator_at(pos)
        .expect("one propagator per vertex in propagation worlds");
    let entries: Vec<(Pos, u32)> = info
        .task_info
        .iter()
        .filter(|&(loc, &rd)| rd > 0 && *loc != pos)
        .map(|(&loc, &rd)| (loc, rd))
        .collect();
    if !entries.is_empty() {
        // No destination is stored; the target is redrawn every round.
        let probs = task_choice_distribution::<F>(&entries, pos);
        let target = entries[rng.weighted_index(&probs)].0;
        let dir = greedy_step_toward(pos, target, rng);
        return outcome(id, next, dir, false);
    }
    let dir = next_step(&mut next.walk, pos, &p.levy, rng);
    outcome(id, next, dir, false)
}

fn outcome<F: Real>(
    id: AgentId,
    state: FollowerState<F>,
    direction: Direction,
    claims_task: bool,
) -> AgentOutcome<F> {
    AgentOutcome {
        agent: id,
        state: AgentState::Follower(state),
        direction,
        claims_task,
    }
}
