//! The grid world and its synchronous round engine.
//!
//! A world is an `M x N` vertex grid plus a fixed set of agents. Each round
//! runs in two phases. Phase one asks every agent for a transition proposal
//! (new agent state, a move direction, optionally a claim on the task it is
//! standing on) computed purely from the previous round's snapshot. Phase two
//! settles conflicting task claims, applies the surviving agent states, and
//! executes all moves simultaneously. Agents whose claim loses keep their
//! prior state and stay put; moves that would leave the grid become stays.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::ConfigError;
use crate::hhta;
use crate::policy::{agent_transition, AgentState, Policy};
use crate::prop;
use crate::rng::{RngStream, TAG_ALPHA, TAG_CLAIM};
use crate::stats::TrialTrace;
use crate::task::{claim_task, VertexState};
use crate::Real;

pub type AgentId = u32;

/// Vertex coordinates. `(0, 0)` is a corner; x grows rightward, y upward.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn chebyshev(self, other: Pos) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn l1(self, other: Pos) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    /// Squared Euclidean distance, exact in integers.
    pub fn dist2(self, other: Pos) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// One-step move on the 4-neighborhood, or stay.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Direction {
    Right,
    Left,
    Up,
    Down,
    Stay,
}

impl Direction {
    pub fn offset(self) -> (i32, i32) {
        match self {
            Direction::Right => (1, 0),
            Direction::Left => (-1, 0),
            Direction::Up => (0, 1),
            Direction::Down => (0, -1),
            Direction::Stay => (0, 0),
        }
    }

    pub fn apply(self, p: Pos) -> Pos {
        let (dx, dy) = self.offset();
        Pos::new(p.x + dx, p.y + dy)
    }
}

/// Inclusive axis-aligned rectangle of vertices.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Rect {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl Rect {
    pub fn new(x0: i32, y0: i32, x1: i32, y1: i32) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn contains(&self, p: Pos) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn cell_count(&self) -> u32 {
        ((self.x1 - self.x0 + 1) * (self.y1 - self.y0 + 1)).max(0) as u32
    }

    /// Cells in row-major order (y outer, x inner).
    pub fn cells(&self) -> impl Iterator<Item = Pos> + '_ {
        let (x0, x1) = (self.x0, self.x1);
        (self.y0..=self.y1).flat_map(move |y| (x0..=x1).map(move |x| Pos::new(x, y)))
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]x[{}..{}]", self.x0, self.x1, self.y0, self.y1)
    }
}

/// An agent: stable id, current vertex, policy-specific state.
#[derive(Clone, PartialEq, Debug)]
pub struct Agent<F: Real = f64> {
    pub id: AgentId,
    pub pos: Pos,
    pub state: AgentState<F>,
}

/// Contents of one vertex: its state, the agents present, their states.
#[derive(Clone, PartialEq, Debug)]
pub struct LocalConfiguration<F: Real = f64> {
    pub vertex_state: VertexState,
    pub agents_here: Vec<AgentId>,
    pub state_of: BTreeMap<AgentId, AgentState<F>>,
}

/// Snapshot of every in-grid vertex within a Chebyshev radius of `center`,
/// keyed by offset from the center. `(0, 0)` is always present.
#[derive(Clone, PartialEq, Debug)]
pub struct LocalMapping<F: Real = f64> {
    pub center: Pos,
    pub radius: i32,
    pub entries: BTreeMap<(i32, i32), LocalConfiguration<F>>,
}

/// Phase-one output for one vertex: every present agent's proposed state,
/// move, and whether it claims the task at this vertex.
#[derive(Clone, PartialEq, Debug)]
pub struct TransitionProposal<F: Real = f64> {
    pub vertex: Pos,
    pub outcomes: Vec<AgentOutcome<F>>,
}

#[derive(Clone, PartialEq, Debug)]
pub struct AgentOutcome<F: Real = f64> {
    pub agent: AgentId,
    pub state: AgentState<F>,
    pub direction: Direction,
    pub claims_task: bool,
}

/// Vertex processing order for phase one. All orders produce identical
/// rounds because draws are keyed, not sequential; the non-default orders
/// exist so tests can prove that.
#[derive(Clone, Copy, Debug)]
pub enum ProcessingOrder {
    RowMajor,
    ReverseRowMajor,
    Shuffled(u64),
}

#[derive(Clone, PartialEq, Debug)]
pub struct GridWorld<F: Real = f64> {
    pub(crate) width: i32,
    pub(crate) height: i32,
    pub(crate) home: Rect,
    pub(crate) vertices: Vec<VertexState>,
    pub(crate) agents: Vec<Agent<F>>,
    /// (vertex index, agent id), sorted; rebuilt after every step.
    pub(crate) occupancy: Vec<(u32, AgentId)>,
    pub(crate) round: u64,
    pub(crate) total_residual: u64,
    /// Task-performing agents (ids below this are walkers, hhta agents or
    /// followers; ids at or above are stationary propagators).
    pub(crate) n_task_agents: u32,
}

impl<F: Real> GridWorld<F> {
    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn home(&self) -> Rect {
        self.home
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn total_residual(&self) -> u64 {
        self.total_residual
    }

    pub fn agents(&self) -> &[Agent<F>] {
        &self.agents
    }

    pub fn n_task_agents(&self) -> u32 {
        self.n_task_agents
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.x < self.width && p.y >= 0 && p.y < self.height
    }

    pub(crate) fn idx(&self, p: Pos) -> usize {
        debug_assert!(self.in_bounds(p));
        (p.y * self.width + p.x) as usize
    }

    pub fn vertex(&self, p: Pos) -> &VertexState {
        &self.vertices[self.idx(p)]
    }

    pub fn vertices(&self) -> impl Iterator<Item = (Pos, &VertexState)> {
        self.vertices.iter().enumerate().map(|(i, v)| {
            (
                Pos::new(i as i32 % self.width, i as i32 / self.width),
                v,
            )
        })
    }

    /// Agent ids at a vertex, ascending.
    pub fn agents_at(&self, p: Pos) -> &[(u32, AgentId)] {
        let v = self.idx(p) as u32;
        let lo = self.occupancy.partition_point(|&(i, _)| i < v);
        let hi = self.occupancy.partition_point(|&(i, _)| i <= v);
        &self.occupancy[lo..hi]
    }

    /// Agents within Chebyshev distance `radius` of `center`, scanning the
    /// box row-major; ids ascend within each cell.
    pub fn agents_within(&self, center: Pos, radius: i32) -> Vec<AgentId> {
        let mut out = Vec::new();
        for y in (center.y - radius).max(0)..=(center.y + radius).min(self.height - 1) {
            for x in (center.x - radius).max(0)..=(center.x + radius).min(self.width - 1) {
                for &(_, id) in self.agents_at(Pos::new(x, y)) {
                    out.push(id);
                }
            }
        }
        out
    }

    /// The stationary propagator assigned to `p`, if this is a PROP world.
    pub fn propagator_at(&self, p: Pos) -> Option<&prop::PropagatorState> {
        let id = self.n_task_agents as usize + self.idx(p);
        match self.agents.get(id).map(|a| &a.state) {
            Some(AgentState::Propagator(s)) => Some(s),
            _ => None,
        }
    }

    /// Local configurations of all in-grid vertices within Chebyshev
    /// distance `radius` of `v`, keyed by offset. Boundary clipping is
    /// silent; the center entry is always present.
    pub fn neighborhood(&self, v: Pos, radius: i32) -> LocalMapping<F> {
        debug_assert!(radius >= 0);
        let mut entries = BTreeMap::new();
        for b in -radius..=radius {
            for a in -radius..=radius {
                let w = Pos::new(v.x + a, v.y + b);
                if !self.in_bounds(w) {
                    continue;
                }
                let agents_here: Vec<AgentId> =
                    self.agents_at(w).iter().map(|&(_, id)| id).collect();
                let state_of = agents_here
                    .iter()
                    .map(|&id| (id, self.agents[id as usize].state.clone()))
                    .collect();
                entries.insert(
                    (a, b),
                    LocalConfiguration {
                        vertex_state: self.vertex(w).clone(),
                        agents_here,
                        state_of,
                    },
                );
            }
        }
        LocalMapping {
            center: v,
            radius,
            entries,
        }
    }

    /// Nearest task with positive residual demand within Chebyshev distance
    /// `radius` of `from` (nearness by Euclidean distance, exact ties broken
    /// uniformly). Returns the location and its current residual demand.
    pub fn nearest_open_task(
        &self,
        from: Pos,
        radius: i32,
        rng: &mut RngStream,
    ) -> Option<(Pos, u32)> {
        let mut best: Vec<(Pos, u32)> = Vec::new();
        let mut best_d2 = i64::MAX;
        for y in (from.y - radius).max(0)..=(from.y + radius).min(self.height - 1) {
            for x in (from.x - radius).max(0)..=(from.x + radius).min(self.width - 1) {
                let p = Pos::new(x, y);
                let v = self.vertex(p);
                if !v.is_open_task() {
                    continue;
                }
                let d2 = from.dist2(p);
                if d2 < best_d2 {
                    best_d2 = d2;
                    best.clear();
                    best.push((p, v.residual_demand));
                } else if d2 == best_d2 {
                    best.push((p, v.residual_demand));
                }
            }
        }
        match best.len() {
            0 => None,
            1 => Some(best[0]),
            n => Some(best[rng.index(n)]),
        }
    }

    /// Nearest home vertex by Chebyshev distance; ties go to the smallest
    /// row-major index.
    pub fn nearest_home_vertex(&self, from: Pos) -> Pos {
        let mut best = Pos::new(self.home.x0, self.home.y0);
        let mut best_d = i32::MAX;
        for p in self.home.cells() {
            let d = from.chebyshev(p);
            if d < best_d {
                best_d = d;
                best = p;
            }
        }
        best
    }

    pub(crate) fn rebuild_occupancy(&mut self) {
        self.occupancy.clear();
        for a in &self.agents {
            let idx = (a.pos.y * self.width + a.pos.x) as u32;
            self.occupancy.push((idx, a.id));
        }
        self.occupancy.sort_unstable();
    }

    fn recompute_total_residual(&mut self) {
        self.total_residual = self
            .vertices
            .iter()
            .map(|v| v.residual_demand as u64)
            .sum();
    }
}

/// Builds a round-0 world: vertices initialized from the task list, all
/// task-performing agents placed round-robin over the home cells in their
/// policy's starting state. PROP worlds additionally get one stationary
/// propagator on every vertex.
pub fn build_world<F: Real>(
    width: i32,
    height: i32,
    home: Rect,
    tasks: &[(Pos, u32)],
    policy: &Policy<F>,
    n_agents: u32,
) -> Result<GridWorld<F>, ConfigError> {
    if width < 1 || height < 1 {
        return Err(ConfigError::BadDimensions { width, height });
    }
    let grid = Rect::new(0, 0, width - 1, height - 1);
    if !grid.contains(Pos::new(home.x0, home.y0)) || !grid.contains(Pos::new(home.x1, home.y1)) || home.x0 > home.x1 || home.y0 > home.y1 {
        return Err(ConfigError::HomeOutsideGrid(home));
    }
    if n_agents == 0 {
        return Err(ConfigError::NoAgents);
    }

    let mut world = GridWorld {
        width,
        height,
        home,
        vertices: vec![VertexState::plain(); (width * height) as usize],
        agents: Vec::new(),
        occupancy: Vec::new(),
        round: 0,
        total_residual: 0,
        n_task_agents: n_agents,
    };

    for p in home.cells() {
        let idx = world.idx(p);
        world.vertices[idx].is_home = true;
    }
    for &(p, demand) in tasks {
        if !grid.contains(p) {
            return Err(ConfigError::TaskOutsideGrid(p));
        }
        if home.contains(p) {
            return Err(ConfigError::TaskOnHome(p));
        }
        if demand == 0 {
            return Err(ConfigError::ZeroDemand(p));
        }
        let idx = world.idx(p);
        if world.vertices[idx].is_task {
            return Err(ConfigError::DuplicateTask(p));
        }
        world.vertices[idx] = VertexState::task(p, demand);
    }

    let home_cells: Vec<Pos> = home.cells().collect();
    for id in 0..n_agents {
        let pos = home_cells[id as usize % home_cells.len()];
        world.agents.push(Agent {
            id,
            pos,
            state: policy.initial_state(pos),
        });
    }
    if let Policy::Prop(_) = policy {
        prop::deploy_propagators(&mut world);
    }

    world.rebuild_occupancy();
    world.recompute_total_residual();
    Ok(world)
}

/// Observation hook for trace-level checks; called after every round.
pub trait StepObserver<F: Real> {
    fn after_step(&mut self, world: &GridWorld<F>);
}

/// No-op observer.
pub struct NoObserver;

impl<F: Real> StepObserver<F> for NoObserver {
    fn after_step(&mut self, _world: &GridWorld<F>) {}
}

/// Advances the world by one synchronous round.
///
/// `counters` must have one slot per agent; message sends are accumulated
/// into the sender's slot.
pub fn step<F: Real>(
    world: &mut GridWorld<F>,
    policy: &Policy<F>,
    stream: &RngStream,
    counters: &mut [u64],
) {
    step_ordered(world, policy, stream, counters, ProcessingOrder::RowMajor)
}

/// `step` with an explicit phase-one processing order. Results are identical
/// for every order; see `ProcessingOrder`.
pub fn step_ordered<F: Real>(
    world: &mut GridWorld<F>,
    policy: &Policy<F>,
    stream: &RngStream,
    counters: &mut [u64],
    order: ProcessingOrder,
) {
    debug_assert_eq!(counters.len(), world.agents.len());
    let round = world.round + 1;

    // Message pre-pass: recruiting agents notify nearby home agents before
    // any transition runs.
    let inboxes = match policy {
        Policy::Hhta(p) => hhta::deliver_recruitment_messages(world, p, round, stream, counters),
        _ => BTreeMap::new(),
    };

    let proposals = phase_one(world, policy, stream, round, &inboxes, order);

    // Stationary propagators tick in place; they read only their own state
    // and their own vertex, both still untouched at this point.
    let mut deliveries = Vec::new();
    if let Policy::Prop(p) = policy {
        prop::tick_propagators(world, p, counters, &mut deliveries);
    }

    phase_two(world, stream, round, proposals);

    if !deliveries.is_empty() {
        prop::apply_deliveries(world, &deliveries);
    }

    world.round = round;
    world.rebuild_occupancy();
}

fn phase_one<F: Real>(
    world: &GridWorld<F>,
    policy: &Policy<F>,
    stream: &RngStream,
    round: u64,
    inboxes: &BTreeMap<AgentId, Vec<hhta::RecruitMessage>>,
    order: ProcessingOrder,
) -> Vec<TransitionProposal<F>> {
    // Occupied vertices, grouped. Occupancy is sorted, so groups come out in
    // row-major order before any reordering.
    let mut groups: Vec<(u32, Vec<AgentId>)> = Vec::new();
    for &(v, id) in &world.occupancy {
        match groups.last_mut() {
            Some((gv, ids)) if *gv == v => ids.push(id),
            _ => groups.push((v, vec![id])),
        }
    }
    match order {
        ProcessingOrder::RowMajor => {}
        ProcessingOrder::ReverseRowMajor => groups.reverse(),
        ProcessingOrder::Shuffled(seed) => {
            let mut rng = RngStream::new(seed);
            // Fisher-Yates.
            for i in (1..groups.len()).rev() {
                groups.swap(i, rng.index(i + 1));
            }
        }
    }

    let empty: Vec<hhta::RecruitMessage> = Vec::new();
    let mut proposals = Vec::with_capacity(groups.len());
    for (v, ids) in groups {
        let vertex = Pos::new(v as i32 % world.width, v as i32 / world.width);
        let mut outcomes = Vec::with_capacity(ids.len());
        for id in ids {
            let agent = &world.agents[id as usize];
            if matches!(agent.state, AgentState::Propagator(_)) {
                continue;
            }
            let inbox = inboxes.get(&id).unwrap_or(&empty);
            let mut rng = stream.keyed(&[TAG_ALPHA, round, id as u64]);
            outcomes.push(agent_transition(policy, world, agent, inbox, &mut rng));
        }
        if !outcomes.is_empty() {
            proposals.push(TransitionProposal { vertex, outcomes });
        }
    }
    proposals
}

fn phase_two<F: Real>(
    world: &mut GridWorld<F>,
    stream: &RngStream,
    round: u64,
    proposals: Vec<TransitionProposal<F>>,
) {
    for proposal in proposals {
        let vidx = world.idx(proposal.vertex);

        // Settle claims: at most `residual_demand` of the claimants win.
        let claimants: Vec<AgentId> = proposal
            .outcomes
            .iter()
            .filter(|o| o.claims_task)
            .map(|o| o.agent)
            .collect();
        let mut winners: Vec<AgentId> = Vec::new();
        if !claimants.is_empty() {
            let rd = world.vertices[vidx].residual_demand;
            let mut rng = stream.keyed(&[TAG_CLAIM, round, vidx as u64]);
            winners = claim_task(&claimants, rd, &mut rng);
            world.vertices[vidx].residual_demand -= winners.len() as u32;
            world.total_residual -= winners.len() as u64;
        }

        for outcome in proposal.outcomes {
            let accepted = !outcome.claims_task || winners.binary_search(&outcome.agent).is_ok();
            let agent = &mut world.agents[outcome.agent as usize];
            let dir = if accepted {
                agent.state = outcome.state;
                outcome.direction
            } else {
                // Rejected claimants keep their prior state and stay.
                Direction::Stay
            };
            let next = dir.apply(agent.pos);
            if next.x >= 0 && next.x < world.width && next.y >= 0 && next.y < world.height {
                agent.pos = next;
            }
        }
    }
}

/// Runs rounds until the total residual demand reaches zero or `max_rounds`
/// elapse. The trace records the residual series (index = round), per-agent
/// message counts, and the completion round if reached.
pub fn run_trial<F: Real>(
    world: &mut GridWorld<F>,
    policy: &Policy<F>,
    stream: &RngStream,
    max_rounds: u64,
) -> TrialTrace {
    run_trial_observed(world, policy, stream, max_rounds, &mut NoObserver)
}

pub fn run_trial_observed<F: Real, O: StepObserver<F>>(
    world: &mut GridWorld<F>,
    policy: &Policy<F>,
    stream: &RngStream,
    max_rounds: u64,
    observer: &mut O,
) -> TrialTrace {
    assert!(max_rounds >= 1, "max_rounds must be at least 1");
    let mut counters = vec![0u64; world.agents.len()];
    let mut series = Vec::with_capacity(64);
    series.push(world.total_residual);

    let mut completion = if world.total_residual == 0 {
        Some(0)
    } else {
        None
    };
    while completion.is_none() && world.round < max_rounds {
        step(world, policy, stream, &mut counters);
        series.push(world.total_residual);
        observer.after_step(world);
        if world.total_residual == 0 {
            completion = Some(world.round);
        }
    }

    TrialTrace {
        residual_series: series,
        message_counts: counters,
        n_task_agents: world.n_task_agents,
        n_propagators: world.agents.len() as u32 - world.n_task_agents,
        completion_round: completion,
        timeout: completion.is_none(),
        fingerprint: format!(
            "{}|{}x{}|agents={}|seed={}",
            policy.describe(),
            world.width,
            world.height,
            world.n_task_agents,
            stream.seed()
        ),
        seed: stream.seed(),
    }
}
