//! House-hunting task allocation.
//!
//! Agents cycle through four core states. Home agents idle in the nest and
//! listen for recruitment messages. Exploring agents levy-walk the arena;
//! when one senses an open task it walks over and, on arrival, either
//! commits (claiming the task) or turns Recruiting and carries the news
//! home. Recruiters at the nest message nearby Home agents each round and
//! eventually commit to their own task with probability `1/rd`. Committed
//! agents travel to their task, claim it, and stay.
//!
//! The Home/Exploring exchange is tuned so that a `P_e` fraction of the
//! non-committed swarm explores: entry happens at rate `L*P_e/(1-P_e)` and
//! exit at rate `L`, with `L = 1/(M+N)` giving legs enough time to cross
//! the grid. An agent that draws the exit transitions to Home immediately
//! and walks back; it keeps sensing tasks (and can be messaged) on the way.

use std::collections::BTreeMap;

use crate::error::ConfigError;
use crate::grid::{AgentId, AgentOutcome, Direction, GridWorld, Pos};
use crate::levy::{next_step, LevyParams, WalkState};
use crate::num::{from_u32, real, Real};
use crate::policy::{greedy_step_toward, AgentState};
use crate::rng::{RngStream, TAG_MESSAGE};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CoreState {
    Home,
    Exploring,
    Recruiting,
    Committed,
}

/// A task an agent remembers: where it is and the residual demand observed
/// when the memory was formed. The value can go stale; it is only ever used
/// for recruitment odds, never for claiming.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TaskMemory {
    pub loc: Pos,
    pub remembered_rd: u32,
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct RecruitMessage {
    pub task: TaskMemory,
    pub sender: AgentId,
}

#[derive(Clone, PartialEq, Debug)]
pub struct HhtaAgentState<F: Real = f64> {
    pub core: CoreState,
    pub walk: WalkState<F>,
    pub destination_task: Option<TaskMemory>,
    pub home_destination: Option<Pos>,
    pub recruitment_task: Option<TaskMemory>,
    pub committed_task: Option<Pos>,
}

impl<F: Real> HhtaAgentState<F> {
    pub fn home(pos: Pos) -> Self {
        Self {
            core: CoreState::Home,
            walk: WalkState::exhausted(pos),
            destination_task: None,
            home_destination: None,
            recruitment_task: None,
            committed_task: None,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct HhtaParams<F: Real = f64> {
    pub p_commit: F,
    pub p_explore: F,
    pub message_rate: F,
    /// Home -> Exploring probability per round, precomputed from `p_explore`.
    pub entry_probability: F,
    /// Exploring -> Home probability per round; `L = 1/(M+N)`.
    pub return_probability: F,
    pub influence_radius: i32,
    pub levy: LevyParams<F>,
}

impl<F: Real> HhtaParams<F> {
    pub fn new(
        width: i32,
        height: i32,
        p_commit: f64,
        p_explore: f64,
        message_rate: f64,
        influence_radius: i32,
        mu: f64,
    ) -> Result<Self, ConfigError> {
        for (name, value) in [
            ("P_c", p_commit),
            ("P_e", p_explore),
            ("r_m", message_rate),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::BadProbability { name, value });
            }
        }
        if mu <= 1.0 {
            return Err(ConfigError::BadLevyExponent(mu));
        }
        let l: F = F::one() / from_u32((width + height) as u32);
        // The entry formula is singular at p_explore = 1; an all-exploring
        // swarm maps to certain entry.
        let entry = if p_explore == 1.0 {
            F::one()
        } else {
            explore_entry_probability(l, real(p_explore))?
        };
        Ok(Self {
            p_commit: real(p_commit),
            p_explore: real(p_explore),
            message_rate: real(message_rate),
            entry_probability: entry,
            return_probability: l,
            influence_radius,
            levy: LevyParams::for_grid(real(mu), width, height),
        })
    }
}

/// Raw Home -> Exploring rate `L * P_e / (1 - P_e)`, before clamping.
///
/// Satisfies the balance identity `rate * (1 - P_e) = L * P_e` exactly, so
/// the stationary exploring fraction of the Home/Exploring exchange is
/// `P_e`.
pub fn explore_entry_rate<F: Real>(l: F, p_explore: F) -> F {
    l * p_explore / (F::one() - p_explore)
}

/// Per-round Home -> Exploring probability, clamped to [0, 1].
/// Errors when `p_explore` is outside [0, 1).
pub fn explore_entry_probability<F: Real>(l: F, p_explore: F) -> Result<F, ConfigError> {
    if p_explore < F::zero() || p_explore >= F::one() {
        return Err(ConfigError::SingularExploreFraction(
            p_explore.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(explore_entry_rate(l, p_explore).min(F::one()))
}

/// Chance of committing on arrival at a task with residual demand `rd`:
/// `max(P_c, 1/rd)`. Low residual demand forces commitment.
pub fn commit_probability<F: Real>(p_commit: F, rd: u32) -> F {
    assert!(rd >= 1, "commit probability undefined for satisfied tasks");
    p_commit.max(F::one() / from_u32(rd))
}

/// Chance that a home agent hears at least one of `recruiters` independent
/// per-round messages: `1 - (1 - r_m)^R`. Diagnostic only; the engine draws
/// the underlying Bernoullis instead.
pub fn receipt_probability<F: Real>(message_rate: F, recruiters: u32) -> F {
    F::one() - (F::one() - message_rate).powi(recruiters as i32)
}

/// Alternative closed form for the receipt chance, as a regularized
/// incomplete beta tail `I_{1-r_m}(R-1, 2)`. Kept as a diagnostic; it does
/// not agree with the per-pair Bernoulli mechanism realized here (see
/// `receipt_probability`).
pub fn receipt_probability_beta_form<F: Real>(message_rate: F, recruiters: u32) -> F {
    if recruiters <= 1 {
        return F::one();
    }
    crate::special::beta_reg(
        F::one() - message_rate,
        from_u32(recruiters - 1),
        real(2.0),
    )
}

/// Message pre-pass, run once per round before any transition: every
/// recruiter sitting at the nest rolls an independent `r_m` Bernoulli per
/// agent in its influence radius. Rolls that hit a Home agent are delivered
/// and counted against the sender; others are dropped uncounted.
pub(crate) fn deliver_recruitment_messages<F: Real>(
    world: &GridWorld<F>,
    params: &HhtaParams<F>,
    round: u64,
    stream: &RngStream,
    counters: &mut [u64],
) -> BTreeMap<AgentId, Vec<RecruitMessage>> {
    let mut inboxes: BTreeMap<AgentId, Vec<RecruitMessage>> = BTreeMap::new();
    for agent in world.agents() {
        let AgentState::Hhta(s) = &agent.state else {
            continue;
        };
        if s.core != CoreState::Recruiting || s.home_destination.is_some() {
            continue;
        }
        debug_assert!(world.home().contains(agent.pos));
        let task = s.recruitment_task.expect("recruiter carries a task");
        for target in world.agents_within(agent.pos, params.influence_radius) {
            if target == agent.id {
                continue;
            }
            let AgentState::Hhta(ts) = &world.agents()[target as usize].state else {
                continue;
            };
            if ts.core != CoreState::Home {
                continue;
            }
            let mut rng = stream.keyed(&[TAG_MESSAGE, round, agent.id as u64, target as u64]);
            if rng.chance(params.message_rate) {
                counters[agent.id as usize] += 1;
                inboxes.entry(target).or_default().push(RecruitMessage {
                    task,
                    sender: agent.id,
                });
            }
        }
    }
    inboxes
}

pub(crate) fn transition<F: Real>(
    p: &HhtaParams<F>,
    world: &GridWorld<F>,
    id: AgentId,
    pos: Pos,
    s: &HhtaAgentState<F>,
    inbox: &[RecruitMessage],
    rng: &mut RngStream,
) -> AgentOutcome<F> {
    let mut next = s.clone();
    match s.core {
        CoreState::Committed => {
            if next.committed_task.is_some() {
                return outcome(id, next, Direction::Stay, false);
            }
            let dest = next
                .destination_task
                .expect("travelling committed agent has a destination");
            if pos == dest.loc {
                arrive_at_task(p, world, id, pos, next, rng)
            } else {
                let dir = greedy_step_toward(pos, dest.loc, rng);
                outcome(id, next, dir, false)
            }
        }
        CoreState::Exploring => {
            if next.destination_task.is_none() {
                if let Some((loc, rd)) = world.nearest_open_task(pos, p.influence_radius, rng) {
                    next.destination_task = Some(TaskMemory {
                        loc,
                        remembered_rd: rd,
                    });
                }
            }
            if let Some(dest) = next.destination_task {
                if pos == dest.loc {
                    return arrive_at_task(p, world, id, pos, next, rng);
                }
                let dir = greedy_step_toward(pos, dest.loc, rng);
                return outcome(id, next, dir, false);
            }
            if rng.chance(p.return_probability) {
                next.core = CoreState::Home;
                let home = world.nearest_home_vertex(pos);
                if home == pos {
                    return outcome(id, next, Direction::Stay, false);
                }
                next.home_destination = Some(home);
                return step_home(world, id, pos, next, rng);
            }
            let dir = next_step(&mut next.walk, pos, &p.levy, rng);
            outcome(id, next, dir, false)
        }
        CoreState::Home => {
            if rng.chance(p.entry_probability) {
                next.core = CoreState::Exploring;
                next.home_destination = None;
                next.walk = WalkState::fresh(pos, &p.levy, rng);
                let dir = next_step(&mut next.walk, pos, &p.levy, rng);
                return outcome(id, next, dir, false);
            }
            // Returning agents keep their eyes open on the way in.
            if next.home_destination.is_some() {
                if let Some((loc, rd)) = world.nearest_open_task(pos, p.influence_radius, rng) {
                    next.core = CoreState::Exploring;
                    next.home_destination = None;
                    next.destination_task = Some(TaskMemory {
                        loc,
                        remembered_rd: rd,
                    });
                    if loc == pos {
                        return arrive_at_task(p, world, id, pos, next, rng);
                    }
                    let dir = greedy_step_toward(pos, loc, rng);
                    return outcome(id, next, dir, false);
                }
            }
            if !inbox.is_empty() {
                let msg = inbox[if inbox.len() == 1 { 0 } else { rng.index(inbox.len()) }];
                if rng.chance(p.p_commit) {
                    next.core = CoreState::Committed;
                    next.destination_task = Some(msg.task);
                    next.home_destination = None;
                    let dir = if msg.task.loc == pos {
                        Direction::Stay
                    } else {
                        greedy_step_toward(pos, msg.task.loc, rng)
                    };
                    return outcome(id, next, dir, false);
                }
                next.core = CoreState::Recruiting;
                next.recruitment_task = Some(msg.task);
                if next.home_destination.is_some() {
                    return step_home(world, id, pos, next, rng);
                }
                return outcome(id, next, Direction::Stay, false);
            }
            if next.home_destination.is_some() {
                return step_home(world, id, pos, next, rng);
            }
            outcome(id, next, Direction::Stay, false)
        }
        CoreState::Recruiting => {
            if next.home_destination.is_some() {
                return step_home(world, id, pos, next, rng);
            }
            let task = next.recruitment_task.expect("recruiter carries a task");
            debug_assert!(task.remembered_rd >= 1);
            if rng.chance(F::one() / from_u32(task.remembered_rd)) {
                next.core = CoreState::Committed;
                next.destination_task = Some(task);
                next.recruitment_task = None;
            }
            outcome(id, next, Direction::Stay, false)
        }
    }
}

/// Shared arrival handling for an agent standing on the task it was heading
/// to. A satisfied task sends the agent back to exploring on a fresh leg;
/// otherwise the commit roll either claims the task or turns the agent into
/// a recruiter bound for the nest.
fn arrive_at_task<F: Real>(
    p: &HhtaParams<F>,
    world: &GridWorld<F>,
    id: AgentId,
    pos: Pos,
    mut next: HhtaAgentState<F>,
    rng: &mut RngStream,
) -> AgentOutcome<F> {
    let rd = world.vertex(pos).residual_demand;
    if rd == 0 {
        next.core = CoreState::Exploring;
        next.destination_task = None;
        next.committed_task = None;
        next.walk = WalkState::fresh(pos, &p.levy, rng);
        let dir = next_step(&mut next.walk, pos, &p.levy, rng);
        return outcome(id, next, dir, false);
    }
    if next.core == CoreState::Committed || rng.chance(commit_probability(p.p_commit, rd)) {
        next.core = CoreState::Committed;
        next.destination_task = None;
        next.committed_task = Some(pos);
        return outcome(id, next, Direction::Stay, true);
    }
    next.core = CoreState::Recruiting;
    next.recruitment_task = Some(TaskMemory {
        loc: pos,
        remembered_rd: rd,
    });
    next.destination_task = None;
    let home = world.nearest_home_vertex(pos);
    next.home_destination = Some(home);
    step_home(world, id, pos, next, rng)
}

/// One step toward the remembered home vertex; the destination clears as
/// soon as the landing cell is inside the nest.
fn step_home<F: Real>(
    world: &GridWorld<F>,
    id: AgentId,
    pos: Pos,
    mut next: HhtaAgentState<F>,
    rng: &mut RngStream,
) -> AgentOutcome<F> {
    let home = next.home_destination.expect("homing agent has a target");
    if home == pos {
        next.home_destination = None;
        return outcome(id, next, Direction::Stay, false);
    }
    let dir = greedy_step_toward(pos, home, rng);
    if world.home().contains(dir.apply(pos)) {
        next.home_destination = None;
    }
    outcome(id, next, dir, false)
}

fn outcome<F: Real>(
    id: AgentId,
    state: HhtaAgentState<F>,
    direction: Direction,
    claims_task: bool,
) -> AgentOutcome<F> {
    AgentOutcome {
        agent: id,
        state: AgentState::Hhta(state),
        direction,
        claims_task,
    }
}
