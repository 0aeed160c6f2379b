//! Task placement, demand bookkeeping, and the claim rule.

use rand::seq::index::sample;

use crate::error::ConfigError;
use crate::grid::{AgentId, Pos, Rect};
use crate::rng::RngStream;

/// Per-vertex state. `residual_demand` starts at `demand` and only ever
/// decreases as agents claim the task; a vertex is never both task and home.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VertexState {
    pub is_task: bool,
    pub demand: u32,
    pub residual_demand: u32,
    pub task_location: Option<Pos>,
    pub is_home: bool,
}

impl VertexState {
    pub fn plain() -> Self {
        Self {
            is_task: false,
            demand: 0,
            residual_demand: 0,
            task_location: None,
            is_home: false,
        }
    }

    pub fn task(loc: Pos, demand: u32) -> Self {
        Self {
            is_task: true,
            demand,
            residual_demand: demand,
            task_location: Some(loc),
            is_home: false,
        }
    }

    pub fn is_open_task(&self) -> bool {
        self.is_task && self.residual_demand > 0
    }
}

/// Demand structure of an experiment: how much total work there is and how
/// it splits across tasks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TaskSpec {
    pub total_demand: u32,
    pub demands: Vec<u32>,
}

impl TaskSpec {
    /// Near-equal split of `total` over `count` tasks.
    pub fn equal_split(total: u32, count: u32) -> Result<Self, ConfigError> {
        Ok(Self {
            total_demand: total,
            demands: split_demand(total, count)?,
        })
    }

    /// User-supplied demand vector.
    pub fn explicit(demands: Vec<u32>) -> Result<Self, ConfigError> {
        if demands.is_empty() {
            return Err(ConfigError::EmptyDemandVector);
        }
        if let Some(i) = demands.iter().position(|&d| d == 0) {
            return Err(ConfigError::ZeroDemand(Pos::new(i as i32, -1)));
        }
        Ok(Self {
            total_demand: demands.iter().sum(),
            demands,
        })
    }

    pub fn count(&self) -> u32 {
        self.demands.len() as u32
    }
}

/// Splits `total` into `count` parts, each at least 1, differing by at most
/// 1, with earlier entries taking the remainder.
pub fn split_demand(total: u32, count: u32) -> Result<Vec<u32>, ConfigError> {
    if count == 0 || total < count {
        return Err(ConfigError::DemandBelowTaskCount {
            total,
            tasks: count,
        });
    }
    let base = total / count;
    let rem = total % count;
    Ok((0..count)
        .map(|i| if i < rem { base + 1 } else { base })
        .collect())
}

/// Samples distinct non-home vertex locations for every task in `spec`,
/// uniformly over the grid, and pairs them with the demand vector.
pub fn place_tasks(
    rng: &mut RngStream,
    spec: &TaskSpec,
    width: i32,
    height: i32,
    home: Rect,
) -> Result<Vec<(Pos, u32)>, ConfigError> {
    let candidates: Vec<Pos> = Rect::new(0, 0, width - 1, height - 1)
        .cells()
        .filter(|p| !home.contains(*p))
        .collect();
    let count = spec.count() as usize;
    if count > candidates.len() {
        return Err(ConfigError::TooManyTasks {
            tasks: spec.count(),
            available: candidates.len() as u32,
        });
    }
    let picks = sample(rng, candidates.len(), count);
    Ok(picks
        .into_iter()
        .zip(spec.demands.iter())
        .map(|(i, &d)| (candidates[i], d))
        .collect())
}

/// The claim rule: of `claimants` trying to claim a task with residual
/// demand `rd`, exactly `min(claimants, rd)` win, chosen uniformly. Returns
/// winning ids in ascending order.
pub fn claim_task(claimants: &[AgentId], rd: u32, rng: &mut RngStream) -> Vec<AgentId> {
    if claimants.len() as u64 <= rd as u64 {
        let mut all = claimants.to_vec();
        all.sort_unstable();
        return all;
    }
    if rd == 0 {
        return Vec::new();
    }
    let picks = sample(rng, claimants.len(), rd as usize);
    let mut winners: Vec<AgentId> = picks.into_iter().map(|i| claimants[i]).collect();
    winners.sort_unstable();
    winners
}
