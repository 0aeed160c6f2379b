//! Turn-key trial assembly: dimensions, home area, demand structure and a
//! policy in; a seeded, ready-to-run world out.

use crate::error::ConfigError;
use crate::grid::{build_world, GridWorld, Rect};
use crate::policy::Policy;
use crate::rng::{RngStream, TAG_PLACEMENT};
use crate::task::{place_tasks, TaskSpec};
use crate::Real;

#[derive(Clone, PartialEq, Debug)]
pub enum TaskLayout {
    /// Locations sampled uniformly over non-home vertices per trial.
    Sampled(TaskSpec),
    /// Fixed locations and demands.
    Explicit(Vec<(crate::grid::Pos, u32)>),
}

#[derive(Clone, PartialEq, Debug)]
pub struct Scenario<F: Real = f64> {
    pub width: i32,
    pub height: i32,
    pub home: Rect,
    pub agents: u32,
    pub tasks: TaskLayout,
    pub policy: Policy<F>,
}

impl<F: Real> Scenario<F> {
    /// Builds the round-0 world for `seed`. The placement draw and every
    /// in-trial draw derive from the same master seed, so a (scenario, seed)
    /// pair pins the whole trial.
    pub fn realize(&self, seed: u64) -> Result<(GridWorld<F>, RngStream), ConfigError> {
        let stream = RngStream::new(seed);
        let tasks = match &self.tasks {
            TaskLayout::Explicit(tasks) => tasks.clone(),
            TaskLayout::Sampled(spec) => {
                if spec.total_demand > self.agents {
                    return Err(ConfigError::DemandExceedsAgents {
                        demand: spec.total_demand,
                        agents: self.agents,
                    });
                }
                let mut rng = stream.keyed(&[TAG_PLACEMENT]);
                place_tasks(&mut rng, spec, self.width, self.height, self.home)?
            }
        };
        let world = build_world(
            self.width,
            self.height,
            self.home,
            &tasks,
            &self.policy,
            self.agents,
        )?;
        Ok((world, stream))
    }
}
