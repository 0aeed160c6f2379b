use crate::grid::{Pos, Rect};

/// World and parameter construction errors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("grid dimensions must be at least 1x1 (got {width}x{height})")]
    BadDimensions { width: i32, height: i32 },
    #[error("home rectangle {0} is not inside the grid")]
    HomeOutsideGrid(Rect),
    #[error("task at {0} lies outside the grid")]
    TaskOutsideGrid(Pos),
    #[error("task at {0} overlaps the home area")]
    TaskOnHome(Pos),
    #[error("duplicate task location {0}")]
    DuplicateTask(Pos),
    #[error("task at {0} has zero demand")]
    ZeroDemand(Pos),
    #[error("cannot split total demand {total} across {tasks} tasks")]
    DemandBelowTaskCount { total: u32, tasks: u32 },
    #[error("demand vector must not be empty")]
    EmptyDemandVector,
    #[error("{tasks} tasks requested but only {available} non-home vertices exist")]
    TooManyTasks { tasks: u32, available: u32 },
    #[error("total demand {demand} exceeds the {agents} available agents")]
    DemandExceedsAgents { demand: u32, agents: u32 },
    #[error("exploring fraction must lie in [0, 1); got {0} (the harness maps 1.0 to a certain entry)")]
    SingularExploreFraction(f64),
    #[error("probability out of range: {name} = {value}")]
    BadProbability { name: &'static str, value: f64 },
    #[error("levy exponent must exceed 1 (got {0})")]
    BadLevyExponent(f64),
    #[error("propagation timeout must be at least 1")]
    ZeroPropagationTimeout,
    #[error("propagation radius must be non-negative (got {0})")]
    NegativePropagationRadius(f64),
    #[error("at least one agent is required")]
    NoAgents,
}
