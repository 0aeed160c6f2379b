use gridswarm::grid::Rect;
use gridswarm::hhta::HhtaParams;
use gridswarm::policy::{Policy, RwParams};
use gridswarm::prop::PropParams;
use gridswarm::scenario::{Scenario, TaskLayout};
use gridswarm::task::TaskSpec;

pub const W: i32 = 50;
pub const H: i32 = 50;

pub fn home() -> Rect {
    Rect::new(24, 24, 26, 26)
}

pub fn rw() -> Policy<f64> {
    Policy::Rw(RwParams::new(2, 2.0, (W + H) as f64).unwrap())
}

pub fn hhta() -> Policy<f64> {
    Policy::Hhta(HhtaParams::new(W, H, 0.3, 2.0 / 3.0, 1.0 / 6.0, 2, 2.0).unwrap())
}

pub fn prop(d_p: f64, r_p: u32) -> Policy<f64> {
    Policy::Prop(PropParams::new(W, H, d_p, r_p, 2, 2.0).unwrap())
}

pub fn scenario(policy: Policy<f64>, agents: u32, tasks: u32, demand: u32) -> Scenario<f64> {
    Scenario {
        width: W,
        height: H,
        home: home(),
        agents,
        tasks: TaskLayout::Sampled(TaskSpec::equal_split(demand, tasks).unwrap()),
        policy,
    }
}
