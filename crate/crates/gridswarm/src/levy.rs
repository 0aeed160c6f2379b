//! Levy-flight walking: heavy-tailed leg lengths, uniform headings, and a
//! greedy 4-neighborhood discretization of the continuous heading.

use crate::grid::{Direction, Pos};
use crate::num::{from_u32, real, Real};
use crate::rng::RngStream;

/// Leg-length distribution: density proportional to `x^-mu` on
/// `[1, max_leg]`. The default exponent is 2; `max_leg` is set to `M + N`
/// so a single leg can span the grid but no more.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct LevyParams<F: Real = f64> {
    pub mu: F,
    pub max_leg: F,
}

impl<F: Real> LevyParams<F> {
    pub fn new(mu: F, max_leg: F) -> Self {
        debug_assert!(mu > F::one());
        debug_assert!(max_leg > F::one());
        Self { mu, max_leg }
    }

    pub fn for_grid(mu: F, width: i32, height: i32) -> Self {
        Self::new(mu, from_u32((width + height).max(2) as u32))
    }
}

/// One walk leg: a heading, the point it started from, how far it should
/// travel and how many unit steps it has already spent.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct WalkState<F: Real = f64> {
    pub angle: F,
    pub starting_point: Pos,
    pub travel_distance: F,
    pub progress: F,
}

impl<F: Real> WalkState<F> {
    /// Sample a fresh leg starting at `pos`.
    pub fn fresh(pos: Pos, params: &LevyParams<F>, rng: &mut RngStream) -> Self {
        let (angle, travel_distance) = sample_leg(params, rng);
        Self {
            angle,
            starting_point: pos,
            travel_distance,
            progress: F::zero(),
        }
    }

    /// A spent sentinel leg; the first `next_step` call resamples.
    pub fn exhausted(pos: Pos) -> Self {
        Self {
            angle: F::zero(),
            starting_point: pos,
            travel_distance: F::one(),
            progress: F::one(),
        }
    }
}

/// Draws `(angle, travel_distance)`: the angle uniform in `[0, 2*pi)` and the
/// distance by inverse-CDF from the truncated power law.
pub fn sample_leg<F: Real>(params: &LevyParams<F>, rng: &mut RngStream) -> (F, F) {
    let angle = rng.unit::<F>() * F::TAU();
    let one = F::one();
    // CDF on [1, B]: (1 - x^(1-mu)) / (1 - B^(1-mu)).
    let tail = one - params.mu;
    let u = rng.unit::<F>();
    let scale = one - params.max_leg.powf(tail);
    let dist = (one - u * scale).powf(one / tail);
    (angle, dist.min(params.max_leg).max(one))
}

/// Advances the walk by one unit step from `pos`.
///
/// If the current leg is spent a new one is sampled first (anchored at
/// `pos`). The returned direction is the axis step that most reduces the
/// distance to the leg's endpoint; exact ties are broken by a coin flip.
/// Never returns `Stay`.
pub fn next_step<F: Real>(
    walk: &mut WalkState<F>,
    pos: Pos,
    params: &LevyParams<F>,
    rng: &mut RngStream,
) -> Direction {
    if walk.progress >= walk.travel_distance {
        *walk = WalkState::fresh(pos, params, rng);
    }
    let ex = real::<F>(walk.starting_point.x as f64) + walk.travel_distance * walk.angle.cos();
    let ey = real::<F>(walk.starting_point.y as f64) + walk.travel_distance * walk.angle.sin();
    let dx = ex - real::<F>(pos.x as f64);
    let dy = ey - real::<F>(pos.y as f64);
    walk.progress += F::one();

    let step_x = if dx.abs() > dy.abs() {
        true
    } else if dy.abs() > dx.abs() {
        false
    } else {
        rng.coin()
    };
    if step_x {
        if dx >= F::zero() {
            Direction::Right
        } else {
            Direction::Left
        }
    } else if dy >= F::zero() {
        Direction::Up
    } else {
        Direction::Down
    }
}
