//! Distributional checks on the levy walk: leg lengths against the
//! closed-form truncated power law, and super-diffusive spreading against a
//! simple random walk.

use gridswarm::grid::{Direction, Pos};
use gridswarm::levy::{next_step, sample_leg, LevyParams, WalkState};
use gridswarm::rng::RngStream;

/// Complement CDF of the truncated power law with density ~ x^-mu on [1, B].
fn model_ccdf(x: f64, mu: f64, b: f64) -> f64 {
    let tail = 1.0 - mu;
    ((x.powf(tail) - b.powf(tail)) / (1.0 - b.powf(tail))).clamp(0.0, 1.0)
}

#[test]
fn leg_lengths_match_truncated_power_law() {
    let params = LevyParams::new(2.0f64, 100.0);
    let mut rng = RngStream::new(314);
    let n = 100_000;
    let mut legs: Vec<f64> = (0..n).map(|_| sample_leg(&params, &mut rng).1).collect();
    legs.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Kolmogorov-Smirnov distance between the empirical CCDF and the model.
    let mut ks: f64 = 0.0;
    for (i, &x) in legs.iter().enumerate() {
        let emp_hi = 1.0 - i as f64 / n as f64;
        let emp_lo = 1.0 - (i + 1) as f64 / n as f64;
        let m = model_ccdf(x, 2.0, 100.0);
        ks = ks.max((m - emp_hi).abs()).max((m - emp_lo).abs());
    }
    assert!(ks < 0.02, "KS distance {ks} too large");
}

fn msd_at<FStep>(mut step_fn: FStep, walkers: usize, checkpoints: &[u64]) -> Vec<f64>
where
    FStep: FnMut(usize, Pos, &mut RngStream) -> Direction,
{
    let horizon = *checkpoints.last().unwrap();
    let mut sums = vec![0.0; checkpoints.len()];
    for w in 0..walkers {
        let mut rng = RngStream::new(1_000 + w as u64);
        let mut pos = Pos::new(0, 0);
        let mut next_cp = 0;
        for t in 1..=horizon {
            let dir = step_fn(w, pos, &mut rng);
            pos = dir.apply(pos);
            if next_cp < checkpoints.len() && t == checkpoints[next_cp] {
                sums[next_cp] += pos.dist2(Pos::new(0, 0)) as f64;
                next_cp += 1;
            }
        }
    }
    sums.iter().map(|s| s / walkers as f64).collect()
}

#[test]
fn levy_walk_is_superdiffusive_against_simple_walk_oracle() {
    let params = LevyParams::new(2.0f64, 100.0);
    let walkers = 300;
    let checkpoints = [100u64, 10_000];

    let mut walks: Vec<WalkState<f64>> = (0..walkers)
        .map(|_| WalkState::exhausted(Pos::new(0, 0)))
        .collect();
    let levy_msd = msd_at(
        |w, pos, rng| next_step(&mut walks[w], pos, &params, rng),
        walkers,
        &checkpoints,
    );

    // Oracle: a plain uniform-direction walk, diffusive by construction.
    let srw_msd = msd_at(
        |_, _, rng| match rng.index(4) {
            0 => Direction::Right,
            1 => Direction::Left,
            2 => Direction::Up,
            _ => Direction::Down,
        },
        walkers,
        &checkpoints,
    );

    // The simple walk's MSD grows linearly: MSD(t) / t stays near 1.
    let srw_slope_100 = srw_msd[0] / 100.0;
    let srw_slope_10k = srw_msd[1] / 10_000.0;
    assert!((srw_slope_100 - 1.0).abs() < 0.3, "oracle broke: {srw_slope_100}");
    assert!((srw_slope_10k - 1.0).abs() < 0.3, "oracle broke: {srw_slope_10k}");

    // The levy walk spreads super-linearly: MSD / t keeps growing and ends
    // far above the oracle.
    let levy_slope_100 = levy_msd[0] / 100.0;
    let levy_slope_10k = levy_msd[1] / 10_000.0;
    assert!(
        levy_slope_10k > 2.0 * levy_slope_100,
        "MSD/t should grow: {levy_slope_100} -> {levy_slope_10k}"
    );
    assert!(
        levy_msd[1] > 5.0 * srw_msd[1],
        "levy MSD {} vs srw {}",
        levy_msd[1],
        srw_msd[1]
    );
}
