//! Trial traces, summary statistics, and Welch's unequal-variance t-test.

use crate::num::{from_usize, real, Real};
use crate::special::student_t_two_sided_p;

/// Record of one trial: residual demand per round (index = round), message
/// counts per agent id, and the completion round if the demand drained.
#[derive(Clone, PartialEq, Debug)]
pub struct TrialTrace {
    pub residual_series: Vec<u64>,
    pub message_counts: Vec<u64>,
    pub n_task_agents: u32,
    pub n_propagators: u32,
    pub completion_round: Option<u64>,
    pub timeout: bool,
    pub fingerprint: String,
    pub seed: u64,
}

/// Agent population a message metric is normalized by.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AgentClass {
    TaskAgents,
    Propagators,
}

/// First round at which the residual series hits zero, if any.
pub fn completion_time(trace: &TrialTrace) -> Option<u64> {
    trace
        .residual_series
        .iter()
        .position(|&r| r == 0)
        .map(|i| i as u64)
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct MessageRate<F: Real = f64> {
    pub per_agent_per_round: F,
    /// Set when no rounds elapsed, in which case the rate is reported as 0.
    pub degenerate: bool,
}

/// Total messages sent by a class, divided by class population and elapsed
/// rounds (the completion round, or the full trace length on timeout).
pub fn messages_per_agent_per_round<F: Real>(
    trace: &TrialTrace,
    class: AgentClass,
) -> MessageRate<F> {
    let (lo, hi, population) = match class {
        AgentClass::TaskAgents => (0usize, trace.n_task_agents as usize, trace.n_task_agents),
        AgentClass::Propagators => (
            trace.n_task_agents as usize,
            trace.message_counts.len(),
            trace.n_propagators,
        ),
    };
    let elapsed = trace
        .completion_round
        .unwrap_or(trace.residual_series.len() as u64 - 1);
    if elapsed == 0 || population == 0 {
        return MessageRate {
            per_agent_per_round: F::zero(),
            degenerate: true,
        };
    }
    let total: u64 = trace.message_counts[lo..hi].iter().sum();
    MessageRate {
        per_agent_per_round: real::<F>(total as f64)
            / (real::<F>(population as f64) * real::<F>(elapsed as f64)),
        degenerate: false,
    }
}

/// Total messages sent by a class over the whole trial.
pub fn total_messages(trace: &TrialTrace, class: AgentClass) -> u64 {
    let (lo, hi) = match class {
        AgentClass::TaskAgents => (0usize, trace.n_task_agents as usize),
        AgentClass::Propagators => (trace.n_task_agents as usize, trace.message_counts.len()),
    };
    trace.message_counts[lo..hi].iter().sum()
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct SummaryStats<F: Real = f64> {
    pub n: usize,
    pub mean: F,
    /// Sample standard deviation (n - 1 denominator); 0 for singletons.
    pub std_dev: F,
    pub std_err: F,
}

impl<F: Real> SummaryStats<F> {
    pub fn from_sample(xs: &[F]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len();
        let mean = xs.iter().copied().sum::<F>() / from_usize(n);
        let std_dev = if n > 1 {
            let ss = xs
                .iter()
                .map(|&x| (x - mean) * (x - mean))
                .sum::<F>();
            (ss / from_usize(n - 1)).sqrt()
        } else {
            F::zero()
        };
        Some(Self {
            n,
            mean,
            std_dev,
            std_err: std_dev / from_usize::<F>(n).sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("welch test needs at least two observations per sample")]
    TooFewSamples,
    #[error("welch test undefined when both samples have zero variance")]
    DegenerateVariance,
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct WelchTest<F: Real = f64> {
    pub t: F,
    pub df: F,
    pub p: F,
}

/// Welch's two-sample t-test with Welch-Satterthwaite degrees of freedom and
/// a two-sided p value from the t distribution.
pub fn welch_t_test<F: Real>(a: &[F], b: &[F]) -> Result<WelchTest<F>, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewSamples);
    }
    let sa = SummaryStats::from_sample(a).expect("non-empty");
    let sb = SummaryStats::from_sample(b).expect("non-empty");
    let va = sa.std_dev * sa.std_dev / from_usize(a.len());
    let vb = sb.std_dev * sb.std_dev / from_usize(b.len());
    if va + vb == F::zero() {
        return Err(StatsError::DegenerateVariance);
    }
    let t = (sa.mean - sb.mean) / (va + vb).sqrt();
    let df = (va + vb) * (va + vb)
        / (va * va / from_usize(a.len() - 1) + vb * vb / from_usize(b.len() - 1));
    let p = student_t_two_sided_p(t, df);
    Ok(WelchTest { t, df, p })
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman_rho<F: Real>(xs: &[F], ys: &[F]) -> F {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn ranks<F: Real>(xs: &[F]) -> Vec<F> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).expect("comparable values"));
    let mut out = vec![F::zero(); xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // Average rank for the tie group, 1-based.
        let avg = real::<F>((i + j) as f64 / 2.0 + 1.0);
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson<F: Real>(xs: &[F], ys: &[F]) -> F {
    let n = from_usize::<F>(xs.len());
    let mx = xs.iter().copied().sum::<F>() / n;
    let my = ys.iter().copied().sum::<F>() / n;
    let mut sxy = F::zero();
    let mut sxx = F::zero();
    let mut syy = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == F::zero() || syy == F::zero() {
        return F::zero();
    }
    sxy / (sxx * syy).sqrt()
}
