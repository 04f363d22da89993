use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EquilibriumReport, MixedStrategy, TrajectoryPoint};
use crate::error::{Error, Result};
use crate::resilience::PayoffMatrix;

/// Mix proportional to positive cumulative regret, uniform when none is
/// positive.
fn regret_mix(regret: &[f64], out: &mut [f64]) {
    let total: f64 = regret.iter().map(|r| r.max(0.0)).sum();
    if total > 0.0 {
        for (o, r) in out.iter_mut().zip(regret) {
            *o = r.max(0.0) / total;
        }
    } else {
        out.fill(1.0 / out.len() as f64);
    }
}

fn sample(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Regret-matching self-play for `t_max` rounds, recording every round.
pub fn regret_matching(m: &PayoffMatrix, t_max: usize, seed: u64) -> Result<EquilibriumReport> {
    regret_matching_with(m, t_max, seed, 1)
}

/// Regret-matching self-play.
///
/// Each round both sides sample from their current regret-matching mixes
/// and update regrets against the realized opponent action. The report
/// carries the time-averaged mixes; the trajectory keeps every `stride`-th
/// round with the average external regret of each side and the mean
/// realized payoff.
pub fn regret_matching_with(
    m: &PayoffMatrix,
    t_max: usize,
    seed: u64,
    stride: usize,
) -> Result<EquilibriumReport> {
    if t_max == 0 {
        return Err(Error::Parameter("T must be at least 1".into()));
    }
    let stride = stride.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, cols) = (m.rows(), m.cols());
    let mut regret_a = vec![0.0; rows];
    let mut regret_d = vec![0.0; cols];
    let mut mix_a = vec![0.0; rows];
    let mut mix_d = vec![0.0; cols];
    let mut avg_a = vec![0.0; rows];
    let mut avg_d = vec![0.0; cols];
    let mut payoff_sum = 0.0;
    let mut trajectory = Vec::with_capacity(t_max / stride + 1);

    for t in 1..=t_max {
        regret_mix(&regret_a, &mut mix_a);
        regret_mix(&regret_d, &mut mix_d);
        for (s, p) in avg_a.iter_mut().zip(&mix_a) {
            *s += p;
        }
        for (s, p) in avg_d.iter_mut().zip(&mix_d) {
            *s += p;
        }
        let a = sample(&mix_a, &mut rng);
        let d = sample(&mix_d, &mut rng);
        let realized = m.get(a, d);
        payoff_sum += realized;
        // The attacker's utility is -M.
        for (i, r) in regret_a.iter_mut().enumerate() {
            *r += realized - m.get(i, d);
        }
        for (j, r) in regret_d.iter_mut().enumerate() {
            *r += m.get(a, j) - realized;
        }
        if t % stride == 0 || t == t_max {
            let tf = t as f64;
            let worst = |r: &[f64]| r.iter().copied().fold(0.0, f64::max) / tf;
            trajectory.push(TrajectoryPoint {
                iteration: t,
                avg_regret_attacker: worst(&regret_a),
                avg_regret_defender: worst(&regret_d),
                value: payoff_sum / tf,
            });
        }
    }

    let mut report = EquilibriumReport::assemble(
        m,
        "regret",
        MixedStrategy::from_weights(&avg_a),
        MixedStrategy::from_weights(&avg_d),
        t_max,
        true,
    )?;
    report.trajectory = Some(trajectory);
    Ok(report)
}

/// Larger of the two sides' average external regret at the end of a run.
pub fn final_regret(report: &EquilibriumReport) -> f64 {
    report
        .trajectory
        .as_ref()
        .and_then(|t| t.last())
        .map_or(0.0, |p| p.avg_regret_attacker.max(p.avg_regret_defender))
}
