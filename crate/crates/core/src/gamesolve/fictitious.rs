use super::{argmax, argmin, EquilibriumReport, MixedStrategy, TrajectoryPoint};
use crate::error::{Error, Result};
use crate::resilience::PayoffMatrix;

const TRAJECTORY_SAMPLES: usize = 1000;

/// Simultaneous fictitious play on empirical frequencies.
///
/// Both players best-respond to the opponent's empirical mix (uniform
/// before the first round) and the counts update together. Stops once the
/// averaged strategies are a `tol`-equilibrium or after `max_iters` rounds.
pub fn nash_fictitious_play(
    m: &PayoffMatrix,
    max_iters: usize,
    tol: f64,
) -> Result<EquilibriumReport> {
    if max_iters == 0 {
        return Err(Error::Parameter("max_iters must be at least 1".into()));
    }
    let (rows, cols) = (m.rows(), m.cols());
    let mut count_a = vec![0u64; rows];
    let mut count_d = vec![0u64; cols];
    // Running sums Σ_t M[i][d_t] and Σ_t M[a_t][j].
    let mut row_sum = vec![0.0; rows];
    let mut col_sum = vec![0.0; cols];
    let uniform_rows: Vec<f64> = m.entries.iter().map(|r| r.iter().sum::<f64>() / cols as f64).collect();
    let uniform_cols: Vec<f64> = (0..cols).map(|j| m.column(j).sum::<f64>() / rows as f64).collect();

    let stride = (max_iters / TRAJECTORY_SAMPLES).max(1);
    let mut trajectory = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    for t in 1..=max_iters {
        let (a, _) = if t == 1 { argmin(&uniform_rows) } else { argmin(&row_sum) };
        let (d, _) = if t == 1 { argmax(&uniform_cols) } else { argmax(&col_sum) };
        count_a[a] += 1;
        count_d[d] += 1;
        for (s, row) in row_sum.iter_mut().zip(&m.entries) {
            *s += row[d];
        }
        for (s, x) in col_sum.iter_mut().zip(&m.entries[a]) {
            *s += x;
        }
        iterations = t;

        let tf = t as f64;
        let value: f64 = count_a
            .iter()
            .zip(&row_sum)
            .map(|(&c, s)| c as f64 * s)
            .sum::<f64>()
            / (tf * tf);
        let attack_gain = value - argmin(&row_sum).1 / tf;
        let defend_gain = argmax(&col_sum).1 / tf - value;
        if t % stride == 0 || t == max_iters {
            trajectory.push(TrajectoryPoint {
                iteration: t,
                avg_regret_attacker: attack_gain.max(0.0),
                avg_regret_defender: defend_gain.max(0.0),
                value,
            });
        }
        if attack_gain.max(defend_gain) <= tol {
            converged = true;
            break;
        }
    }

    let to_mix = |c: &[u64]| MixedStrategy {
        probs: c.iter().map(|&k| k as f64 / iterations as f64).collect(),
    };
    let mut report = EquilibriumReport::assemble(
        m,
        "fictitious",
        to_mix(&count_a),
        to_mix(&count_d),
        iterations,
        converged,
    )?;
    report.trajectory = Some(trajectory);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::testing::{matrix, random_matrix};
    use super::super::nash_exact;
    use super::*;

    #[test]
    fn matching_pennies_averages_to_uniform() {
        let m = matrix(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        let r = nash_fictitious_play(&m, 100_000, 0.0).unwrap();
        for p in r.attacker.probs.iter().chain(&r.defender.probs) {
            assert!((p - 0.5).abs() <= 0.02);
        }
        assert!(r.game_value.abs() <= 0.02);
        assert!(!r.converged);
    }

    #[test]
    fn dominant_column_is_found() {
        let m = matrix(&[&[0.9, 0.3, 0.2], &[0.8, 0.5, 0.1], &[0.95, 0.4, 0.6]]);
        let r = nash_fictitious_play(&m, 10_000, 1e-4).unwrap();
        assert_eq!(r.defender.probs, vec![1.0, 0.0, 0.0]);
        assert!(r.converged && r.epsilon <= 1e-4);
    }

    #[test]
    fn value_tracks_exact_solution() {
        for seed in 0..5 {
            let m = random_matrix(seed, 10, 10);
            let exact = nash_exact(&m).unwrap();
            let fp = nash_fictitious_play(&m, 100_000, 1e-4).unwrap();
            assert!((fp.game_value - exact.game_value).abs() <= 1e-2);
            assert!(fp.epsilon >= 0.0);
        }
    }

    #[test]
    fn trajectory_is_sampled() {
        let m = random_matrix(3, 4, 4);
        let r = nash_fictitious_play(&m, 5000, -1.0).unwrap();
        let tr = r.trajectory.as_ref().unwrap();
        assert_eq!(tr.len(), 1000);
        assert_eq!(tr.last().unwrap().iteration, 5000);
        assert!(nash_fictitious_play(&m, 0, 0.0).is_err());
    }
}
