use super::{column_payoffs, row_payoffs, MixedStrategy, Side};
use crate::error::{Error, Result};
use crate::resilience::PayoffMatrix;

pub const DEFAULT_DAMPING: f64 = 0.5;

/// Logit response: probabilities proportional to `exp(β·u)` where `u` is
/// the expected payoff of each own action (negated for the attacker).
pub fn softmax_response(
    m: &PayoffMatrix,
    opponent_mix: &MixedStrategy,
    beta: f64,
    side: Side,
) -> Result<MixedStrategy> {
    if !(beta >= 0.0) || beta.is_infinite() {
        return Err(Error::Parameter(format!("beta must be finite and non-negative, got {beta}")));
    }
    let utility: Vec<f64> = match side {
        Side::Attacker => row_payoffs(m, opponent_mix)?.into_iter().map(|x| -x).collect(),
        Side::Defender => column_payoffs(m, opponent_mix)?,
    };
    Ok(logit(&utility, beta))
}

fn logit(utility: &[f64], beta: f64) -> MixedStrategy {
    if beta == 0.0 {
        return MixedStrategy::uniform(utility.len());
    }
    let top = utility.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = utility.iter().map(|u| (beta * (u - top)).exp()).collect();
    let total: f64 = weights.iter().sum();
    MixedStrategy {
        probs: weights.into_iter().map(|w| w / total).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QreResult {
    pub attacker: MixedStrategy,
    pub defender: MixedStrategy,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm distance from the last iterate to its own logit response.
    pub residual: f64,
}

/// `max(‖πa − σa(πd)‖∞, ‖πd − σd(πa)‖∞)`.
pub fn qre_residual(
    m: &PayoffMatrix,
    attacker: &MixedStrategy,
    defender: &MixedStrategy,
    beta_a: f64,
    beta_d: f64,
) -> Result<f64> {
    let ra = softmax_response(m, defender, beta_a, Side::Attacker)?;
    let rd = softmax_response(m, attacker, beta_d, Side::Defender)?;
    Ok(attacker.max_abs_diff(&ra).max(defender.max_abs_diff(&rd)))
}

/// Damped simultaneous logit iteration from the uniform pair.
///
/// Stops when the max-norm change of both mixes is at most `tol`;
/// otherwise returns the last iterate with `converged = false`.
pub fn qre_fixed_point(
    m: &PayoffMatrix,
    beta_a: f64,
    beta_d: f64,
    damping: f64,
    max_iters: usize,
    tol: f64,
) -> Result<QreResult> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::Parameter(format!("damping must lie in (0, 1], got {damping}")));
    }
    let mut a = MixedStrategy::uniform(m.rows());
    let mut d = MixedStrategy::uniform(m.cols());
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iters {
        let ra = softmax_response(m, &d, beta_a, Side::Attacker)?;
        let rd = softmax_response(m, &a, beta_d, Side::Defender)?;
        let blend = |old: &MixedStrategy, new: &MixedStrategy| {
            MixedStrategy::from_weights(
                &old.probs
                    .iter()
                    .zip(&new.probs)
                    .map(|(o, n)| (1.0 - damping) * o + damping * n)
                    .collect::<Vec<_>>(),
            )
        };
        let next_a = blend(&a, &ra);
        let next_d = blend(&d, &rd);
        let change = next_a.max_abs_diff(&a).max(next_d.max_abs_diff(&d));
        a = next_a;
        d = next_d;
        iterations += 1;
        if change <= tol {
            converged = true;
            break;
        }
    }
    let residual = qre_residual(m, &a, &d, beta_a, beta_d)?;
    Ok(QreResult {
        attacker: a,
        defender: d,
        iterations,
        converged,
        residual,
    })
}
