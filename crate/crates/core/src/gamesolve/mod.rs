//! Solvers for the zero-sum attacker/defender matrix game.
//!
//! Rows are attacks (minimizing), columns are defenses (maximizing). Every
//! argmin/argmax breaks ties toward the lowest index.

mod fictitious;
mod lp;
mod quantal;
mod regret;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resilience::PayoffMatrix;

pub use fictitious::nash_fictitious_play;
pub use lp::{nash_exact, simplex_max, LpSolution};
pub use quantal::{qre_fixed_point, qre_residual, softmax_response, QreResult, DEFAULT_DAMPING};
pub use regret::{final_regret, regret_matching, regret_matching_with};

const SIMPLEX_TOL: f64 = 1e-9;

/// Probability vector over an action set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedStrategy {
    pub probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<MixedStrategy> {
        if probs.is_empty() {
            return Err(Error::Validation("mixed strategy over an empty action set".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Validation(format!("negative or non-finite probability in {probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("probabilities sum to {total}, not 1")));
        }
        Ok(MixedStrategy { probs })
    }

    /// Normalize non-negative weights; all-zero weights give the uniform mix.
    pub fn from_weights(weights: &[f64]) -> MixedStrategy {
        let clean: Vec<f64> = weights.iter().map(|w| w.max(0.0)).collect();
        let total: f64 = clean.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return MixedStrategy::uniform(weights.len());
        }
        MixedStrategy {
            probs: clean.iter().map(|w| w / total).collect(),
        }
    }

    pub fn uniform(n: usize) -> MixedStrategy {
        MixedStrategy {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn pure(n: usize, k: usize) -> MixedStrategy {
        let mut probs = vec![0.0; n];
        probs[k] = 1.0;
        MixedStrategy { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the largest probability.
    pub fn mode(&self) -> usize {
        argmax(&self.probs).0
    }

    pub fn max_abs_diff(&self, other: &MixedStrategy) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Attacker,
    Defender,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Attacker => "attacker",
            Side::Defender => "defender",
        })
    }
}

/// One sampled point of a solver's history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub avg_regret_attacker: f64,
    pub avg_regret_defender: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub method: String,
    #[serde(rename = "value")]
    pub game_value: f64,
    pub epsilon: f64,
    #[serde(rename = "attacker_probs")]
    pub attacker: MixedStrategy,
    #[serde(rename = "defender_probs")]
    pub defender: MixedStrategy,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

impl EquilibriumReport {
    /// Report whose value and epsilon are recomputed from the strategies.
    pub fn assemble(
        m: &PayoffMatrix,
        method: &str,
        attacker: MixedStrategy,
        defender: MixedStrategy,
        iterations: usize,
        converged: bool,
    ) -> Result<EquilibriumReport> {
        let game_value = expected_value(m, &attacker, &defender)?;
        let epsilon = verify_epsilon_equilibrium(m, &attacker, &defender)?;
        Ok(EquilibriumReport {
            method: method.to_string(),
            game_value,
            epsilon,
            attacker,
            defender,
            iterations,
            converged,
            trajectory: None,
        })
    }

    pub fn trajectory_csv(&self) -> Result<Option<String>> {
        let Some(points) = &self.trajectory else {
            return Ok(None);
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        for p in points {
            w.serialize(p)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(Some(String::from_utf8(bytes).expect("csv output is utf-8")))
    }
}

fn argmin(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v < best.1 {
            best = (k, v);
        }
    }
    best
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

/// `(M πd)_i`: expected payoff of each attack row.
pub fn row_payoffs(m: &PayoffMatrix, defender: &MixedStrategy) -> Result<Vec<f64>> {
    check_len(m.cols(), defender.len())?;
    Ok(m.entries
        .iter()
        .map(|row| row.iter().zip(&defender.probs).map(|(x, p)| x * p).sum())
        .collect())
}

/// `(πaᵀ M)_j`: expected payoff of each defense column.
pub fn column_payoffs(m: &PayoffMatrix, attacker: &MixedStrategy) -> Result<Vec<f64>> {
    check_len(m.rows(), attacker.len())?;
    let mut out = vec![0.0; m.cols()];
    for (row, p) in m.entries.iter().zip(&attacker.probs) {
        for (o, x) in out.iter_mut().zip(row) {
            *o += p * x;
        }
    }
    Ok(out)
}

pub fn expected_value(
    m: &PayoffMatrix,
    attacker: &MixedStrategy,
    defender: &MixedStrategy,
) -> Result<f64> {
    check_len(m.rows(), attacker.len())?;
    let rows = row_payoffs(m, defender)?;
    Ok(rows.iter().zip(&attacker.probs).map(|(r, p)| r * p).sum())
}

/// Pure best response to the opponent's mix, with its expected payoff.
pub fn best_response(
    m: &PayoffMatrix,
    opponent_mix: &MixedStrategy,
    side: Side,
) -> Result<(usize, f64)> {
    match side {
        Side::Attacker => Ok(argmin(&row_payoffs(m, opponent_mix)?)),
        Side::Defender => Ok(argmax(&column_payoffs(m, opponent_mix)?)),
    }
}

/// Largest gain either side obtains by a unilateral pure deviation.
pub fn verify_epsilon_equilibrium(
    m: &PayoffMatrix,
    attacker: &MixedStrategy,
    defender: &MixedStrategy,
) -> Result<f64> {
    let v = expected_value(m, attacker, defender)?;
    let (_, attack_best) = best_response(m, defender, Side::Attacker)?;
    let (_, defend_best) = best_response(m, attacker, Side::Defender)?;
    Ok((v - attack_best).max(defend_best - v).max(0.0))
}

/// `min_i M_ij` for every column.
pub fn security_levels(m: &PayoffMatrix) -> Vec<f64> {
    (0..m.cols())
        .map(|j| m.column(j).fold(f64::INFINITY, f64::min))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackelbergSolution {
    pub defense: usize,
    pub defense_id: String,
    pub security_level: f64,
    pub attack: usize,
    pub attack_id: String,
}

/// Pure-commitment leader: the column with the best worst case, and the
/// attacker's reply to it.
pub fn stackelberg(m: &PayoffMatrix) -> StackelbergSolution {
    let (defense, security_level) = argmax(&security_levels(m));
    let column: Vec<f64> = m.column(defense).collect();
    let (attack, _) = argmin(&column);
    StackelbergSolution {
        defense,
        defense_id: m.defense_ids[defense].clone(),
        security_level,
        attack,
        attack_id: m.attack_ids[attack].clone(),
    }
}

impl StackelbergSolution {
    pub fn to_report(&self, m: &PayoffMatrix) -> Result<EquilibriumReport> {
        EquilibriumReport::assemble(
            m,
            "stackelberg",
            MixedStrategy::pure(m.rows(), self.attack),
            MixedStrategy::pure(m.cols(), self.defense),
            1,
            true,
        )
    }
}

/// `(max_j min_i M_ij, min_i max_j M_ij)`, the pure-strategy bounds on the
/// game value.
pub fn minimax_bounds(m: &PayoffMatrix) -> (f64, f64) {
    let lower = security_levels(m).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let upper = m
        .entries
        .iter()
        .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min);
    (lower, upper)
}

/// Solver selection for command-line dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Nash,
    Fictitious,
    Stackelberg,
    Regret,
    Softmax,
}

impl SolveMethod {
    pub const ALL: [SolveMethod; 5] = [
        SolveMethod::Nash,
        SolveMethod::Fictitious,
        SolveMethod::Stackelberg,
        SolveMethod::Regret,
        SolveMethod::Softmax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolveMethod::Nash => "nash",
            SolveMethod::Fictitious => "fictitious",
            SolveMethod::Stackelberg => "stackelberg",
            SolveMethod::Regret => "regret",
            SolveMethod::Softmax => "softmax",
        }
    }
}

impl FromStr for SolveMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<SolveMethod> {
        match s.to_ascii_lowercase().as_str() {
            "nash" | "nash_exact" | "lp" => Ok(SolveMethod::Nash),
            "fictitious" | "fp" | "fictitious_play" => Ok(SolveMethod::Fictitious),
            "stackelberg" => Ok(SolveMethod::Stackelberg),
            "regret" | "regret_matching" => Ok(SolveMethod::Regret),
            "softmax" | "qre" => Ok(SolveMethod::Softmax),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Tunables shared by the iterative solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub beta: f64,
    pub damping: f64,
    /// Trajectory sampling stride; 1 keeps every iteration.
    pub stride: usize,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            iters: 100_000,
            tol: 1e-6,
            seed: 0,
            beta: 20.0,
            damping: DEFAULT_DAMPING,
            stride: 1,
        }
    }
}

pub fn solve(m: &PayoffMatrix, method: SolveMethod, params: &SolveParams) -> Result<EquilibriumReport> {
    match method {
        SolveMethod::Nash => nash_exact(m),
        SolveMethod::Fictitious => nash_fictitious_play(m, params.iters, params.tol),
        SolveMethod::Stackelberg => stackelberg(m).to_report(m),
        SolveMethod::Regret => regret_matching_with(m, params.iters, params.seed, params.stride),
        SolveMethod::Softmax => {
            let q = qre_fixed_point(m, params.beta, params.beta, params.damping, params.iters, 1e-12)?;
            EquilibriumReport::assemble(m, "softmax", q.attacker, q.defender, q.iterations, q.converged)
        }
    }
}
