//! Tabular Q-learning for the attacker/defender game.
//!
//! Both tables store payoffs on the defender's scale (resilience), so the
//! defender acts by argmax and the attacker by argmin. Stateless play uses
//! `γ = 0`; [`mdp_train`] adds the state-based form over a [`StageMdp`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamesolve::{MixedStrategy, Side};
use crate::resilience::PayoffMatrix;

/// Step size as a function of the per-key visit count `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSchedule {
    /// `1/n`.
    Harmonic,
    Constant { value: f64 },
    /// `n^(-exponent)`.
    Power { exponent: f64 },
}

impl AlphaSchedule {
    pub fn alpha(&self, visits: u64) -> f64 {
        let n = visits.max(1) as f64;
        match *self {
            AlphaSchedule::Harmonic => 1.0 / n,
            AlphaSchedule::Constant { value } => value,
            AlphaSchedule::Power { exponent } => n.powf(-exponent),
        }
    }

    /// `Σα = ∞` and `Σα² < ∞`.
    pub fn satisfies_robbins_monro(&self) -> bool {
        match *self {
            AlphaSchedule::Harmonic => true,
            AlphaSchedule::Constant { .. } => false,
            AlphaSchedule::Power { exponent } => exponent > 0.5 && exponent <= 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningConfig {
    pub alpha_schedule: AlphaSchedule,
    pub epsilon0: f64,
    /// Per-episode multiplicative decay of the exploration rate.
    pub epsilon_decay: f64,
    pub gamma: f64,
    pub episodes: usize,
    pub seed: u64,
    /// Steps per episode in the state-based mode.
    pub horizon: usize,
    /// Leading episodes during which the defender plays uniformly and does
    /// not learn.
    pub phase1_episodes: usize,
    /// Telemetry sampling stride; 0 picks about a thousand rows.
    pub telemetry_stride: usize,
}

impl Default for LearningConfig {
    fn default() -> Self {
        LearningConfig {
            alpha_schedule: AlphaSchedule::Harmonic,
            epsilon0: 1.0,
            epsilon_decay: 0.9999,
            gamma: 0.0,
            episodes: 100_000,
            seed: 0,
            horizon: 1,
            phase1_episodes: 0,
            telemetry_stride: 0,
        }
    }
}

impl LearningConfig {
    /// Hard range checks; returns soft warnings such as a Robbins-Monro
    /// violation.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(0.0..=1.0).contains(&self.epsilon0) {
            return Err(Error::Parameter(format!("epsilon0 {} outside [0, 1]", self.epsilon0)));
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return Err(Error::Parameter(format!(
                "epsilon_decay {} outside (0, 1]",
                self.epsilon_decay
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Parameter(format!("gamma {} outside [0, 1)", self.gamma)));
        }
        if self.episodes == 0 || self.horizon == 0 {
            return Err(Error::Parameter("episodes and horizon must be at least 1".into()));
        }
        match self.alpha_schedule {
            AlphaSchedule::Constant { value } if !(value > 0.0 && value <= 1.0) => {
                return Err(Error::Parameter(format!("constant alpha {value} outside (0, 1]")));
            }
            AlphaSchedule::Power { exponent } if !(exponent > 0.0) => {
                return Err(Error::Parameter(format!("alpha exponent {exponent} must be positive")));
            }
            _ => {}
        }
        let mut warnings = Vec::new();
        if !self.alpha_schedule.satisfies_robbins_monro() {
            warnings.push(format!(
                "alpha schedule {:?} violates the Robbins-Monro conditions",
                self.alpha_schedule
            ));
        }
        if self.epsilon_decay < 1.0 && self.epsilon0 > 0.0 {
            let tail = self.epsilon0 * self.epsilon_decay.powf(self.episodes as f64);
            if tail < 1e-300 {
                warnings.push("exploration vanishes to zero long before the last episode".into());
            }
        }
        Ok(warnings)
    }

    fn stride(&self) -> usize {
        if self.telemetry_stride > 0 {
            self.telemetry_stride
        } else {
            (self.episodes / 1000).max(1)
        }
    }
}

/// Dense table keyed by (context, own action, opponent action); unseen
/// keys read as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub contexts: usize,
    pub own: usize,
    pub opp: usize,
    values: Vec<f64>,
    visits: Vec<u64>,
}

pub type QKey = (usize, usize, usize);

impl QTable {
    pub fn new(contexts: usize, own: usize, opp: usize) -> QTable {
        let n = contexts * own * opp;
        QTable {
            contexts,
            own,
            opp,
            values: vec![0.0; n],
            visits: vec![0; n],
        }
    }

    fn index(&self, (c, o, p): QKey) -> usize {
        assert!(c < self.contexts && o < self.own && p < self.opp, "key {:?} out of range", (c, o, p));
        (c * self.own + o) * self.opp + p
    }

    pub fn get(&self, key: QKey) -> f64 {
        self.values[self.index(key)]
    }

    pub fn visits(&self, key: QKey) -> u64 {
        self.visits[self.index(key)]
    }

    /// Row `Q(context, own, ·)`.
    pub fn row(&self, context: usize, own: usize) -> &[f64] {
        let start = self.index((context, own, 0));
        &self.values[start..start + self.opp]
    }

    /// `own × opp` matrix for one context.
    pub fn matrix(&self, context: usize) -> Vec<Vec<f64>> {
        (0..self.own).map(|o| self.row(context, o).to_vec()).collect()
    }

    /// Record one more visit of `key` and return the new count.
    pub fn touch(&mut self, key: QKey) -> u64 {
        let k = self.index(key);
        self.visits[k] += 1;
        self.visits[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `q ← q + α(r + γ·next_best − q)`; returns the new value.
pub fn q_update(
    table: &mut QTable,
    key: QKey,
    reward: f64,
    next_best: f64,
    alpha: f64,
    gamma: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha {alpha} outside (0, 1]")));
    }
    let k = table.index(key);
    let q = table.values[k];
    let next = q + alpha * (reward + gamma * next_best - q);
    table.values[k] = next;
    Ok(next)
}

fn argbest(values: impl Iterator<Item = f64>, side: Side) -> (usize, f64) {
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.enumerate() {
        let better = match (best, side) {
            (None, _) => true,
            (Some((_, b)), Side::Defender) => v > b,
            (Some((_, b)), Side::Attacker) => v < b,
        };
        if better {
            best = Some((k, v));
        }
    }
    best.expect("non-empty action set")
}

/// Greedy own action against the opponent's last action, or against a
/// uniform opponent when there is none yet.
pub fn greedy_action(table: &QTable, context: usize, opponent_last: Option<usize>, side: Side) -> usize {
    let score = |o: usize| match opponent_last {
        Some(p) => table.get((context, o, p)),
        None => table.row(context, o).iter().sum::<f64>() / table.opp as f64,
    };
    argbest((0..table.own).map(score), side).0
}

/// Pure security action of the stage game held in `table` and its level:
/// maximin for the defender, minimax for the attacker.
pub fn security_action(table: &QTable, context: usize, side: Side) -> (usize, f64) {
    let level = |o: usize| {
        let row = table.row(context, o);
        match side {
            Side::Defender => row.iter().copied().fold(f64::INFINITY, f64::min),
            Side::Attacker => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    };
    argbest((0..table.own).map(level), side)
}

/// With probability ε a uniform action over all `n`, otherwise `greedy`.
fn explore(greedy: usize, n: usize, epsilon: f64, rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    if u < epsilon {
        rng.random_range(0..n)
    } else {
        greedy
    }
}

pub fn epsilon_greedy(
    table: &QTable,
    context: usize,
    opponent_last: Option<usize>,
    epsilon: f64,
    side: Side,
    rng: &mut impl Rng,
) -> usize {
    explore(greedy_action(table, context, opponent_last, side), table.own, epsilon, rng)
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub episode: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub reward: f64,
    pub q_max_delta: f64,
}

pub fn telemetry_csv(rows: &[TelemetryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedPolicy {
    pub side: Side,
    /// Greedy action per context.
    pub greedy: Vec<usize>,
    /// Learned `own × opp` matrix per context.
    pub q: Vec<Vec<Vec<f64>>>,
    pub episodes: usize,
    pub config: LearningConfig,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub telemetry: Vec<TelemetryRow>,
}

impl LearnedPolicy {
    fn from_table(table: &QTable, side: Side, greedy: Vec<usize>, config: &LearningConfig, warnings: Vec<String>) -> LearnedPolicy {
        LearnedPolicy {
            side,
            greedy,
            q: (0..table.contexts).map(|c| table.matrix(c)).collect(),
            episodes: config.episodes,
            config: config.clone(),
            warnings,
            telemetry: Vec::new(),
        }
    }

    /// Pure mix on the greedy action of `context`.
    pub fn as_mix(&self, context: usize) -> MixedStrategy {
        MixedStrategy::pure(self.q[context].len(), self.greedy[context])
    }
}

/// Defender Q-learning against a stationary attacker mix.
///
/// The defender's table is keyed by the sampled attack; exploration is
/// ε-greedy against the previous attack and the final greedy action best
/// responds to the empirical attack frequencies.
pub fn train_single_agent(
    m: &PayoffMatrix,
    opponent: &MixedStrategy,
    config: &LearningConfig,
) -> Result<LearnedPolicy> {
    let warnings = config.validate()?;
    if opponent.len() != m.rows() {
        return Err(Error::Dimension { expected: m.rows(), got: opponent.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut table = QTable::new(1, m.cols(), m.rows());
    let mut counts = vec![0u64; m.rows()];
    let mut last = None;
    let mut epsilon = config.epsilon0;
    let stride = config.stride();
    let mut telemetry = Vec::new();
    let mut max_delta: f64 = 0.0;
    let mut reward_sum = 0.0;
    for ep in 0..config.episodes {
        let d = epsilon_greedy(&table, 0, last, epsilon, Side::Defender, &mut rng);
        let a = sample(&opponent.probs, &mut rng);
        let reward = m.get(a, d);
        let key = (0, d, a);
        let alpha = config.alpha_schedule.alpha(table.touch(key));
        let next_best = security_action(&table, 0, Side::Defender).1;
        let before = table.get(key);
        let after = q_update(&mut table, key, reward, next_best, alpha, config.gamma)?;
        max_delta = max_delta.max((after - before).abs());
        reward_sum += reward;
        counts[a] += 1;
        last = Some(a);
        if (ep + 1) % stride == 0 || ep + 1 == config.episodes {
            telemetry.push(TelemetryRow {
                episode: ep + 1,
                epsilon,
                alpha,
                reward: reward_sum / (ep + 1) as f64,
                q_max_delta: max_delta,
            });
            max_delta = 0.0;
        }
        epsilon *= config.epsilon_decay;
    }
    let total = config.episodes as f64;
    let expected = |j: usize| -> f64 {
        table
            .row(0, j)
            .iter()
            .zip(&counts)
            .map(|(q, &c)| q * c as f64 / total)
            .sum()
    };
    let greedy = argbest((0..m.cols()).map(expected), Side::Defender).0;
    let mut policy = LearnedPolicy::from_table(&table, Side::Defender, vec![greedy], config, warnings);
    policy.telemetry = telemetry;
    Ok(policy)
}

/// Parameters of the default three-state factored MDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdpParams {
    /// A pair with payoff at or above this is a mitigated attack.
    pub mitigation_threshold: f64,
    /// normal → degraded after an unmitigated attack.
    pub p_degrade: f64,
    /// degraded → critical after an unmitigated attack.
    pub p_escalate: f64,
    /// One-step recovery after a mitigated attack.
    pub p_recover: f64,
    /// Reward multiplier per state.
    pub reward_scale: [f64; 3],
}

impl Default for MdpParams {
    fn default() -> Self {
        MdpParams {
            mitigation_threshold: 0.8,
            p_degrade: 0.9,
            p_escalate: 0.5,
            p_recover: 0.7,
            reward_scale: [1.0, 0.75, 0.5],
        }
    }
}

/// Finite Markov game over the attack/defense action sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMdp {
    pub states: Vec<String>,
    pub attacks: usize,
    pub defenses: usize,
    /// `transition[s][i][j][s']`.
    pub transition: Vec<Vec<Vec<Vec<f64>>>>,
    /// `reward[s][i][j]` on the defender's scale, within [0, 1].
    pub reward: Vec<Vec<Vec<f64>>>,
}

impl StageMdp {
    /// One absorbing state whose reward is the payoff matrix.
    pub fn single_state(m: &PayoffMatrix) -> StageMdp {
        let (rows, cols) = (m.rows(), m.cols());
        StageMdp {
            states: vec!["stage".into()],
            attacks: rows,
            defenses: cols,
            transition: vec![vec![vec![vec![1.0]; cols]; rows]],
            reward: vec![m.entries.clone()],
        }
    }

    /// Normal / degraded / critical chain. Transitions factor into a cyber
    /// outcome (the pair mitigates the attack or not) followed by the
    /// physical consequence of that outcome.
    pub fn three_state(m: &PayoffMatrix, params: &MdpParams) -> Result<StageMdp> {
        let (rows, cols) = (m.rows(), m.cols());
        // physical[s][mitigated] over (normal, degraded, critical).
        let (pd, pe, pr) = (params.p_degrade, params.p_escalate, params.p_recover);
        let physical = [
            [[1.0 - pd, pd, 0.0], [1.0, 0.0, 0.0]],
            [[0.0, 1.0 - pe, pe], [pr, 1.0 - pr, 0.0]],
            [[0.0, 0.0, 1.0], [0.0, pr, 1.0 - pr]],
        ];
        let mut transition = vec![vec![vec![Vec::new(); cols]; rows]; 3];
        let mut reward = vec![vec![vec![0.0; cols]; rows]; 3];
        for s in 0..3 {
            for i in 0..rows {
                for j in 0..cols {
                    let p_mitigated = if m.get(i, j) >= params.mitigation_threshold { 1.0 } else { 0.0 };
                    transition[s][i][j] = (0..3)
                        .map(|t| (1.0 - p_mitigated) * physical[s][0][t] + p_mitigated * physical[s][1][t])
                        .collect();
                    reward[s][i][j] = params.reward_scale[s] * m.get(i, j);
                }
            }
        }
        let mdp = StageMdp {
            states: vec!["normal".into(), "degraded".into(), "critical".into()],
            attacks: rows,
            defenses: cols,
            transition,
            reward,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.states.len();
        if s == 0 || self.attacks == 0 || self.defenses == 0 {
            return Err(Error::Validation("MDP needs states and actions".into()));
        }
        if self.transition.len() != s || self.reward.len() != s {
            return Err(Error::Dimension { expected: s, got: self.transition.len().min(self.reward.len()) });
        }
        for (k, (tr, rw)) in self.transition.iter().zip(&self.reward).enumerate() {
            if tr.len() != self.attacks || rw.len() != self.attacks {
                return Err(Error::Dimension { expected: self.attacks, got: tr.len() });
            }
            for i in 0..self.attacks {
                if tr[i].len() != self.defenses || rw[i].len() != self.defenses {
                    return Err(Error::Dimension { expected: self.defenses, got: tr[i].len() });
                }
                for j in 0..self.defenses {
                    let row = &tr[i][j];
                    if row.len() != s {
                        return Err(Error::Dimension { expected: s, got: row.len() });
                    }
                    let total: f64 = row.iter().sum();
                    if row.iter().any(|p| *p < 0.0) || (total - 1.0).abs() > 1e-9 {
                        return Err(Error::Validation(format!(
                            "transition row ({k}, {i}, {j}) is not a distribution"
                        )));
                    }
                    if !(0.0..=1.0).contains(&rw[i][j]) {
                        return Err(Error::Validation(format!(
                            "reward ({k}, {i}, {j}) = {} outside [0, 1]",
                            rw[i][j]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpOutcome {
    pub attacker: LearnedPolicy,
    pub defender: LearnedPolicy,
    /// Value estimate per state.
    pub values: Vec<f64>,
    /// Every state's greedy pair is a pure saddle of the learned tables.
    pub converged: bool,
}

/// Simultaneous Q-learning on a Markov game.
///
/// Each step both agents act ε-greedily around the pure security action of
/// their current stage table and bootstrap on the security level of the
/// next state. Episodes start in state `episode mod S` and last `horizon`
/// steps. When the greedy pairs do not form saddle points, each state's
/// value is the mean reward it produced over the final 10% of episodes.
pub fn mdp_train(mdp: &StageMdp, config: &LearningConfig) -> Result<MdpOutcome> {
    let warnings = config.validate()?;
    mdp.validate()?;
    let (s_count, rows, cols) = (mdp.state_count(), mdp.attacks, mdp.defenses);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut qa = QTable::new(s_count, rows, cols);
    let mut qd = QTable::new(s_count, cols, rows);
    let mut epsilon = config.epsilon0;
    let stride = config.stride();
    let tail_start = config.episodes - config.episodes / 10;
    let mut tail_sum = vec![0.0; s_count];
    let mut tail_n = vec![0u64; s_count];
    let mut telemetry = Vec::new();
    let mut max_delta: f64 = 0.0;
    let mut reward_sum = 0.0;
    let mut steps = 0u64;
    let mut last_alpha = 1.0;

    for ep in 0..config.episodes {
        let learning_defender = ep >= config.phase1_episodes;
        let mut s = ep % s_count;
        for _ in 0..config.horizon {
            let a = explore(security_action(&qa, s, Side::Attacker).0, rows, epsilon, &mut rng);
            let d = if learning_defender {
                explore(security_action(&qd, s, Side::Defender).0, cols, epsilon, &mut rng)
            } else {
                rng.random_range(0..cols)
            };
            let reward = mdp.reward[s][a][d];
            let next = if s_count == 1 { 0 } else { sample(&mdp.transition[s][a][d], &mut rng) };

            let next_a = security_action(&qa, next, Side::Attacker).1;
            let alpha_a = config.alpha_schedule.alpha(qa.touch((s, a, d)));
            let before = qa.get((s, a, d));
            let after = q_update(&mut qa, (s, a, d), reward, next_a, alpha_a, config.gamma)?;
            max_delta = max_delta.max((after - before).abs());
            last_alpha = alpha_a;
            if learning_defender {
                let next_d = security_action(&qd, next, Side::Defender).1;
                let alpha_d = config.alpha_schedule.alpha(qd.touch((s, d, a)));
                let before = qd.get((s, d, a));
                let after = q_update(&mut qd, (s, d, a), reward, next_d, alpha_d, config.gamma)?;
                max_delta = max_delta.max((after - before).abs());
            }
            if ep >= tail_start {
                tail_sum[s] += reward;
                tail_n[s] += 1;
            }
            reward_sum += reward;
            steps += 1;
            s = next;
        }
        if (ep + 1) % stride == 0 || ep + 1 == config.episodes {
            telemetry.push(TelemetryRow {
                episode: ep + 1,
                epsilon,
                alpha: last_alpha,
                reward: reward_sum / steps as f64,
                q_max_delta: max_delta,
            });
            max_delta = 0.0;
        }
        epsilon *= config.epsilon_decay;
    }

    let greedy_a: Vec<usize> = (0..s_count).map(|s| security_action(&qa, s, Side::Attacker).0).collect();
    let greedy_d: Vec<usize> = (0..s_count).map(|s| security_action(&qd, s, Side::Defender).0).collect();
    let saddle = |s: usize| {
        let (a, d) = (greedy_a[s], greedy_d[s]);
        let v = qd.get((s, d, a));
        let row_ok = (0..cols).all(|j| qd.get((s, j, a)) <= v);
        let col_ok = (0..rows).all(|i| qd.get((s, d, i)) >= v);
        let va = qa.get((s, a, d));
        let a_row_ok = (0..cols).all(|j| qa.get((s, a, j)) <= va);
        let a_col_ok = (0..rows).all(|i| qa.get((s, i, d)) >= va);
        row_ok && col_ok && a_row_ok && a_col_ok
    };
    let converged = (0..s_count).all(saddle);
    let values = (0..s_count)
        .map(|s| {
            if converged || tail_n[s] == 0 {
                qd.get((s, greedy_d[s], greedy_a[s]))
            } else {
                tail_sum[s] / tail_n[s] as f64
            }
        })
        .collect();

    let mut attacker = LearnedPolicy::from_table(&qa, Side::Attacker, greedy_a, config, warnings.clone());
    let mut defender = LearnedPolicy::from_table(&qd, Side::Defender, greedy_d, config, warnings);
    attacker.telemetry = telemetry.clone();
    defender.telemetry = telemetry;
    Ok(MdpOutcome {
        attacker,
        defender,
        values,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiAgentOutcome {
    pub attacker: LearnedPolicy,
    pub defender: LearnedPolicy,
    pub value: f64,
    pub converged: bool,
}

/// Simultaneous stateless learning on the payoff matrix.
pub fn train_multi_agent(m: &PayoffMatrix, config: &LearningConfig) -> Result<MultiAgentOutcome> {
    let out = mdp_train(&StageMdp::single_state(m), config)?;
    Ok(MultiAgentOutcome {
        value: out.values[0],
        converged: out.converged,
        attacker: out.attacker,
        defender: out.defender,
    })
}

/// Sample-complexity planning figure
/// `S·A·H⁴·ln(S·A·H/δ) / ((1−γ)⁶·ε²)` with unit constant.
pub fn pac_sample_bound(s: u64, a: u64, h: u64, gamma: f64, eps: f64, delta: f64) -> Result<f64> {
    if s == 0 || a == 0 || h == 0 {
        return Err(Error::Parameter("S, A and H must be positive".into()));
    }
    for (name, v) in [("gamma", gamma), ("epsilon", eps), ("delta", delta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Parameter(format!("{name} = {v} outside (0, 1)")));
        }
    }
    let (s, a, h) = (s as f64, a as f64, h as f64);
    Ok(s * a * h.powi(4) * (s * a * h / delta).ln() / ((1.0 - gamma).powi(6) * eps * eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: &[&[f64]]) -> PayoffMatrix {
        PayoffMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn q_update_examples() {
        let mut t = QTable::new(1, 2, 2);
        assert_eq!(q_update(&mut t, (0, 0, 0), 0.5, 0.0, 1.0, 0.0).unwrap(), 0.5);
        assert_eq!(q_update(&mut t, (0, 1, 1), 0.0, 1.0, 0.5, 0.9).unwrap(), 0.45);
        assert!(q_update(&mut t, (0, 1, 1), 0.0, 1.0, 0.0, 0.9).is_err());
        assert!(q_update(&mut t, (0, 1, 1), 0.0, 1.0, 1.5, 0.9).is_err());
    }

    #[test]
    fn harmonic_updates_are_running_means() {
        let rewards = [0.3, 0.9, 0.1, 0.4, 0.8, 0.55];
        let mut t = QTable::new(1, 1, 1);
        for (k, r) in rewards.iter().enumerate() {
            let n = t.touch((0, 0, 0));
            q_update(&mut t, (0, 0, 0), *r, 0.0, AlphaSchedule::Harmonic.alpha(n), 0.0).unwrap();
            let mean = rewards[..=k].iter().sum::<f64>() / (k + 1) as f64;
            assert!((t.get((0, 0, 0)) - mean).abs() < 1e-15);
        }
    }

    #[test]
    fn schedules_and_warnings() {
        assert!(AlphaSchedule::Harmonic.satisfies_robbins_monro());
        assert!(AlphaSchedule::Power { exponent: 0.7 }.satisfies_robbins_monro());
        assert!(!AlphaSchedule::Power { exponent: 0.5 }.satisfies_robbins_monro());
        let cfg = LearningConfig {
            alpha_schedule: AlphaSchedule::Constant { value: 0.1 },
            ..LearningConfig::default()
        };
        let w = cfg.validate().unwrap();
        assert!(w.iter().any(|s| s.contains("Robbins-Monro")));
        assert!(LearningConfig::default().validate().unwrap().is_empty());
        assert!(LearningConfig { gamma: 1.0, ..LearningConfig::default() }.validate().is_err());
    }

    #[test]
    fn epsilon_greedy_distribution() {
        let mut t = QTable::new(1, 10, 1);
        q_update(&mut t, (0, 3, 0), 1.0, 0.0, 1.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert_eq!(epsilon_greedy(&t, 0, Some(0), 0.0, Side::Defender, &mut rng), 3);
        }
        let draws = 100_000;
        let mut counts = [0usize; 10];
        for _ in 0..draws {
            counts[epsilon_greedy(&t, 0, Some(0), 1.0, Side::Defender, &mut rng)] += 1;
        }
        let sigma = (draws as f64 * 0.1 * 0.9).sqrt();
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() <= 3.0 * sigma);
        }
        let mut greedy = 0;
        for _ in 0..draws {
            if epsilon_greedy(&t, 0, Some(0), 0.2, Side::Defender, &mut rng) == 3 {
                greedy += 1;
            }
        }
        let sigma = (draws as f64 * 0.82 * 0.18).sqrt();
        assert!((greedy as f64 - 82_000.0).abs() <= 3.0 * sigma);
    }

    #[test]
    fn single_agent_against_pure_attack() {
        let m = matrix(&[&[0.2, 0.9, 0.4], &[0.8, 0.1, 0.3]]);
        let cfg = LearningConfig { episodes: 5_000, epsilon_decay: 0.999, ..LearningConfig::default() };
        let p = train_single_agent(&m, &MixedStrategy::pure(2, 0), &cfg).unwrap();
        assert_eq!(p.greedy[0], 1);
    }

    #[test]
    fn single_agent_constant_game_is_indifferent() {
        let m = matrix(&[&[0.6, 0.6], &[0.6, 0.6]]);
        let cfg = LearningConfig { episodes: 5_000, epsilon_decay: 0.999, ..LearningConfig::default() };
        let p = train_single_agent(&m, &MixedStrategy::uniform(2), &cfg).unwrap();
        for row in &p.q[0] {
            for &q in row {
                assert!((q - 0.6).abs() <= 0.01);
            }
        }
    }

    #[test]
    fn single_agent_q_tracks_payoffs() {
        let m = matrix(&[&[0.2, 0.9, 0.4], &[0.8, 0.1, 0.3], &[0.5, 0.5, 0.7]]);
        let cfg = LearningConfig::default();
        let p = train_single_agent(&m, &MixedStrategy::from_weights(&[0.5, 0.3, 0.2]), &cfg).unwrap();
        for j in 0..3 {
            for i in 0..3 {
                assert!((p.q[0][j][i] - m.get(i, j)).abs() <= 0.05);
            }
        }
        assert!(!p.telemetry.is_empty());
    }

    #[test]
    fn saddle_point_game_is_recovered() {
        // Saddle at (A2, D3): 0.5 is the max of row 2 and the min of column 3.
        let m = matrix(&[&[0.9, 0.3, 0.6], &[0.2, 0.4, 0.5], &[0.8, 0.7, 0.55]]);
        let out = train_multi_agent(&m, &LearningConfig { episodes: 20_000, epsilon_decay: 0.9995, ..LearningConfig::default() }).unwrap();
        assert!(out.converged);
        assert_eq!((out.attacker.greedy[0], out.defender.greedy[0]), (1, 2));
        assert!((out.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matching_pennies_is_flagged() {
        let m = matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let out = train_multi_agent(&m, &LearningConfig { episodes: 10_000, ..LearningConfig::default() }).unwrap();
        assert!(!out.converged);
        assert!((0.0..=1.0).contains(&out.value));
    }

    #[test]
    fn constant_game_value() {
        let m = matrix(&[&[0.4, 0.4], &[0.4, 0.4]]);
        let out = train_multi_agent(&m, &LearningConfig { episodes: 2_000, ..LearningConfig::default() }).unwrap();
        assert!((out.value - 0.4).abs() <= 0.01);
    }

    #[test]
    fn single_state_mdp_reduces_to_multi_agent() {
        let m = matrix(&[&[0.9, 0.3, 0.6], &[0.2, 0.4, 0.5]]);
        let cfg = LearningConfig { episodes: 3_000, seed: 17, ..LearningConfig::default() };
        let a = train_multi_agent(&m, &cfg).unwrap();
        let b = mdp_train(&StageMdp::single_state(&m), &cfg).unwrap();
        assert_eq!(a.attacker, b.attacker);
        assert_eq!(a.defender, b.defender);
        assert_eq!(a.value, b.values[0]);
    }

    #[test]
    fn two_state_chain_matches_value_iteration() {
        // One attack, two defenses, deterministic alternation 0 ↔ 1.
        let mdp = StageMdp {
            states: vec!["a".into(), "b".into()],
            attacks: 1,
            defenses: 2,
            transition: vec![
                vec![vec![vec![0.0, 1.0], vec![0.0, 1.0]]],
                vec![vec![vec![1.0, 0.0], vec![1.0, 0.0]]],
            ],
            reward: vec![vec![vec![0.2, 0.6]], vec![vec![0.9, 0.1]]],
        };
        let gamma = 0.5;
        let mut v = [0.0f64; 2];
        for _ in 0..200 {
            v = [
                (0.2f64 + gamma * v[1]).max(0.6 + gamma * v[1]),
                (0.9f64 + gamma * v[0]).max(0.1 + gamma * v[0]),
            ];
        }
        let expected = [[0.2 + gamma * v[1], 0.6 + gamma * v[1]], [0.9 + gamma * v[0], 0.1 + gamma * v[0]]];
        let cfg = LearningConfig { gamma, horizon: 5, episodes: 40_000, epsilon_decay: 0.9999, ..LearningConfig::default() };
        let out = mdp_train(&mdp, &cfg).unwrap();
        for s in 0..2 {
            for d in 0..2 {
                let q = out.defender.q[s][d][0];
                assert!((q - expected[s][d]).abs() <= 0.05, "Q({s},{d}) = {q} vs {}", expected[s][d]);
            }
        }
    }

    #[test]
    fn absorbing_zero_state_stays_zero() {
        let m = matrix(&[&[0.9, 0.3], &[0.2, 0.95]]);
        let mut mdp = StageMdp::three_state(&m, &MdpParams::default()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                mdp.transition[2][i][j] = vec![0.0, 0.0, 1.0];
                mdp.reward[2][i][j] = 0.0;
            }
        }
        let out = mdp_train(&mdp, &LearningConfig { gamma: 0.9, horizon: 4, episodes: 3_000, ..LearningConfig::default() }).unwrap();
        assert!(out.defender.q[2].iter().flatten().all(|&q| q == 0.0));
        assert!(out.attacker.q[2].iter().flatten().all(|&q| q == 0.0));
    }

    #[test]
    fn default_three_state_rows_are_distributions() {
        let m = matrix(&[&[0.9, 0.3], &[0.2, 0.85]]);
        let mdp = StageMdp::three_state(&m, &MdpParams::default()).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(&mdp.transition[0][1][0], &[0.1, 0.9, 0.0]));
        assert!(close(&mdp.transition[1][0][0], &[0.7, 0.3, 0.0]));
        assert_eq!(mdp.reward[1][0][0], 0.75 * 0.9);
    }

    #[test]
    fn training_is_deterministic() {
        let m = matrix(&[&[0.9, 0.3, 0.6], &[0.2, 0.4, 0.5]]);
        let cfg = LearningConfig { episodes: 2_000, seed: 3, ..LearningConfig::default() };
        assert_eq!(train_multi_agent(&m, &cfg).unwrap(), train_multi_agent(&m, &cfg).unwrap());
        let op = MixedStrategy::uniform(2);
        assert_eq!(
            train_single_agent(&m, &op, &cfg).unwrap(),
            train_single_agent(&m, &op, &cfg).unwrap()
        );
    }

    #[test]
    fn pac_bound_examples() {
        let n = pac_sample_bound(2, 2, 1, 0.5, 0.1, 0.1).unwrap();
        assert!((n - 25_600.0 * 40f64.ln()).abs() < 1e-6);
        assert!((n - 94_435.3).abs() < 0.1);
        let half = pac_sample_bound(2, 2, 1, 0.5, 0.05, 0.1).unwrap();
        assert!((half / n - 4.0).abs() < 1e-12);
        assert!(pac_sample_bound(2, 2, 1, 0.6, 0.1, 0.1).unwrap() > n);
        assert!(pac_sample_bound(2, 2, 2, 0.5, 0.1, 0.1).unwrap() > n);
        assert!(pac_sample_bound(0, 2, 1, 0.5, 0.1, 0.1).is_err());
        assert!(pac_sample_bound(2, 2, 1, 1.0, 0.1, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn q_values_stay_bounded(
            rewards in prop::collection::vec(0.0f64..=1.0, 1..200),
            gamma in 0.0f64..0.99,
            constant in prop::option::of(0.01f64..=1.0),
        ) {
            let schedule = constant.map_or(AlphaSchedule::Harmonic, |value| AlphaSchedule::Constant { value });
            let mut t = QTable::new(1, 2, 1);
            let cap = 1.0 / (1.0 - gamma);
            for (k, r) in rewards.iter().enumerate() {
                let key = (0, k % 2, 0);
                let next_best = t.get((0, 0, 0)).max(t.get((0, 1, 0)));
                let alpha = schedule.alpha(t.touch(key));
                let q = q_update(&mut t, key, *r, next_best, alpha, gamma).unwrap();
                prop_assert!(q >= 0.0 && q <= cap + 1e-9);
            }
        }
    }
}
