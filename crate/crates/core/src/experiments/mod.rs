//! Seeded Monte Carlo evaluation of defense policies.
//!
//! Run `k` draws everything from `ChaCha8Rng::seed_from_u64(seed + k)` in a
//! fixed order (one load factor per bus, one attack draw, one defense
//! draw), so every policy evaluated with the same [`McConfig`] sees the same
//! perturbations and uniforms per run index.

mod baselines;
mod compare;
mod probe;
mod stats;

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamesolve::{nash_exact, row_payoffs, MixedStrategy};
use crate::netmodel::NetworkState;
use crate::resilience::{build_payoff_matrix, unified_score, AhpWeights, PayoffMatrix};
use crate::scenario::{evaluate_pair, ScenarioCatalog};

pub use baselines::{baseline, classify_attack, rbd_response, sod_column, AttackClass, BaselineKind};
pub use compare::{
    compare_strategies, derive_policy, Comparison, ComparisonRow, CompareSettings, StrategyMethod,
};
pub use probe::{peak_memory_kb, scalability_probe, ProbeRow, PUBLISHED_33BUS_STATES};
pub use stats::{ln_gamma, paired_t_test, regularized_incomplete_beta, student_t_two_sided, TTest};

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackDistribution {
    Uniform,
    /// The attacker's mix from the exact solution of the nominal matrix.
    #[serde(alias = "equilibrium-mix")]
    Equilibrium,
    /// The row minimizing the policy's expected nominal payoff.
    #[serde(alias = "adversarial-best-response")]
    Adversarial,
}

impl FromStr for AttackDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<AttackDistribution> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(AttackDistribution::Uniform),
            "equilibrium" | "equilibrium-mix" => Ok(AttackDistribution::Equilibrium),
            "adversarial" | "adversarial-best-response" => Ok(AttackDistribution::Adversarial),
            other => Err(Error::Parameter(format!("unknown attack distribution `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub runs: usize,
    pub seed: u64,
    /// Half-width of the uniform per-bus load multiplier around 1.
    pub perturbation: f64,
    pub attack_distribution: AttackDistribution,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            runs: 1000,
            seed: 0,
            perturbation: 0.10,
            attack_distribution: AttackDistribution::Adversarial,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Parameter("runs must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.perturbation) {
            return Err(Error::Parameter(format!(
                "perturbation {} must lie in [0, 1] to keep loads non-negative",
                self.perturbation
            )));
        }
        Ok(())
    }
}

/// How a defender picks its action in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DefensePolicy {
    /// Defense sampled from a fixed mix, blind to the attack.
    Mixed { mix: MixedStrategy },
    /// Defense index chosen per attack index.
    Reactive { response: Vec<usize> },
}

impl DefensePolicy {
    pub fn pure(n: usize, k: usize) -> DefensePolicy {
        DefensePolicy::Mixed { mix: MixedStrategy::pure(n, k) }
    }

    /// Defense for `attack` given a uniform draw `u ∈ [0, 1)`.
    pub fn defense_for(&self, attack: usize, u: f64) -> usize {
        match self {
            DefensePolicy::Mixed { mix } => pick(&mix.probs, u),
            DefensePolicy::Reactive { response } => response[attack],
        }
    }

    /// Expected nominal payoff of each attack row under this policy.
    pub fn row_values(&self, m: &PayoffMatrix) -> Result<Vec<f64>> {
        match self {
            DefensePolicy::Mixed { mix } => row_payoffs(m, mix),
            DefensePolicy::Reactive { response } => {
                if response.len() != m.rows() {
                    return Err(Error::Dimension { expected: m.rows(), got: response.len() });
                }
                if let Some(&j) = response.iter().find(|&&j| j >= m.cols()) {
                    return Err(Error::Dimension { expected: m.cols(), got: j + 1 });
                }
                Ok(response.iter().enumerate().map(|(i, &j)| m.get(i, j)).collect())
            }
        }
    }

    /// Worst attack for the defender, lowest index on ties.
    pub fn adversarial_attack(&self, m: &PayoffMatrix) -> Result<usize> {
        let values = self.row_values(m)?;
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if *v < values[best] {
                best = i;
            }
        }
        Ok(best)
    }
}

/// Inverse-CDF index of `u` under `probs`; never lands on a zero entry.
pub(crate) fn pick(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc && *p > 0.0 {
            return k;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Network, catalog and weights with the nominal matrix they induce.
#[derive(Debug, Clone)]
pub struct Testbed {
    pub base: NetworkState,
    pub catalog: ScenarioCatalog,
    pub weights: AhpWeights,
    pub nominal: PayoffMatrix,
    /// Attacker mix of the exact solution of `nominal`.
    pub attacker_equilibrium: MixedStrategy,
}

impl Testbed {
    pub fn new(base: NetworkState, catalog: ScenarioCatalog, weights: AhpWeights) -> Result<Testbed> {
        let nominal = build_payoff_matrix(&base, &catalog, &weights)?;
        Testbed::with_matrix(base, catalog, weights, nominal)
    }

    /// Testbed around an already computed nominal matrix.
    pub fn with_matrix(
        base: NetworkState,
        catalog: ScenarioCatalog,
        weights: AhpWeights,
        nominal: PayoffMatrix,
    ) -> Result<Testbed> {
        if nominal.attack_ids != catalog.attack_ids() || nominal.defense_ids != catalog.defense_ids() {
            return Err(Error::Validation("payoff matrix labels do not match the catalog".into()));
        }
        let attacker_equilibrium = nash_exact(&nominal)?.attacker;
        Ok(Testbed {
            base,
            catalog,
            weights,
            nominal,
            attacker_equilibrium,
        })
    }

    fn attack_probs(&self, policy: &DefensePolicy, dist: AttackDistribution) -> Result<Vec<f64>> {
        let m = self.nominal.rows();
        Ok(match dist {
            AttackDistribution::Uniform => vec![1.0 / m as f64; m],
            AttackDistribution::Equilibrium => self.attacker_equilibrium.probs.clone(),
            AttackDistribution::Adversarial => MixedStrategy::pure(m, policy.adversarial_attack(&self.nominal)?).probs,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub attack: String,
    pub defense: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub mean: f64,
    pub std_dev: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub samples: usize,
    /// Runs per attack id.
    pub attack_counts: BTreeMap<String, usize>,
    /// Runs per defense id.
    pub defense_counts: BTreeMap<String, usize>,
}

impl StatsReport {
    /// Mean, sample standard deviation (n−1) and the normal 95% interval.
    pub fn from_samples(samples: &[f64]) -> Result<StatsReport> {
        if samples.is_empty() {
            return Err(Error::Degenerate("no samples".into()));
        }
        let n = samples.len() as f64;
        let constant = samples.iter().all(|&x| x == samples[0]);
        let mean = if constant { samples[0] } else { samples.iter().sum::<f64>() / n };
        let std_dev = if samples.len() > 1 && !constant {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let half = Z95 * std_dev / n.sqrt();
        Ok(StatsReport {
            mean,
            std_dev,
            ci95_low: mean - half,
            ci95_high: mean + half,
            samples: samples.len(),
            attack_counts: BTreeMap::new(),
            defense_counts: BTreeMap::new(),
        })
    }

    pub fn ci_width(&self) -> f64 {
        self.ci95_high - self.ci95_low
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOutcome {
    pub report: StatsReport,
    pub runs: Vec<RunRecord>,
}

impl McOutcome {
    pub fn scores(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.score).collect()
    }

    /// One row per run.
    pub fn runs_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.runs {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Per-bus load multipliers for run `k`, drawn first from the run's stream.
fn draw_run(mc: &McConfig, buses: usize, run: usize) -> (Vec<f64>, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed.wrapping_add(run as u64));
    let factors = (0..buses)
        .map(|_| 1.0 + mc.perturbation * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    let attack_u = rng.random::<f64>();
    let defense_u = rng.random::<f64>();
    (factors, attack_u, defense_u)
}

/// Evaluate `policy` over `mc.runs` perturbed replications.
///
/// Each run scales every load by its own multiplier, draws an attack from
/// the configured distribution, picks the policy's defense and scores the
/// pair end to end on the perturbed network.
pub fn monte_carlo(tb: &Testbed, policy: &DefensePolicy, mc: &McConfig) -> Result<McOutcome> {
    mc.validate()?;
    let attack_probs = tb.attack_probs(policy, mc.attack_distribution)?;
    // Reject malformed policies before fanning out.
    policy.row_values(&tb.nominal)?;
    let runs: Vec<RunRecord> = (0..mc.runs)
        .into_par_iter()
        .map(|k| {
            let (factors, attack_u, defense_u) = draw_run(mc, tb.base.bus_count(), k);
            let i = pick(&attack_probs, attack_u);
            let j = policy.defense_for(i, defense_u);
            let (attack, defense) = (&tb.catalog.attacks[i], &tb.catalog.defenses[j]);
            let perturbed = tb.base.with_load_factors(&factors)?;
            let card = evaluate_pair(&perturbed, attack, defense)?;
            Ok(RunRecord {
                run: k,
                attack: attack.id.clone(),
                defense: defense.id.clone(),
                score: unified_score(&card, &tb.weights),
            })
        })
        .collect::<Result<_>>()?;
    let scores: Vec<f64> = runs.iter().map(|r| r.score).collect();
    let mut report = StatsReport::from_samples(&scores)?;
    for r in &runs {
        *report.attack_counts.entry(r.attack.clone()).or_default() += 1;
        *report.defense_counts.entry(r.defense.clone()).or_default() += 1;
    }
    Ok(McOutcome { report, runs })
}
