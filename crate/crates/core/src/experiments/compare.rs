use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{baseline, monte_carlo, paired_t_test, BaselineKind, DefensePolicy, McConfig, McOutcome, StatsReport, Testbed};
use crate::error::{Error, Result};
use crate::gamesolve::{nash_exact, qre_fixed_point, regret_matching_with, stackelberg, SolveParams};
use crate::marl::{train_multi_agent, train_single_agent, LearningConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StrategyMethod {
    #[serde(rename = "RDS")]
    Rds,
    #[serde(rename = "RBD")]
    Rbd,
    #[serde(rename = "SOD")]
    Sod,
    #[serde(rename = "nash")]
    Nash,
    #[serde(rename = "stackelberg")]
    Stackelberg,
    #[serde(rename = "regret")]
    Regret,
    #[serde(rename = "softmax")]
    Softmax,
    #[serde(rename = "qlearn")]
    Qlearn,
    #[serde(rename = "maql")]
    Maql,
}

impl StrategyMethod {
    pub const ALL: [StrategyMethod; 9] = [
        StrategyMethod::Rds,
        StrategyMethod::Rbd,
        StrategyMethod::Sod,
        StrategyMethod::Nash,
        StrategyMethod::Stackelberg,
        StrategyMethod::Regret,
        StrategyMethod::Softmax,
        StrategyMethod::Qlearn,
        StrategyMethod::Maql,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyMethod::Rds => "RDS",
            StrategyMethod::Rbd => "RBD",
            StrategyMethod::Sod => "SOD",
            StrategyMethod::Nash => "nash",
            StrategyMethod::Stackelberg => "stackelberg",
            StrategyMethod::Regret => "regret",
            StrategyMethod::Softmax => "softmax",
            StrategyMethod::Qlearn => "qlearn",
            StrategyMethod::Maql => "maql",
        }
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, StrategyMethod::Rds | StrategyMethod::Rbd | StrategyMethod::Sod)
    }

    /// Comma-separated tags, or `all`.
    pub fn parse_list(text: &str) -> Result<Vec<StrategyMethod>> {
        if text.trim().eq_ignore_ascii_case("all") {
            return Ok(StrategyMethod::ALL.to_vec());
        }
        let mut out = Vec::new();
        for tag in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let m: StrategyMethod = tag.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(out)
    }
}

impl FromStr for StrategyMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<StrategyMethod> {
        StrategyMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

impl fmt::Display for StrategyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareSettings {
    pub solve: SolveParams,
    pub learning: LearningConfig,
    /// Row the improvements are measured against; the first requested
    /// method when this one is not requested.
    pub reference: StrategyMethod,
}

impl Default for CompareSettings {
    fn default() -> Self {
        CompareSettings {
            solve: SolveParams::default(),
            learning: LearningConfig::default(),
            reference: StrategyMethod::Sod,
        }
    }
}

/// Defense policy each method commits to on the nominal matrix.
///
/// Solver methods play their defender mix; `qlearn` plays the greedy reply
/// learned against the equilibrium attacker mix; `maql` plays the greedy
/// defense of simultaneous learning.
pub fn derive_policy(tb: &Testbed, method: StrategyMethod, settings: &CompareSettings) -> Result<DefensePolicy> {
    let m = &tb.nominal;
    let mixed = |mix| Ok(DefensePolicy::Mixed { mix });
    match method {
        StrategyMethod::Rds => baseline(BaselineKind::Rds, m, &tb.base, &tb.catalog),
        StrategyMethod::Rbd => baseline(BaselineKind::Rbd, m, &tb.base, &tb.catalog),
        StrategyMethod::Sod => baseline(BaselineKind::Sod, m, &tb.base, &tb.catalog),
        StrategyMethod::Nash => mixed(nash_exact(m)?.defender),
        StrategyMethod::Stackelberg => Ok(DefensePolicy::pure(m.cols(), stackelberg(m).defense)),
        StrategyMethod::Regret => {
            let p = &settings.solve;
            mixed(regret_matching_with(m, p.iters, p.seed, p.iters.max(1))?.defender)
        }
        StrategyMethod::Softmax => {
            let p = &settings.solve;
            mixed(qre_fixed_point(m, p.beta, p.beta, p.damping, p.iters, 1e-12)?.defender)
        }
        StrategyMethod::Qlearn => {
            let policy = train_single_agent(m, &tb.attacker_equilibrium, &settings.learning)?;
            Ok(DefensePolicy::pure(m.cols(), policy.greedy[0]))
        }
        StrategyMethod::Maql => {
            let out = train_multi_agent(m, &settings.learning)?;
            Ok(DefensePolicy::pure(m.cols(), out.defender.greedy[0]))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: StrategyMethod,
    pub mean: f64,
    pub std_dev: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub samples: usize,
    pub reference: StrategyMethod,
    /// `100·(mean − reference mean) / reference mean`.
    pub improvement_pct: f64,
    /// Paired t test against the reference; absent for the reference row
    /// and for identical score sequences.
    pub t_vs_reference: Option<f64>,
    pub p_vs_reference: Option<f64>,
    /// Policy derivation plus evaluation, seconds.
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub policies: Vec<DefensePolicy>,
    pub outcomes: Vec<McOutcome>,
}

#[derive(Serialize)]
struct TableRow<'a> {
    method: &'a str,
    mean: f64,
    std_dev: f64,
    ci95_low: f64,
    ci95_high: f64,
    samples: usize,
    reference: &'a str,
    improvement_pct: f64,
    t_vs_reference: Option<f64>,
    p_vs_reference: Option<f64>,
}

impl Comparison {
    /// Comparison table without timings, so equal seeds give equal bytes.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(TableRow {
                method: r.method.name(),
                mean: r.mean,
                std_dev: r.std_dev,
                ci95_low: r.ci95_low,
                ci95_high: r.ci95_high,
                samples: r.samples,
                reference: r.reference.name(),
                improvement_pct: r.improvement_pct,
                t_vs_reference: r.t_vs_reference,
                p_vs_reference: r.p_vs_reference,
            })?;
        }
        finish(w)
    }

    pub fn timings_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["method", "wall_time_s"])?;
        for r in &self.rows {
            w.write_record([r.method.name(), &format!("{:.6}", r.wall_time_s)])?;
        }
        finish(w)
    }

    /// Per-method statistics keyed by method tag.
    pub fn stats(&self) -> Vec<(StrategyMethod, &StatsReport)> {
        self.rows.iter().map(|r| r.method).zip(self.outcomes.iter().map(|o| &o.report)).collect()
    }

    pub fn row(&self, method: StrategyMethod) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn outcome(&self, method: StrategyMethod) -> Option<&McOutcome> {
        self.rows.iter().position(|r| r.method == method).map(|k| &self.outcomes[k])
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Evaluate every requested method under one [`McConfig`], so run `k` of
/// each method shares its load perturbation and random draws.
pub fn compare_strategies(
    tb: &Testbed,
    methods: &[StrategyMethod],
    mc: &McConfig,
    settings: &CompareSettings,
) -> Result<Comparison> {
    if methods.is_empty() {
        return Err(Error::Parameter("no methods requested".into()));
    }
    mc.validate()?;
    let reference = if methods.contains(&settings.reference) { settings.reference } else { methods[0] };
    let mut policies = Vec::with_capacity(methods.len());
    let mut outcomes = Vec::with_capacity(methods.len());
    let mut times = Vec::with_capacity(methods.len());
    for &method in methods {
        let start = Instant::now();
        let policy = derive_policy(tb, method, settings)?;
        let out = monte_carlo(tb, &policy, mc)?;
        times.push(start.elapsed().as_secs_f64());
        policies.push(policy);
        outcomes.push(out);
    }
    let ref_k = methods.iter().position(|&m| m == reference).expect("reference is requested");
    let ref_scores = outcomes[ref_k].scores();
    let ref_mean = outcomes[ref_k].report.mean;
    let rows = methods
        .iter()
        .zip(&outcomes)
        .zip(&times)
        .map(|((&method, out), &wall_time_s)| {
            let r = &out.report;
            let test = if method == reference {
                None
            } else {
                paired_t_test(&out.scores(), &ref_scores).ok()
            };
            ComparisonRow {
                method,
                mean: r.mean,
                std_dev: r.std_dev,
                ci95_low: r.ci95_low,
                ci95_high: r.ci95_high,
                samples: r.samples,
                reference,
                improvement_pct: if ref_mean != 0.0 { 100.0 * (r.mean - ref_mean) / ref_mean } else { 0.0 },
                t_vs_reference: test.map(|t| t.t),
                p_vs_reference: test.map(|t| t.p),
                wall_time_s,
            }
        })
        .collect();
    Ok(Comparison { rows, policies, outcomes })
}

#[cfg(test)]
mod tests {
    use super::super::tests::testbed;
    use super::super::AttackDistribution;
    use super::*;

    fn quick() -> CompareSettings {
        CompareSettings {
            solve: SolveParams { iters: 5_000, ..SolveParams::default() },
            learning: LearningConfig { episodes: 5_000, epsilon_decay: 0.999, ..LearningConfig::default() },
            reference: StrategyMethod::Sod,
        }
    }

    #[test]
    fn method_tags_round_trip() {
        for m in StrategyMethod::ALL {
            assert_eq!(m.name().parse::<StrategyMethod>().unwrap(), m);
        }
        assert_eq!(StrategyMethod::parse_list("all").unwrap().len(), 9);
        assert_eq!(
            StrategyMethod::parse_list("SOD, nash,SOD").unwrap(),
            vec![StrategyMethod::Sod, StrategyMethod::Nash]
        );
        assert!(matches!(StrategyMethod::parse_list("SOD,bogus"), Err(Error::UnknownMethod(_))));
    }

    #[test]
    fn single_method_is_its_own_reference() {
        let tb = testbed();
        let mc = McConfig { runs: 10, ..McConfig::default() };
        let c = compare_strategies(tb, &[StrategyMethod::Nash], &mc, &quick()).unwrap();
        assert_eq!(c.rows.len(), 1);
        assert_eq!(c.rows[0].reference, StrategyMethod::Nash);
        assert_eq!(c.rows[0].improvement_pct, 0.0);
        assert!(c.rows[0].t_vs_reference.is_none());
    }

    #[test]
    fn stackelberg_is_not_worse_than_sod() {
        let tb = testbed();
        let mc = McConfig { runs: 100, seed: 4, ..McConfig::default() };
        let c = compare_strategies(tb, &[StrategyMethod::Sod, StrategyMethod::Stackelberg], &mc, &quick()).unwrap();
        let (sod, st) = (c.row(StrategyMethod::Sod).unwrap(), c.row(StrategyMethod::Stackelberg).unwrap());
        let width = sod.ci95_high - sod.ci95_low;
        assert!(st.mean >= sod.mean - 2.0 * width);
    }

    #[test]
    fn comparison_is_reproducible() {
        let tb = testbed();
        let mc = McConfig { runs: 15, seed: 3, attack_distribution: AttackDistribution::Uniform, ..McConfig::default() };
        let methods = [StrategyMethod::Rds, StrategyMethod::Softmax, StrategyMethod::Maql];
        let a = compare_strategies(tb, &methods, &mc, &quick()).unwrap();
        let b = compare_strategies(tb, &methods, &mc, &quick()).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert!(a.to_csv().unwrap().starts_with("method,mean,std_dev,ci95_low,ci95_high,samples,reference,"));
        // Reference SOD is absent, so RDS (first) is used.
        assert!(a.rows.iter().all(|r| r.reference == StrategyMethod::Rds));
    }

    #[test]
    fn empty_request_is_rejected() {
        assert!(compare_strategies(testbed(), &[], &McConfig::default(), &quick()).is_err());
    }
}
