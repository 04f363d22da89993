//! Resilience metrics, AHP weighting and payoff-matrix construction.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{energized_buses, NetworkState, ServedLoadReport};
use crate::scenario::{self, ScenarioCatalog};

/// Diagnostic tags attached to a scorecard.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreFlag {
    NonConvergence,
    ZeroDemand,
    EmptyCriticalSet,
    NoDerAvailable,
    VoltageViolation,
    SwitchCloseSkipped(String),
}

impl fmt::Display for ScoreFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreFlag::NonConvergence => f.write_str("non_convergence"),
            ScoreFlag::ZeroDemand => f.write_str("zero_demand"),
            ScoreFlag::EmptyCriticalSet => f.write_str("empty_critical_set"),
            ScoreFlag::NoDerAvailable => f.write_str("no_der_available"),
            ScoreFlag::VoltageViolation => f.write_str("voltage_violation"),
            ScoreFlag::SwitchCloseSkipped(id) => write!(f, "switch_close_skipped:{id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResilienceScorecard {
    pub lsr: f64,
    pub clr: f64,
    pub tss: f64,
    pub drs: f64,
    pub flags: BTreeSet<ScoreFlag>,
}

impl ResilienceScorecard {
    pub fn new(lsr: f64, clr: f64, tss: f64, drs: f64) -> ResilienceScorecard {
        ResilienceScorecard {
            lsr,
            clr,
            tss,
            drs,
            flags: BTreeSet::new(),
        }
    }

    /// Metrics in weight order: LSR, CLR, TSS, DRS.
    pub fn metrics(&self) -> [f64; 4] {
        [self.lsr, self.clr, self.tss, self.drs]
    }

    /// Scorecard for a post-defense state measured against the pre-attack
    /// demand of `base`.
    pub fn from_operation(
        base: &NetworkState,
        defended: &NetworkState,
        post: &ServedLoadReport,
    ) -> ResilienceScorecard {
        let mut flags = BTreeSet::new();
        if total_demand(base) <= 0.0 {
            flags.insert(ScoreFlag::ZeroDemand);
        }
        if critical_demand(base) <= 0.0 {
            flags.insert(ScoreFlag::EmptyCriticalSet);
        }
        if post.der_available.values().sum::<f64>() <= 0.0 {
            flags.insert(ScoreFlag::NoDerAvailable);
        }
        if !post.voltage_violations.is_empty() {
            flags.insert(ScoreFlag::VoltageViolation);
        }
        ResilienceScorecard {
            lsr: lsr(post, base),
            clr: clr(post, base),
            tss: tss(defended),
            drs: drs(post),
            flags,
        }
    }
}

fn total_demand(base: &NetworkState) -> f64 {
    base.buses.iter().map(|b| base.demand_p(b.id)).sum()
}

fn critical_demand(base: &NetworkState) -> f64 {
    base.critical_buses().map(|b| base.demand_p(b.id)).sum()
}

/// Served over pre-attack demand; 1.0 when there is no demand.
pub fn lsr(report: &ServedLoadReport, base: &NetworkState) -> f64 {
    let demand = total_demand(base);
    if demand <= 0.0 {
        return 1.0;
    }
    (report.total_served_p() / demand).clamp(0.0, 1.0)
}

/// LSR restricted to critical buses; 1.0 when there are none.
pub fn clr(report: &ServedLoadReport, base: &NetworkState) -> f64 {
    let demand = critical_demand(base);
    if demand <= 0.0 {
        return 1.0;
    }
    let served: f64 = base.critical_buses().map(|b| report.served(b.id)).sum();
    (served / demand).clamp(0.0, 1.0)
}

/// Share of buses lying in an energized island.
pub fn tss(state: &NetworkState) -> f64 {
    energized_buses(state).len() as f64 / state.bus_count() as f64
}

/// DER output used over online DER capacity; 0.0 when nothing is online.
pub fn drs(report: &ServedLoadReport) -> f64 {
    let available: f64 = report.der_available.values().sum();
    if available <= 0.0 {
        return 0.0;
    }
    (report.der_utilized.values().sum::<f64>() / available).clamp(0.0, 1.0)
}

pub type AhpMatrix = [[f64; 4]; 4];

/// Default expert judgments over (LSR, CLR, TSS, DRS).
pub const DEFAULT_AHP: AhpMatrix = [
    [1.0, 0.5, 3.0, 2.0],
    [2.0, 1.0, 4.0, 3.0],
    [1.0 / 3.0, 0.25, 1.0, 0.5],
    [0.5, 1.0 / 3.0, 2.0, 1.0],
];

/// Saaty random index for a 4×4 matrix.
pub const RANDOM_INDEX_4: f64 = 0.90;

const POWER_TOLERANCE: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AhpMethod {
    /// Perron vector by power iteration.
    #[default]
    PrincipalEigenvector,
    /// Mean of the column-normalized matrix rows.
    ColumnMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhpWeights {
    pub w: [f64; 4],
    pub lambda_max: f64,
    pub consistency_index: f64,
    pub consistency_ratio: f64,
    pub method: AhpMethod,
}

impl Default for AhpWeights {
    fn default() -> Self {
        ahp_weights(&DEFAULT_AHP).expect("default judgments are reciprocal")
    }
}

impl AhpWeights {
    /// Weights supplied directly, with no comparison matrix behind them.
    pub fn from_vector(w: [f64; 4]) -> Result<AhpWeights> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::Validation(format!(
                "weights {w:?} must be non-negative and sum to 1"
            )));
        }
        Ok(AhpWeights {
            w,
            lambda_max: 4.0,
            consistency_index: 0.0,
            consistency_ratio: 0.0,
            method: AhpMethod::ColumnMean,
        })
    }
}

pub fn check_reciprocal(a: &AhpMatrix) -> Result<()> {
    for i in 0..4 {
        if (a[i][i] - 1.0).abs() > 1e-6 {
            return Err(Error::Validation(format!("a[{i}][{i}] = {} must be 1", a[i][i])));
        }
        for j in 0..4 {
            if !(a[i][j].is_finite() && a[i][j] > 0.0) {
                return Err(Error::Validation(format!(
                    "a[{i}][{j}] = {} must be positive",
                    a[i][j]
                )));
            }
            if (a[i][j] - 1.0 / a[j][i]).abs() > 1e-6 {
                return Err(Error::Validation(format!(
                    "a[{i}][{j}] = {} is not the reciprocal of a[{j}][{i}] = {}",
                    a[i][j], a[j][i]
                )));
            }
        }
    }
    Ok(())
}

fn mat_vec(a: &AhpMatrix, w: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(a) {
        *o = row.iter().zip(w).map(|(x, y)| x * y).sum();
    }
    out
}

fn normalized(v: [f64; 4]) -> [f64; 4] {
    let s: f64 = v.iter().sum();
    v.map(|x| x / s)
}

fn power_iteration(a: &AhpMatrix) -> [f64; 4] {
    let mut w = [0.25; 4];
    for _ in 0..POWER_MAX_ITERS {
        let next = normalized(mat_vec(a, &w));
        let change = next
            .iter()
            .zip(&w)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        w = next;
        if change <= POWER_TOLERANCE {
            break;
        }
    }
    w
}

fn column_mean(a: &AhpMatrix) -> [f64; 4] {
    let mut col = [0.0; 4];
    for row in a {
        for (c, x) in col.iter_mut().zip(row) {
            *c += x;
        }
    }
    let mut w = [0.0; 4];
    for (wi, row) in w.iter_mut().zip(a) {
        *wi = row.iter().zip(&col).map(|(x, c)| x / c).sum::<f64>() / 4.0;
    }
    w
}

pub fn ahp_weights(a: &AhpMatrix) -> Result<AhpWeights> {
    ahp_weights_with(a, AhpMethod::PrincipalEigenvector)
}

/// Priority vector and consistency figures; `lambda_max` is the mean of
/// `(A w)_i / w_i`, exact when `w` is the principal eigenvector.
pub fn ahp_weights_with(a: &AhpMatrix, method: AhpMethod) -> Result<AhpWeights> {
    check_reciprocal(a)?;
    let w = match method {
        AhpMethod::PrincipalEigenvector => power_iteration(a),
        AhpMethod::ColumnMean => column_mean(a),
    };
    let aw = mat_vec(a, &w);
    let lambda_max = aw.iter().zip(&w).map(|(x, y)| x / y).sum::<f64>() / 4.0;
    let consistency_index = ((lambda_max - 4.0) / 3.0).max(0.0);
    Ok(AhpWeights {
        w,
        lambda_max,
        consistency_index,
        consistency_ratio: consistency_index / RANDOM_INDEX_4,
        method,
    })
}

/// Parse a 4×4 comparison matrix from JSON nested arrays.
pub fn load_ahp_matrix(text: &str) -> Result<AhpMatrix> {
    let a: AhpMatrix = serde_json::from_str(text).map_err(Error::from_json)?;
    check_reciprocal(&a)?;
    Ok(a)
}

pub fn unified_score(card: &ResilienceScorecard, weights: &AhpWeights) -> f64 {
    card.metrics()
        .iter()
        .zip(&weights.w)
        .map(|(m, w)| m * w)
        .sum()
}

/// Attack rows, defense columns; the defender maximizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub attack_ids: Vec<String>,
    pub defense_ids: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

impl PayoffMatrix {
    pub fn new(
        attack_ids: Vec<String>,
        defense_ids: Vec<String>,
        entries: Vec<Vec<f64>>,
    ) -> Result<PayoffMatrix> {
        if attack_ids.is_empty() || defense_ids.is_empty() {
            return Err(Error::Validation("payoff matrix must be non-empty".into()));
        }
        if entries.len() != attack_ids.len() {
            return Err(Error::Dimension {
                expected: attack_ids.len(),
                got: entries.len(),
            });
        }
        for row in &entries {
            if row.len() != defense_ids.len() {
                return Err(Error::Dimension {
                    expected: defense_ids.len(),
                    got: row.len(),
                });
            }
            if let Some(x) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("payoff entry {x} is not finite")));
            }
        }
        Ok(PayoffMatrix {
            attack_ids,
            defense_ids,
            entries,
        })
    }

    /// Matrix with generated ids `A1..` and `D1..`.
    pub fn from_rows(entries: Vec<Vec<f64>>) -> Result<PayoffMatrix> {
        let m = entries.len();
        let n = entries.first().map_or(0, Vec::len);
        PayoffMatrix::new(
            (1..=m).map(|i| format!("A{i}")).collect(),
            (1..=n).map(|j| format!("D{j}")).collect(),
            entries,
        )
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.defense_ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(move |r| r[j])
    }

    pub fn in_unit_interval(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .all(|x| (0.0..=1.0).contains(x))
    }

    /// Header row of defense ids, first column of attack ids.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["attack".to_string()];
        header.extend(self.defense_ids.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in self.attack_ids.iter().zip(&self.entries) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        finish_csv(w)
    }

    /// One `attack,defense,value` row per cell, row-major.
    pub fn to_long_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["attack", "defense", "value"])?;
        for (id, row) in self.attack_ids.iter().zip(&self.entries) {
            for (d, x) in self.defense_ids.iter().zip(row) {
                w.write_record([id.as_str(), d.as_str(), &x.to_string()])?;
            }
        }
        finish_csv(w)
    }

    pub fn from_csv(text: &str) -> Result<PayoffMatrix> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let defense_ids: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
        let mut attack_ids = Vec::new();
        let mut entries = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let rec = rec?;
            let mut fields = rec.iter();
            attack_ids.push(fields.next().unwrap_or_default().to_string());
            let row = fields
                .enumerate()
                .map(|(c, s)| {
                    s.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: k + 2,
                        column: c + 2,
                        message: format!("`{s}`: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            entries.push(row);
        }
        PayoffMatrix::new(attack_ids, defense_ids, entries)
    }

    pub fn from_csv_file(path: impl AsRef<Path>) -> Result<PayoffMatrix> {
        PayoffMatrix::from_csv(&std::fs::read_to_string(path)?)
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Payoff matrix together with the scorecard behind every cell.
#[derive(Debug, Clone)]
pub struct PayoffBuild {
    pub matrix: PayoffMatrix,
    pub cards: Vec<Vec<ResilienceScorecard>>,
}

pub fn build_payoff_matrix(
    base: &NetworkState,
    catalog: &ScenarioCatalog,
    weights: &AhpWeights,
) -> Result<PayoffMatrix> {
    Ok(build_payoff_detailed(base, catalog, weights)?.matrix)
}

/// Cells are evaluated in parallel and assembled in row-major order.
pub fn build_payoff_detailed(
    base: &NetworkState,
    catalog: &ScenarioCatalog,
    weights: &AhpWeights,
) -> Result<PayoffBuild> {
    let m = catalog.attacks.len();
    let n = catalog.defenses.len();
    scenario::operate(base)?;
    let cells: Vec<Result<ResilienceScorecard>> = (0..m * n)
        .into_par_iter()
        .map(|k| {
            let (a, d) = (&catalog.attacks[k / n], &catalog.defenses[k % n]);
            scenario::evaluate_from(base, a, d).map_err(|e| Error::Cell {
                attack: a.id.clone(),
                defense: d.id.clone(),
                source: Box::new(e),
            })
        })
        .collect();
    let mut cards: Vec<Vec<ResilienceScorecard>> = Vec::with_capacity(m);
    let mut it = cells.into_iter();
    for _ in 0..m {
        cards.push(it.by_ref().take(n).collect::<Result<Vec<_>>>()?);
    }
    let entries = cards
        .iter()
        .map(|row| row.iter().map(|c| unified_score(c, weights)).collect())
        .collect();
    let matrix = PayoffMatrix::new(catalog.attack_ids(), catalog.defense_ids(), entries)?;
    Ok(PayoffBuild { matrix, cards })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{load_network, power_flow, serve_loads, BranchStatus};
    use crate::scenario::{catalog_default, evaluate_pair};
    use proptest::prelude::*;

    fn report_for(state: &NetworkState) -> ServedLoadReport {
        serve_loads(state, &power_flow(state).unwrap())
    }

    #[test]
    fn lsr_examples() {
        let net = NetworkState::ieee33();
        let mut report = report_for(&net);
        assert_eq!(lsr(&report, &net), 1.0);
        report.served_p.iter_mut().for_each(|x| *x = 0.0);
        assert_eq!(lsr(&report, &net), 0.0);

        let half = load_network(
            r#"{"base_kv": 1, "slack_bus": 1, "buses": [{"id": 1, "p_kw": 2000}, {"id": 2, "p_kw": 2000}],
                "lines": [{"from": 1, "to": 2, "r_ohm": 0.01, "x_ohm": 0.01}]}"#,
        )
        .unwrap();
        let mut r = report_for(&half);
        r.served_p[1] = 0.0;
        assert_eq!(lsr(&r, &half), 0.5);
    }

    /// Four critical loads with ratings 200, 120, 1420, 150 kW.
    fn critical_net() -> NetworkState {
        load_network(
            r#"{"base_kv": 12.66, "slack_bus": 1,
                "buses": [{"id": 1}, {"id": 2, "p_kw": 200}, {"id": 3, "p_kw": 120},
                          {"id": 4, "p_kw": 1420}, {"id": 5, "p_kw": 150}],
                "lines": [{"from": 1, "to": 2, "r_ohm": 0.1, "x_ohm": 0.1},
                          {"from": 2, "to": 3, "r_ohm": 0.1, "x_ohm": 0.1},
                          {"from": 1, "to": 4, "r_ohm": 0.1, "x_ohm": 0.1},
                          {"from": 1, "to": 5, "r_ohm": 0.1, "x_ohm": 0.1}],
                "critical_buses": [2, 3, 4, 5]}"#,
        )
        .unwrap()
    }

    #[test]
    fn clr_examples() {
        let net = critical_net();
        assert_eq!(clr(&report_for(&net), &net), 1.0);
        let mut cut = net.clone();
        for (a, b) in [(1, 2), (1, 5)] {
            let k = cut.find_line(a, b).unwrap();
            cut.lines[k].status = BranchStatus::Open;
        }
        let only_cl3 = clr(&report_for(&cut), &net);
        assert!((only_cl3 - 1420.0 / 1890.0).abs() < 1e-12);
        assert!((only_cl3 - 0.7513).abs() < 1e-4);

        let plain = load_network(
            r#"{"base_kv": 1, "slack_bus": 1, "buses": [{"id": 1, "p_kw": 5}]}"#,
        )
        .unwrap();
        let card = ResilienceScorecard::from_operation(&plain, &plain, &report_for(&plain));
        assert_eq!(card.clr, 1.0);
        assert!(card.flags.contains(&ScoreFlag::EmptyCriticalSet));
    }

    #[test]
    fn tss_examples() {
        let mut net = NetworkState::ieee33();
        assert_eq!(tss(&net), 1.0);
        let k = net.find_line(2, 3).unwrap();
        net.lines[k].status = BranchStatus::Open;
        // DERs at 5, 18, 29 energize the downstream island.
        assert_eq!(tss(&net), 1.0);
        for d in &mut net.ders {
            if d.bus != 21 {
                d.online = false;
            }
        }
        // DER-3 at 21 sits on the slack side (2-19-22): only slack island counts.
        let slack_side = crate::netmodel::islands(&net)
            .into_iter()
            .find(|c| c.contains(&1))
            .unwrap()
            .len();
        assert_eq!(tss(&net), slack_side as f64 / 33.0);
        assert_eq!(slack_side, 6);
    }

    #[test]
    fn drs_examples() {
        let net = NetworkState::ieee33();
        let mut r = report_for(&net);
        assert_eq!(r.der_available.values().sum::<f64>(), 3080.0);
        for (k, v) in r.der_utilized.iter_mut() {
            *v = r.der_available[k] / 2.0;
        }
        assert_eq!(drs(&r), 0.5);
        r.der_utilized = r.der_available.clone();
        assert_eq!(drs(&r), 1.0);
        r.der_available.values_mut().for_each(|v| *v = 0.0);
        assert_eq!(drs(&r), 0.0);
    }

    #[test]
    fn default_weights_are_the_principal_eigenvector() {
        let ahp = ahp_weights(&DEFAULT_AHP).unwrap();
        let expect = [0.2772, 0.4673, 0.0954, 0.1601];
        for (w, e) in ahp.w.iter().zip(expect) {
            assert!((w - e).abs() < 5e-4, "{:?}", ahp.w);
        }
        let aw = mat_vec(&DEFAULT_AHP, &ahp.w);
        let residual = aw
            .iter()
            .zip(&ahp.w)
            .map(|(x, w)| (x - ahp.lambda_max * w).abs())
            .fold(0.0, f64::max);
        assert!(residual <= 1e-8);
        assert!(ahp.lambda_max >= 4.0);
        assert!(ahp.consistency_ratio < 0.1);
    }

    #[test]
    fn column_mean_method_matches_textbook_approximation() {
        let ahp = ahp_weights_with(&DEFAULT_AHP, AhpMethod::ColumnMean).unwrap();
        let published = [0.277, 0.466, 0.096, 0.161];
        for (w, e) in ahp.w.iter().zip(published) {
            assert!((w - e).abs() <= 1e-3, "{:?}", ahp.w);
        }
    }

    #[test]
    fn consistent_matrix_recovers_weights() {
        let w = [0.4, 0.3, 0.2, 0.1];
        let mut a = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                a[i][j] = w[i] / w[j];
            }
        }
        let ahp = ahp_weights(&a).unwrap();
        for (x, y) in ahp.w.iter().zip(w) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(ahp.consistency_ratio.abs() < 1e-8);
    }

    #[test]
    fn non_reciprocal_matrices_are_rejected() {
        let mut a = DEFAULT_AHP;
        a[0][1] = 0.6;
        assert!(matches!(ahp_weights(&a), Err(Error::Validation(_))));
        let mut b = DEFAULT_AHP;
        b[2][2] = -1.0;
        assert!(ahp_weights(&b).is_err());
        assert!(load_ahp_matrix("[[1, 2], [0.5, 1]]").is_err());
    }

    #[test]
    fn unified_score_examples() {
        let w = AhpWeights::from_vector([0.277, 0.466, 0.096, 0.161]).unwrap();
        let card = ResilienceScorecard::new(0.8, 0.9, 0.7, 0.6);
        let expect = 0.277 * 0.8 + 0.466 * 0.9 + 0.096 * 0.7 + 0.161 * 0.6;
        assert!((unified_score(&card, &w) - expect).abs() < 1e-12);
        assert!((unified_score(&card, &w) - 0.8048).abs() < 1e-4);
        let ahp = AhpWeights::default();
        assert!((unified_score(&ResilienceScorecard::new(1.0, 1.0, 1.0, 1.0), &ahp) - 1.0).abs() < 1e-12);
        assert_eq!(unified_score(&ResilienceScorecard::new(0.0, 0.0, 0.0, 0.0), &ahp), 0.0);
    }

    #[test]
    fn payoff_csv_round_trip() {
        let m = PayoffMatrix::from_rows(vec![vec![0.1, 0.25], vec![1.0 / 3.0, 0.9]]).unwrap();
        let text = m.to_csv().unwrap();
        assert!(text.starts_with("attack,D1,D2\nA1,0.1,0.25\n"));
        assert_eq!(PayoffMatrix::from_csv(&text).unwrap(), m);
        let long = m.to_long_csv().unwrap();
        assert_eq!(long.lines().count(), 5);
        assert!(PayoffMatrix::from_rows(vec![vec![0.1], vec![0.2, 0.3]]).is_err());
    }

    #[test]
    fn single_cell_catalog_matches_direct_pipeline() {
        let base = NetworkState::ieee33();
        let cat = catalog_default().subset(&["A3"], &["D1"]).unwrap();
        let w = AhpWeights::default();
        let m = build_payoff_matrix(&base, &cat, &w).unwrap();
        let direct = evaluate_pair(&base, &cat.attacks[0], &cat.defenses[0]).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 1));
        assert_eq!(m.get(0, 0), unified_score(&direct, &w));
    }

    #[test]
    fn cell_errors_carry_coordinates() {
        let base = NetworkState::ieee33();
        let mut cat = catalog_default().subset(&["A6"], &["D1", "D2"]).unwrap();
        cat.defenses[1].effects = vec![crate::scenario::Effect::SetDerDispatch {
            target: "DER-77".into(),
            value: 1.0,
        }];
        match build_payoff_matrix(&base, &cat, &AhpWeights::default()) {
            Err(Error::Cell { attack, defense, .. }) => {
                assert_eq!((attack.as_str(), defense.as_str()), ("A6", "D2"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn reciprocal_from(upper: [f64; 6]) -> AhpMatrix {
        let mut a = [[1.0; 4]; 4];
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                a[i][j] = upper[k];
                a[j][i] = 1.0 / upper[k];
                k += 1;
            }
        }
        a
    }

    proptest! {
        #[test]
        fn weights_form_a_distribution(upper in prop::array::uniform6(1.0f64/9.0..9.0)) {
            let a = reciprocal_from(upper);
            for method in [AhpMethod::PrincipalEigenvector, AhpMethod::ColumnMean] {
                let ahp = ahp_weights_with(&a, method).unwrap();
                prop_assert!(ahp.w.iter().all(|&x| x >= 0.0));
                prop_assert!((ahp.w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
            let ahp = ahp_weights(&a).unwrap();
            prop_assert!(ahp.lambda_max >= 4.0 - 1e-9);
            let aw = mat_vec(&a, &ahp.w);
            for (x, w) in aw.iter().zip(&ahp.w) {
                prop_assert!((x - ahp.lambda_max * w).abs() <= 1e-8);
            }
        }

        #[test]
        fn unified_score_is_linear_and_bounded(
            m in prop::array::uniform4(0.0f64..=1.0),
            k in 0.0f64..=1.0,
            upper in prop::array::uniform6(1.0f64/9.0..9.0),
        ) {
            let w = ahp_weights(&reciprocal_from(upper)).unwrap();
            let card = ResilienceScorecard::new(m[0], m[1], m[2], m[3]);
            let scaled = ResilienceScorecard::new(k * m[0], k * m[1], k * m[2], k * m[3]);
            let u = unified_score(&card, &w);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&u));
            prop_assert!((unified_score(&scaled, &w) - k * u).abs() <= 1e-12);
        }
    }
}
