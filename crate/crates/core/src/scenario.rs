//! Attack and defense catalog and the attack/defense pair pipeline.
//!
//! Every action is an ordered list of primitive [`Effect`]s applied to a
//! cloned [`NetworkState`]. The default catalog is compiled in; a JSON file
//! with the same shape replaces it wholesale.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{
    islands, power_flow, serve_loads, BranchStatus, BusId, NetworkState, PowerFlowSolution,
    ServedLoadReport, StateFlag,
};
use crate::resilience::{ResilienceScorecard, ScoreFlag};

/// Primitive network transformation.
///
/// Targets are strings resolved against the network at application time:
/// lines as `"6-7"`, buses as `"5"`, DERs and switches by id, and bus groups
/// as `"all"` or `"noncritical"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Effect {
    TripLine {
        target: String,
    },
    TripDer {
        target: String,
    },
    OpenSwitch {
        target: String,
    },
    /// Close a tie switch; `companion` names the sectionalizing line opened
    /// when the close would otherwise form a loop.
    CloseSwitch {
        target: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        companion: Option<String>,
    },
    /// Multiply the load at a bus.
    ScaleLoad {
        target: String,
        value: f64,
    },
    /// Corrupted voltage telemetry at a bus; protection trips the DERs there.
    /// `value` is the relative bias and is kept for the record only.
    FdiBias {
        target: String,
        value: f64,
    },
    SetDerDispatch {
        target: String,
        value: f64,
    },
    ShedFraction {
        target: String,
        value: f64,
    },
    /// Shed completely every load in the group strictly above `value` kW.
    ShedThreshold {
        #[serde(default = "group_all")]
        target: String,
        value: f64,
    },
}

fn group_all() -> String {
    "all".to_string()
}

impl Effect {
    pub fn kind(&self) -> &'static str {
        match self {
            Effect::TripLine { .. } => "trip_line",
            Effect::TripDer { .. } => "trip_der",
            Effect::OpenSwitch { .. } => "open_switch",
            Effect::CloseSwitch { .. } => "close_switch",
            Effect::ScaleLoad { .. } => "scale_load",
            Effect::FdiBias { .. } => "fdi_bias",
            Effect::SetDerDispatch { .. } => "set_der_dispatch",
            Effect::ShedFraction { .. } => "shed_fraction",
            Effect::ShedThreshold { .. } => "shed_threshold",
        }
    }

    fn allowed_in_attack(&self) -> bool {
        matches!(
            self,
            Effect::TripLine { .. }
                | Effect::TripDer { .. }
                | Effect::OpenSwitch { .. }
                | Effect::CloseSwitch { .. }
                | Effect::ScaleLoad { .. }
                | Effect::FdiBias { .. }
        )
    }

    fn allowed_in_defense(&self) -> bool {
        matches!(
            self,
            Effect::CloseSwitch { .. }
                | Effect::SetDerDispatch { .. }
                | Effect::ShedFraction { .. }
                | Effect::ShedThreshold { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackAction {
    pub id: String,
    pub label: String,
    pub effects: Vec<Effect>,
}

impl AttackAction {
    /// Placeholder attack with no effect, for reference evaluations.
    pub fn none() -> AttackAction {
        AttackAction {
            id: "A0".into(),
            label: "No attack".into(),
            effects: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefenseAction {
    pub id: String,
    pub label: String,
    pub effects: Vec<Effect>,
}

/// Rule table used by the rule-based defense baseline, keyed on the class
/// of damage an attack causes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTable {
    /// Chosen when some critical bus loses load.
    pub critical_affected: String,
    /// DER boosts, first one whose unit is still online wins.
    pub der_compromised: Vec<String>,
    /// Tie-switch defenses; the one reconnecting the most buses to the
    /// substation wins.
    pub multi_line_outage: Vec<String>,
    pub otherwise: String,
}

impl Default for RuleTable {
    fn default() -> Self {
        RuleTable {
            critical_affected: "D8".into(),
            der_compromised: vec!["D6".into(), "D7".into()],
            multi_line_outage: vec!["D2".into(), "D3".into(), "D4".into(), "D5".into()],
            otherwise: "D1".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCatalog {
    pub version: String,
    pub attacks: Vec<AttackAction>,
    pub defenses: Vec<DefenseAction>,
    #[serde(default)]
    pub rbd_rules: RuleTable,
}

fn trip(lines: &[&str]) -> Vec<Effect> {
    lines
        .iter()
        .map(|l| Effect::TripLine {
            target: l.to_string(),
        })
        .collect()
}

fn close(switch: &str, companion: &str) -> Effect {
    Effect::CloseSwitch {
        target: switch.into(),
        companion: Some(companion.into()),
    }
}

fn boost(der: &str) -> Effect {
    Effect::SetDerDispatch {
        target: der.into(),
        value: 1.0,
    }
}

fn attack(id: &str, label: &str, effects: Vec<Effect>) -> AttackAction {
    AttackAction {
        id: id.into(),
        label: label.into(),
        effects,
    }
}

fn defense(id: &str, label: &str, effects: Vec<Effect>) -> DefenseAction {
    DefenseAction {
        id: id.into(),
        label: label.into(),
        effects,
    }
}

/// The default ten-by-ten catalog for the bundled 33-bus feeder.
pub fn catalog_default() -> ScenarioCatalog {
    let fdi = ["5", "18", "29"]
        .iter()
        .map(|b| Effect::FdiBias {
            target: b.to_string(),
            value: 0.15,
        })
        .collect();
    let der_shutdown = ["DER-1", "DER-2", "DER-3", "DER-4"]
        .iter()
        .map(|d| Effect::TripDer {
            target: d.to_string(),
        })
        .collect();
    let mut hmi = trip(&["5-6"]);
    hmi.extend((20..=24).map(|b| Effect::ScaleLoad {
        target: b.to_string(),
        value: 1.2,
    }));

    let attacks = vec![
        attack("A1", "False data injection (voltage telemetry)", fdi),
        attack("A2", "Protocol exploitation (breaker commands)", trip(&["6-7", "14-15"])),
        attack("A3", "Coordinated DER shutdown", der_shutdown),
        attack("A4", "SCADA HMI compromise", hmi),
        attack("A5", "Protection system spoofing", trip(&["6-7", "23-24"])),
        attack("A6", "Single line trip", trip(&["3-4"])),
        attack("A7", "Double line cut", trip(&["5-6", "14-15"])),
        attack("A8", "Double line cut", trip(&["7-8", "6-26"])),
        attack("A9", "Triple line cut", trip(&["2-3", "2-19", "28-29"])),
        attack("A10", "Triple line cut", trip(&["6-7", "23-24", "30-31"])),
    ];
    let defenses = vec![
        defense("D1", "No action", Vec::new()),
        defense("D2", "Close tie switch SW1 (12-21)", vec![close("SW1", "9-10")]),
        defense("D3", "Close tie switch SW2 (9-15)", vec![close("SW2", "14-15")]),
        defense("D4", "Close tie switch SW3 (18-33)", vec![close("SW3", "32-33")]),
        defense("D5", "Close tie switch SW4 (25-29)", vec![close("SW4", "28-29")]),
        defense("D6", "Boost DER at bus 5", vec![boost("DER-1")]),
        defense("D7", "Boost DER at bus 21", vec![boost("DER-3")]),
        defense(
            "D8",
            "Intelligent load shedding (30% non-critical)",
            vec![Effect::ShedFraction {
                target: "noncritical".into(),
                value: 0.30,
            }],
        ),
        defense(
            "D9",
            "Aggressive load shedding (loads above 200 kW)",
            vec![Effect::ShedThreshold {
                target: "all".into(),
                value: 200.0,
            }],
        ),
        defense(
            "D10",
            "SW2 with DER support at bus 21",
            vec![close("SW2", "14-15"), boost("DER-3")],
        ),
    ];
    ScenarioCatalog {
        version: "ieee33-default-1".into(),
        attacks,
        defenses,
        rbd_rules: RuleTable::default(),
    }
}

impl ScenarioCatalog {
    pub fn from_json(text: &str) -> Result<ScenarioCatalog> {
        let catalog: ScenarioCatalog = serde_json::from_str(text).map_err(Error::from_json)?;
        catalog.check_shape()?;
        Ok(catalog)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<ScenarioCatalog> {
        ScenarioCatalog::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn attack(&self, id: &str) -> Option<&AttackAction> {
        self.attacks.iter().find(|a| a.id == id)
    }

    pub fn defense(&self, id: &str) -> Option<&DefenseAction> {
        self.defenses.iter().find(|d| d.id == id)
    }

    pub fn defense_index(&self, id: &str) -> Option<usize> {
        self.defenses.iter().position(|d| d.id == id)
    }

    pub fn attack_ids(&self) -> Vec<String> {
        self.attacks.iter().map(|a| a.id.clone()).collect()
    }

    pub fn defense_ids(&self) -> Vec<String> {
        self.defenses.iter().map(|d| d.id.clone()).collect()
    }

    /// Catalog restricted to the given attack and defense ids, in that order.
    pub fn subset(&self, attacks: &[&str], defenses: &[&str]) -> Result<ScenarioCatalog> {
        let pick_a = attacks
            .iter()
            .map(|id| {
                self.attack(id).cloned().ok_or_else(|| Error::Catalog {
                    action: id.to_string(),
                    message: "no such attack".into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let pick_d = defenses
            .iter()
            .map(|id| {
                self.defense(id).cloned().ok_or_else(|| Error::Catalog {
                    action: id.to_string(),
                    message: "no such defense".into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScenarioCatalog {
            version: self.version.clone(),
            attacks: pick_a,
            defenses: pick_d,
            rbd_rules: self.rbd_rules.clone(),
        })
    }

    /// Ids unique, effects of the right family, non-empty action lists.
    pub fn check_shape(&self) -> Result<()> {
        if self.attacks.is_empty() || self.defenses.is_empty() {
            return Err(Error::Validation(
                "catalog needs at least one attack and one defense".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for id in self.attacks.iter().map(|a| &a.id).chain(self.defenses.iter().map(|d| &d.id)) {
            if !seen.insert(id.as_str()) {
                return Err(Error::Catalog {
                    action: id.clone(),
                    message: "duplicate id".into(),
                });
            }
        }
        for a in &self.attacks {
            if let Some(e) = a.effects.iter().find(|e| !e.allowed_in_attack()) {
                return Err(Error::Catalog {
                    action: a.id.clone(),
                    message: format!("effect `{}` is not an attack effect", e.kind()),
                });
            }
        }
        for d in &self.defenses {
            if let Some(e) = d.effects.iter().find(|e| !e.allowed_in_defense()) {
                return Err(Error::Catalog {
                    action: d.id.clone(),
                    message: format!("effect `{}` is not a defense effect", e.kind()),
                });
            }
        }
        Ok(())
    }

    /// Apply every action once to `base` so unresolvable targets surface
    /// before any experiment runs.
    pub fn check_against(&self, base: &NetworkState) -> Result<()> {
        self.check_shape()?;
        for a in &self.attacks {
            apply_attack(base, a)?;
        }
        for d in &self.defenses {
            apply_defense(base, d)?;
        }
        Ok(())
    }
}

fn integrity(action: &str, message: impl Into<String>) -> Error {
    Error::Catalog {
        action: action.to_string(),
        message: message.into(),
    }
}

fn parse_bus(state: &NetworkState, action: &str, target: &str) -> Result<BusId> {
    let bus: BusId = target
        .trim()
        .parse()
        .map_err(|_| integrity(action, format!("`{target}` is not a bus id")))?;
    if state.bus(bus).is_none() {
        return Err(integrity(action, format!("bus {bus} does not exist")));
    }
    Ok(bus)
}

fn parse_line(state: &NetworkState, action: &str, target: &str) -> Result<usize> {
    let (a, b) = target
        .split_once('-')
        .ok_or_else(|| integrity(action, format!("`{target}` is not a line (expected `a-b`)")))?;
    let a = parse_bus(state, action, a)?;
    let b = parse_bus(state, action, b)?;
    state
        .find_line(a, b)
        .ok_or_else(|| integrity(action, format!("no line between buses {a} and {b}")))
}

fn parse_der(state: &NetworkState, action: &str, target: &str) -> Result<usize> {
    state
        .find_der(target)
        .ok_or_else(|| integrity(action, format!("no DER `{target}`")))
}

fn parse_switch(state: &NetworkState, action: &str, target: &str) -> Result<usize> {
    state
        .find_switch(target)
        .ok_or_else(|| integrity(action, format!("no switch `{target}`")))
}

/// Buses selected by a group target.
fn parse_group(state: &NetworkState, action: &str, target: &str) -> Result<Vec<BusId>> {
    match target {
        "all" => Ok(state.buses.iter().map(|b| b.id).collect()),
        "noncritical" => Ok(state
            .buses
            .iter()
            .filter(|b| !b.is_critical)
            .map(|b| b.id)
            .collect()),
        "critical" => Ok(state.critical_buses().map(|b| b.id).collect()),
        other => Ok(vec![parse_bus(state, action, other)?]),
    }
}

fn check_fraction(action: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(integrity(action, format!("fraction {value} outside [0, 1]")));
    }
    Ok(())
}

/// Close a tie switch without ever leaving a loop behind.
fn close_switch(
    state: &mut NetworkState,
    action: &str,
    sw: usize,
    companion: Option<&str>,
) -> Result<()> {
    if state.switches[sw].position.is_closed() {
        return Ok(());
    }
    let (a, b) = (state.switches[sw].from_bus, state.switches[sw].to_bus);
    let comps = islands(state);
    let same_island = comps.iter().any(|c| c.contains(&a) && c.contains(&b));
    if !same_island {
        state.switches[sw].position = BranchStatus::Closed;
        return Ok(());
    }
    let skipped = StateFlag::SwitchCloseSkipped(state.switches[sw].id.clone());
    let Some(companion) = companion else {
        state.flags.insert(skipped);
        return Ok(());
    };
    let line = parse_line(state, action, companion)?;
    let mut trial = state.clone();
    trial.switches[sw].position = BranchStatus::Closed;
    trial.lines[line].status = BranchStatus::Open;
    if crate::netmodel::is_radial(&trial) {
        *state = trial;
    } else {
        state.flags.insert(skipped);
    }
    Ok(())
}

fn apply_effect(state: &mut NetworkState, action: &str, effect: &Effect) -> Result<()> {
    match effect {
        Effect::TripLine { target } => {
            let k = parse_line(state, action, target)?;
            state.lines[k].status = BranchStatus::Open;
        }
        Effect::TripDer { target } => {
            let k = parse_der(state, action, target)?;
            state.ders[k].online = false;
        }
        Effect::OpenSwitch { target } => {
            let k = parse_switch(state, action, target)?;
            state.switches[k].position = BranchStatus::Open;
        }
        Effect::CloseSwitch { target, companion } => {
            let k = parse_switch(state, action, target)?;
            close_switch(state, action, k, companion.as_deref())?;
        }
        Effect::ScaleLoad { target, value } => {
            if !(*value >= 0.0) {
                return Err(integrity(action, format!("load factor {value} is negative")));
            }
            let bus = parse_bus(state, action, target)?;
            let b = &mut state.buses[bus - 1];
            b.load_p *= value;
            b.load_q *= value;
        }
        Effect::FdiBias { target, .. } => {
            let bus = parse_bus(state, action, target)?;
            for der in state.ders.iter_mut().filter(|d| d.bus == bus) {
                der.online = false;
            }
        }
        Effect::SetDerDispatch { target, value } => {
            check_fraction(action, *value)?;
            let k = parse_der(state, action, target)?;
            state.ders[k].dispatch_fraction = *value;
        }
        Effect::ShedFraction { target, value } => {
            check_fraction(action, *value)?;
            for bus in parse_group(state, action, target)? {
                state.shed_fractions[bus - 1] = *value;
            }
        }
        Effect::ShedThreshold { target, value } => {
            for bus in parse_group(state, action, target)? {
                if state.buses[bus - 1].load_p > *value {
                    state.shed_fractions[bus - 1] = 1.0;
                }
            }
        }
    }
    Ok(())
}

pub fn apply_attack(state: &NetworkState, attack: &AttackAction) -> Result<NetworkState> {
    let mut next = state.clone();
    for effect in &attack.effects {
        apply_effect(&mut next, &attack.id, effect)?;
    }
    Ok(next)
}

pub fn apply_defense(state: &NetworkState, defense: &DefenseAction) -> Result<NetworkState> {
    let mut next = state.clone();
    for effect in &defense.effects {
        apply_effect(&mut next, &defense.id, effect)?;
    }
    Ok(next)
}

/// Load flow plus served-load accounting for a post-defense state.
///
/// Isolated islands that had to curtail are re-solved on the reduced
/// demand; islands that still fail to converge shed non-critical load in
/// 10% steps (then critical load) until the sweep converges.
#[derive(Debug, Clone)]
pub struct Operation {
    pub state: NetworkState,
    pub solution: PowerFlowSolution,
    pub report: ServedLoadReport,
    pub fallback_used: bool,
}

pub fn operate(state: &NetworkState) -> Result<Operation> {
    let first = power_flow(state)?;
    let first_report = serve_loads(state, &first);
    let mut current = first_report.curtailed_state(state);
    let mut solution = if current.shed_fractions == state.shed_fractions {
        first
    } else {
        power_flow(&current)?
    };
    let mut fallback_used = false;
    while !solution.converged {
        fallback_used = true;
        let mut changed = false;
        for island in solution.islands.iter().filter(|i| !i.converged) {
            let pick_critical = island.buses.iter().all(|&b| {
                current.buses[b - 1].is_critical || current.shed_fractions[b - 1] >= 1.0
            });
            for &b in &island.buses {
                if current.buses[b - 1].is_critical == pick_critical
                    && current.shed_fractions[b - 1] < 1.0
                {
                    let s = &mut current.shed_fractions[b - 1];
                    *s = (*s + 0.1).min(1.0);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        solution = power_flow(&current)?;
    }
    let report = serve_loads(&current, &solution);
    Ok(Operation {
        state: current,
        solution,
        report,
        fallback_used,
    })
}

/// Full pipeline for one attack/defense pair: pre-attack flow, attack,
/// defense, post-defense flow, metrics.
pub fn evaluate_pair(
    base: &NetworkState,
    attack: &AttackAction,
    defense: &DefenseAction,
) -> Result<ResilienceScorecard> {
    operate(base)?;
    evaluate_from(base, attack, defense)
}

/// [`evaluate_pair`] once the pre-attack operating point is known to solve.
pub fn evaluate_from(
    base: &NetworkState,
    attack: &AttackAction,
    defense: &DefenseAction,
) -> Result<ResilienceScorecard> {
    let attacked = apply_attack(base, attack)?;
    let defended = apply_defense(&attacked, defense)?;
    let post = operate(&defended)?;

    let mut card = ResilienceScorecard::from_operation(base, &defended, &post.report);
    if post.fallback_used || !post.solution.converged {
        card.flags.insert(ScoreFlag::NonConvergence);
    }
    for flag in &defended.flags {
        match flag {
            StateFlag::SwitchCloseSkipped(id) => {
                card.flags.insert(ScoreFlag::SwitchCloseSkipped(id.clone()));
            }
        }
    }
    Ok(card)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::energized_buses;

    fn base() -> NetworkState {
        NetworkState::ieee33()
    }

    fn status_vector(state: &NetworkState) -> (Vec<bool>, Vec<bool>, Vec<bool>) {
        (
            state.lines.iter().map(|l| l.status.is_closed()).collect(),
            state.switches.iter().map(|s| s.position.is_closed()).collect(),
            state.ders.iter().map(|d| d.online).collect(),
        )
    }

    #[test]
    fn default_catalog_shape() {
        let cat = catalog_default();
        assert_eq!(cat.attacks.len(), 10);
        assert_eq!(cat.defenses.len(), 10);
        assert!(cat.defense("D1").unwrap().effects.is_empty());
        cat.check_against(&base()).unwrap();
        let a3 = cat.attack("A3").unwrap();
        assert_eq!(a3.effects.len(), 4);
        assert!(a3.effects.iter().all(|e| matches!(e, Effect::TripDer { .. })));
    }

    #[test]
    fn a1_trips_ders_at_biased_buses() {
        let cat = catalog_default();
        let s = apply_attack(&base(), cat.attack("A1").unwrap()).unwrap();
        let offline: Vec<_> = s.ders.iter().filter(|d| !d.online).map(|d| d.bus).collect();
        assert_eq!(offline, vec![5, 18, 29]);
    }

    #[test]
    fn a2_opens_two_lines() {
        let cat = catalog_default();
        let s = apply_attack(&base(), cat.attack("A2").unwrap()).unwrap();
        let open: Vec<_> = s
            .lines
            .iter()
            .filter(|l| !l.status.is_closed())
            .map(|l| (l.from_bus, l.to_bus))
            .collect();
        assert_eq!(open, vec![(6, 7), (14, 15)]);
    }

    #[test]
    fn a6_is_a_single_line_diff() {
        let cat = catalog_default();
        let before = base();
        let after = apply_attack(&before, cat.attack("A6").unwrap()).unwrap();
        let (l0, s0, d0) = status_vector(&before);
        let (l1, s1, d1) = status_vector(&after);
        assert_eq!(l0.iter().zip(&l1).filter(|(a, b)| a != b).count(), 1);
        assert_eq!(s0, s1);
        assert_eq!(d0, d1);
        assert_eq!(after.ders, before.ders);
    }

    #[test]
    fn d3_after_a2_rejoins_bus_15() {
        let cat = catalog_default();
        let attacked = apply_attack(&base(), cat.attack("A2").unwrap()).unwrap();
        let defended = apply_defense(&attacked, cat.defense("D3").unwrap()).unwrap();
        let comps = islands(&defended);
        let with_15 = comps.iter().find(|c| c.contains(&15)).unwrap();
        assert!(with_15.contains(&9));
        assert!(energized_buses(&defended).contains(&15));
        // A2 already broke the loop, so the companion 14-15 stays as the attack left it
        // and no close was skipped.
        assert!(defended.flags.is_empty());
    }

    #[test]
    fn d8_d9_d6_effects() {
        let cat = catalog_default();
        let s = apply_defense(&base(), cat.defense("D8").unwrap()).unwrap();
        for b in &s.buses {
            let expect = if b.is_critical { 0.0 } else { 0.30 };
            assert_eq!(s.shed_fraction(b.id), expect);
        }
        let s = apply_defense(&base(), cat.defense("D9").unwrap()).unwrap();
        for b in &s.buses {
            let expect = if b.load_p > 200.0 { 1.0 } else { 0.0 };
            assert_eq!(s.shed_fraction(b.id), expect, "bus {}", b.id);
        }
        let s = apply_defense(&base(), cat.defense("D6").unwrap()).unwrap();
        let der = s.ders.iter().find(|d| d.bus == 5).unwrap();
        assert_eq!(der.dispatch_fraction, 1.0);
    }

    #[test]
    fn closing_a_tie_in_pristine_feeder_opens_companion() {
        let cat = catalog_default();
        for id in ["D2", "D3", "D4", "D5", "D10"] {
            let s = apply_defense(&base(), cat.defense(id).unwrap()).unwrap();
            assert_eq!(islands(&s).len(), 1, "{id}");
            assert!(crate::netmodel::is_radial(&s), "{id}");
            assert_eq!(s.switches.iter().filter(|w| w.position.is_closed()).count(), 1);
            assert_eq!(s.lines.iter().filter(|l| !l.status.is_closed()).count(), 1);
        }
    }

    #[test]
    fn loop_without_companion_is_a_flagged_no_op() {
        let d = DefenseAction {
            id: "DX".into(),
            label: "bare close".into(),
            effects: vec![Effect::CloseSwitch {
                target: "SW1".into(),
                companion: None,
            }],
        };
        let s = apply_defense(&base(), &d).unwrap();
        assert!(s.switches.iter().all(|w| !w.position.is_closed()));
        assert!(s
            .flags
            .contains(&StateFlag::SwitchCloseSkipped("SW1".into())));
    }

    #[test]
    fn unresolvable_targets_are_integrity_errors() {
        for effect in [
            Effect::TripLine { target: "1-33".into() },
            Effect::TripDer { target: "DER-9".into() },
            Effect::ScaleLoad { target: "99".into(), value: 1.1 },
        ] {
            let a = AttackAction {
                id: "AX".into(),
                label: String::new(),
                effects: vec![effect],
            };
            assert!(matches!(apply_attack(&base(), &a), Err(Error::Catalog { .. })));
        }
    }

    #[test]
    fn transformations_leave_input_untouched() {
        let cat = catalog_default();
        let b = base();
        let copy = b.clone();
        for a in &cat.attacks {
            let attacked = apply_attack(&b, a).unwrap();
            for d in &cat.defenses {
                let x = apply_defense(&attacked, d).unwrap();
                let y = apply_defense(&attacked, d).unwrap();
                assert_eq!(x, y);
            }
        }
        assert_eq!(b, copy);
    }

    #[test]
    fn no_attack_no_defense_is_whole() {
        let cat = catalog_default();
        let card = evaluate_pair(&base(), &AttackAction::none(), cat.defense("D1").unwrap()).unwrap();
        assert_eq!(card.lsr, 1.0);
        assert_eq!(card.clr, 1.0);
        assert_eq!(card.tss, 1.0);
    }

    #[test]
    fn der_shutdown_zeroes_drs_with_flag() {
        let cat = catalog_default();
        let card =
            evaluate_pair(&base(), cat.attack("A3").unwrap(), cat.defense("D1").unwrap()).unwrap();
        assert_eq!(card.drs, 0.0);
        assert!(card.flags.contains(&ScoreFlag::NoDerAvailable));
    }

    #[test]
    fn tie_switch_restoration_does_not_reduce_lsr() {
        let cat = catalog_default();
        let a2 = cat.attack("A2").unwrap();
        let with = evaluate_pair(&base(), a2, cat.defense("D3").unwrap()).unwrap();
        let without = evaluate_pair(&base(), a2, cat.defense("D1").unwrap()).unwrap();
        assert!(with.lsr >= without.lsr, "{} < {}", with.lsr, without.lsr);
    }

    #[test]
    fn d1_is_the_identity_defense() {
        let cat = catalog_default();
        let d1 = cat.defense("D1").unwrap();
        for a in &cat.attacks {
            let attacked = apply_attack(&base(), a).unwrap();
            let post = operate(&attacked).unwrap();
            let direct = ResilienceScorecard::from_operation(&base(), &attacked, &post.report);
            let card = evaluate_pair(&base(), a, d1).unwrap();
            assert_eq!(
                (card.lsr, card.clr, card.tss, card.drs),
                (direct.lsr, direct.clr, direct.tss, direct.drs)
            );
        }
    }

    #[test]
    fn catalog_round_trip() {
        let cat = catalog_default();
        let back = ScenarioCatalog::from_json(&cat.to_json()).unwrap();
        assert_eq!(back, cat);
    }

    #[test]
    fn catalog_override_file_shape() {
        let text = r#"{
            "version": "custom",
            "attacks": [{"id": "A1", "label": "cut", "effects": [{"kind": "trip_line", "target": "2-3"}]}],
            "defenses": [{"id": "D1", "label": "none", "effects": []},
                         {"id": "D2", "label": "shed", "effects": [{"kind": "shed_threshold", "value": 100}]}]
        }"#;
        let cat = ScenarioCatalog::from_json(text).unwrap();
        cat.check_against(&base()).unwrap();
        assert_eq!(cat.rbd_rules, RuleTable::default());
        let bad = text.replace("trip_line", "set_der_dispatch");
        assert!(ScenarioCatalog::from_json(&bad).is_err());
    }
}
