use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    topology, BranchStatus, Bus, BusId, Der, Line, NetworkState, TieSwitch,
    DEFAULT_DISPATCH_FRACTION, DEFAULT_Q_CAPABILITY,
};
use crate::error::{Error, Result};

/// Enhanced IEEE 33-bus feeder: Baran-Wu branch data, four DERs, four
/// critical loads and four normally-open tie switches.
pub const IEEE33_JSON: &str = include_str!("../../data/ieee33.json");

/// On-disk shape of a network description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    #[serde(default)]
    pub name: Option<String>,
    pub base_kv: f64,
    #[serde(default = "default_base_mva")]
    pub base_mva: f64,
    pub slack_bus: BusId,
    pub buses: Vec<BusRecord>,
    #[serde(default)]
    pub lines: Vec<LineRecord>,
    #[serde(default)]
    pub switches: Vec<SwitchRecord>,
    #[serde(default)]
    pub ders: Vec<DerRecord>,
    #[serde(default)]
    pub critical_buses: Vec<BusId>,
}

fn default_base_mva() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusRecord {
    pub id: BusId,
    #[serde(default)]
    pub p_kw: f64,
    #[serde(default)]
    pub q_kvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRecord {
    #[serde(default)]
    pub id: Option<String>,
    pub from: BusId,
    pub to: BusId,
    pub r_ohm: f64,
    pub x_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchRecord {
    pub id: String,
    pub from: BusId,
    pub to: BusId,
    pub r_ohm: f64,
    pub x_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerRecord {
    pub id: String,
    pub bus: BusId,
    pub rating_kw: f64,
    #[serde(default)]
    pub dispatch_fraction: Option<f64>,
    #[serde(default)]
    pub q_capability_fraction: Option<f64>,
}

/// Parse and validate a JSON network description.
///
/// The returned state has every line closed, every tie switch open, every
/// DER online at its default dispatch and no shedding.
pub fn load_network(text: &str) -> Result<NetworkState> {
    let doc: NetworkDocument = serde_json::from_str(text).map_err(Error::from_json)?;
    doc.into_state()
}

pub fn load_network_file(path: impl AsRef<Path>) -> Result<NetworkState> {
    let text = std::fs::read_to_string(path)?;
    load_network(&text)
}

impl NetworkDocument {
    pub fn into_state(self) -> Result<NetworkState> {
        let n = self.buses.len();
        let mut ids: Vec<BusId> = self.buses.iter().map(|b| b.id).collect();
        ids.sort_unstable();
        if ids.iter().enumerate().any(|(i, &id)| id != i + 1) {
            return Err(Error::Validation(format!(
                "bus ids must be dense 1..{n} without duplicates"
            )));
        }
        let critical: BTreeSet<BusId> = self.critical_buses.iter().copied().collect();
        if let Some(&bad) = critical.iter().find(|&&b| b == 0 || b > n) {
            return Err(Error::Validation(format!(
                "critical bus {bad} does not exist"
            )));
        }
        let der_buses: BTreeSet<BusId> = self.ders.iter().map(|d| d.bus).collect();

        let mut buses: Vec<Bus> = self
            .buses
            .iter()
            .map(|b| Bus {
                id: b.id,
                load_p: b.p_kw,
                load_q: b.q_kvar,
                is_critical: critical.contains(&b.id),
                has_der: der_buses.contains(&b.id),
            })
            .collect();
        buses.sort_by_key(|b| b.id);

        let lines = self
            .lines
            .into_iter()
            .enumerate()
            .map(|(i, l)| Line {
                id: l.id.unwrap_or_else(|| format!("L{}", i + 1)),
                from_bus: l.from,
                to_bus: l.to,
                r: l.r_ohm,
                x: l.x_ohm,
                status: BranchStatus::Closed,
            })
            .collect();
        let switches = self
            .switches
            .into_iter()
            .map(|s| TieSwitch {
                id: s.id,
                from_bus: s.from,
                to_bus: s.to,
                r: s.r_ohm,
                x: s.x_ohm,
                position: BranchStatus::Open,
            })
            .collect();
        let ders = self
            .ders
            .into_iter()
            .map(|d| Der {
                id: d.id,
                bus: d.bus,
                rating_p: d.rating_kw,
                dispatch_fraction: d.dispatch_fraction.unwrap_or(DEFAULT_DISPATCH_FRACTION),
                online: true,
                q_capability_fraction: d.q_capability_fraction.unwrap_or(DEFAULT_Q_CAPABILITY),
            })
            .collect();

        let state = NetworkState {
            name: self.name.unwrap_or_else(|| "network".to_string()),
            buses,
            lines,
            switches,
            ders,
            base_kv: self.base_kv,
            base_mva: self.base_mva,
            slack_bus: self.slack_bus,
            shed_fractions: vec![0.0; n],
            flags: BTreeSet::new(),
        };
        if !(state.base_kv > 0.0 && state.base_mva > 0.0) {
            return Err(Error::Validation("base_kv and base_mva must be positive".into()));
        }
        state.validate()?;
        topology::check_radial(&state)?;
        Ok(state)
    }
}

impl NetworkState {
    /// The bundled enhanced 33-bus feeder.
    pub fn ieee33() -> NetworkState {
        load_network(IEEE33_JSON).expect("bundled ieee33 document is valid")
    }

    /// Inverse of [`NetworkDocument::into_state`] for the static data
    /// (statuses, setpoints and shedding are not part of the document).
    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            name: Some(self.name.clone()),
            base_kv: self.base_kv,
            base_mva: self.base_mva,
            slack_bus: self.slack_bus,
            buses: self
                .buses
                .iter()
                .map(|b| BusRecord {
                    id: b.id,
                    p_kw: b.load_p,
                    q_kvar: b.load_q,
                })
                .collect(),
            lines: self
                .lines
                .iter()
                .map(|l| LineRecord {
                    id: Some(l.id.clone()),
                    from: l.from_bus,
                    to: l.to_bus,
                    r_ohm: l.r,
                    x_ohm: l.x,
                })
                .collect(),
            switches: self
                .switches
                .iter()
                .map(|s| SwitchRecord {
                    id: s.id.clone(),
                    from: s.from_bus,
                    to: s.to_bus,
                    r_ohm: s.r,
                    x_ohm: s.x,
                })
                .collect(),
            ders: self
                .ders
                .iter()
                .map(|d| DerRecord {
                    id: d.id.clone(),
                    bus: d.bus,
                    rating_kw: d.rating_p,
                    dispatch_fraction: Some(d.dispatch_fraction),
                    q_capability_fraction: Some(d.q_capability_fraction),
                })
                .collect(),
            critical_buses: self.critical_buses().map(|b| b.id).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_feeder_inventory() {
        let net = NetworkState::ieee33();
        assert_eq!(net.buses.len(), 33);
        assert_eq!(net.lines.len(), 32);
        assert_eq!(net.switches.len(), 4);
        assert_eq!(net.ders.len(), 4);
        assert_eq!(net.total_load_p(), 3715.0);
        assert_eq!(net.total_load_q(), 2300.0);
        let critical: Vec<_> = net.critical_buses().map(|b| b.id).collect();
        assert_eq!(critical, vec![7, 14, 24, 31]);
        assert!(net.lines.iter().all(|l| l.status == BranchStatus::Closed));
        assert!(net.switches.iter().all(|s| s.position == BranchStatus::Open));
        assert!(net
            .ders
            .iter()
            .all(|d| d.online && d.dispatch_fraction == DEFAULT_DISPATCH_FRACTION));
        assert!(net.shed_fractions.iter().all(|&s| s == 0.0));
        let ratings: f64 = net.ders.iter().map(|d| d.rating_p).sum();
        assert_eq!(ratings, 3080.0);
    }

    #[test]
    fn single_bus_network_is_valid() {
        let net = load_network(
            r#"{"base_kv": 12.66, "slack_bus": 1, "buses": [{"id": 1, "p_kw": 10}]}"#,
        )
        .unwrap();
        assert_eq!(net.bus_count(), 1);
        assert!(net.lines.is_empty());
        let islands = crate::netmodel::islands(&net);
        assert_eq!(islands, vec![vec![1]]);
    }

    #[test]
    fn malformed_document_reports_location() {
        let err = load_network("{\n  \"base_kv\": 12.66,\n  \"buses\": [ oops ]\n}").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_radial_base_is_rejected() {
        let text = r#"{
            "base_kv": 1.0, "slack_bus": 1,
            "buses": [{"id": 1}, {"id": 2}, {"id": 3}],
            "lines": [
                {"from": 1, "to": 2, "r_ohm": 0.1, "x_ohm": 0.1},
                {"from": 2, "to": 3, "r_ohm": 0.1, "x_ohm": 0.1},
                {"from": 3, "to": 1, "r_ohm": 0.1, "x_ohm": 0.1}
            ]}"#;
        assert!(matches!(
            load_network(text),
            Err(Error::Radiality { .. })
        ));
    }

    #[test]
    fn sparse_ids_and_dangling_references_are_rejected() {
        let sparse = r#"{"base_kv": 1.0, "slack_bus": 1, "buses": [{"id": 1}, {"id": 3}]}"#;
        assert!(matches!(load_network(sparse), Err(Error::Validation(_))));
        let dangling = r#"{"base_kv": 1.0, "slack_bus": 1, "buses": [{"id": 1}, {"id": 2}],
            "lines": [{"from": 1, "to": 5, "r_ohm": 0.1, "x_ohm": 0.1}]}"#;
        assert!(matches!(load_network(dangling), Err(Error::Validation(_))));
    }

    #[test]
    fn document_round_trip_preserves_static_data() {
        let net = NetworkState::ieee33();
        let text = serde_json::to_string(&net.to_document()).unwrap();
        let back = load_network(&text).unwrap();
        assert_eq!(back, net);
    }
}
