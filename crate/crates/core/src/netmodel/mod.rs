//! Radial distribution feeder model.
//!
//! A [`NetworkState`] is a plain value: every mutation used by the scenario
//! layer clones and returns a new state. Bus ids are dense and 1-based; all
//! per-bus vectors are indexed by `id - 1`.

mod document;
mod powerflow;
mod served;
mod topology;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use document::{load_network, load_network_file, NetworkDocument, IEEE33_JSON};
pub use powerflow::{
    power_flow, IslandSolution, PowerFlowSolution, SweepSettings, MAX_SWEEPS, SWEEP_TOLERANCE,
};
pub use served::{serve_loads, ServedLoadReport, VOLTAGE_VIOLATION_PU};
pub use topology::{energized_buses, is_radial, island_references, islands, Reference};

pub type BusId = usize;

/// Setpoint applied to every DER when a network document is loaded.
pub const DEFAULT_DISPATCH_FRACTION: f64 = 0.7;
pub const DEFAULT_Q_CAPABILITY: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStatus {
    Closed,
    Open,
}

impl BranchStatus {
    pub fn is_closed(self) -> bool {
        self == BranchStatus::Closed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    /// kW
    pub load_p: f64,
    /// kvar
    pub load_q: f64,
    pub is_critical: bool,
    pub has_der: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    pub from_bus: BusId,
    pub to_bus: BusId,
    /// ohm
    pub r: f64,
    /// ohm
    pub x: f64,
    pub status: BranchStatus,
}

impl Line {
    pub fn connects(&self, a: BusId, b: BusId) -> bool {
        (self.from_bus == a && self.to_bus == b) || (self.from_bus == b && self.to_bus == a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieSwitch {
    pub id: String,
    pub from_bus: BusId,
    pub to_bus: BusId,
    pub r: f64,
    pub x: f64,
    pub position: BranchStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Der {
    pub id: String,
    pub bus: BusId,
    /// Nameplate active power, kW.
    pub rating_p: f64,
    pub dispatch_fraction: f64,
    pub online: bool,
    pub q_capability_fraction: f64,
}

impl Der {
    /// Active power the unit can deliver at its current setpoint.
    pub fn effective_output(&self) -> f64 {
        if self.online {
            self.rating_p * self.dispatch_fraction
        } else {
            0.0
        }
    }
}

/// Diagnostic tags carried along with a state through the scenario pipeline.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "detail")]
pub enum StateFlag {
    /// A tie-switch close was skipped because it would have formed a loop.
    SwitchCloseSkipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub name: String,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub switches: Vec<TieSwitch>,
    pub ders: Vec<Der>,
    pub base_kv: f64,
    pub base_mva: f64,
    pub slack_bus: BusId,
    /// Fraction of each bus load deliberately curtailed, indexed by `bus - 1`.
    pub shed_fractions: Vec<f64>,
    #[serde(default)]
    pub flags: BTreeSet<StateFlag>,
}

/// A closed branch as seen by the topology and load-flow code.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Branch {
    pub a: BusId,
    pub b: BusId,
    pub r: f64,
    pub x: f64,
}

impl NetworkState {
    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    pub fn bus(&self, id: BusId) -> Option<&Bus> {
        id.checked_sub(1).and_then(|i| self.buses.get(i))
    }

    pub fn shed_fraction(&self, id: BusId) -> f64 {
        self.shed_fractions[id - 1]
    }

    /// Demand after deliberate shedding, kW.
    pub fn demand_p(&self, id: BusId) -> f64 {
        let bus = &self.buses[id - 1];
        bus.load_p * (1.0 - self.shed_fractions[id - 1])
    }

    pub fn demand_q(&self, id: BusId) -> f64 {
        let bus = &self.buses[id - 1];
        bus.load_q * (1.0 - self.shed_fractions[id - 1])
    }

    pub fn total_load_p(&self) -> f64 {
        self.buses.iter().map(|b| b.load_p).sum()
    }

    pub fn total_load_q(&self) -> f64 {
        self.buses.iter().map(|b| b.load_q).sum()
    }

    pub fn critical_buses(&self) -> impl Iterator<Item = &Bus> {
        self.buses.iter().filter(|b| b.is_critical)
    }

    /// Line whose endpoints are `a` and `b` in either orientation.
    pub fn find_line(&self, a: BusId, b: BusId) -> Option<usize> {
        self.lines.iter().position(|l| l.connects(a, b))
    }

    pub fn find_switch(&self, id: &str) -> Option<usize> {
        self.switches.iter().position(|s| s.id == id)
    }

    pub fn find_der(&self, id: &str) -> Option<usize> {
        self.ders.iter().position(|d| d.id == id)
    }

    /// Every closed line and closed tie switch.
    pub(crate) fn closed_branches(&self) -> impl Iterator<Item = Branch> + '_ {
        let lines = self
            .lines
            .iter()
            .filter(|l| l.status.is_closed())
            .map(|l| Branch {
                a: l.from_bus,
                b: l.to_bus,
                r: l.r,
                x: l.x,
            });
        let switches = self
            .switches
            .iter()
            .filter(|s| s.position.is_closed())
            .map(|s| Branch {
                a: s.from_bus,
                b: s.to_bus,
                r: s.r,
                x: s.x,
            });
        lines.chain(switches)
    }

    /// Impedance base in ohm.
    pub fn base_impedance(&self) -> f64 {
        self.base_kv * self.base_kv / self.base_mva
    }

    /// kW per per-unit of power.
    pub fn base_kw(&self) -> f64 {
        self.base_mva * 1000.0
    }

    /// Copy of the state with every load multiplied by `factors[bus - 1]`.
    pub fn with_load_factors(&self, factors: &[f64]) -> Result<NetworkState> {
        if factors.len() != self.buses.len() {
            return Err(Error::Dimension {
                expected: self.buses.len(),
                got: factors.len(),
            });
        }
        let mut next = self.clone();
        for (bus, &k) in next.buses.iter_mut().zip(factors) {
            if !(k >= 0.0) {
                return Err(Error::Parameter(format!(
                    "load factor {k} for bus {} is negative",
                    bus.id
                )));
            }
            bus.load_p *= k;
            bus.load_q *= k;
        }
        Ok(next)
    }

    /// Structural checks shared by the loader and by callers that build
    /// states programmatically.
    pub fn validate(&self) -> Result<()> {
        let n = self.buses.len();
        if n == 0 {
            return Err(Error::Validation("network has no buses".into()));
        }
        for (i, bus) in self.buses.iter().enumerate() {
            if bus.id != i + 1 {
                return Err(Error::Validation(format!(
                    "bus ids must be dense 1..{n}; position {} holds id {}",
                    i + 1,
                    bus.id
                )));
            }
            if !(bus.load_p >= 0.0) {
                return Err(Error::Validation(format!(
                    "bus {} has negative active load {}",
                    bus.id, bus.load_p
                )));
            }
        }
        let in_range = |id: BusId| id >= 1 && id <= n;
        if !in_range(self.slack_bus) {
            return Err(Error::Validation(format!(
                "slack bus {} does not exist",
                self.slack_bus
            )));
        }
        for line in &self.lines {
            if !in_range(line.from_bus) || !in_range(line.to_bus) {
                return Err(Error::Validation(format!(
                    "line {} references a missing bus ({}-{})",
                    line.id, line.from_bus, line.to_bus
                )));
            }
            if line.from_bus == line.to_bus {
                return Err(Error::Validation(format!(
                    "line {} is a self loop at bus {}",
                    line.id, line.from_bus
                )));
            }
            if !(line.r >= 0.0 && line.x >= 0.0) {
                return Err(Error::Validation(format!(
                    "line {} has negative impedance",
                    line.id
                )));
            }
        }
        for sw in &self.switches {
            if !in_range(sw.from_bus) || !in_range(sw.to_bus) || sw.from_bus == sw.to_bus {
                return Err(Error::Validation(format!(
                    "switch {} has invalid endpoints {}-{}",
                    sw.id, sw.from_bus, sw.to_bus
                )));
            }
            if !(sw.r >= 0.0 && sw.x >= 0.0) {
                return Err(Error::Validation(format!(
                    "switch {} has negative impedance",
                    sw.id
                )));
            }
        }
        let mut der_ids = BTreeSet::new();
        for der in &self.ders {
            if !in_range(der.bus) {
                return Err(Error::Validation(format!(
                    "DER {} sits on missing bus {}",
                    der.id, der.bus
                )));
            }
            if !der_ids.insert(der.id.as_str()) {
                return Err(Error::Validation(format!("duplicate DER id {}", der.id)));
            }
            if !(0.0..=1.0).contains(&der.dispatch_fraction) || !(der.rating_p >= 0.0) {
                return Err(Error::Validation(format!(
                    "DER {} has rating {} / dispatch {} outside bounds",
                    der.id, der.rating_p, der.dispatch_fraction
                )));
            }
        }
        let mut sw_ids = BTreeSet::new();
        for sw in &self.switches {
            if !sw_ids.insert(sw.id.as_str()) {
                return Err(Error::Validation(format!("duplicate switch id {}", sw.id)));
            }
        }
        if self.shed_fractions.len() != n {
            return Err(Error::Validation(format!(
                "shed fraction vector has {} entries for {n} buses",
                self.shed_fractions.len()
            )));
        }
        if let Some((i, s)) = self
            .shed_fractions
            .iter()
            .enumerate()
            .find(|(_, s)| !(0.0..=1.0).contains(*s))
        {
            return Err(Error::Validation(format!(
                "shed fraction {s} at bus {} outside [0, 1]",
                i + 1
            )));
        }
        Ok(())
    }
}
