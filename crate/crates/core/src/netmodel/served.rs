use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::powerflow::der_shares;
use super::topology::Reference;
use super::{BusId, NetworkState, PowerFlowSolution};

/// Buses below this magnitude are reported, never disconnected.
pub const VOLTAGE_VIOLATION_PU: f64 = 0.90;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServedLoadReport {
    /// kW, indexed by `bus - 1`.
    pub served_p: Vec<f64>,
    /// kvar, indexed by `bus - 1`.
    pub served_q: Vec<f64>,
    /// kW actually supplied by each DER.
    pub der_utilized: BTreeMap<String, f64>,
    /// Nameplate kW of each online DER (zero when offline).
    pub der_available: BTreeMap<String, f64>,
    pub connected_buses: BTreeSet<BusId>,
    pub voltage_violations: Vec<BusId>,
}

impl ServedLoadReport {
    pub fn served(&self, bus: BusId) -> f64 {
        self.served_p[bus - 1]
    }

    pub fn total_served_p(&self) -> f64 {
        self.served_p.iter().sum()
    }

    /// Copy of `state` whose shed fractions reproduce exactly the served
    /// demand of this report, for re-solving the flow after curtailment.
    pub fn curtailed_state(&self, state: &NetworkState) -> NetworkState {
        let mut next = state.clone();
        for (i, bus) in state.buses.iter().enumerate() {
            if bus.load_p > 0.0 {
                let kept = (self.served_p[i] / bus.load_p).clamp(0.0, 1.0);
                next.shed_fractions[i] = 1.0 - kept;
            } else if !self.connected_buses.contains(&bus.id) {
                next.shed_fractions[i] = 1.0;
            }
        }
        next
    }
}

/// Decide how much load each bus receives given the islands found by the
/// load flow.
///
/// De-energized islands serve nothing. The substation island serves all
/// post-shedding demand. An isolated microgrid whose online DER capacity
/// falls short of its demand curtails non-critical loads proportionally
/// first, then critical loads proportionally, until demand fits.
pub fn serve_loads(state: &NetworkState, solution: &PowerFlowSolution) -> ServedLoadReport {
    let n = state.bus_count();
    let mut served_p = vec![0.0; n];
    let mut served_q = vec![0.0; n];
    let mut der_utilized: BTreeMap<String, f64> =
        state.ders.iter().map(|d| (d.id.clone(), 0.0)).collect();
    let der_available = state
        .ders
        .iter()
        .map(|d| (d.id.clone(), if d.online { d.rating_p } else { 0.0 }))
        .collect();
    let mut connected_buses = BTreeSet::new();

    for island in &solution.islands {
        let Some(reference) = &island.reference else {
            continue;
        };
        connected_buses.extend(island.buses.iter().copied());

        let mut keep_critical = 1.0;
        let mut keep_other = 1.0;
        if let Reference::Der { .. } = reference {
            let members: Vec<usize> = state
                .ders
                .iter()
                .enumerate()
                .filter(|(_, d)| d.online && solution.island_assignment[d.bus - 1] == solution.island_assignment[reference.bus() - 1])
                .map(|(k, _)| k)
                .collect();
            let capacity: f64 = members.iter().map(|&k| state.ders[k].effective_output()).sum();
            let (critical, other) = island.buses.iter().fold((0.0, 0.0), |(c, o), &b| {
                let d = state.demand_p(b);
                if state.buses[b - 1].is_critical {
                    (c + d, o)
                } else {
                    (c, o + d)
                }
            });
            if critical + other > capacity {
                if capacity >= critical {
                    keep_other = if other > 0.0 { (capacity - critical) / other } else { 1.0 };
                } else {
                    keep_other = 0.0;
                    keep_critical = if critical > 0.0 { capacity / critical } else { 1.0 };
                }
            }
            let supplied = (critical * keep_critical + other * keep_other).min(capacity);
            for (&k, share) in members.iter().zip(der_shares(state, &members, supplied)) {
                der_utilized.insert(state.ders[k].id.clone(), share);
            }
        }

        for &b in &island.buses {
            let keep = if state.buses[b - 1].is_critical {
                keep_critical
            } else {
                keep_other
            };
            served_p[b - 1] = state.demand_p(b) * keep;
            served_q[b - 1] = state.demand_q(b) * keep;
        }
    }

    let voltage_violations = connected_buses
        .iter()
        .copied()
        .filter(|&b| solution.voltage(b).norm() < VOLTAGE_VIOLATION_PU)
        .collect();

    ServedLoadReport {
        served_p,
        served_q,
        der_utilized,
        der_available,
        connected_buses,
        voltage_violations,
    }
}
