//! Backward/forward sweep load flow with constant-power loads.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::topology::{
    adjacency, assignment, branch_counts, island_references, islands, radiality_error, Reference,
};
use super::{BusId, NetworkState};
use crate::error::Result;

pub const SWEEP_TOLERANCE: f64 = 1e-6;
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    /// Max-norm voltage change between sweeps that counts as converged, p.u.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            tolerance: SWEEP_TOLERANCE,
            max_sweeps: MAX_SWEEPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IslandSolution {
    pub buses: Vec<BusId>,
    /// `None` for a de-energized island.
    pub reference: Option<Reference>,
    pub converged: bool,
    pub iterations: usize,
    /// Power delivered by the reference node (slack or grid-forming DER), p.u.
    pub source_injection: Complex64,
    /// Scheduled active injections of the other online DERs, `(der index, p.u.)`.
    pub der_injections: Vec<(usize, f64)>,
    /// Series losses, p.u.
    pub losses: Complex64,
    /// Largest nodal power mismatch at the final iterate, p.u.
    pub max_mismatch: f64,
}

impl IslandSolution {
    pub fn is_energized(&self) -> bool {
        self.reference.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowSolution {
    /// Per-unit voltage phasors indexed by `bus - 1`; zero when de-energized.
    pub voltages: Vec<Complex64>,
    pub converged: bool,
    pub iterations: usize,
    pub max_mismatch: f64,
    /// Island index per bus, indexed by `bus - 1`.
    pub island_assignment: Vec<usize>,
    pub islands: Vec<IslandSolution>,
}

impl PowerFlowSolution {
    pub fn voltage(&self, bus: BusId) -> Complex64 {
        self.voltages[bus - 1]
    }

    pub fn island_of(&self, bus: BusId) -> &IslandSolution {
        &self.islands[self.island_assignment[bus - 1]]
    }

    pub fn is_energized(&self, bus: BusId) -> bool {
        self.island_of(bus).is_energized()
    }

    /// Lowest voltage magnitude over energized buses (first bus wins ties).
    pub fn min_voltage(&self) -> Option<(BusId, f64)> {
        let mut best: Option<(BusId, f64)> = None;
        for (i, v) in self.voltages.iter().enumerate() {
            let bus = i + 1;
            if !self.is_energized(bus) {
                continue;
            }
            let m = v.norm();
            if best.is_none_or(|(_, b)| m < b) {
                best = Some((bus, m));
            }
        }
        best
    }
}

/// Solve every island of `state` with the default sweep settings.
pub fn power_flow(state: &NetworkState) -> Result<PowerFlowSolution> {
    power_flow_with(state, SweepSettings::default())
}

pub fn power_flow_with(state: &NetworkState, settings: SweepSettings) -> Result<PowerFlowSolution> {
    let n = state.bus_count();
    let comps = islands(state);
    let owner = assignment(&comps, n);
    let refs = island_references(state, &comps);
    let counts = branch_counts(state, &owner, comps.len());
    let adj = adjacency(state);

    let mut voltages = vec![Complex64::new(0.0, 0.0); n];
    let mut solved = Vec::with_capacity(comps.len());
    for ((comp, reference), &count) in comps.into_iter().zip(refs).zip(&counts) {
        let Some(reference) = reference else {
            solved.push(IslandSolution {
                buses: comp,
                reference: None,
                converged: true,
                iterations: 0,
                source_injection: Complex64::new(0.0, 0.0),
                der_injections: Vec::new(),
                losses: Complex64::new(0.0, 0.0),
                max_mismatch: 0.0,
            });
            continue;
        };
        if count + 1 != comp.len() {
            return Err(radiality_error(&comp, count));
        }
        let island = sweep_island(state, &adj, comp, reference, settings, &mut voltages);
        solved.push(island);
    }

    Ok(PowerFlowSolution {
        voltages,
        converged: solved.iter().all(|s| s.converged),
        iterations: solved.iter().map(|s| s.iterations).max().unwrap_or(0),
        max_mismatch: solved.iter().map(|s| s.max_mismatch).fold(0.0, f64::max),
        island_assignment: owner,
        islands: solved,
    })
}

/// Active power each online DER of an isolated island is asked to supply,
/// shared in proportion to effective capacity and capped by it, kW.
pub(crate) fn der_shares(state: &NetworkState, members: &[usize], demand_kw: f64) -> Vec<f64> {
    let capacity: f64 = members.iter().map(|&k| state.ders[k].effective_output()).sum();
    members
        .iter()
        .map(|&k| {
            let cap = state.ders[k].effective_output();
            if capacity <= 0.0 {
                0.0
            } else if demand_kw >= capacity {
                cap
            } else {
                demand_kw * cap / capacity
            }
        })
        .collect()
}

fn sweep_island(
    state: &NetworkState,
    adj: &[Vec<(BusId, super::Branch)>],
    comp: Vec<BusId>,
    reference: Reference,
    settings: SweepSettings,
    voltages: &mut [Complex64],
) -> IslandSolution {
    let base_kw = state.base_kw();
    let zbase = state.base_impedance();
    let root = reference.bus();

    // Breadth-first tree rooted at the reference node.
    let mut order = Vec::with_capacity(comp.len());
    let mut parent = vec![0usize; state.bus_count() + 1];
    let mut z = vec![Complex64::new(0.0, 0.0); state.bus_count() + 1];
    let mut visited = vec![false; state.bus_count() + 1];
    visited[root] = true;
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &(v, br) in &adj[u] {
            if !visited[v] {
                visited[v] = true;
                parent[v] = u;
                z[v] = Complex64::new(br.r, br.x) / zbase;
                order.push(v);
            }
        }
    }

    // Net constant-power demand per bus (load minus scheduled DER output).
    let mut demand = vec![Complex64::new(0.0, 0.0); state.bus_count() + 1];
    for &b in &comp {
        demand[b] = Complex64::new(state.demand_p(b), state.demand_q(b)) / base_kw;
    }
    let mut der_injections = Vec::new();
    if let Reference::Der { der: grid_former, .. } = reference {
        let members: Vec<usize> = state
            .ders
            .iter()
            .enumerate()
            .filter(|(_, d)| d.online && visited[d.bus])
            .map(|(k, _)| k)
            .collect();
        let island_kw: f64 = comp.iter().map(|&b| state.demand_p(b)).sum();
        for (&k, share) in members.iter().zip(der_shares(state, &members, island_kw)) {
            if k == grid_former {
                continue;
            }
            let p = share / base_kw;
            demand[state.ders[k].bus] -= Complex64::new(p, 0.0);
            der_injections.push((k, p));
        }
    }

    let one = Complex64::new(1.0, 0.0);
    for &b in &comp {
        voltages[b - 1] = one;
    }
    let mut current = vec![Complex64::new(0.0, 0.0); state.bus_count() + 1];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.max_sweeps {
        iterations += 1;
        // Backward: accumulate branch currents from the leaves up.
        for &b in &order {
            current[b] = (demand[b] / voltages[b - 1]).conj();
        }
        for &b in order.iter().skip(1).rev() {
            let c = current[b];
            current[parent[b]] += c;
        }
        // Forward: update voltages from the reference down.
        let mut delta: f64 = 0.0;
        for &b in order.iter().skip(1) {
            let v = voltages[parent[b] - 1] - z[b] * current[b];
            delta = delta.max((v - voltages[b - 1]).norm());
            voltages[b - 1] = v;
        }
        if delta <= settings.tolerance {
            converged = true;
            break;
        }
    }

    // Final branch currents consistent with the last voltages.
    for &b in &order {
        current[b] = (demand[b] / voltages[b - 1]).conj();
    }
    for &b in order.iter().skip(1).rev() {
        let c = current[b];
        current[parent[b]] += c;
    }
    let mut losses = Complex64::new(0.0, 0.0);
    for &b in order.iter().skip(1) {
        losses += z[b] * current[b].norm_sqr();
    }
    // Nodal mismatch using branch currents implied by voltage differences.
    let mut branch = vec![Complex64::new(0.0, 0.0); state.bus_count() + 1];
    for &b in order.iter().skip(1) {
        branch[b] = if z[b].norm() > 0.0 {
            (voltages[parent[b] - 1] - voltages[b - 1]) / z[b]
        } else {
            current[b]
        };
    }
    let mut outflow = vec![Complex64::new(0.0, 0.0); state.bus_count() + 1];
    for &b in order.iter().skip(1) {
        outflow[parent[b]] += branch[b];
    }
    let mut max_mismatch: f64 = 0.0;
    for &b in order.iter().skip(1) {
        let withdrawn = voltages[b - 1] * (branch[b] - outflow[b]).conj();
        max_mismatch = max_mismatch.max((withdrawn - demand[b]).norm());
    }
    let source_injection = demand[root] + voltages[root - 1] * outflow[root].conj();

    IslandSolution {
        buses: comp,
        reference: Some(reference),
        converged,
        iterations,
        source_injection,
        der_injections,
        losses,
        max_mismatch,
    }
}
