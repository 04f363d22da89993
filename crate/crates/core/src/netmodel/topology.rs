use std::collections::VecDeque;

use super::{Branch, BusId, NetworkState};
use crate::error::{Error, Result};

/// Voltage reference chosen for an island.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// Island fed by the substation.
    Slack(BusId),
    /// Isolated island formed around its largest online DER; carries the
    /// index of that DER in `NetworkState::ders`.
    Der { der: usize, bus: BusId },
}

impl Reference {
    pub fn bus(&self) -> BusId {
        match *self {
            Reference::Slack(b) => b,
            Reference::Der { bus, .. } => bus,
        }
    }

    pub fn is_slack(&self) -> bool {
        matches!(self, Reference::Slack(_))
    }
}

pub(crate) fn adjacency(state: &NetworkState) -> Vec<Vec<(BusId, Branch)>> {
    let mut adj = vec![Vec::new(); state.bus_count() + 1];
    for br in state.closed_branches() {
        adj[br.a].push((br.b, br));
        adj[br.b].push((br.a, br));
    }
    adj
}

/// Connected components over closed lines and closed switches.
///
/// Components are listed in order of their smallest bus id and each
/// component is sorted ascending.
pub fn islands(state: &NetworkState) -> Vec<Vec<BusId>> {
    let adj = adjacency(state);
    let n = state.bus_count();
    let mut seen = vec![false; n + 1];
    let mut out = Vec::new();
    for start in 1..=n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Island index per bus, indexed by `bus - 1`.
pub(crate) fn assignment(islands: &[Vec<BusId>], n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for (k, comp) in islands.iter().enumerate() {
        for &b in comp {
            out[b - 1] = k;
        }
    }
    out
}

/// Reference node for each island, `None` when the island is de-energized.
///
/// An island is energized when it holds the slack bus or at least one
/// online DER; isolated islands are referenced to the online DER with the
/// largest rating (first listed wins ties).
pub fn island_references(state: &NetworkState, islands: &[Vec<BusId>]) -> Vec<Option<Reference>> {
    let owner = assignment(islands, state.bus_count());
    let mut refs: Vec<Option<Reference>> = vec![None; islands.len()];
    refs[owner[state.slack_bus - 1]] = Some(Reference::Slack(state.slack_bus));
    for (k, der) in state.ders.iter().enumerate() {
        if !der.online {
            continue;
        }
        let island = owner[der.bus - 1];
        match &refs[island] {
            Some(Reference::Slack(_)) => {}
            Some(Reference::Der { der: best, .. })
                if state.ders[*best].rating_p >= der.rating_p => {}
            _ => refs[island] = Some(Reference::Der { der: k, bus: der.bus }),
        }
    }
    refs
}

/// Buses lying in energized islands, ascending.
pub fn energized_buses(state: &NetworkState) -> Vec<BusId> {
    let comps = islands(state);
    let refs = island_references(state, &comps);
    let mut out: Vec<BusId> = comps
        .iter()
        .zip(&refs)
        .filter(|(_, r)| r.is_some())
        .flat_map(|(c, _)| c.iter().copied())
        .collect();
    out.sort_unstable();
    out
}

/// Number of closed branches with both ends inside each island.
pub(crate) fn branch_counts(state: &NetworkState, owner: &[usize], islands: usize) -> Vec<usize> {
    let mut counts = vec![0; islands];
    for br in state.closed_branches() {
        counts[owner[br.a - 1]] += 1;
    }
    counts
}

pub(crate) fn radiality_error(comp: &[BusId], branches: usize) -> Error {
    Error::Radiality {
        bus: comp[0],
        buses: comp.len(),
        branches,
    }
}

/// Every island must be a tree.
pub(crate) fn check_radial(state: &NetworkState) -> Result<()> {
    let comps = islands(state);
    let owner = assignment(&comps, state.bus_count());
    let counts = branch_counts(state, &owner, comps.len());
    for (comp, &count) in comps.iter().zip(&counts) {
        if count + 1 != comp.len() {
            return Err(radiality_error(comp, count));
        }
    }
    Ok(())
}

/// True when every island is a tree.
pub fn is_radial(state: &NetworkState) -> bool {
    check_radial(state).is_ok()
}
