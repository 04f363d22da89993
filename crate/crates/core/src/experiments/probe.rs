use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{derive_policy, CompareSettings, StrategyMethod, Testbed};
use crate::error::Result;
use crate::netmodel::NetworkState;
use crate::resilience::AhpWeights;
use crate::scenario::ScenarioCatalog;

/// Published state count for the 33-bus feeder with four DERs and four tie
/// switches; it disagrees with `2^(N+D+K) = 2^41`.
pub const PUBLISHED_33BUS_STATES: f64 = 2.1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub network: String,
    pub buses: usize,
    pub ders: usize,
    pub switches: usize,
    /// `N + D + K`.
    pub exponent: u32,
    /// `2^(N+D+K)`.
    pub state_space: f64,
    pub published: Option<f64>,
    pub note: String,
    /// Empty on the estimate-only row.
    pub method: String,
    /// Payoff construction plus policy derivation, seconds.
    pub wall_time_s: f64,
    /// Process high-water resident set, kB, where the OS reports it.
    pub peak_memory_kb: Option<u64>,
}

/// `VmHWM` from `/proc/self/status`.
pub fn peak_memory_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}

/// One estimate row per network, then one timed row per method.
pub fn scalability_probe(
    networks: &[(String, NetworkState, ScenarioCatalog)],
    weights: &AhpWeights,
    methods: &[StrategyMethod],
    settings: &CompareSettings,
) -> Result<Vec<ProbeRow>> {
    let mut rows = Vec::new();
    for (name, net, catalog) in networks {
        let (n, d, k) = (net.bus_count(), net.ders.len(), net.switches.len());
        let exponent = (n + d + k) as u32;
        let state_space = 2f64.powi(exponent as i32);
        let published = (n == 33 && d == 4 && k == 4).then_some(PUBLISHED_33BUS_STATES);
        let note = match published {
            Some(p) => format!("published figure {p:.1e} disagrees with 2^{exponent} = {state_space:.3e}"),
            None => String::new(),
        };
        let template = ProbeRow {
            network: name.clone(),
            buses: n,
            ders: d,
            switches: k,
            exponent,
            state_space,
            published,
            note,
            method: String::new(),
            wall_time_s: 0.0,
            peak_memory_kb: None,
        };
        rows.push(template.clone());
        for &method in methods {
            let start = Instant::now();
            let tb = Testbed::new(net.clone(), catalog.clone(), weights.clone())?;
            derive_policy(&tb, method, settings)?;
            rows.push(ProbeRow {
                method: method.name().to_string(),
                wall_time_s: start.elapsed().as_secs_f64(),
                peak_memory_kb: peak_memory_kb(),
                ..template.clone()
            });
        }
    }
    Ok(rows)
}
