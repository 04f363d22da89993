use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DefensePolicy;
use crate::error::{Error, Result};
use crate::gamesolve::MixedStrategy;
use crate::netmodel::{energized_buses, NetworkState};
use crate::resilience::PayoffMatrix;
use crate::scenario::{apply_attack, apply_defense, operate, AttackAction, Effect, ScenarioCatalog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BaselineKind {
    /// Uniform random defense.
    Rds,
    /// Operator rule table keyed on the attack's effect class.
    Rbd,
    /// Best column against a uniform attacker, fixed.
    Sod,
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<BaselineKind> {
        match s.to_ascii_uppercase().as_str() {
            "RDS" => Ok(BaselineKind::Rds),
            "RBD" => Ok(BaselineKind::Rbd),
            "SOD" => Ok(BaselineKind::Sod),
            _ => Err(Error::UnknownMethod(s.to_string())),
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineKind::Rds => "RDS",
            BaselineKind::Rbd => "RBD",
            BaselineKind::Sod => "SOD",
        })
    }
}

/// Column with the largest mean, lowest index on ties.
pub fn sod_column(m: &PayoffMatrix) -> usize {
    let means: Vec<f64> = (0..m.cols()).map(|j| m.column(j).sum::<f64>() / m.rows() as f64).collect();
    let mut best = 0;
    for (j, v) in means.iter().enumerate() {
        if *v > means[best] {
            best = j;
        }
    }
    best
}

/// Effect class an operator reads off an attack, in rule priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackClass {
    /// Some critical bus is served below its demand after the attack.
    CriticalAffected,
    /// The attack trips DERs, alters their dispatch or biases telemetry
    /// that trips them.
    DerCompromised,
    /// Two or more line trips.
    MultiLineOutage,
    Other,
}

pub fn classify_attack(base: &NetworkState, attack: &AttackAction) -> Result<AttackClass> {
    let attacked = apply_attack(base, attack)?;
    let op = operate(&attacked)?;
    let critical_short = base
        .critical_buses()
        .any(|b| op.report.served(b.id) < base.demand_p(b.id) * (1.0 - 1e-9));
    if critical_short {
        return Ok(AttackClass::CriticalAffected);
    }
    let der_hit = attack.effects.iter().any(|e| {
        matches!(
            e,
            Effect::TripDer { .. } | Effect::SetDerDispatch { .. } | Effect::FdiBias { .. }
        )
    });
    if der_hit {
        return Ok(AttackClass::DerCompromised);
    }
    let trips = attack.effects.iter().filter(|e| matches!(e, Effect::TripLine { .. })).count();
    if trips >= 2 {
        return Ok(AttackClass::MultiLineOutage);
    }
    Ok(AttackClass::Other)
}

/// Rule-table defense for one attack.
///
/// DER compromise picks the first listed boost whose unit is still online
/// (the first listed when none is); multiple outages pick the listed tie
/// defense that energizes the most buses, first listed on ties.
pub fn rbd_response(base: &NetworkState, catalog: &ScenarioCatalog, attack: &AttackAction) -> Result<usize> {
    let rules = &catalog.rbd_rules;
    let index = |id: &str| {
        catalog
            .defense_index(id)
            .ok_or_else(|| Error::Catalog { action: id.to_string(), message: "rule names an unknown defense".into() })
    };
    let first = |ids: &[String]| -> Result<usize> {
        ids.first()
            .ok_or_else(|| Error::Catalog { action: "rbd_rules".into(), message: "empty rule alternative list".into() })
            .and_then(|id| index(id))
    };
    match classify_attack(base, attack)? {
        AttackClass::CriticalAffected => index(&rules.critical_affected),
        AttackClass::DerCompromised => {
            let attacked = apply_attack(base, attack)?;
            for id in &rules.der_compromised {
                let k = index(id)?;
                let online = catalog.defenses[k].effects.iter().all(|e| match e {
                    Effect::SetDerDispatch { target, .. } => {
                        attacked.find_der(target).is_some_and(|d| attacked.ders[d].online)
                    }
                    _ => true,
                });
                if online {
                    return Ok(k);
                }
            }
            first(&rules.der_compromised)
        }
        AttackClass::MultiLineOutage => {
            let attacked = apply_attack(base, attack)?;
            let mut best: Option<(usize, usize)> = None;
            for id in &rules.multi_line_outage {
                let k = index(id)?;
                let count = energized_buses(&apply_defense(&attacked, &catalog.defenses[k])?).len();
                if best.is_none_or(|(_, c)| count > c) {
                    best = Some((k, count));
                }
            }
            match best {
                Some((k, _)) => Ok(k),
                None => first(&rules.multi_line_outage),
            }
        }
        AttackClass::Other => index(&rules.otherwise),
    }
}

pub fn baseline(
    kind: BaselineKind,
    m: &PayoffMatrix,
    base: &NetworkState,
    catalog: &ScenarioCatalog,
) -> Result<DefensePolicy> {
    match kind {
        BaselineKind::Rds => Ok(DefensePolicy::Mixed { mix: MixedStrategy::uniform(m.cols()) }),
        BaselineKind::Sod => Ok(DefensePolicy::pure(m.cols(), sod_column(m))),
        BaselineKind::Rbd => {
            if m.rows() != catalog.attacks.len() || m.cols() != catalog.defenses.len() {
                return Err(Error::Validation("payoff matrix does not match the catalog".into()));
            }
            let response = catalog
                .attacks
                .iter()
                .map(|a| rbd_response(base, catalog, a))
                .collect::<Result<Vec<_>>>()?;
            Ok(DefensePolicy::Reactive { response })
        }
    }
}
