//! Microgrid resilience under cyber-physical attack and defense.
//!
//! The crate is organized bottom-up:
//!
//! * [`netmodel`] holds the radial feeder model, island detection, the
//!   backward/forward sweep load flow and the served-load accounting.
//! * [`scenario`] describes attacks and defenses as declarative network
//!   transformations and evaluates one attack/defense pair end to end.
//! * [`resilience`] turns a served-load report into the four resilience
//!   metrics, synthesizes AHP weights and assembles the payoff matrix.
//! * [`gamesolve`] solves the resulting zero-sum game in several ways.
//! * [`marl`] trains tabular Q-learning agents on the same game.
//! * [`experiments`] runs seeded Monte Carlo comparisons of defense policies.

pub mod error;
pub mod experiments;
pub mod gamesolve;
pub mod marl;
pub mod netmodel;
pub mod resilience;
pub mod scenario;

pub use error::{Error, Result};
pub use gamesolve::{EquilibriumReport, MixedStrategy, Side};
pub use netmodel::{NetworkState, PowerFlowSolution, ServedLoadReport};
pub use resilience::{AhpWeights, PayoffMatrix, ResilienceScorecard};
pub use scenario::{AttackAction, DefenseAction, ScenarioCatalog};
