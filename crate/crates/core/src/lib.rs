//! Charging and sampling time schedules for RF-harvesting sensor nodes.
//!
//! A hybrid access point (HAP) charges `n` nodes for `tau` seconds of each
//! slot and gives node `i` a sampling time `T_i` with `tau + sum(T_i) = 1`.
//! Channel gains are random, so a node may run out of energy and idle. The
//! crate solves the single-slot and multi-slot two-stage stochastic programs
//! for `(tau, T)` with sample average approximation, and simulates the
//! resulting schedules slot by slot.
//!
//! Module map:
//! - [`model`]: instance constants, schedules, scenarios.
//! - [`channels`]: seeded Gaussian/Rayleigh/Rician gain streams.
//! - [`recourse`]: closed-form second-stage evaluation.
//! - [`lp`]: dense simplex solver.
//! - [`detequiv`]: deterministic-equivalent LP builders.
//! - [`saa`]: sample average approximation driver and gap statistics.
//! - [`baselines`]: fixed-gain policies.
//! - [`sim`]: slotted Monte-Carlo simulator and aggregation.

pub mod baselines;
pub mod channels;
pub mod detequiv;
pub mod error;
pub mod lp;
pub mod model;
pub mod recourse;
pub mod saa;
pub mod sim;

pub use channels::{ChannelKind, ChannelModel, GainStream};
pub use error::{Error, Result};
pub use model::{harvested_energy, ProblemInstance, RecourseOutcome, Scenario, Schedule};
pub use saa::{SaaConfig, SaaReport};
