//! Fixed-gain baselines: plan as if every gain equals one assumed value,
//! then face the true distribution.
//!
//! A baseline plan is a degenerate SAA run (one scenario, a fixed channel),
//! so it shares the LP path with the stochastic policy.

use std::fmt;
use std::str::FromStr;

use crate::channels::{derive_seed, tags, ChannelModel};
use crate::error::{Error, Result};
use crate::model::{ProblemInstance, Schedule};
use crate::saa::{self, SaaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    MinGain,
    AvgGain,
    MaxGain,
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::MinGain, Baseline::AvgGain, Baseline::MaxGain];

    pub fn assumed_gain(self) -> f64 {
        match self {
            Baseline::MinGain => 0.01,
            Baseline::AvgGain => 0.5,
            Baseline::MaxGain => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Baseline::MinGain => "min_gain",
            Baseline::AvgGain => "avg_gain",
            Baseline::MaxGain => "max_gain",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::param("policy", format!("unknown baseline `{s}`")))
    }
}

/// Optimal schedule when every gain is known to be `assumed_gain`.
pub fn fixed_gain_schedule(inst: &ProblemInstance, assumed_gain: f64, horizon: usize) -> Result<Schedule> {
    if !(assumed_gain > 0.0 && assumed_gain <= 1.0) {
        return Err(Error::param(
            "assumed_gain",
            format!("{assumed_gain} is outside (0, 1]"),
        ));
    }
    let cfg = SaaConfig {
        m_replications: 2,
        n_scenarios: 1,
        n_eval: 10,
        gap_variance_target: f64::INFINITY,
        seed: 0,
    };
    let report = saa::solve_saa(inst, &ChannelModel::fixed(assumed_gain)?, horizon, &cfg)?;
    Ok(report.best_schedule)
}

/// How a fixed schedule performs under the true channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineMetrics {
    pub z: f64,
    pub tau: f64,
    /// Mean total idle time across nodes, per slot.
    pub mean_idle: f64,
    /// Variance of `mean_idle`.
    pub idle_variance: f64,
    pub objective: f64,
    pub objective_variance: f64,
}

pub fn evaluate_baseline(
    inst: &ProblemInstance,
    sched: &Schedule,
    model: &ChannelModel,
    horizon: usize,
    n_eval: usize,
    seed: u64,
) -> Result<BaselineMetrics> {
    let scenarios = saa::draw_scenarios(
        model,
        derive_seed(seed, tags::EVALUATION, 0),
        inst.n_nodes,
        horizon,
        n_eval,
    )?;
    let e = saa::evaluate_on(inst, sched, &scenarios)?;
    Ok(BaselineMetrics {
        z: sched.min_sample_time(),
        tau: sched.tau(),
        mean_idle: e.mean_idle,
        idle_variance: e.idle_variance,
        objective: e.objective,
        objective_variance: e.variance,
    })
}
