//! Slotted Monte-Carlo simulator.
//!
//! `Single` mode re-plans at the start of every slot from the batteries the
//! nodes report; `Multi` mode plans once for the whole horizon. Realized
//! gains for an episode come from one stream drawn slot by slot, so both
//! modes face identical channels, and the plan for the first slot depends
//! only on the master seed, so it is shared by all episodes.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{self, Baseline};
use crate::channels::{derive_seed, tags, ChannelModel, GainStream};
use crate::error::{Error, Result};
use crate::model::{ProblemInstance, RecourseOutcome, Schedule};
use crate::recourse;
use crate::saa::{self, SaaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Single,
    Multi,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Multi => "multi",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Mode::Single),
            "multi" => Ok(Mode::Multi),
            other => Err(Error::param("sim.mode", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    SpSaa,
    Baseline(Baseline),
}

impl Policy {
    pub const ALL: [Policy; 4] = [
        Policy::SpSaa,
        Policy::Baseline(Baseline::MinGain),
        Policy::Baseline(Baseline::AvgGain),
        Policy::Baseline(Baseline::MaxGain),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::SpSaa => "spsaa",
            Policy::Baseline(b) => b.name(),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "spsaa" {
            return Ok(Policy::SpSaa);
        }
        s.parse::<Baseline>()
            .map(Policy::Baseline)
            .map_err(|_| Error::param("policy", format!("unknown policy `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mode: Mode,
    pub horizon: usize,
    pub policy: Policy,
    pub episodes: usize,
    pub seed: u64,
    /// Used by [`Policy::SpSaa`]; its own seed is replaced per plan.
    pub saa: SaaConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mode: Mode::Single,
            horizon: 1,
            policy: Policy::SpSaa,
            episodes: 100,
            seed: 0,
            saa: SaaConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::param("sim.horizon", "must be at least 1"));
        }
        if self.episodes == 0 {
            return Err(Error::param("sim.episodes", "must be at least 1"));
        }
        if self.policy == Policy::SpSaa {
            self.saa.validate()?;
        }
        Ok(())
    }

    fn plan_horizon(&self) -> usize {
        match self.mode {
            Mode::Single => 1,
            Mode::Multi => self.horizon,
        }
    }

    fn plan_seed(&self, episode: usize, slot: usize) -> u64 {
        if slot == 0 {
            derive_seed(self.seed, tags::PLAN, 0)
        } else {
            let per_episode = derive_seed(self.seed, tags::PLAN, episode as u64 + 1);
            derive_seed(per_episode, tags::EPISODE, slot as u64)
        }
    }
}

/// A schedule plus the SAA statistics behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub schedule: Schedule,
    pub var_gap: f64,
    pub converged: bool,
}

/// Computes the policy's schedule for `horizon` slots starting from
/// `inst.battery_init`.
pub fn plan(inst: &ProblemInstance, model: &ChannelModel, cfg: &SimConfig, horizon: usize, seed: u64) -> Result<Plan> {
    match cfg.policy {
        Policy::SpSaa => {
            let r = saa::solve_saa(inst, model, horizon, &cfg.saa.clone().with_seed(seed))?;
            Ok(Plan {
                schedule: r.best_schedule,
                var_gap: r.var_gap,
                converged: r.converged,
            })
        }
        Policy::Baseline(b) => Ok(Plan {
            schedule: baselines::fixed_gain_schedule(inst, b.assumed_gain(), horizon)?,
            var_gap: 0.0,
            converged: true,
        }),
    }
}

/// What happened in one slot of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: usize,
    pub schedule: Schedule,
    pub gains: Vec<f64>,
    pub battery_start: Vec<f64>,
    pub harvest: Vec<f64>,
    pub idle: Vec<f64>,
    pub battery: Vec<f64>,
    pub spill: Vec<f64>,
    pub var_gap: f64,
    pub converged: bool,
}

impl SlotRecord {
    pub fn idle_total(&self) -> f64 {
        self.idle.iter().sum()
    }

    /// Energy spent sampling by node `i`.
    pub fn consumed(&self, inst: &ProblemInstance, i: usize) -> f64 {
        inst.consume_power * (self.schedule.sample_times()[i] - self.idle[i])
    }
}

fn record(slot: usize, plan: &Plan, out: &RecourseOutcome, t: usize, gains: &[f64], start: Vec<f64>) -> SlotRecord {
    let n = out.n_nodes;
    let cells = t * n..(t + 1) * n;
    SlotRecord {
        slot,
        schedule: plan.schedule.clone(),
        gains: gains.to_vec(),
        battery_start: start,
        harvest: out.harvest_trace[cells.clone()].to_vec(),
        idle: out.idle_times[cells.clone()].to_vec(),
        battery: out.battery_trace[cells.clone()].to_vec(),
        spill: out.spill_trace[cells].to_vec(),
        var_gap: plan.var_gap,
        converged: plan.converged,
    }
}

fn planner_error(episode: usize, slot: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Planner {
        episode,
        slot,
        source: Box::new(e),
    }
}

/// Plan used in the first slot (and, in `Multi` mode, throughout).
pub fn first_plan(inst: &ProblemInstance, model: &ChannelModel, cfg: &SimConfig) -> Result<Plan> {
    plan(inst, model, cfg, cfg.plan_horizon(), cfg.plan_seed(0, 0))
}

fn run_with(
    inst: &ProblemInstance,
    model: &ChannelModel,
    cfg: &SimConfig,
    episode: usize,
    first: &Plan,
) -> Result<Vec<SlotRecord>> {
    let n = inst.n_nodes;
    let mut truth = GainStream::new(model.clone(), derive_seed(cfg.seed, tags::TRUTH, episode as u64));
    let gains = truth.sample_scenario(n, cfg.horizon)?;
    let mut records = Vec::with_capacity(cfg.horizon);
    match cfg.mode {
        Mode::Multi => {
            let out = recourse::recourse_multi(inst, &first.schedule, &gains)?;
            let mut start = inst.battery_init.clone();
            for t in 0..cfg.horizon {
                let r = record(t, first, &out, t, gains.slot(t), start);
                start = r.battery.clone();
                records.push(r);
            }
        }
        Mode::Single => {
            let mut now = inst.clone();
            for t in 0..cfg.horizon {
                let p = if t == 0 {
                    first.clone()
                } else {
                    plan(&now, model, cfg, 1, cfg.plan_seed(episode, t)).map_err(planner_error(episode, t))?
                };
                let slot = crate::model::Scenario::single(gains.slot(t).to_vec())?;
                let out = recourse::recourse_single(&now, &p.schedule, &slot)?;
                let r = record(t, &p, &out, 0, gains.slot(t), now.battery_init.clone());
                now.battery_init = r.battery.clone();
                records.push(r);
            }
        }
    }
    Ok(records)
}

/// Runs episode `episode` on its own, planning the first slot from scratch.
pub fn run_episode(
    inst: &ProblemInstance,
    model: &ChannelModel,
    cfg: &SimConfig,
    episode: usize,
) -> Result<Vec<SlotRecord>> {
    cfg.validate()?;
    let first = first_plan(inst, model, cfg).map_err(planner_error(episode, 0))?;
    run_with(inst, model, cfg, episode, &first)
}

/// Runs all episodes, sharing the first-slot plan. Records are returned in
/// episode order.
pub fn simulate(inst: &ProblemInstance, model: &ChannelModel, cfg: &SimConfig) -> Result<Vec<Vec<SlotRecord>>> {
    cfg.validate()?;
    inst.validate()?;
    let first = first_plan(inst, model, cfg).map_err(planner_error(0, 0))?;
    (0..cfg.episodes)
        .into_par_iter()
        .map(|e| run_with(inst, model, cfg, e, &first))
        .collect()
}

/// Episode-level means and standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub episodes: usize,
    pub slots: usize,
    /// Total idle time across nodes, averaged over slots.
    pub mean_idle: f64,
    pub se_idle: f64,
    pub mean_z: f64,
    pub se_z: f64,
    pub mean_tau: f64,
    pub se_tau: f64,
    /// Largest gap variance of any plan used.
    pub var_gap: f64,
    /// Whether every plan met its gap-variance target.
    pub converged: bool,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (k - 1.0);
    (m, (var / k).sqrt())
}

pub fn aggregate(episodes: &[Vec<SlotRecord>]) -> Result<Summary> {
    if episodes.is_empty() || episodes.iter().any(|e| e.is_empty()) {
        return Err(Error::param("records", "need at least one slot per episode"));
    }
    let per_episode = |f: &dyn Fn(&SlotRecord) -> f64| -> Vec<f64> {
        episodes
            .iter()
            .map(|e| e.iter().map(f).sum::<f64>() / e.len() as f64)
            .collect()
    };
    let (mean_idle, se_idle) = mean_se(&per_episode(&|r| r.idle_total()));
    let (mean_z, se_z) = mean_se(&per_episode(&|r| r.schedule.min_sample_time()));
    let (mean_tau, se_tau) = mean_se(&per_episode(&|r| r.schedule.tau()));
    let all = episodes.iter().flatten();
    Ok(Summary {
        episodes: episodes.len(),
        slots: episodes.iter().map(Vec::len).sum(),
        mean_idle,
        se_idle,
        mean_z,
        se_z,
        mean_tau,
        se_tau,
        var_gap: all.clone().map(|r| r.var_gap).fold(0.0, f64::max),
        converged: all.clone().all(|r| r.converged),
    })
}
