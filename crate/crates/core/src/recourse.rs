//! Closed-form second stage.
//!
//! Given a schedule and realized gains, each node idles for exactly the
//! part of its sampling time its energy cannot cover:
//! `y = max(0, T_i - (B_i + eta P g tau) / P_c)`. Leftover energy is stored
//! up to the battery cap and the rest is spilled. Using energy as early as
//! possible is optimal for the multi-slot program too: saving energy for a
//! later slot can at best trade one second of idling for another, and a
//! fuller battery only risks spilling.

use crate::error::{Error, Result};
use crate::model::{ProblemInstance, RecourseOutcome, Scenario, Schedule};

/// Per-slot effect on one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotStep {
    pub harvested: f64,
    pub idle: f64,
    pub battery: f64,
    pub spill: f64,
}

/// Advances one node through one slot from stored energy `battery`.
#[inline]
pub fn step_node(inst: &ProblemInstance, tau: f64, sample_time: f64, gain: f64, battery: f64) -> SlotStep {
    let harvested = inst.harvest_rate() * gain * tau;
    let available = battery + harvested;
    let idle = (sample_time - available / inst.consume_power).max(0.0);
    let left = (available - inst.consume_power * (sample_time - idle)).max(0.0);
    let stored = left.min(inst.battery_cap);
    SlotStep {
        harvested,
        idle,
        battery: stored,
        spill: left - stored,
    }
}

fn check_dims(inst: &ProblemInstance, sched: &Schedule, scen: &Scenario) -> Result<()> {
    if sched.n_nodes() != inst.n_nodes || scen.n_nodes() != inst.n_nodes {
        return Err(Error::Dimension(format!(
            "instance has {} nodes, schedule {}, scenario {}",
            inst.n_nodes,
            sched.n_nodes(),
            scen.n_nodes()
        )));
    }
    if inst.battery_init.len() != inst.n_nodes {
        return Err(Error::Dimension("battery_init length".into()));
    }
    Ok(())
}

fn roll(inst: &ProblemInstance, sched: &Schedule, scen: &Scenario) -> RecourseOutcome {
    let n = inst.n_nodes;
    let horizon = scen.horizon();
    let mut out = RecourseOutcome {
        n_nodes: n,
        horizon,
        idle_times: Vec::with_capacity(n * horizon),
        battery_trace: Vec::with_capacity(n * horizon),
        spill_trace: Vec::with_capacity(n * horizon),
        harvest_trace: Vec::with_capacity(n * horizon),
        penalty: 0.0,
    };
    let mut battery = inst.battery_init.clone();
    for t in 0..horizon {
        for (i, b) in battery.iter_mut().enumerate() {
            let s = step_node(inst, sched.tau(), sched.sample_times()[i], scen.gain(i, t), *b);
            *b = s.battery;
            out.idle_times.push(s.idle);
            out.battery_trace.push(s.battery);
            out.spill_trace.push(s.spill);
            out.harvest_trace.push(s.harvested);
            out.penalty += inst.penalties[i] * s.idle;
        }
    }
    out
}

/// Single-slot second stage: minimal idle times and `sum w_i y_i`, plus
/// the battery write-back.
pub fn recourse_single(inst: &ProblemInstance, sched: &Schedule, scen: &Scenario) -> Result<RecourseOutcome> {
    check_dims(inst, sched, scen)?;
    if scen.horizon() != 1 {
        return Err(Error::Dimension(format!(
            "single-slot recourse needs horizon 1, got {}",
            scen.horizon()
        )));
    }
    Ok(roll(inst, sched, scen))
}

/// Multi-slot second stage over the scenario's horizon with battery carry-over.
pub fn recourse_multi(inst: &ProblemInstance, sched: &Schedule, scen: &Scenario) -> Result<RecourseOutcome> {
    check_dims(inst, sched, scen)?;
    Ok(roll(inst, sched, scen))
}

/// Value of the multi-slot second stage, `H * min_i T_i - sum_{t,i} y`.
/// Idle times are unweighted here.
pub fn multi_slot_value(sched: &Schedule, outcome: &RecourseOutcome) -> f64 {
    outcome.horizon as f64 * sched.min_sample_time() - outcome.idle_total()
}

/// `B_i + E_i - P_c T_i` per node; negative values are shortfalls.
pub fn surplus_energy(inst: &ProblemInstance, sched: &Schedule, scen: &Scenario) -> Result<Vec<f64>> {
    check_dims(inst, sched, scen)?;
    if scen.horizon() != 1 {
        return Err(Error::Dimension("surplus energy is defined for one slot".into()));
    }
    Ok((0..inst.n_nodes)
        .map(|i| {
            inst.battery_init[i] + inst.harvest_rate() * scen.gain(i, 0) * sched.tau()
                - inst.consume_power * sched.sample_times()[i]
        })
        .collect())
}
