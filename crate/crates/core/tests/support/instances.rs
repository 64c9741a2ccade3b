//! Random problem instances for oracle comparisons.

#![allow(dead_code)]

use rand::Rng;
use rfsched::{ProblemInstance, Scenario, Schedule};

pub struct Case {
    pub inst: ProblemInstance,
    pub sched: Schedule,
    pub scenarios: Vec<Scenario>,
}

/// A gain in [0, 1], with exact 0 and 1 showing up now and then.
pub fn gain<R: Rng>(rng: &mut R) -> f64 {
    match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random(),
    }
}

/// Random split of one second into `tau` and `n` sampling times.
pub fn schedule<R: Rng>(rng: &mut R, n: usize) -> Schedule {
    let parts: Vec<f64> = (0..=n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = parts.iter().sum();
    let times: Vec<f64> = parts[1..].iter().map(|p| p / total).collect();
    let tau = 1.0 - times.iter().sum::<f64>();
    Schedule::new(tau.max(0.0), times, 1.0).unwrap()
}

pub fn instance<R: Rng>(rng: &mut R, n: usize, weighted: bool) -> ProblemInstance {
    let mut inst = ProblemInstance::new(n);
    inst.hap_power = rng.random_range(0.1..1.0);
    inst.consume_power = rng.random_range(0.01..0.1);
    inst.efficiency = rng.random_range(0.05..=1.0);
    inst.battery_cap = if rng.random_bool(0.2) {
        0.0
    } else {
        rng.random_range(0.0..0.2)
    };
    let cap = inst.battery_cap;
    inst.battery_init = (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                0.0
            } else {
                rng.random::<f64>() * cap
            }
        })
        .collect();
    if weighted {
        inst.penalties = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
    }
    inst
}

/// `n <= max_n` nodes, `N <= max_scenarios` scenarios of `horizon` slots.
pub fn case<R: Rng>(rng: &mut R, max_n: usize, max_scenarios: usize, horizon: usize, weighted: bool) -> Case {
    let n = rng.random_range(1..=max_n);
    let count = rng.random_range(1..=max_scenarios);
    let inst = instance(rng, n, weighted);
    let sched = schedule(rng, n);
    let scenarios = (0..count)
        .map(|_| Scenario::new(n, horizon, (0..n * horizon).map(|_| gain(rng)).collect()).unwrap())
        .collect();
    Case { inst, sched, scenarios }
}
