//! Deterministic-equivalent LPs for a sampled bundle of scenarios.
//!
//! Both programs share the first-stage block `(tau, T_1..T_n, Z)` and one
//! max-min variable `Z <= T_i`. The single-slot program appends one idle
//! variable per (scenario, node); the multi-slot program appends an
//! interleaved `(y, B, delta)` triple per (scenario, slot, node).

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpSolution, Relation};
use crate::model::{ProblemInstance, Scenario, Schedule};

/// Slack allowed between LP output and an exact schedule before rejecting it.
pub const SCHEDULE_TOLERANCE: f64 = 1e-6;

/// Equally weighted scenarios of identical shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioBundle {
    scenarios: Vec<Scenario>,
}

impl ScenarioBundle {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self> {
        let first = scenarios
            .first()
            .ok_or_else(|| Error::param("bundle", "needs at least one scenario"))?;
        let shape = (first.n_nodes(), first.horizon());
        if scenarios.iter().any(|s| (s.n_nodes(), s.horizon()) != shape) {
            return Err(Error::Dimension("scenarios in a bundle differ in shape".into()));
        }
        Ok(ScenarioBundle { scenarios })
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn n_nodes(&self) -> usize {
        self.scenarios[0].n_nodes()
    }

    pub fn horizon(&self) -> usize {
        self.scenarios[0].horizon()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }
}

/// Variable indices of a built program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n_nodes: usize,
    pub n_scenarios: usize,
    pub horizon: usize,
    /// Whether each (scenario, slot, node) carries battery and spill too.
    pub multi: bool,
}

impl Layout {
    pub const TAU: usize = 0;

    pub fn sample_time(&self, node: usize) -> usize {
        1 + node
    }

    pub fn z(&self) -> usize {
        1 + self.n_nodes
    }

    fn recourse_base(&self) -> usize {
        2 + self.n_nodes
    }

    fn cell(&self, scenario: usize, slot: usize, node: usize) -> usize {
        (scenario * self.horizon + slot) * self.n_nodes + node
    }

    fn stride(&self) -> usize {
        if self.multi {
            3
        } else {
            1
        }
    }

    pub fn idle(&self, scenario: usize, slot: usize, node: usize) -> usize {
        self.recourse_base() + self.stride() * self.cell(scenario, slot, node)
    }

    /// Battery variable; multi-slot programs only.
    pub fn battery(&self, scenario: usize, slot: usize, node: usize) -> usize {
        debug_assert!(self.multi);
        self.idle(scenario, slot, node) + 1
    }

    /// Spill variable; multi-slot programs only.
    pub fn spill(&self, scenario: usize, slot: usize, node: usize) -> usize {
        debug_assert!(self.multi);
        self.idle(scenario, slot, node) + 2
    }

    pub fn n_vars(&self) -> usize {
        self.recourse_base() + self.stride() * self.n_nodes * self.n_scenarios * self.horizon
    }
}

/// A built program together with its variable layout.
#[derive(Debug, Clone)]
pub struct DetEquiv {
    pub lp: LinearProgram,
    pub layout: Layout,
    slot_seconds: f64,
}

/// Result of solving a deterministic equivalent.
#[derive(Debug, Clone)]
pub struct DetEquivSolution {
    pub schedule: Schedule,
    pub objective: f64,
    pub solution: LpSolution,
}

impl DetEquiv {
    /// Pins the first stage to `sched`, leaving only the recourse free.
    pub fn pin_schedule(&mut self, sched: &Schedule) -> Result<()> {
        if sched.n_nodes() != self.layout.n_nodes {
            return Err(Error::Dimension("schedule size differs from program".into()));
        }
        self.lp.fix(Layout::TAU, sched.tau())?;
        for (i, &t) in sched.sample_times().iter().enumerate() {
            self.lp.fix(self.layout.sample_time(i), t)?;
        }
        Ok(())
    }

    /// Reads the first stage out of an optimal solution.
    pub fn schedule_from(&self, sol: &LpSolution) -> Result<Schedule> {
        let x = &sol.variables;
        if x.len() != self.layout.n_vars() {
            return Err(Error::Solver { status: sol.status });
        }
        let times = (0..self.layout.n_nodes)
            .map(|i| x[self.layout.sample_time(i)])
            .collect();
        Schedule::from_solution(x[Layout::TAU], times, self.slot_seconds, SCHEDULE_TOLERANCE)
    }

    pub fn solve(&self) -> Result<DetEquivSolution> {
        let solution = lp::solve(&self.lp).into_optimal()?;
        let schedule = self.schedule_from(&solution)?;
        Ok(DetEquivSolution {
            schedule,
            objective: solution.objective_value,
            solution,
        })
    }
}

fn first_stage(inst: &ProblemInstance, layout: &Layout, objective: Vec<f64>) -> Result<LinearProgram> {
    let mut lp = LinearProgram::new(objective)?;
    let n = inst.n_nodes;
    let mut budget = vec![(Layout::TAU, 1.0)];
    budget.extend((0..n).map(|i| (layout.sample_time(i), 1.0)));
    lp.add_constraint(budget, Relation::Eq, inst.slot_seconds)?;
    for i in 0..n {
        lp.add_constraint(
            vec![(layout.z(), 1.0), (layout.sample_time(i), -1.0)],
            Relation::Le,
            0.0,
        )?;
    }
    Ok(lp)
}

fn check(inst: &ProblemInstance, bundle: &ScenarioBundle) -> Result<()> {
    inst.validate()?;
    if bundle.n_nodes() != inst.n_nodes {
        return Err(Error::Dimension(format!(
            "bundle has {} nodes, instance {}",
            bundle.n_nodes(),
            inst.n_nodes
        )));
    }
    Ok(())
}

/// Single-slot program: maximize `Z - (1/N) sum_j sum_i w_i y_i^j`.
pub fn build_single(inst: &ProblemInstance, bundle: &ScenarioBundle) -> Result<DetEquiv> {
    check(inst, bundle)?;
    if bundle.horizon() != 1 {
        return Err(Error::Dimension(format!(
            "single-slot program needs horizon 1, got {}",
            bundle.horizon()
        )));
    }
    let n = inst.n_nodes;
    let layout = Layout {
        n_nodes: n,
        n_scenarios: bundle.len(),
        horizon: 1,
        multi: false,
    };
    let w = bundle.weight();
    let mut objective = vec![0.0; layout.n_vars()];
    objective[layout.z()] = 1.0;
    for j in 0..bundle.len() {
        for i in 0..n {
            objective[layout.idle(j, 0, i)] = -w * inst.penalties[i];
        }
    }
    let mut lp = first_stage(inst, &layout, objective)?;
    let rate = inst.harvest_rate();
    let pc = inst.consume_power;
    for (j, scen) in bundle.scenarios().iter().enumerate() {
        for i in 0..n {
            // P_c y + eta P g tau - P_c T >= -B
            lp.add_constraint(
                vec![
                    (layout.idle(j, 0, i), pc),
                    (Layout::TAU, rate * scen.gain(i, 0)),
                    (layout.sample_time(i), -pc),
                ],
                Relation::Ge,
                -inst.battery_init[i],
            )?;
        }
    }
    assert_eq!(lp.n_vars(), 2 + n + n * bundle.len());
    Ok(DetEquiv {
        lp,
        layout,
        slot_seconds: inst.slot_seconds,
    })
}

/// Multi-slot program: maximize `(1/N) sum_s [H Z - sum_{t,i} y]` with
/// battery carry-over, cap and spill.
pub fn build_multi(inst: &ProblemInstance, bundle: &ScenarioBundle) -> Result<DetEquiv> {
    check(inst, bundle)?;
    let n = inst.n_nodes;
    let h = bundle.horizon();
    let layout = Layout {
        n_nodes: n,
        n_scenarios: bundle.len(),
        horizon: h,
        multi: true,
    };
    let w = bundle.weight();
    let mut objective = vec![0.0; layout.n_vars()];
    objective[layout.z()] = h as f64;
    for s in 0..bundle.len() {
        for t in 0..h {
            for i in 0..n {
                objective[layout.idle(s, t, i)] = -w;
            }
        }
    }
    let mut lp = first_stage(inst, &layout, objective)?;
    let rate = inst.harvest_rate();
    let pc = inst.consume_power;
    for (s, scen) in bundle.scenarios().iter().enumerate() {
        for t in 0..h {
            for i in 0..n {
                let y = layout.idle(s, t, i);
                let b = layout.battery(s, t, i);
                let d = layout.spill(s, t, i);
                lp.set_bounds(b, 0.0, inst.battery_cap)?;
                let harvest = (Layout::TAU, rate * scen.gain(i, t));
                let mut shortfall = vec![(y, pc), harvest, (layout.sample_time(i), -pc)];
                let mut balance = vec![(b, 1.0), (d, 1.0), harvest, (layout.sample_time(i), -pc), (y, pc)];
                // Balance row, rearranged: B^t + delta - E + P_c T - P_c y = B^{t-1}.
                for term in &mut balance[2..] {
                    term.1 = -term.1;
                }
                let carried = if t == 0 {
                    inst.battery_init[i]
                } else {
                    let prev = layout.battery(s, t - 1, i);
                    shortfall.push((prev, 1.0));
                    balance.push((prev, -1.0));
                    0.0
                };
                lp.add_constraint(shortfall, Relation::Ge, -carried)?;
                lp.add_constraint(balance, Relation::Eq, carried)?;
            }
        }
    }
    assert_eq!(lp.n_vars(), 2 + n + 3 * n * bundle.len() * h);
    Ok(DetEquiv {
        lp,
        layout,
        slot_seconds: inst.slot_seconds,
    })
}

/// Builds the program matching the bundle's horizon.
pub fn build(inst: &ProblemInstance, bundle: &ScenarioBundle) -> Result<DetEquiv> {
    if bundle.horizon() == 1 {
        build_single(inst, bundle)
    } else {
        build_multi(inst, bundle)
    }
}
