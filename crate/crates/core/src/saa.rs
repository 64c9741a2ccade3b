//! Sample average approximation.
//!
//! `M` replications each solve the deterministic equivalent over `N`
//! scenarios. Every candidate schedule is then priced on one common set of
//! `N'` evaluation scenarios drawn from a separate seed subspace, the best
//! one is kept, and the gap `z_bar - z_hat(best)` is reported together with
//! its variance estimate.

use rayon::prelude::*;

use crate::channels::{derive_seed, tags, ChannelModel, GainStream};
use crate::detequiv::{self, ScenarioBundle};
use crate::error::{Error, Result};
use crate::model::{ProblemInstance, Scenario, Schedule};
use crate::recourse;

pub const DEFAULT_GAP_VARIANCE_TARGET: f64 = 1e-3;
pub const MAX_SCENARIOS: usize = 1 << 14;
pub const MAX_REPLICATIONS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SaaConfig {
    pub m_replications: usize,
    pub n_scenarios: usize,
    pub n_eval: usize,
    pub gap_variance_target: f64,
    pub seed: u64,
}

impl Default for SaaConfig {
    fn default() -> Self {
        SaaConfig {
            m_replications: 5,
            n_scenarios: 50,
            n_eval: 2000,
            gap_variance_target: DEFAULT_GAP_VARIANCE_TARGET,
            seed: 0,
        }
    }
}

impl SaaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_replications < 2 {
            return Err(Error::param("saa.m_replications", "need at least 2 replications"));
        }
        if self.n_scenarios == 0 {
            return Err(Error::param("saa.n_scenarios", "need at least 1 scenario"));
        }
        if self.n_eval < 10 * self.n_scenarios {
            return Err(Error::param(
                "saa.n_eval",
                format!("{} is below 10 x n_scenarios = {}", self.n_eval, 10 * self.n_scenarios),
            ));
        }
        if self.gap_variance_target.is_nan() || self.gap_variance_target <= 0.0 {
            return Err(Error::param("saa.gap_variance_target", "must be positive"));
        }
        Ok(())
    }
}

/// One replication's schedule and how it fared.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub replication: usize,
    pub schedule: Schedule,
    /// Optimal value of the replication's N-scenario program.
    pub z_n: f64,
    pub evaluation: Evaluation,
}

/// Out-of-sample statistics of one schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Sample mean of the first-stage objective: `Z - penalty` per scenario
    /// for one slot, the multi-slot value otherwise.
    pub objective: f64,
    /// Variance of that mean.
    pub variance: f64,
    /// `tau + mean second-stage value`, kept for comparison.
    pub tau_plus_mean_h: f64,
    /// Mean total idle time across nodes, per slot.
    pub mean_idle: f64,
    /// Variance of `mean_idle`.
    pub idle_variance: f64,
    pub n_eval: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaaReport {
    pub best_schedule: Schedule,
    pub best_replication: usize,
    pub candidates: Vec<Candidate>,
    pub z_bar: f64,
    pub z_hat_best: f64,
    pub gap: f64,
    pub var_eval: f64,
    pub var_zbar: f64,
    pub var_gap: f64,
    pub converged: bool,
    pub horizon: usize,
    pub config: SaaConfig,
}

impl SaaReport {
    pub fn best(&self) -> &Candidate {
        &self.candidates[self.best_replication]
    }
}

/// Mean computed around the first element so that identical inputs give
/// that value back exactly.
fn mean(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

/// Variance of the sample mean, `sum (x - m)^2 / ((k - 1) k)`.
fn variance_of_mean(xs: &[f64], m: f64) -> f64 {
    let k = xs.len() as f64;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / ((k - 1.0) * k)
}

/// Index of the largest value; ties go to the lowest index.
pub fn select_best(values: &[f64]) -> usize {
    let mut best = 0;
    for (m, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = m;
        }
    }
    best
}

/// Draws `count` scenarios from the stream seeded with `seed`.
pub fn draw_scenarios(
    model: &ChannelModel,
    seed: u64,
    n_nodes: usize,
    horizon: usize,
    count: usize,
) -> Result<Vec<Scenario>> {
    let mut stream = GainStream::new(model.clone(), seed);
    (0..count).map(|_| stream.sample_scenario(n_nodes, horizon)).collect()
}

/// Prices `sched` on the given scenarios with the closed-form recourse.
pub fn evaluate_on(inst: &ProblemInstance, sched: &Schedule, scenarios: &[Scenario]) -> Result<Evaluation> {
    if scenarios.len() < 2 {
        return Err(Error::param("n_eval", "need at least 2 evaluation scenarios"));
    }
    let z = sched.min_sample_time();
    let mut values = Vec::with_capacity(scenarios.len());
    let mut h_sum = 0.0;
    let mut idles = Vec::with_capacity(scenarios.len());
    for scen in scenarios {
        let horizon = scen.horizon();
        let out = recourse::recourse_multi(inst, sched, scen)?;
        let (v, h) = if horizon == 1 {
            (z - out.penalty, out.penalty)
        } else {
            let v = recourse::multi_slot_value(sched, &out);
            (v, v)
        };
        values.push(v);
        h_sum += h;
        idles.push(out.idle_total() / horizon as f64);
    }
    let k = scenarios.len() as f64;
    let objective = mean(&values);
    let mean_idle = mean(&idles);
    Ok(Evaluation {
        objective,
        variance: variance_of_mean(&values, objective),
        tau_plus_mean_h: sched.tau() + h_sum / k,
        mean_idle,
        idle_variance: variance_of_mean(&idles, mean_idle),
        n_eval: scenarios.len(),
    })
}

/// Estimates the objective of `sched` on `n_eval` fresh scenarios; returns
/// the sample mean and the variance of that mean.
pub fn evaluate_candidate(
    inst: &ProblemInstance,
    sched: &Schedule,
    model: &ChannelModel,
    horizon: usize,
    n_eval: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let scenarios = draw_scenarios(
        model,
        derive_seed(seed, tags::EVALUATION, 0),
        inst.n_nodes,
        horizon,
        n_eval,
    )?;
    let e = evaluate_on(inst, sched, &scenarios)?;
    Ok((e.objective, e.variance))
}

/// Solves one replication's N-scenario program.
pub fn solve_replication(
    inst: &ProblemInstance,
    model: &ChannelModel,
    horizon: usize,
    n_scenarios: usize,
    seed: u64,
) -> Result<(Schedule, f64)> {
    let scenarios = draw_scenarios(model, seed, inst.n_nodes, horizon, n_scenarios)?;
    let de = detequiv::build(inst, &ScenarioBundle::new(scenarios)?)?;
    let sol = de.solve()?;
    Ok((sol.schedule, sol.objective))
}

pub fn solve_saa(inst: &ProblemInstance, model: &ChannelModel, horizon: usize, cfg: &SaaConfig) -> Result<SaaReport> {
    cfg.validate()?;
    inst.validate()?;
    if horizon == 0 {
        return Err(Error::param("horizon", "must be at least 1"));
    }
    let solved: Vec<(Schedule, f64)> = (0..cfg.m_replications)
        .into_par_iter()
        .map(|m| {
            let seed = derive_seed(cfg.seed, tags::REPLICATION, m as u64);
            solve_replication(inst, model, horizon, cfg.n_scenarios, seed).map_err(|e| match e {
                Error::Solver { status } => Error::Replication {
                    replication: m,
                    seed,
                    status,
                },
                other => other,
            })
        })
        .collect::<Result<_>>()?;

    let eval_seed = derive_seed(cfg.seed, tags::EVALUATION, 0);
    let scenarios = draw_scenarios(model, eval_seed, inst.n_nodes, horizon, cfg.n_eval)?;
    let evaluations: Vec<Evaluation> = solved
        .par_iter()
        .map(|(s, _)| evaluate_on(inst, s, &scenarios))
        .collect::<Result<_>>()?;

    let candidates: Vec<Candidate> = solved
        .into_iter()
        .zip(evaluations)
        .enumerate()
        .map(|(m, ((schedule, z_n), evaluation))| Candidate {
            replication: m,
            schedule,
            z_n,
            evaluation,
        })
        .collect();

    let best = select_best(&candidates.iter().map(|c| c.evaluation.objective).collect::<Vec<_>>());
    let z_values: Vec<f64> = candidates.iter().map(|c| c.z_n).collect();
    let z_bar = mean(&z_values);
    let var_zbar = variance_of_mean(&z_values, z_bar);
    let var_eval = candidates[best].evaluation.variance;
    let var_gap = var_eval + var_zbar;
    let z_hat_best = candidates[best].evaluation.objective;
    Ok(SaaReport {
        best_schedule: candidates[best].schedule.clone(),
        best_replication: best,
        z_bar,
        z_hat_best,
        gap: z_bar - z_hat_best,
        var_eval,
        var_zbar,
        var_gap,
        converged: var_gap < cfg.gap_variance_target,
        horizon,
        config: cfg.clone(),
        candidates,
    })
}

/// One iteration of [`adaptive_run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveStep {
    pub n_scenarios: usize,
    pub m_replications: usize,
    pub var_gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveReport {
    pub report: SaaReport,
    pub trajectory: Vec<AdaptiveStep>,
}

/// Grows the sample until the gap variance meets the target: doubles `N`,
/// then `M`, alternating, within `N <= 2^14` and `M <= 64`. Stops with
/// `converged = false` once both caps are reached.
pub fn adaptive_run(
    inst: &ProblemInstance,
    model: &ChannelModel,
    horizon: usize,
    cfg: &SaaConfig,
) -> Result<AdaptiveReport> {
    adaptive_run_capped(inst, model, horizon, cfg, MAX_SCENARIOS, MAX_REPLICATIONS)
}

/// [`adaptive_run`] with explicit caps on `N` and `M`.
pub fn adaptive_run_capped(
    inst: &ProblemInstance,
    model: &ChannelModel,
    horizon: usize,
    cfg: &SaaConfig,
    max_scenarios: usize,
    max_replications: usize,
) -> Result<AdaptiveReport> {
    if cfg.n_scenarios > max_scenarios || cfg.m_replications > max_replications {
        return Err(Error::param("saa", "initial sample exceeds the adaptive caps"));
    }
    let mut cfg = cfg.clone();
    let mut trajectory = Vec::new();
    let mut grow_n = true;
    loop {
        let report = solve_saa(inst, model, horizon, &cfg)?;
        trajectory.push(AdaptiveStep {
            n_scenarios: cfg.n_scenarios,
            m_replications: cfg.m_replications,
            var_gap: report.var_gap,
            converged: report.converged,
        });
        if report.converged {
            return Ok(AdaptiveReport { report, trajectory });
        }
        let can_n = cfg.n_scenarios * 2 <= max_scenarios;
        let can_m = cfg.m_replications * 2 <= max_replications;
        match (grow_n && can_n, can_n, can_m) {
            (true, _, _) | (false, true, false) => {
                cfg.n_scenarios *= 2;
                cfg.n_eval = cfg.n_eval.max(10 * cfg.n_scenarios);
            }
            (false, _, true) => cfg.m_replications *= 2,
            (false, false, false) => return Ok(AdaptiveReport { report, trajectory }),
        }
        grow_n = !grow_n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SaaConfig {
        SaaConfig {
            m_replications: 3,
            n_scenarios: 10,
            n_eval: 200,
            gap_variance_target: 1e-3,
            seed,
        }
    }

    #[test]
    fn fixed_channel_is_deterministic() {
        let inst = ProblemInstance::new(5);
        let r = solve_saa(&inst, &ChannelModel::fixed(0.5).unwrap(), 1, &small(9)).unwrap();
        for c in &r.candidates {
            assert_eq!(c.schedule, r.candidates[0].schedule);
            assert!((c.schedule.tau() - 1.0 / 6.0).abs() < 1e-9);
        }
        assert_eq!(r.var_gap, 0.0);
        assert_eq!(r.var_zbar, 0.0);
        assert!(r.gap.abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn config_checks() {
        let mut c = small(0);
        c.m_replications = 1;
        assert!(c.validate().is_err());
        let mut c = small(0);
        c.n_eval = 99;
        assert!(c.validate().is_err());
        let mut c = small(0);
        c.gap_variance_target = 0.0;
        assert!(c.validate().is_err());
        assert!(SaaConfig::default().validate().is_ok());
    }

    #[test]
    fn evaluation_examples() {
        let inst = ProblemInstance::new(5);
        let balance = Schedule::uniform(1.0 / 6.0, 5, 1.0).unwrap();
        let (v, var) = evaluate_candidate(&inst, &balance, &ChannelModel::fixed(0.25).unwrap(), 1, 50, 3).unwrap();
        assert_eq!(var, 0.0);
        let z = 1.0 / 6.0;
        assert!((v - (z - 5.0 * z / 2.0)).abs() < 1e-12);

        let idle = Schedule::new(1.0, vec![0.0; 5], 1.0).unwrap();
        let (v, var) = evaluate_candidate(&inst, &idle, &ChannelModel::rician(4.0).unwrap(), 1, 50, 3).unwrap();
        assert_eq!((v, var), (0.0, 0.0));
    }

    #[test]
    fn variance_identity_and_orientation() {
        let inst = ProblemInstance::new(3);
        let r = solve_saa(&inst, &ChannelModel::rayleigh(2.0).unwrap(), 1, &small(1)).unwrap();
        assert_eq!(r.var_gap, r.var_eval + r.var_zbar);
        assert_eq!(r.converged, r.var_gap < 1e-3);
        let best = r.best().evaluation.objective;
        assert!(r.candidates.iter().all(|c| c.evaluation.objective <= best));
        assert_eq!(r.z_hat_best, best);
        assert!((r.gap - (r.z_bar - best)).abs() == 0.0);
    }

    #[test]
    fn common_evaluation_matches_standalone_evaluation() {
        let inst = ProblemInstance::new(3);
        let model = ChannelModel::rician(4.0).unwrap();
        let r = solve_saa(&inst, &model, 1, &small(5)).unwrap();
        let (v, var) = evaluate_candidate(&inst, &r.best_schedule, &model, 1, 200, 5).unwrap();
        assert_eq!(v, r.z_hat_best);
        assert_eq!(var, r.var_eval);
    }

    #[test]
    fn reproducible() {
        let inst = ProblemInstance::new(3);
        let model = ChannelModel::gaussian(0.1).unwrap();
        let a = solve_saa(&inst, &model, 2, &small(11)).unwrap();
        let b = solve_saa(&inst, &model, 2, &small(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adaptive_with_vacuous_target_stops_at_once() {
        let inst = ProblemInstance::new(3);
        let mut cfg = small(2);
        cfg.gap_variance_target = f64::INFINITY;
        let r = adaptive_run(&inst, &ChannelModel::rayleigh(2.0).unwrap(), 1, &cfg).unwrap();
        assert_eq!(r.trajectory.len(), 1);
        assert!(r.report.converged);
    }

    #[test]
    fn adaptive_doubles_n_then_m_until_capped() {
        let inst = ProblemInstance::new(2);
        let cfg = SaaConfig {
            m_replications: 2,
            n_scenarios: 2,
            n_eval: 20,
            gap_variance_target: 1e-300,
            seed: 4,
        };
        let r = adaptive_run_capped(&inst, &ChannelModel::rayleigh(2.0).unwrap(), 1, &cfg, 8, 4).unwrap();
        let steps: Vec<_> = r.trajectory.iter().map(|s| (s.n_scenarios, s.m_replications)).collect();
        assert_eq!(steps, vec![(2, 2), (4, 2), (4, 4), (8, 4)]);
        assert!(!r.report.converged);
        assert_eq!(r.report.config.n_eval, 80);
    }
}
