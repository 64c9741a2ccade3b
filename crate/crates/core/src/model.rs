//! Physical parameters, first-stage decisions and channel realizations.
//!
//! Energies are in Joules, times in seconds, powers in Watts. A slot has
//! length `slot_seconds` (1 s by default) and is split between the HAP's
//! charging time `tau` and the nodes' sampling times `T_i`.

use crate::error::{Error, Result};

/// Tolerance on the time budget `tau + sum(T_i) = slot_seconds`.
pub const TIME_TOLERANCE: f64 = 1e-9;

/// Network and hardware constants shared by every formulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub n_nodes: usize,
    /// Effective radiated HAP power `P`.
    pub hap_power: f64,
    /// Node consumption rate `P_c` while sampling.
    pub consume_power: f64,
    /// Harvester conversion efficiency `eta`.
    pub efficiency: f64,
    /// Capacity of each node's super capacitor.
    pub battery_cap: f64,
    /// Stored energy of each node at the start of the planning window.
    pub battery_init: Vec<f64>,
    /// Per-node idle-time penalty weights `w_i`.
    pub penalties: Vec<f64>,
    pub slot_seconds: f64,
}

impl ProblemInstance {
    pub const DEFAULT_HAP_POWER: f64 = 0.25;
    pub const DEFAULT_CONSUME_POWER: f64 = 0.05;
    pub const DEFAULT_EFFICIENCY: f64 = 0.4;
    pub const DEFAULT_BATTERY_CAP: f64 = 0.1;

    /// `n_nodes` homogeneous nodes with the default constants, empty
    /// batteries and unit penalties.
    pub fn new(n_nodes: usize) -> Self {
        ProblemInstance {
            n_nodes,
            hap_power: Self::DEFAULT_HAP_POWER,
            consume_power: Self::DEFAULT_CONSUME_POWER,
            efficiency: Self::DEFAULT_EFFICIENCY,
            battery_cap: Self::DEFAULT_BATTERY_CAP,
            battery_init: vec![0.0; n_nodes],
            penalties: vec![1.0; n_nodes],
            slot_seconds: 1.0,
        }
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Self {
        self.efficiency = efficiency;
        self
    }

    pub fn with_battery_init(mut self, battery_init: Vec<f64>) -> Self {
        self.battery_init = battery_init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 {
            return Err(Error::param("n_nodes", "need at least one node"));
        }
        if !(self.hap_power > 0.0 && self.hap_power.is_finite()) {
            return Err(Error::param("hap_power", format!("{} is not positive", self.hap_power)));
        }
        if !(self.consume_power > 0.0 && self.consume_power.is_finite()) {
            return Err(Error::param(
                "consume_power",
                format!("{} is not positive", self.consume_power),
            ));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::param("efficiency", format!("{} not in (0, 1]", self.efficiency)));
        }
        if !(self.battery_cap >= 0.0 && self.battery_cap.is_finite()) {
            return Err(Error::param("battery_cap", format!("{} is negative", self.battery_cap)));
        }
        if !(self.slot_seconds > 0.0 && self.slot_seconds.is_finite()) {
            return Err(Error::param("slot_seconds", "must be positive"));
        }
        if self.battery_init.len() != self.n_nodes {
            return Err(Error::Dimension(format!(
                "battery_init has {} entries for {} nodes",
                self.battery_init.len(),
                self.n_nodes
            )));
        }
        if self.penalties.len() != self.n_nodes {
            return Err(Error::Dimension(format!(
                "penalties has {} entries for {} nodes",
                self.penalties.len(),
                self.n_nodes
            )));
        }
        if let Some(b) = self
            .battery_init
            .iter()
            .find(|&&b| !(0.0..=self.battery_cap).contains(&b))
        {
            return Err(Error::param(
                "battery_init",
                format!("{b} outside [0, {}]", self.battery_cap),
            ));
        }
        if let Some(w) = self.penalties.iter().find(|&&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::param("penalties", format!("{w} is negative")));
        }
        Ok(())
    }

    /// Energy harvested per second of charging at unit gain, `eta * P`.
    #[inline]
    pub fn harvest_rate(&self) -> f64 {
        self.efficiency * self.hap_power
    }
}

/// Energy a node harvests at channel gain `gain` while the HAP charges for `tau`.
pub fn harvested_energy(inst: &ProblemInstance, gain: f64, tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gain) {
        return Err(Error::param("gain", format!("{gain} outside [0, 1]")));
    }
    if !(tau >= 0.0) {
        return Err(Error::param("tau", format!("{tau} is negative")));
    }
    Ok(inst.harvest_rate() * gain * tau)
}

/// First-stage decision: HAP charging time and per-node sampling times.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    tau: f64,
    sample_times: Vec<f64>,
}

impl Schedule {
    pub fn new(tau: f64, sample_times: Vec<f64>, slot_seconds: f64) -> Result<Self> {
        if !(tau >= 0.0) {
            return Err(Error::param("tau", format!("{tau} is negative")));
        }
        if let Some(t) = sample_times.iter().find(|&&t| !(t >= 0.0)) {
            return Err(Error::param("sample_times", format!("{t} is negative")));
        }
        let total = tau + sample_times.iter().sum::<f64>();
        if (total - slot_seconds).abs() > TIME_TOLERANCE {
            return Err(Error::TimeBudget { total, slot_seconds });
        }
        Ok(Schedule { tau, sample_times })
    }

    /// Builds a schedule from raw LP output, clipping round-off so that the
    /// budget holds to machine precision. Fails if the values are further
    /// than `tolerance` from a valid schedule.
    pub(crate) fn from_solution(
        tau: f64,
        mut sample_times: Vec<f64>,
        slot_seconds: f64,
        tolerance: f64,
    ) -> Result<Self> {
        if tau < -tolerance || sample_times.iter().any(|&t| t < -tolerance) {
            return Err(Error::param("schedule", "negative time in LP solution"));
        }
        for t in &mut sample_times {
            *t = t.max(0.0);
        }
        let active: f64 = sample_times.iter().sum();
        let total = tau.max(0.0) + active;
        if (total - slot_seconds).abs() > tolerance {
            return Err(Error::TimeBudget { total, slot_seconds });
        }
        // Absorb round-off into tau.
        let tau = (slot_seconds - active).max(0.0);
        Schedule::new(tau, sample_times, slot_seconds)
    }

    /// Equal split: every node samples `(slot_seconds - tau) / n`.
    pub fn uniform(tau: f64, n_nodes: usize, slot_seconds: f64) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::param("n_nodes", "need at least one node"));
        }
        let each = (slot_seconds - tau) / n_nodes as f64;
        Schedule::new(tau, vec![each; n_nodes], slot_seconds)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sample_times(&self) -> &[f64] {
        &self.sample_times
    }

    pub fn n_nodes(&self) -> usize {
        self.sample_times.len()
    }

    /// The max-min quantity `Z = min_i T_i`.
    pub fn min_sample_time(&self) -> f64 {
        self.sample_times.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// One joint channel-gain realization for all nodes over `horizon` slots.
///
/// Stored slot-major: the gains of slot `t` are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    n_nodes: usize,
    horizon: usize,
    gains: Vec<f64>,
}

impl Scenario {
    /// `gains` is slot-major, `gains[t * n_nodes + i]`.
    pub fn new(n_nodes: usize, horizon: usize, gains: Vec<f64>) -> Result<Self> {
        if n_nodes == 0 || horizon == 0 {
            return Err(Error::Dimension("scenario needs at least one node and one slot".into()));
        }
        if gains.len() != n_nodes * horizon {
            return Err(Error::Dimension(format!(
                "{} gains for a {n_nodes}x{horizon} scenario",
                gains.len()
            )));
        }
        if let Some(g) = gains.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return Err(Error::param("gain", format!("{g} outside [0, 1]")));
        }
        Ok(Scenario {
            n_nodes,
            horizon,
            gains,
        })
    }

    pub fn constant(n_nodes: usize, horizon: usize, gain: f64) -> Result<Self> {
        Scenario::new(n_nodes, horizon, vec![gain; n_nodes * horizon])
    }

    /// Single-slot scenario from per-node gains.
    pub fn single(gains: Vec<f64>) -> Result<Self> {
        Scenario::new(gains.len(), 1, gains)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    pub fn gain(&self, node: usize, slot: usize) -> f64 {
        self.gains[slot * self.n_nodes + node]
    }

    pub fn slot(&self, slot: usize) -> &[f64] {
        &self.gains[slot * self.n_nodes..(slot + 1) * self.n_nodes]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gains
    }
}

/// Second-stage outcome of running a schedule against a scenario. All
/// per-node series are slot-major like [`Scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct RecourseOutcome {
    pub n_nodes: usize,
    pub horizon: usize,
    pub idle_times: Vec<f64>,
    pub battery_trace: Vec<f64>,
    pub spill_trace: Vec<f64>,
    pub harvest_trace: Vec<f64>,
    /// Weighted idle total `sum w_i y_i` over all slots.
    pub penalty: f64,
}

impl RecourseOutcome {
    #[inline]
    pub fn idle(&self, node: usize, slot: usize) -> f64 {
        self.idle_times[slot * self.n_nodes + node]
    }

    #[inline]
    pub fn battery(&self, node: usize, slot: usize) -> f64 {
        self.battery_trace[slot * self.n_nodes + node]
    }

    #[inline]
    pub fn spill(&self, node: usize, slot: usize) -> f64 {
        self.spill_trace[slot * self.n_nodes + node]
    }

    /// Unweighted idle total over all nodes and slots.
    pub fn idle_total(&self) -> f64 {
        self.idle_times.iter().sum()
    }

    pub fn slot_idle(&self, slot: usize) -> f64 {
        self.idle_times[slot * self.n_nodes..(slot + 1) * self.n_nodes]
            .iter()
            .sum()
    }

    pub fn final_battery(&self) -> &[f64] {
        let start = (self.horizon - 1) * self.n_nodes;
        &self.battery_trace[start..]
    }
}
