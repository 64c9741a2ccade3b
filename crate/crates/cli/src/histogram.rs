//! Distribution of end-of-slot surplus energy under a fixed schedule.

use rfsched::channels::{derive_seed, tags, GainStream};
use rfsched::recourse::surplus_energy;
use rfsched::{ChannelModel, ProblemInstance, Schedule};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub count: usize,
}

impl Histogram {
    /// Bins `values` on `[min, max]`. When every value is equal the range is
    /// widened slightly so exactly one bin is occupied.
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self, CliError> {
        if bins < 2 {
            return Err(CliError::invalid("histogram.bins", "need at least 2 bins"));
        }
        if values.is_empty() {
            return Err(CliError::invalid("histogram.samples", "need at least 1 sample"));
        }
        let k = values.len() as f64;
        let shift = values[0];
        let d_mean = values.iter().map(|v| v - shift).sum::<f64>() / k;
        let mean = shift + d_mean;
        let variance = if values.len() < 2 {
            0.0
        } else {
            values.iter().map(|v| (v - shift - d_mean).powi(2)).sum::<f64>() / (k - 1.0)
        };
        let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
            let pad = 1e-9 * (1.0 + lo.abs());
            lo -= pad;
            hi += pad;
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|b| lo + b as f64 * width).collect();
        let mut counts = vec![0usize; bins];
        for &v in values {
            let b = (((v - lo) / width).floor() as usize).min(bins - 1);
            counts[b] += 1;
        }
        Ok(Histogram {
            edges,
            probabilities: counts.iter().map(|&c| c as f64 / k).collect(),
            mean,
            variance,
            count: values.len(),
        })
    }

    pub fn occupied_bins(&self) -> usize {
        self.probabilities.iter().filter(|&&p| p > 0.0).count()
    }
}

/// Surplus `B + E - P_c T` of every node over `samples` single-slot draws.
pub fn surplus_samples(
    inst: &ProblemInstance,
    sched: &Schedule,
    model: &ChannelModel,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, CliError> {
    let mut stream = GainStream::new(model.clone(), derive_seed(seed, tags::HISTOGRAM, 0));
    let mut out = Vec::with_capacity(samples * inst.n_nodes);
    for _ in 0..samples {
        let scen = stream.sample_scenario(inst.n_nodes, 1)?;
        out.extend(surplus_energy(inst, sched, &scen)?);
    }
    Ok(out)
}

pub fn emit_surplus_histogram(
    inst: &ProblemInstance,
    sched: &Schedule,
    model: &ChannelModel,
    bins: usize,
    samples: usize,
    seed: u64,
) -> Result<Histogram, CliError> {
    if samples == 0 {
        return Err(CliError::invalid("histogram.samples", "need at least 1 sample"));
    }
    Histogram::from_values(&surplus_samples(inst, sched, model, samples, seed)?, bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rfsched::baselines::fixed_gain_schedule;

    #[test]
    fn probabilities_sum_to_one() {
        let values: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let h = Histogram::from_values(&values, 13).unwrap();
        assert_eq!(h.edges.len(), 14);
        assert!((h.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(h.edges.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(h.edges[0], 0.0);
        assert!((h.edges[13] - 100.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_channel_single_bin() {
        let inst = ProblemInstance::new(5);
        let sched = Schedule::uniform(0.3, 5, 1.0).unwrap();
        let h = emit_surplus_histogram(&inst, &sched, &ChannelModel::fixed(0.7).unwrap(), 10, 50, 1).unwrap();
        assert_eq!(h.occupied_bins(), 1);
        assert_eq!(h.variance, 0.0);
    }

    #[test]
    fn balanced_point_mass_at_zero() {
        let inst = ProblemInstance::new(5);
        let sched = fixed_gain_schedule(&inst, 0.5, 1).unwrap();
        let h = emit_surplus_histogram(&inst, &sched, &ChannelModel::fixed(0.5).unwrap(), 4, 20, 0).unwrap();
        assert_eq!(h.occupied_bins(), 1);
        assert!(h.mean.abs() < 1e-12);
        let b = h.probabilities.iter().position(|&p| p > 0.0).unwrap();
        assert!(h.edges[b] <= 0.0 + 1e-12 && h.edges[b + 1] >= -1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Histogram::from_values(&[1.0], 1).is_err());
        assert!(Histogram::from_values(&[], 4).is_err());
    }
}
