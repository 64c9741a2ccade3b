//! Flat `key = value` configuration with dotted keys.
//!
//! ```text
//! # comment
//! channel.kinds = rician, gaussian:0.1
//! policy = spsaa, avg_gain
//! sweep.eta = 0.1:0.6:0.1
//! ```
//!
//! List-valued keys take comma-separated values; an empty value is an empty
//! list. Flags are applied as further `key = value` pairs after the file.

use std::path::PathBuf;

use rfsched::saa::SaaConfig;
use rfsched::sim::{Mode, Policy};
use rfsched::{ChannelKind, ChannelModel, ProblemInstance};

use crate::error::CliError;
use crate::format::sig9;

/// Every accepted key with its default.
pub const KEYS: &[(&str, &str)] = &[
    ("model.n_nodes", "5"),
    ("model.hap_power", "0.25"),
    ("model.consume_power", "0.05"),
    ("model.eta", "0.4"),
    ("model.battery_cap", "0.1"),
    ("model.slot_seconds", "1"),
    ("channel.kinds", "rician"),
    ("channel.gaussian_mean", "4"),
    ("channel.rician_spread", "1"),
    ("policy", "spsaa"),
    ("sim.mode", "single"),
    ("sim.horizon", "1"),
    ("sim.episodes", "100"),
    ("seed", "0"),
    ("saa.m", "5"),
    ("saa.n", "50"),
    ("saa.n_eval", "2000"),
    ("saa.target", "0.001"),
    ("sweep.eta", ""),
    ("sweep.horizon", ""),
    ("output.dir", "out"),
    ("histogram.bins", "20"),
    ("histogram.samples", "10000"),
];

/// Splits config text into `(key, value)` pairs, rejecting unknown keys.
pub fn parse_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Syntax {
                line: lineno + 1,
                text: raw.to_string(),
            });
        };
        let key = key.trim();
        check_key(key)?;
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

pub fn check_key(key: &str) -> Result<(), CliError> {
    if KEYS.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        Err(CliError::UnknownKey(key.to_string()))
    }
}

/// A channel as named on the command line: `kind[:param]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelArg {
    pub kind: ChannelKind,
    pub param: f64,
}

impl ChannelArg {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = |reason: String| CliError::invalid("channel.kinds", reason);
        let (kind, param) = match s.split_once(':') {
            Some((k, p)) => (k.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let kind: ChannelKind = kind.parse().map_err(|e: rfsched::Error| bad(e.to_string()))?;
        let param = match param {
            Some(p) => p.parse().map_err(|_| bad(format!("bad parameter `{p}`")))?,
            None => kind.default_param(),
        };
        Ok(ChannelArg { kind, param })
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.kind, sig9(self.param))
    }

    pub fn model(&self, gaussian_mean: f64, rician_spread: f64) -> rfsched::Result<ChannelModel> {
        match self.kind {
            ChannelKind::Gaussian => ChannelModel::gaussian_with_mean(self.param, gaussian_mean),
            ChannelKind::Rician => ChannelModel::rician_with_spread(self.param, rician_spread),
            kind => ChannelModel::from_kind(kind, self.param),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_nodes: usize,
    pub hap_power: f64,
    pub consume_power: f64,
    pub battery_cap: f64,
    pub slot_seconds: f64,
    pub etas: Vec<f64>,
    pub channels: Vec<ChannelArg>,
    pub gaussian_mean: f64,
    pub rician_spread: f64,
    pub policies: Vec<Policy>,
    pub modes: Vec<Mode>,
    pub horizons: Vec<usize>,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    /// SAA sizes; the seed field is unused.
    pub saa: SaaConfig,
    pub out_dir: PathBuf,
    pub bins: usize,
    pub samples: usize,
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::invalid(key, format!("cannot parse `{value}`")))
}

fn list<T, F>(value: &str, item: F) -> Result<Vec<T>, CliError>
where
    F: FnMut(&str) -> Result<T, CliError>,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

/// `a:b:step`, inclusive of `b` up to round-off.
pub fn parse_range(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    let [a, b, step] = parts[..] else {
        return Err(CliError::invalid(key, format!("expected a:b:step, got `{value}`")));
    };
    let (a, b, step): (f64, f64, f64) = (scalar(key, a)?, scalar(key, b)?, scalar(key, step)?);
    if !(step > 0.0) || b < a {
        return Err(CliError::invalid(key, "need step > 0 and b >= a"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

impl ExperimentConfig {
    /// Resolves defaults overlaid with `pairs` (later pairs win).
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, CliError> {
        let mut values: Vec<(&str, String)> = KEYS.iter().map(|(k, v)| (*k, v.to_string())).collect();
        for (k, v) in pairs {
            check_key(k)?;
            let slot = values.iter_mut().find(|(key, _)| key == k).expect("checked key");
            slot.1 = v.clone();
        }
        let get = |key: &str| values.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str()).unwrap();

        let mut etas = list(get("model.eta"), |s| scalar("model.eta", s))?;
        if !get("sweep.eta").is_empty() {
            etas = parse_range("sweep.eta", get("sweep.eta"))?;
        }
        let mut horizons = list(get("sim.horizon"), |s| scalar("sim.horizon", s))?;
        if !get("sweep.horizon").is_empty() {
            horizons = parse_range("sweep.horizon", get("sweep.horizon"))?
                .into_iter()
                .map(|h| h.round() as usize)
                .collect();
        }
        let cfg = ExperimentConfig {
            n_nodes: scalar("model.n_nodes", get("model.n_nodes"))?,
            hap_power: scalar("model.hap_power", get("model.hap_power"))?,
            consume_power: scalar("model.consume_power", get("model.consume_power"))?,
            battery_cap: scalar("model.battery_cap", get("model.battery_cap"))?,
            slot_seconds: scalar("model.slot_seconds", get("model.slot_seconds"))?,
            etas,
            channels: list(get("channel.kinds"), ChannelArg::parse)?,
            gaussian_mean: scalar("channel.gaussian_mean", get("channel.gaussian_mean"))?,
            rician_spread: scalar("channel.rician_spread", get("channel.rician_spread"))?,
            policies: list(get("policy"), |s| {
                s.parse::<Policy>()
                    .map_err(|e| CliError::invalid("policy", e.to_string()))
            })?,
            modes: list(get("sim.mode"), |s| {
                s.parse::<Mode>()
                    .map_err(|e| CliError::invalid("sim.mode", e.to_string()))
            })?,
            horizons,
            episodes: scalar("sim.episodes", get("sim.episodes"))?,
            seeds: list(get("seed"), |s| scalar("seed", s))?,
            saa: SaaConfig {
                m_replications: scalar("saa.m", get("saa.m"))?,
                n_scenarios: scalar("saa.n", get("saa.n"))?,
                n_eval: scalar("saa.n_eval", get("saa.n_eval"))?,
                gap_variance_target: scalar("saa.target", get("saa.target"))?,
                seed: 0,
            },
            out_dir: PathBuf::from(get("output.dir")),
            bins: scalar("histogram.bins", get("histogram.bins"))?,
            samples: scalar("histogram.samples", get("histogram.samples"))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let lib = |key: &'static str| move |e: rfsched::Error| CliError::invalid(key, e.to_string());
        for &eta in &self.etas {
            self.instance(eta).validate().map_err(lib("model"))?;
        }
        if self.n_nodes == 0 {
            return Err(CliError::invalid("model.n_nodes", "need at least one node"));
        }
        for c in &self.channels {
            c.model(self.gaussian_mean, self.rician_spread)
                .map_err(lib("channel.kinds"))?;
        }
        if self.horizons.contains(&0) {
            return Err(CliError::invalid("sim.horizon", "must be at least 1"));
        }
        if self.episodes == 0 {
            return Err(CliError::invalid("sim.episodes", "must be at least 1"));
        }
        if self.policies.contains(&Policy::SpSaa) {
            self.saa.validate().map_err(|e| match e {
                rfsched::Error::InvalidParameter { name, reason } => CliError::invalid(name, reason),
                other => CliError::invalid("saa", other.to_string()),
            })?;
        }
        if self.bins < 2 {
            return Err(CliError::invalid("histogram.bins", "need at least 2 bins"));
        }
        if self.samples == 0 {
            return Err(CliError::invalid("histogram.samples", "need at least 1 sample"));
        }
        Ok(())
    }

    pub fn instance(&self, eta: f64) -> ProblemInstance {
        let mut inst = ProblemInstance::new(self.n_nodes).with_efficiency(eta);
        inst.hap_power = self.hap_power;
        inst.consume_power = self.consume_power;
        inst.battery_cap = self.battery_cap;
        inst.slot_seconds = self.slot_seconds;
        inst
    }

    /// Resolved parameters as `key = value` lines, in [`KEYS`] order.
    pub fn describe(&self) -> Vec<(String, String)> {
        let join = |items: Vec<String>| items.join(",");
        vec![
            ("model.n_nodes".into(), self.n_nodes.to_string()),
            ("model.hap_power".into(), sig9(self.hap_power)),
            ("model.consume_power".into(), sig9(self.consume_power)),
            ("model.eta".into(), join(self.etas.iter().map(|&e| sig9(e)).collect())),
            ("model.battery_cap".into(), sig9(self.battery_cap)),
            ("model.slot_seconds".into(), sig9(self.slot_seconds)),
            (
                "channel.kinds".into(),
                join(self.channels.iter().map(ChannelArg::label).collect()),
            ),
            ("channel.gaussian_mean".into(), sig9(self.gaussian_mean)),
            ("channel.rician_spread".into(), sig9(self.rician_spread)),
            (
                "policy".into(),
                join(self.policies.iter().map(|p| p.to_string()).collect()),
            ),
            (
                "sim.mode".into(),
                join(self.modes.iter().map(|m| m.to_string()).collect()),
            ),
            (
                "sim.horizon".into(),
                join(self.horizons.iter().map(|h| h.to_string()).collect()),
            ),
            ("sim.episodes".into(), self.episodes.to_string()),
            ("seed".into(), join(self.seeds.iter().map(|s| s.to_string()).collect())),
            ("saa.m".into(), self.saa.m_replications.to_string()),
            ("saa.n".into(), self.saa.n_scenarios.to_string()),
            ("saa.n_eval".into(), self.saa.n_eval.to_string()),
            ("saa.target".into(), sig9(self.saa.gap_variance_target)),
            ("output.dir".into(), self.out_dir.display().to_string()),
            ("histogram.bins".into(), self.bins.to_string()),
            ("histogram.samples".into(), self.samples.to_string()),
        ]
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::from_pairs(&[]).expect("defaults are valid")
    }
}
