//! The experiment matrix: every channel x policy x mode x eta x horizon x
//! seed combination, simulated and summarised as one CSV row.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rfsched::channels::{derive_seed, tags};
use rfsched::sim::{self, Mode, Policy, SimConfig, Summary};

use crate::config::{ChannelArg, ExperimentConfig};
use crate::error::CliError;
use crate::format::sig9;
use crate::histogram::{emit_surplus_histogram, Histogram};

pub const WORKERS_ENV: &str = "RFSCHED_WORKERS";

pub const RESULT_COLUMNS: [&str; 12] = [
    "distribution",
    "policy",
    "mode",
    "eta",
    "horizon",
    "seed",
    "mean_idle",
    "se_idle",
    "z",
    "tau",
    "var_gap",
    "converged",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub channel: ChannelArg,
    pub policy: Policy,
    pub mode: Mode,
    pub eta: f64,
    pub horizon: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cell: Cell,
    pub summary: Summary,
}

impl Row {
    pub fn fields(&self) -> Vec<String> {
        let c = &self.cell;
        let s = &self.summary;
        vec![
            c.channel.label(),
            c.policy.to_string(),
            c.mode.to_string(),
            sig9(c.eta),
            c.horizon.to_string(),
            c.seed.to_string(),
            sig9(s.mean_idle),
            sig9(s.se_idle),
            sig9(s.mean_z),
            sig9(s.mean_tau),
            sig9(s.var_gap),
            s.converged.to_string(),
        ]
    }
}

pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &channel in &cfg.channels {
        for &policy in &cfg.policies {
            for &mode in &cfg.modes {
                for &eta in &cfg.etas {
                    for &horizon in &cfg.horizons {
                        for &seed in &cfg.seeds {
                            out.push(Cell {
                                channel,
                                policy,
                                mode,
                                eta,
                                horizon,
                                seed,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn sim_config(cfg: &ExperimentConfig, cell: &Cell) -> SimConfig {
    SimConfig {
        mode: cell.mode,
        horizon: cell.horizon,
        policy: cell.policy,
        episodes: cfg.episodes,
        seed: cell.seed,
        saa: cfg.saa.clone(),
    }
}

pub fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<Row, CliError> {
    let inst = cfg.instance(cell.eta);
    let model = cell.channel.model(cfg.gaussian_mean, cfg.rician_spread)?;
    let records = sim::simulate(&inst, &model, &sim_config(cfg, cell))?;
    Ok(Row {
        cell: *cell,
        summary: sim::aggregate(&records)?,
    })
}

/// Worker pool sized by `RFSCHED_WORKERS`, or rayon's default when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::invalid(WORKERS_ENV, format!("expected a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::invalid(WORKERS_ENV, e.to_string()))
}

/// Runs every cell; rows come back in cell order.
pub fn run_matrix(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<Row>, CliError> {
    let cells = cells(cfg);
    pool.install(|| cells.par_iter().map(|c| run_cell(cfg, c)).collect())
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::invalid("output.dir", format!("{other:?}")),
    })
}

pub fn write_results(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(RESULT_COLUMNS)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn metadata(cfg: &ExperimentConfig, command: &str, data_rows: usize) -> Result<String, CliError> {
    let mut out = String::new();
    out.push_str(&format!("tool = rfsched {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("command = {command}\n"));
    for (k, v) in cfg.describe() {
        out.push_str(&format!("{k} = {v}\n"));
    }
    for c in &cfg.channels {
        let model = c.model(cfg.gaussian_mean, cfg.rician_spread)?;
        out.push_str(&format!("channel[{}] = {}\n", c.label(), model.describe()));
    }
    out.push_str(&format!("data_rows = {data_rows}\n"));
    Ok(out)
}

fn file_stem(parts: &[String]) -> String {
    parts
        .join("_")
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

/// One series per (distribution, policy, mode) and fixed value of the other
/// axis, averaged over seeds. The x axis is the horizon when several are
/// configured, otherwise eta.
pub fn plot_series(cfg: &ExperimentConfig, rows: &[Row]) -> Vec<(String, String)> {
    let by_horizon = cfg.horizons.len() > 1;
    let mut groups: BTreeMap<(usize, String), Vec<&Row>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in rows {
        let c = &r.cell;
        let fixed = if by_horizon {
            format!("eta{}", sig9(c.eta))
        } else {
            format!("T{}", c.horizon)
        };
        let stem = file_stem(&[
            c.channel.label(),
            c.policy.to_string(),
            c.mode.to_string(),
            fixed,
            if by_horizon { "vs_T".into() } else { "vs_eta".into() },
        ]);
        if !order.contains(&stem) {
            order.push(stem.clone());
        }
        let idx = order.iter().position(|s| *s == stem).unwrap();
        groups.entry((idx, stem)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((_, stem), rows)| {
            let mut points: Vec<(f64, Vec<&Row>)> = Vec::new();
            for r in rows {
                let x = if by_horizon { r.cell.horizon as f64 } else { r.cell.eta };
                match points.iter_mut().find(|(px, _)| *px == x) {
                    Some((_, v)) => v.push(r),
                    None => points.push((x, vec![r])),
                }
            }
            let x_name = if by_horizon { "horizon" } else { "eta" };
            let mut text = format!("# {x_name} mean_idle z tau seeds\n");
            for (x, rs) in points {
                let k = rs.len() as f64;
                let avg = |f: &dyn Fn(&Summary) -> f64| rs.iter().map(|r| f(&r.summary)).sum::<f64>() / k;
                text.push_str(&format!(
                    "{} {} {} {} {}\n",
                    sig9(x),
                    sig9(avg(&|s| s.mean_idle)),
                    sig9(avg(&|s| s.mean_z)),
                    sig9(avg(&|s| s.mean_tau)),
                    rs.len()
                ));
            }
            (format!("{stem}.dat"), text)
        })
        .collect()
}

/// Files written by a run, relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    pub files: Vec<PathBuf>,
}

/// Runs the matrix and writes `results.csv`, `metadata.txt` and `plot/*.dat`
/// under `cfg.out_dir`. An empty matrix writes only the metadata.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let pool = worker_pool()?;
    let rows = run_matrix(cfg, &pool)?;
    create_dir(&cfg.out_dir)?;
    let mut files = Vec::new();
    if !rows.is_empty() {
        write_results(&cfg.out_dir.join("results.csv"), &rows)?;
        files.push(PathBuf::from("results.csv"));
        let plot_dir = cfg.out_dir.join("plot");
        create_dir(&plot_dir)?;
        for (name, text) in plot_series(cfg, &rows) {
            write_file(&plot_dir.join(&name), &text)?;
            files.push(Path::new("plot").join(name));
        }
    }
    write_file(&cfg.out_dir.join("metadata.txt"), &metadata(cfg, "run", rows.len())?)?;
    files.push(PathBuf::from("metadata.txt"));
    Ok(RunOutput { rows, files })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRow {
    pub channel: ChannelArg,
    pub policy: Policy,
    pub eta: f64,
    pub seed: u64,
    pub histogram: Histogram,
}

impl HistogramRow {
    fn stem(&self) -> String {
        file_stem(&[
            self.channel.label(),
            self.policy.to_string(),
            format!("eta{}", sig9(self.eta)),
            format!("s{}", self.seed),
        ])
    }
}

/// Surplus-energy histograms of each policy's single-slot schedule, for
/// every channel x policy x eta x seed.
pub fn histograms(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<HistogramRow>, CliError> {
    let mut jobs = Vec::new();
    for &channel in &cfg.channels {
        for &policy in &cfg.policies {
            for &eta in &cfg.etas {
                for &seed in &cfg.seeds {
                    jobs.push((channel, policy, eta, seed));
                }
            }
        }
    }
    pool.install(|| {
        jobs.par_iter()
            .map(|&(channel, policy, eta, seed)| {
                let inst = cfg.instance(eta);
                let model = channel.model(cfg.gaussian_mean, cfg.rician_spread)?;
                let sim_cfg = SimConfig {
                    mode: Mode::Single,
                    horizon: 1,
                    policy,
                    episodes: 1,
                    seed,
                    saa: cfg.saa.clone(),
                };
                let plan = sim::plan(&inst, &model, &sim_cfg, 1, derive_seed(seed, tags::PLAN, 0))?;
                let histogram = emit_surplus_histogram(&inst, &plan.schedule, &model, cfg.bins, cfg.samples, seed)?;
                Ok(HistogramRow {
                    channel,
                    policy,
                    eta,
                    seed,
                    histogram,
                })
            })
            .collect()
    })
}

/// Writes `histogram/<series>.csv` per job plus `histogram/summary.csv`.
pub fn run_histograms(cfg: &ExperimentConfig) -> Result<Vec<HistogramRow>, CliError> {
    let pool = worker_pool()?;
    let rows = histograms(cfg, &pool)?;
    create_dir(&cfg.out_dir)?;
    if !rows.is_empty() {
        let dir = cfg.out_dir.join("histogram");
        create_dir(&dir)?;
        let summary_path = dir.join("summary.csv");
        let mut summary = csv_writer(&summary_path)?;
        summary.write_record(["distribution", "policy", "eta", "seed", "mean", "variance", "values"])?;
        for r in &rows {
            let path = dir.join(format!("{}.csv", r.stem()));
            let mut w = csv_writer(&path)?;
            w.write_record(["lower", "upper", "probability"])?;
            for (b, p) in r.histogram.probabilities.iter().enumerate() {
                w.write_record([sig9(r.histogram.edges[b]), sig9(r.histogram.edges[b + 1]), sig9(*p)])?;
            }
            w.flush().map_err(|e| CliError::io(&path, e))?;
            summary.write_record([
                r.channel.label(),
                r.policy.to_string(),
                sig9(r.eta),
                r.seed.to_string(),
                sig9(r.histogram.mean),
                sig9(r.histogram.variance),
                r.histogram.count.to_string(),
            ])?;
        }
        summary.flush().map_err(|e| CliError::io(&summary_path, e))?;
    }
    write_file(
        &cfg.out_dir.join("metadata.txt"),
        &metadata(cfg, "histogram", rows.len())?,
    )?;
    Ok(rows)
}
