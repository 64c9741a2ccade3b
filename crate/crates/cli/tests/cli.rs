use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rfsched::baselines::fixed_gain_schedule;
use rfsched::lp::LpStatus;
use rfsched::{ChannelModel, ProblemInstance};
use rfsched_cli::histogram::emit_surplus_histogram;
use rfsched_cli::CliError;

fn rfsched(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rfsched"));
    cmd.args(args);
    match workers {
        Some(w) => cmd.env("RFSCHED_WORKERS", w),
        None => cmd.env_remove("RFSCHED_WORKERS"),
    };
    cmd.output().expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<String> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].clone()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn avg_gain_on_fixed_channel_is_balanced() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = rfsched(
        &[
            "run",
            "--policy",
            "avg_gain",
            "--channel",
            "fixed:0.5",
            "--eta",
            "0.4",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("results.csv"));
    assert_eq!(
        header,
        [
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
            "converged"
        ]
    );
    assert_eq!(rows.len(), 1);
    let get = |name| num(&column(&header, &rows, name)[0]);
    assert!((get("tau") - 0.1667).abs() < 1e-4);
    assert!((get("z") - 0.1667).abs() < 1e-4);
    assert!(get("mean_idle").abs() < 1e-12);
    assert_eq!(column(&header, &rows, "seed")[0], "0");
    assert_eq!(column(&header, &rows, "converged")[0], "true");
    assert!(out.join("metadata.txt").exists());
}

#[test]
fn eta_sweep_gives_nondecreasing_z() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = rfsched(
        &[
            "run",
            "--sweep",
            "eta=0.1:0.6:0.1",
            "--channel",
            "rician",
            "--policy",
            "spsaa",
            "--episodes",
            "20",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("results.csv"));
    assert_eq!(rows.len(), 6);
    let etas: Vec<f64> = column(&header, &rows, "eta").iter().map(|s| num(s)).collect();
    assert_eq!(etas, [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
    let z: Vec<f64> = column(&header, &rows, "z").iter().map(|s| num(s)).collect();
    assert!(z.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{z:?}");
    let plots: Vec<_> = fs::read_dir(out.join("plot")).unwrap().collect();
    assert_eq!(plots.len(), 1);
}

#[test]
fn empty_matrix_writes_metadata_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = rfsched(&["run", "--set", "policy=", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success());
    let names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["metadata.txt"]);
    let meta = fs::read_to_string(out.join("metadata.txt")).unwrap();
    assert!(meta.contains("data_rows = 0"));
}

#[test]
fn invalid_keys_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "saa.m = 3\nsaa.replications = 4\n").unwrap();
    let o = rfsched(&["run", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("saa.replications"));

    let o = rfsched(&["run", "--mode", "sideways"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sim.mode"));

    let o = rfsched(&["run", "--sweep", "gamma=0:1:0.5"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep.gamma"));

    let o = rfsched(
        &["run", "--policy", "avg_gain", "--out", dir.path().to_str().unwrap()],
        Some("zero"),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("RFSCHED_WORKERS"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        format!("# two policies, overridden below\npolicy = max_gain, min_gain\nchannel.kinds = fixed:0.5\noutput.dir = {}\n", out.display()),
    )
    .unwrap();
    let o = rfsched(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--policy",
            "avg_gain",
            "--seed",
            "3",
            "--seed",
            "4",
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("results.csv"));
    assert_eq!(column(&header, &rows, "policy"), ["avg_gain", "avg_gain"]);
    assert_eq!(column(&header, &rows, "seed"), ["3", "4"]);
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = rfsched(
            &[
                "run",
                "--channel",
                "rician",
                "--channel",
                "gaussian",
                "--policy",
                "spsaa",
                "--policy",
                "max_gain",
                "--mode",
                "single",
                "--mode",
                "multi",
                "--horizon",
                "3",
                "--seed",
                "1",
                "--seed",
                "2",
                "--episodes",
                "4",
                "--set",
                "saa.n=8",
                "--set",
                "saa.n_eval=200",
                "--out",
                out.to_str().unwrap(),
            ],
            Some(workers),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a", "1");
    let b = run("b", "4");
    let csv_a = fs::read(a.join("results.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("results.csv")).unwrap());
    assert_eq!(read_csv(&a.join("results.csv")).1.len(), 16);
    for entry in fs::read_dir(a.join("plot")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.join("plot").join(&name)).unwrap(),
            fs::read(b.join("plot").join(&name)).unwrap()
        );
    }
}

#[test]
fn horizon_sweep_plots_against_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = rfsched(
        &[
            "run",
            "--policy",
            "avg_gain",
            "--mode",
            "multi",
            "--sweep",
            "horizon=2:5:1",
            "--episodes",
            "5",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let plots: Vec<String> = fs::read_dir(out.join("plot"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(plots, ["rician-4_avg_gain_multi_eta0.4_vs_T.dat"]);
    let text = fs::read_to_string(out.join("plot").join(&plots[0])).unwrap();
    let xs: Vec<&str> = text.lines().skip(1).map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(xs, ["2", "3", "4", "5"]);
}

#[test]
fn histogram_command_writes_normalised_bins() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = rfsched(
        &[
            "histogram",
            "--policy",
            "avg_gain",
            "--channel",
            "fixed:0.5",
            "--set",
            "histogram.bins=5",
            "--set",
            "histogram.samples=10",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.join("histogram").join("fixed-0.5_avg_gain_eta0.4_s0.csv"));
    assert_eq!(rows.len(), 5);
    let probs: Vec<f64> = rows.iter().map(|r| num(&r[2])).collect();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert_eq!(probs.iter().filter(|&&p| p > 0.0).count(), 1);
    let (lo, hi) = rows
        .iter()
        .find(|r| num(&r[2]) > 0.0)
        .map(|r| (num(&r[0]), num(&r[1])))
        .unwrap();
    assert!(lo <= 0.0 && hi >= 0.0);
}

#[test]
fn surplus_variance_grows_with_efficiency() {
    let rician = ChannelModel::rician(4.0).unwrap();
    let mut stats = Vec::new();
    for eta in [0.1, 0.6] {
        let inst = ProblemInstance::new(5).with_efficiency(eta);
        let sched = fixed_gain_schedule(&inst, 0.5, 1).unwrap();
        let h = emit_surplus_histogram(&inst, &sched, &rician, 20, 20_000, 9).unwrap();
        assert!((h.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // The surplus is P_c T (g / 0.5 - 1), so its mean is about 0.
        assert!(
            h.mean.abs() < 3.0 * (h.variance / h.count as f64).sqrt() + 1e-5,
            "eta {eta}: {}",
            h.mean
        );
        stats.push(h);
    }
    assert!(stats[1].variance > stats[0].variance);
}

#[test]
fn solver_failures_map_to_exit_code_two() {
    let solver = CliError::from(rfsched::Error::Solver {
        status: LpStatus::Infeasible,
    });
    assert_eq!(solver.exit_code(), 2);
    let planner = CliError::from(rfsched::Error::Planner {
        episode: 0,
        slot: 1,
        source: Box::new(rfsched::Error::Replication {
            replication: 0,
            seed: 1,
            status: LpStatus::Unbounded,
        }),
    });
    assert_eq!(planner.exit_code(), 2);
    assert_eq!(CliError::UnknownKey("x".into()).exit_code(), 1);
}
