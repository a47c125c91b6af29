//! End-to-end behaviour of the `normsim` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use normsim::experiment::{BestResponseReport, ChainReport, EvolutionReport, MixedReport};
use normsim::output::Versioned;

fn normsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const PARAMS: &str = r#""params": {"N": 30, "L": 3, "b": 3, "c": 1, "delta": 0.6, "epsilon": 0.05, "gamma": 0.5, "h": 1}"#;

#[test]
fn design_grid_has_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("region.csv");
    let o = normsim(&[
        "design",
        "--delta-grid",
        "0.1:0.95:0.05",
        "--cb-grid",
        "0.05:0.9:0.05",
        "--L",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("delta,c_over_b,H,max_feasible_h"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 18 * 18);
    for r in &rows {
        let delta: f64 = r[0].parse().unwrap();
        let cb: f64 = r[1].parse().unwrap();
        if delta <= cb {
            assert!(r[2].is_empty() && r[3].is_empty(), "{r:?}");
        }
    }
}

#[test]
fn simulate_is_deterministic_and_summary_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "evolution.json",
        &format!(r#"{{"mode": "evolution", {PARAMS}, "periods": 400, "sample_stride": 20}}"#),
    );
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = normsim(&["simulate", "--spec", &spec, "--seed", "1", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a");
    let b = run("b");
    let ta = fs::read(a.join("timeseries.csv")).unwrap();
    assert_eq!(ta, fs::read(b.join("timeseries.csv")).unwrap());
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("period,n0,n1,n2,n3,U,services\n"));
    assert_eq!(text.lines().count(), 21);

    let summary = fs::read_to_string(a.join("summary.json")).unwrap();
    let parsed: Versioned<EvolutionReport> = serde_json::from_str(&summary).unwrap();
    assert_eq!(parsed.schema_version, 1);
    assert_eq!(parsed.body.runs.len(), 1);
    assert_eq!(parsed.body.runs[0].seed, 1);
    assert_eq!(parsed.body.runs[0].terminal_configuration.iter().sum::<usize>(), 30);
    let again = serde_json::to_string_pretty(&parsed).unwrap();
    assert_eq!(again.trim_end(), summary.trim_end());
}

#[test]
fn seeds_change_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "evolution.json",
        &format!(r#"{{"mode": "evolution", {PARAMS}, "periods": 200, "sample_stride": 1}}"#),
    );
    let run = |seed: &str| {
        let out = dir.path().join(seed);
        assert!(normsim(&["simulate", "--spec", &spec, "--seed", seed, "--out", out.to_str().unwrap()])
            .status
            .success());
        fs::read(out.join("timeseries.csv")).unwrap()
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn mixed_mode_writes_pure_baselines() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "mixed.json",
        &format!(
            r#"{{"mode": "mixed", {PARAMS}, "periods": 300, "sample_stride": 10, "replicates": 2,
                "groups": [{{"size": 15, "delta": 0.3}}, {{"size": 15, "delta": 0.6}}]}}"#
        ),
    );
    let out = dir.path().join("out");
    let o = normsim(&["simulate", "--spec", &spec, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("mixed.csv")).unwrap();
    assert!(csv.starts_with("community,group,delta,seed,bottom_fraction,defector_fraction\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2 + 2 * 2);
    let r: Versioned<MixedReport> =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(r.body.pure.len(), 2);
    assert_eq!(r.body.mixed[0].group_bottom_fraction.len(), 2);
}

#[test]
fn baseline_modes_write_both_series() {
    let dir = tempfile::tempdir().unwrap();
    for (mode, extra) in [("varying-b", r#", "benefit_variance": 0.01"#), ("adaptive-belief", "")] {
        let spec = write(
            dir.path(),
            &format!("{mode}.json"),
            &format!(r#"{{"mode": "{mode}", {PARAMS}, "periods": 100, "sample_stride": 10{extra}}}"#),
        );
        let out = dir.path().join(mode);
        let o = normsim(&["simulate", "--spec", &spec, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join("timeseries.csv").exists());
        assert!(out.join("baseline_timeseries.csv").exists());
        let r: Versioned<EvolutionReport> =
            serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        assert_eq!(r.body.baseline.len(), 1);
    }
}

#[test]
fn delta_sweep_writes_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "sweep.json",
        &format!(
            r#"{{"mode": "delta-sweep", {PARAMS}, "periods": 100, "sample_stride": 10,
                "deltas": [0.3, 0.6], "benefits": [3, 5], "replicates": 2}}"#
        ),
    );
    let out = dir.path().join("out");
    assert!(normsim(&["simulate", "--spec", &spec, "--out", out.to_str().unwrap()])
        .status
        .success());
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
}

#[test]
fn unknown_key_exits_with_config_status_and_location() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "bad.json",
        &format!("{{\"mode\": \"evolution\",\n {PARAMS},\n \"perods\": 10}}"),
    );
    let o = normsim(&["simulate", "--spec", &spec, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("perods") && err.contains("bad.json:3:"), "{err}");
}

#[test]
fn invalid_parameters_exit_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"N": 5, "L": 3, "b": 1, "c": 2, "delta": 0.5, "epsilon": 0.1, "gamma": 1, "h": 1}"#,
    );
    let o = normsim(&["bestresponse", "--config", &cfg, "--eta", "1,0,0,3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = normsim(&["design", "--delta-grid", "0.5:0.1:0.1", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = normsim(&["chain", "--eps-ladder", "1e-3,1e-2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_normsim"))
        .args(["design", "--out", dir.path().join("r.csv").to_str().unwrap()])
        .env("NORMSIM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bestresponse_prints_policy_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"N": 10, "L": 3, "b": 3, "c": 1, "delta": 0.6, "epsilon": 0.0, "gamma": 1, "h": 1}"#,
    );
    let o = normsim(&["bestresponse", "--config", &cfg, "--eta", "2,0,0,7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Versioned<BestResponseReport> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.body.policy.len(), 4);
    assert_eq!(r.body.values.len(), 4);
    assert_eq!(r.body.eta, vec![2, 0, 0, 7]);
    let o = normsim(&["bestresponse", "--config", &cfg, "--eta", "2,0,0,6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn chain_writes_report_and_omega_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chain");
    let o = normsim(&["chain", "--N", "4", "--eps-ladder", "1e-2,1e-3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Versioned<ChainReport> =
        serde_json::from_str(&fs::read_to_string(out.join("chain.json")).unwrap()).unwrap();
    assert_eq!(r.body.states, 35);
    assert_eq!(r.body.rungs.len(), 2);
    assert_eq!(r.body.absorbing_analytic, r.body.absorbing_numeric);
    assert!(!r.body.ssc_support.is_empty());
    let omega = fs::read_to_string(out.join("omega.csv")).unwrap();
    assert_eq!(omega.lines().next(), Some("n0,n1,n2,n3,omega_1e-2,omega_1e-3"));
    assert_eq!(omega.lines().count(), 36);
    let total: f64 = omega
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn chain_rejects_oversized_space() {
    let dir = tempfile::tempdir().unwrap();
    let o = normsim(&["chain", "--N", "200", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn quick_verification_passes() {
    let o = normsim(&["verify", "--quick"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5);
}

#[test]
fn help_documents_every_flag() {
    let cases: [(&str, &[&str]); 5] = [
        ("simulate", &["--spec", "--seed", "--out"]),
        ("chain", &["--config", "--N", "--eps-ladder", "--fair-coin", "--out"]),
        ("design", &["--delta-grid", "--cb-grid", "--L", "--boundary-lenient", "--out"]),
        ("bestresponse", &["--config", "--eta"]),
        ("verify", &["--quick", "--json"]),
    ];
    for (cmd, flags) in cases {
        let o = normsim(&[cmd, "--help"]);
        let text = String::from_utf8_lossy(&o.stdout);
        for f in flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
    let top = String::from_utf8_lossy(&normsim(&["--help"]).stdout).to_string();
    assert!(top.contains("NORMSIM_THREADS"));
}
