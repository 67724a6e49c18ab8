//! End-to-end checks of the command line: exit codes, file outputs,
//! determinism, and the documented CSV/JSON schemas.

use netforge::json::{network_to_json, save_network};
use netforge::network::Activation;
use netforge::sde::reference_solution;
use std::path::Path;
use std::process::{Command, Output};

fn netforge_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netforge"))
}

fn run(args: &[&str]) -> Output {
    netforge_bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn verify_calculus_prints_table_and_succeeds() {
    let out = run(&["verify-calculus"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows = text.lines().filter(|l| l.ends_with("pass")).count();
    assert!(rows >= 12, "expected at least 12 suites, saw {rows}:\n{text}");
    assert!(text.contains("P(i_d)=4d^2+3d"));
}

#[test]
fn verify_calculus_corruption_is_detected() {
    let out = run(&["verify-calculus", "--corrupt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn build_writes_reproducible_files_within_bound() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let prefix_str = prefix.to_str().unwrap();
    let args = ["build", "--problem", "heat_abs", "--d", "2", "--eps", "0.5", "--seed", "9",
        "--out", prefix_str];
    assert_eq!(run(&args).status.code(), Some(0));

    let net_path = dir.path().join("run.net.json");
    let report_path = dir.path().join("run.report.json");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let params = report["param_count"].as_u64().unwrap() as f64;
    let bound = report["bound"].as_f64().unwrap();
    assert!(params <= bound);

    let first_net = std::fs::read(&net_path).unwrap();
    let first_report = std::fs::read(&report_path).unwrap();
    assert_eq!(run(&args).status.code(), Some(0));
    assert_eq!(std::fs::read(&net_path).unwrap(), first_net);
    assert_eq!(std::fs::read(&report_path).unwrap(), first_report);
}

#[test]
fn build_rejects_eps_outside_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "build", "--problem", "heat_abs", "--eps", "0",
        "--out", dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(0, 1]"));
}

#[test]
fn eval_echoes_identity_network() {
    let dir = tempfile::tempdir().unwrap();
    let net_path = dir.path().join("id.json");
    let id = netforge::calculus::relu_identity::<f64>(2);
    save_network(&net_path, &id, &Activation::Relu).unwrap();
    let points_path = dir.path().join("pts.csv");
    std::fs::write(&points_path, "0.5,-1.25\n3,4\n-0.125,0\n").unwrap();
    let out = run(&[
        "eval", "--net", net_path.to_str().unwrap(), "--points", points_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    assert_eq!(lines, vec!["0.5,-1.25,0.5,-1.25", "3,4,3,4", "-0.125,0,-0.125,0"]);
}

#[test]
fn eval_of_built_network_matches_reference_within_noise() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    assert_eq!(
        run(&[
            "build", "--problem", "heat_abs", "--d", "2", "--eps", "0.25", "--seed", "5",
            "--out", prefix.to_str().unwrap(),
        ])
        .status
        .code(),
        Some(0)
    );
    let points_path = dir.path().join("pts.csv");
    std::fs::write(&points_path, "0,0\n").unwrap();
    let out = run(&[
        "eval",
        "--net", dir.path().join("run.net.json").to_str().unwrap(),
        "--points", points_path.to_str().unwrap(),
    ]);
    let text = stdout(&out);
    let value: f64 = text.trim().rsplit(',').next().unwrap().parse().unwrap();
    let want = reference_solution("heat_abs", 2, 1.0, &[0.0, 0.0]).unwrap();
    // default schedule gives N = M = 41 samples; payoff sd is about 1.2
    let three_se = 3.0 * 1.21 / (41f64).sqrt();
    assert!((value - want).abs() <= three_se, "{value} vs {want}");
}

#[test]
fn eval_reports_malformed_json_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let net_path = dir.path().join("broken.json");
    std::fs::write(&net_path, "{\"activation\": \"relu\",\n  \"layers\": [oops]\n}").unwrap();
    let points_path = dir.path().join("pts.csv");
    std::fs::write(&points_path, "0\n").unwrap();
    let out = run(&[
        "eval", "--net", net_path.to_str().unwrap(), "--points", points_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("line 2"), "missing position info: {err}");
}

#[test]
fn single_cell_sweep_emits_row_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep", "--problem", "heat_abs", "--d", "2", "--eps", "0.5", "--seeds", "3",
        "--quad-points", "512", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let data_rows = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with('d')).count();
    assert_eq!(data_rows, 1);
    assert!(text.lines().any(|l| l.starts_with("# cells,1")));
    assert!(text.starts_with("d,eps,seed,N,eps_inner,param_count,bound,lp_error,lp_stderr\n"));
}

#[test]
fn sweep_param_counts_grow_as_eps_shrinks_and_exponent_is_capped() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep", "--problem", "heat_abs", "--d", "2", "--eps", "1,0.5,0.25,0.125,0.0625",
        "--seeds", "3", "--quad-points", "256", "--scale", "0.125", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let params: Vec<u64> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert!(params.windows(2).all(|w| w[0] <= w[1]), "not nondecreasing: {params:?}");
    let slope_line = text
        .lines()
        .find(|l| l.starts_with("# slope_logP_vs_log_inv_eps"))
        .expect("summary slope line");
    let slope: f64 = slope_line.split(',').nth(1).unwrap().parse().unwrap();
    assert!(slope <= 6.1, "eps exponent {slope} > 6.1");
}

#[test]
fn sweep_rejects_invalid_spec() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep", "--problem", "heat_abs", "--d", "2", "--eps", "0.5", "--seeds", "1",
        "--quad-points", "50", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(">= 100"));
}

#[test]
fn sweep_reads_problem_file_and_flags_win_over_config() {
    let dir = tempfile::tempdir().unwrap();
    // a heat-type problem under a different id: no closed form, so sweep
    // must refuse it
    let problem_path = dir.path().join("custom.json");
    std::fs::write(
        &problem_path,
        r#"{"id":"custom","d":2,"T":1.0,"drift":"zero","payoff":"sum_abs","diffusion_scale":1.4142135623730951}"#,
    )
    .unwrap();
    let out = run(&[
        "sweep", "--problem", problem_path.to_str().unwrap(), "--d", "2", "--eps", "0.5",
        "--out", dir.path().join("s.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // config file supplies the flags; the explicit flag overrides eps
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        format!(
            r#"{{"problem":"heat_abs","d":[1],"eps":[0.9],"seeds":[4],"quad_points":256,"out":"{}"}}"#,
            dir.path().join("cfg.csv").display()
        ),
    )
    .unwrap();
    let out = run(&[
        "sweep", "--config", config_path.to_str().unwrap(), "--eps", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("cfg.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("1,0.5,4,"));
}

#[test]
fn build_accepts_problem_file_with_network_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let drift_doc = network_to_json(&netforge::builder::neg_identity_net::<f64>(2), &Activation::Relu)
        .unwrap();
    let problem_path = dir.path().join("ou_like.json");
    std::fs::write(
        &problem_path,
        format!(
            r#"{{"id":"ou_like","d":2,"T":1.0,"drift":{{"net":{drift_doc}}},"payoff":"sum_abs","diffusion_scale":1.4142135623730951}}"#
        ),
    )
    .unwrap();
    let out = run(&[
        "build", "--problem", problem_path.to_str().unwrap(), "--d", "2", "--eps", "0.5",
        "--seed", "2", "--out", dir.path().join("ou").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("ou.net.json").exists());
}

#[test]
fn bounds_reports_all_values_and_scalings() {
    let base = run(&["bounds", "--kappa", "1", "--theta", "1", "--p", "2", "--m", "1"]);
    assert_eq!(base.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&base)).unwrap();
    for key in ["gronwall", "apriori_moment", "euler_weak", "mc_error", "combined_weak"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let mc1 = v["mc_error"].as_f64().unwrap();
    let quad = run(&["bounds", "--kappa", "1", "--theta", "1", "--p", "2", "--m", "4"]);
    let v4: serde_json::Value = serde_json::from_str(&stdout(&quad)).unwrap();
    let mc4 = v4["mc_error"].as_f64().unwrap();
    assert!((mc1 / mc4 - 2.0).abs() < 1e-12);

    // at h = T and M = 1 both rate terms are 1, so the combined value is
    // exactly twice its prefactor; halving h and quadrupling M gives
    // (sqrt(1/2) + 1/2) / 2 of the original
    let c1 = v["combined_weak"].as_f64().unwrap();
    let scaled = run(&[
        "bounds", "--kappa", "1", "--theta", "1", "--p", "2", "--h", "0.5", "--m", "4",
    ]);
    let vs: serde_json::Value = serde_json::from_str(&stdout(&scaled)).unwrap();
    let c2 = vs["combined_weak"].as_f64().unwrap();
    let want = c1 * (0.5f64.sqrt() + 0.5) / 2.0;
    assert!((c2 - want).abs() < 1e-9 * want, "{c2} vs {want}");

    // degenerate zeros still produce finite values
    let zeroed = run(&["bounds"]);
    let vz: serde_json::Value = serde_json::from_str(&stdout(&zeroed)).unwrap();
    assert!(vz["euler_weak"].as_f64().unwrap().is_finite());
    assert!(vz["mc_error"].as_f64().unwrap().is_finite());
}

#[test]
fn env_seed_supplies_default() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("env");
    let out = netforge_bin()
        .env("NETFORGE_SEED", "777")
        .args([
            "build", "--problem", "heat_abs", "--d", "1", "--eps", "0.5",
            "--out", prefix.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("env.report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["seed"].as_u64(), Some(777));
    assert!(!Path::new("env.net.json").exists());
}
