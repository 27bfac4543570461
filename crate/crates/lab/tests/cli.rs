use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rtp_lab::sweep::read_sweep;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtp-lab"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

fn scenarios() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn benign_running_example_settles_at_target() {
    let out = tempfile::tempdir().unwrap();
    let o = lab(&[
        "simulate",
        scenarios().join("running-benign.toml").to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("converged: true"), "{text}");
    assert!((value(&text, "final_price") - 20.0).abs() < 1e-6);
    for f in ["trace.csv", "metrics.csv", "summary.txt"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
    assert_eq!(
        fs::read_to_string(out.path().join("summary.txt")).unwrap(),
        text
    );
}

#[test]
fn low_gamma_scaling_does_not_converge() {
    let out = tempfile::tempdir().unwrap();
    let o = lab(&[
        "simulate",
        "--preset",
        "running-scaling-057",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("converged: false"));
}

#[test]
fn missing_trace_exits_2_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenarios().join("houses-benign.toml")).unwrap();
    let text = text.replace(
        "kind = \"synthetic\"\nper_house_min = 0.276\nper_house_max = 0.488\nhouse_count = 1405\ndays = 22",
        "kind = \"csv\"\npath = \"no-such-trace.csv\"\nper_house_scale = 0.4\nhouse_count = 1405",
    );
    assert!(text.contains("no-such-trace.csv"));
    let scn = dir.path().join("s.toml");
    fs::write(&scn, text).unwrap();
    let o = lab(&[
        "simulate",
        scn.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains(&dir.path().join("no-such-trace.csv").display().to_string()),
        "{}",
        stderr(&o)
    );
}

#[test]
fn validate_only_checks_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&[
        "simulate",
        "--preset",
        "houses-scaling",
        "--validate",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(!dir.path().join("trace.csv").exists());
    let o = lab(&["simulate", "--preset", "no-such-preset"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_scenario_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("s.toml");
    let text = fs::read_to_string(scenarios().join("running-benign.toml")).unwrap();
    fs::write(
        &scn,
        text.replace("horizon = 96", "horizon = 96\nhorizn = 3"),
    )
    .unwrap();
    let o = lab(&["simulate", scn.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("horizn"), "{}", stderr(&o));
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&[
        "sweep",
        "--preset",
        "running-delay-12",
        "--param",
        "attack.tau=10..12",
        "--param",
        "controller.eta=0.1,0.2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_sweep(&dir.path().join("sweep.csv"), 2).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].values, vec!["10", "0.1"]);
    assert_eq!(rows[5].values, vec!["12", "0.2"]);
    assert!(rows
        .iter()
        .all(|r| r.error.is_empty() && r.sigma_e.is_some()));
}

#[test]
fn sweep_records_bad_cells_in_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&[
        "sweep",
        "--preset",
        "running-delay-12",
        "--param",
        "attack.rho=0.5,1.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_sweep(&dir.path().join("sweep.csv"), 1).unwrap();
    assert!(rows[0].error.is_empty());
    assert!(!rows[1].error.is_empty());
    assert_eq!(rows[1].sigma_e, None);
}

#[test]
fn empty_or_unknown_sweeps_exit_2() {
    let o = lab(&["sweep", "--preset", "running-benign"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lab(&[
        "sweep",
        "--preset",
        "running-benign",
        "--param",
        "controller.eta=",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = lab(&[
        "sweep",
        "--preset",
        "running-benign",
        "--param",
        "controller.gian=0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ros_limit_examples() {
    let o = lab(&[
        "ros-limit",
        "--family",
        "delay",
        "--rho",
        "1",
        "--tau",
        "1",
        "--validate",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "rho,tau_or_gamma,eta_limit\n1,1,0.5\n");

    let o = lab(&[
        "ros-limit",
        "--family",
        "scaling",
        "--rho",
        "1",
        "--gamma",
        "0.5",
        "--epsilon",
        "-0.8",
        "--validate",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lim: f64 = stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!((lim - 0.5f64.powf(0.8)).abs() < 1e-12);
    assert!((lim - 0.5743).abs() < 1e-4);

    let o = lab(&[
        "ros-limit",
        "--family",
        "delay",
        "--rho",
        "1.5",
        "--tau",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn half_compromised_delay_boundary_is_flat_at_one() {
    let dir = tempfile::tempdir().unwrap();
    for tau in ["1", "4", "20"] {
        let o = lab(&[
            "ros",
            "--family",
            "delay",
            "--rho",
            "0.5",
            "--tau",
            tau,
            "--points",
            "9",
            "--validate",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let b = rtp_lab::io::read_boundary(&dir.path().join("boundary.csv")).unwrap();
        assert_eq!(b.len(), 9);
        assert!(
            b.iter().all(|&(_, eta)| eta >= 1.0 - 1e-5),
            "tau {tau}: {b:?}"
        );
    }
}

#[test]
fn ros_rejects_missing_family_parameters() {
    let o = lab(&["ros", "--family", "delay", "--rho", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lab(&[
        "ros", "--family", "scaling", "--rho", "1", "--gamma", "-0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn jury_command() {
    let o = lab(&["jury", "1,-0.5,0.06", "--validate"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("stable\n"));
    let o = lab(&["jury", "1,-2.5,1"]);
    assert!(stdout(&o).starts_with("unstable\n"));
    let o = lab(&["jury", "1,x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fit_supply_recovers_and_scales() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    fs::write(&csv, "price,supply\n10,6023\n20,7543\n").unwrap();
    let o = lab(&["fit-supply", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!((value(&text, "p") - 152.0).abs() < 1e-9);
    assert!((value(&text, "q") - 4503.0).abs() < 1e-9);
    assert_eq!(value(&text, "r_squared"), 1.0);

    let o = lab(&[
        "fit-supply",
        csv.to_str().unwrap(),
        "--scale",
        "houses=1405",
        "share=0.57",
        "population=2800000",
    ]);
    let text = stdout(&o);
    // 0.57 · 152 / (2.8e6 / 1405)
    assert!(
        (value(&text, "scaled_p") - 0.0434747).abs() < 1e-7,
        "{text}"
    );
    assert!((value(&text, "scaled_q") - 1.287938).abs() < 1e-6, "{text}");

    fs::write(&csv, "price,supply\n10,6023\n10,7543\n").unwrap();
    let o = lab(&["fit-supply", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn stability_map_writes_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&[
        "stability-map",
        "--b",
        "4000",
        "--eps-min",
        "-0.8",
        "--eps-max",
        "-0.8",
        "--eps-points",
        "1",
        "--lambda-min",
        "10",
        "--lambda-max",
        "60",
        "--lambda-points",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("map.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0][2] <= 0.05, "{text}");
    assert!(rows[1][2] >= 0.95, "{text}");
}
