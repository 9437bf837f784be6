use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffmwrc"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const IDENTITY3: &str = r#""downlink": {"input_size": 2, "users": [{"matrix": [["1","0"],["0","1"]]}, {"matrix": [["1","0"],["0","1"]]}, {"matrix": [["1","0"],["0","1"]]}]}"#;

#[test]
fn region_check_counterexample_is_achievable() {
    let o = run(&["region-check"], &configs().join("counterexample.json"));
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for line in ["R^S_1 = 0.92", "R^S_2 = 0.92", "R^S_3 = 0.97", "= 1.000000000", "inner: Achievable"] {
        assert!(s.contains(line), "missing `{line}` in\n{s}");
    }
}

#[test]
fn region_check_rejects_oversized_rates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"channel": {{"field": {{"order": 4}}, "noise_pmf": ["1/2","1/2","0","0"], {IDENTITY3}}}, "rates": {{"users": 3, "R1": "2"}}}}"#
    );
    let o = run(&["region-check"], &write(&dir, "over.json", &cfg));
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("inner: NotShown") && s.contains("outer: Outside"), "{s}");
}

#[test]
fn zero_rates_are_affirmative() {
    let cfg = configs().join("zero_rates.json");
    assert_eq!(run(&["region-check"], &cfg).status.code(), Some(0));
    assert_eq!(run(&["fdfp-check"], &cfg).status.code(), Some(0));
}

#[test]
fn fdfp_check_prints_the_chain() {
    let o = run(&["fdfp-check"], &configs().join("counterexample.json"));
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("Infeasible"));
    assert!(s.contains("r1 + r3 >= 1.03 > 1 = C_2"), "{s}");
    let o = run(&["fdfp-check"], &configs().join("private_only.json"));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Feasible"));
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["region-check"], &write(&dir, "bad.json", r#"{"rates": {"users": 3, "R9_1": "0.1"}}"#));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rates.R9_1"));
    let o = run(&["region-check"], &write(&dir, "extra.json", r#"{"rates": {"users": 1}, "colour": 3}"#));
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate"], &dir.path().join("missing.json"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn capability_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "channel": {"field": {"order": 4}, "noise_pmf": ["1", "0", "0", "0"],
            "downlink": {"input_size": 2, "users": [{"matrix": [["1","0"],["0","1"]]}, {"matrix": [["1","0"],["0","1"]]}]}},
        "lengths": {"users": 2, "k1": 12, "k2": 12},
        "simulate": {"n": 30, "trials": 2}
    }"#;
    let o = run(&["simulate"], &write(&dir, "big.json", cfg));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1048576"));
}

#[test]
fn two_user_schedule_is_one_block() {
    let o = run(&["schedule-build"], &configs().join("schedule_l2.json"));
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let first = s.split("after shuffle").next().unwrap();
    assert_eq!(first.matches("block ").count(), 1, "{s}");
    assert!(s.contains("user 2: 1 equations, 1 unknowns, rank 1"));
}

#[test]
fn schedule_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.txt");
    let o = Command::new(env!("CARGO_BIN_EXE_ffmwrc"))
        .args(["schedule-build", "--config"])
        .arg(configs().join("schedule_l3.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let json = std::fs::read_to_string(dir.path().join("table.txt.json")).unwrap();
    let t = ffmwrc::schedule::MessageTable::from_json(&json).unwrap();
    assert_eq!(t.users, 3);
    assert!(std::fs::read_to_string(&out).unwrap().contains("user 3: 4 equations, 4 unknowns, rank 4"));
}

#[test]
fn zero_noise_simulation_never_fails() {
    let o = run(&["simulate"], &configs().join("simulate_zero_noise.json"));
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("axis_value,trials,failures,p_hat,lo95,hi95,redraws"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[2], "0");
}

#[test]
fn region_sweep_staircase() {
    let o = run(&["region-sweep"], &configs().join("region_sweep.json"));
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("R1_2,R3,achievable,outer"));
    // base sums: user 3 carries 0.39 + 0.39 + R1_2, users 1, 2 carry R3 + 0.53
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let x: f64 = f[0].parse().unwrap();
        let y: f64 = f[1].parse().unwrap();
        let inside = 0.78 + x < 1.0 - 1e-9 && y + 0.53 < 1.0 - 1e-9;
        let outer = 0.78 + x <= 1.0 + 1e-9 && y + 0.53 <= 1.0 + 1e-9;
        assert_eq!(f[2] == "1", inside, "{line}");
        assert_eq!(f[3] == "1", outer, "{line}");
    }
}
