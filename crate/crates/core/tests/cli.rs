use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discount-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn baseline_writes_series_to_stdout() {
    let out = run(&["baseline", "--agent", "fixed-farsighted", "--cycles", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 13);
    assert!(lines[0].starts_with("cycle,state,action"));
    assert_eq!(lines[6], "6,5,1,1000,1000,166.66666666666666,1111111111,false");
    assert!(lines[12].starts_with("12,5,1,1000,2000,"));
}

#[test]
fn baseline_rejects_planning_agents() {
    let out = run(&["baseline", "--agent", "mcts"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_discount_parameter_is_a_config_error() {
    assert_eq!(
        run(&["run", "--discount", "geometric", "--g", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["run", "--discount", "power", "--beta", "1.0"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["run", "--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn oracle_run_to_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hyper.json");
    let out = run(&[
        "run",
        "--agent",
        "oracle",
        "--discount",
        "hyperbolic",
        "--kappa",
        "12",
        "--cycles",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    let series = json["series"].as_array().unwrap();
    assert_eq!(series.len(), 5);
    assert!(series.iter().all(|c| c["plan"] == "0111111000"));
    assert_eq!(json["summary"]["inconsistency_count"], 4);
    assert_eq!(json["summary"]["total_reward"], 20.0);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    fs::write(&cfg, "# fixed myopic agent\nagent = fixed-myopic\ncycles = 50\n").unwrap();
    let c = cfg.to_str().unwrap();

    let out = run(&["baseline", "--config", c]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().last().unwrap().starts_with("50,0,0,4,200,4,"));

    let out = run(&["baseline", "--config", c, "--cycles", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 8);
}

#[test]
fn missing_config_file_fails() {
    let out = run(&["run", "--config", "/nonexistent/discount-lab.conf"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("no").join("such").join("out.csv");
    let out = run(&["baseline", "--cycles", "3", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!target.exists());
}

#[test]
fn sweep_emits_one_row_per_point() {
    let out = run(&[
        "sweep",
        "--agent",
        "oracle",
        "--discount",
        "geometric",
        "--axis",
        "g",
        "--values",
        "0.2,0.9",
        "--repeats",
        "2",
        "--cycles",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][..4], ["0", "g", "0.2", "0"]);
    assert_eq!(rows[3][..4], ["1", "g", "0.9", "1"]);
    // oracle episodes are deterministic: both repeats agree
    assert_eq!(rows[0][5], "48");
    assert_eq!(rows[2][5], rows[3][5]);
    assert_eq!(rows[2][5], "2000");
}
