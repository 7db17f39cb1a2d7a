use std::process::{Command, Output};

fn rpq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpq-urn")).args(args).env_remove("RPQ_URN_OUTPUT_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn tabulate_csv() {
    let o = rpq(&["tabulate", "--k", "2", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# rpq-urn schema=1 command=tabulate"));
    assert_eq!(&lines[1..], ["x1,x2,weight,probability", "0,0,1,4/7", "0,1,1/2,2/7", "1,0,1/4,1/7"]);
}

#[test]
fn tabulate_json_schema() {
    let o = rpq(&["tabulate", "--k", "2", "--n", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["command"], "tabulate");
    assert_eq!(v["config"]["mode"], "exact");
    assert!(v.get("banner").is_none());
}

#[test]
fn approximate_mode_banner() {
    let o = rpq(&["tabulate", "--k", "2", "--n", "1", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("# APPROXIMATE")));
    let o = rpq(&["tabulate", "--k", "2", "--n", "1", "--q", "0.5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["mode"], "approximate");
    assert!(v["banner"].is_string());
}

#[test]
fn verify_hs1_all_pass() {
    let o = rpq(&["verify", "--suite", "hs1", "--kmax", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("hs1,")).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.split(',').nth(4) == Some("true")));
}

#[test]
fn invalid_parameters_exit_2() {
    let o = rpq(&["tabulate", "--k", "2", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("n <= k+1"));
    assert_eq!(rpq(&["tabulate", "--k", "2", "--n", "1", "--q", "2"]).status.code(), Some(2));
    assert_eq!(rpq(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn capacity_exit_3() {
    let o = rpq(&["tabulate", "--kind", "second", "--k", "20", "--n", "20"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
}

#[test]
fn io_failure_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let target = blocker.join("out.csv");
    let o = rpq(&["tabulate", "--k", "1", "--n", "1", "--output", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_dir_env_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rpq-urn"))
        .args(["sample", "--k", "2", "--n", "1", "--seed", "7", "--count", "50", "--output", "draws.csv"])
        .env("RPQ_URN_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let written = std::fs::read_to_string(dir.path().join("draws.csv")).unwrap();
    assert_eq!(written.lines().filter(|l| !l.starts_with('#')).count(), 51);
    let again = rpq(&["sample", "--k", "2", "--n", "1", "--seed", "7", "--count", "50"]);
    assert_eq!(stdout(&again), written);
}
