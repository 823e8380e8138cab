use std::process::{Command, Output};

fn vstatic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vstatic")).args(args).env_remove("VSTATIC_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const CLOSURE: [&str; 8] = ["--lambda", "2", "--phi0", "0", "--dphi0", "1", "--n", "4"];

#[test]
fn classify_sphere_and_euclidean() {
    let o = vstatic(&[&["ode", "classify", "--R", "12", "--r-max", "4"][..], &CLOSURE].concat());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "Sphere zeros=[0.000000,3.141593]");
    let o = vstatic(&[&["ode", "classify", "--R", "0", "--r-max", "10"][..], &CLOSURE].concat());
    assert_eq!(stdout(&o).trim(), "Euclidean zeros=[0.000000]");
}

#[test]
fn solve_streams_hyperbolic_csv() {
    let o = vstatic(&[&["ode", "solve", "--R", "-12", "--r-max", "3"][..], &CLOSURE].concat());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,phi,dphi,J"));
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[1] - v[0].sinh()).abs() < 1e-7, "{line}");
        rows += 1;
    }
    assert!(rows > 1000);
}

#[test]
fn singular_start_is_a_usage_error() {
    let o = vstatic(&["ode", "solve", "--n", "4", "--R", "12", "--lambda", "2", "--phi0", "0", "--dphi0", "2", "--r-max", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("smooth closure"));
}

#[test]
fn verify_reports_and_exit_codes() {
    let o = vstatic(&["verify", "--model", "sphere", "--n", "4", "--A", "1", "--kappa", "1", "--grid", "20", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["overall_pass"], true);
    let reports = v["reports"].as_array().unwrap();
    assert!(!reports.is_empty());
    assert!(reports.iter().all(|r| r["parameters"]["n"] == 4 && r["seed"] == 1729 && r["pass"] == true));

    let o = vstatic(&["verify", "--model", "sphere", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n must be ≥ 3"));
    assert_eq!(vstatic(&["verify", "--model", "klein-bottle"]).status.code(), Some(2));
    assert_eq!(vstatic(&["verify"]).status.code(), Some(2));
}

#[test]
fn failing_battery_exits_one() {
    let o = vstatic(&["verify", "--model", "product-perturbed", "--grid", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("overall: FAIL"));
}

#[test]
fn seed_comes_from_the_environment() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_vstatic"))
            .args(["verify", "--model", "euclidean", "--n", "3", "--grid", "5", "--json"])
            .env("VSTATIC_SEED", seed)
            .output()
            .unwrap()
    };
    let o = run("42");
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(run("not-a-number").status.code(), Some(2));
}
