use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qdouble(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdouble"))
        .args(args)
        .env_remove("QDOUBLE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const SIM: &str = r#"{
  "lx": 3, "ly": 3, "d": 2,
  "masses": {"d": 2, "vertex_masses": {"default": [0, 1]}},
  "rate": {"kind": "metropolis", "beta": 0.5},
  "max_time": 4.0, "trajectories": 6, "seed": 11, "decoder": "greedy"
}"#;

#[test]
fn help_for_every_subcommand() {
    for sub in [
        vec!["barrier"],
        vec!["decompose"],
        vec!["multiset", "verify"],
        vec!["multiset", "zero-sum"],
        vec!["defects", "check"],
        vec!["simulate"],
        vec!["gap"],
        vec!["bound"],
        vec!["sweep"],
    ] {
        let mut args = sub.clone();
        args.push("--help");
        let out = qdouble(&args);
        assert_eq!(out.status.code(), Some(0), "{sub:?}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
    }
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(qdouble(&["barrier", "--bogus"]).status.code(), Some(64));
    assert_eq!(qdouble(&[]).status.code(), Some(64));
    assert_eq!(qdouble(&["multiset", "verify"]).status.code(), Some(64));
}

#[test]
fn multiset_verify_reports_extremal_values() {
    let out = qdouble(&["multiset", "verify", "--d", "5", "--growth", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["extremal"]["max_cardinality"], 4);
    assert_eq!(v["extremal"]["max_sum"], 16);
}

#[test]
fn zero_sum_subset_found() {
    let v = stdout_json(&qdouble(&["multiset", "zero-sum", "--d", "5", "--items", "2,4,4"]));
    assert_eq!(v["zero_sum_free"], false);
    let v = stdout_json(&qdouble(&["multiset", "zero-sum", "--d", "5", "--items", "1,1,1"]));
    assert_eq!(v["zero_sum_free"], true);
}

#[test]
fn barrier_of_identity_hop_and_string() {
    let dir = tempfile::tempdir().unwrap();
    let zeros = vec!["0"; 8].join(",");
    let identity = write(dir.path(), "id.json", &format!(r#"{{"lx":2,"ly":2,"pauli":"d=3;Z={zeros};X={zeros}"}}"#));
    let v = stdout_json(&qdouble(&["barrier", "--error", &identity]));
    assert_eq!(v["constructive"], 0.0);
    assert_eq!(v["length"], 0);

    // a single hop ends in the pair it creates: no energy above the final state
    let one = write(
        dir.path(),
        "one.json",
        &format!(r#"{{"lx":2,"ly":2,"pauli":"d=3;Z=1,0,0,0,0,0,0,0;X={zeros}"}}"#),
    );
    let v = stdout_json(&qdouble(&["barrier", "--error", &one]));
    assert_eq!(v["constructive"], 0.0);

    let string = write(
        dir.path(),
        "string.json",
        &format!(r#"{{"lx":2,"ly":2,"pauli":"d=3;Z=1,1,0,0,0,0,0,0;X={zeros}"}}"#),
    );
    let out = qdouble(&["barrier", "--error", &string, "--oracle", "--support-cap", "4", "--steps"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["constructive"], 2.0);
    assert_eq!(v["oracle"], 2.0);
    assert_eq!(v["steps"].as_array().unwrap().len(), 2);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(qdouble(&["barrier", "--error", missing.to_str().unwrap()]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.json", r#"{"lx":2,"ly":2,"pauli":"d=2;Z=1;X=0"}"#);
    assert_eq!(qdouble(&["decompose", "--error", &bad]).status.code(), Some(2));
    let garbage = write(dir.path(), "garbage.json", "not json");
    assert_eq!(qdouble(&["gap", "--config", &garbage]).status.code(), Some(2));
}

#[test]
fn size_guard_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "big.json", &SIM.replace("\"lx\": 3, \"ly\": 3", "\"lx\": 4, \"ly\": 4"));
    assert_eq!(qdouble(&["gap", "--config", &cfg]).status.code(), Some(3));
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("no/such/dir/out.json");
    let code = qdouble(&["multiset", "verify", "--d", "3", "--out", out.to_str().unwrap()]).status.code();
    assert_eq!(code, Some(1));
}

#[test]
fn defects_check_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let closed = write(
        dir.path(),
        "closed.json",
        r#"{"d":3,"lines":[{"sector":"chargeon","path":[[1,1],[3,1],[3,3],[1,3],[1,1]],"M":2,"orientation":"left"}]}"#,
    );
    let out = qdouble(&["defects", "check", "--config", &closed, "--lx", "3", "--ly", "3"]);
    let v = stdout_json(&out);
    assert_eq!(v["consistent"], true, "{v}");
    assert_eq!(out.status.code(), Some(0));

    let open = write(
        dir.path(),
        "open.json",
        r#"{"d":3,"lines":[{"sector":"chargeon","path":[[1,1],[3,1]],"M":2,"orientation":"left"}]}"#,
    );
    let out = qdouble(&["defects", "check", "--config", &open, "--lx", "3", "--ly", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["consistent"], false);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.json", SIM);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let status = qdouble(&["--threads", "2", "simulate", "--config", &cfg, "--out", out.to_str().unwrap()]).status;
        assert_eq!(status.code(), Some(0));
    }
    for name in ["trajectory_00000.json", "trajectory_00005.json", "summary.csv"] {
        let x = fs::read(a.join(name)).unwrap();
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name}");
    }
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(summary.starts_with("beta,median_t_fail,q25,q75,n_traj,bound_value\n"));
    let t: Value = serde_json::from_slice(&fs::read(a.join("trajectory_00000.json")).unwrap()).unwrap();
    assert_eq!(t["samples"].as_array().unwrap().len(), 200);
}

#[test]
fn seed_override_changes_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.json", SIM);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    qdouble(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap()]);
    qdouble(&["--seed", "12", "simulate", "--config", &cfg, "--out", b.to_str().unwrap()]);
    let x = fs::read(a.join("trajectory_00000.json")).unwrap();
    assert_ne!(x, fs::read(b.join("trajectory_00000.json")).unwrap());
}

#[test]
fn sweep_writes_one_row_per_beta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.json", SIM);
    let out = dir.path().join("sweep");
    let status = qdouble(&["sweep", "--config", &cfg, "--betas", "0,0.5,1", "--out", out.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(0));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    let rows: Value = serde_json::from_slice(&fs::read(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert_eq!(rows[2]["beta"], 1.0);
}

#[test]
fn gap_and_bound_on_a_tiny_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tiny.json", &SIM.replace("\"lx\": 3, \"ly\": 3", "\"lx\": 2, \"ly\": 2"));
    let gap = stdout_json(&qdouble(&["gap", "--config", &cfg]));
    assert_eq!(gap["bound_holds"], true);
    let bound = stdout_json(&qdouble(&["bound", "--config", &cfg]));
    assert!(bound["value"].as_f64().unwrap() > 0.0);
}
