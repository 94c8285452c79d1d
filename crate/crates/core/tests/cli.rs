//! The `varopt` binary: subcommands, exit codes and output files.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use varopt::io::InstanceFile;
use varopt::ProblemSpec;

fn varopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varopt")).args(args).env_remove("VAROPT_TIME_LIMIT").output().unwrap()
}

fn write_e1(dir: &Path, spec: &ProblemSpec) -> String {
    let p = dir.join("e1.json");
    InstanceFile::inline(&common::e1(), spec).save(&p).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = write_e1(dir.path(), &common::e1_spec());
    let out = varopt(&["solve", "--instance", &e1]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["nu"].as_f64().unwrap() - 0.5).abs() < 1e-6);

    let out = varopt(&["solve", "--instance", &e1, "--mu0", "0.9"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["status"], "infeasible");

    // floor(alpha m) = 0: an LP whose optimum is the best worst-case return.
    let out = varopt(&["solve", "--instance", &e1, "--alpha", "0.1", "--mu0", "-10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["binaries"], 0);
    assert!((v["nu"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn certify_exit_codes_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = write_e1(dir.path(), &common::e1_spec());
    let out_dir = dir.path().join("out");
    let out = varopt(&["certify", "--instance", &e1, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "proven");
    assert!((v["upper"].as_f64().unwrap() - 0.505).abs() < 1e-9);
    for f in ["certified.json", "lower_trace.csv", "certify_trace.csv"] {
        assert!(out_dir.join(f).exists(), "{f} missing");
    }

    let out = varopt(&["certify", "--instance", &e1, "--certify-iter-max", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["reason"], "iteration_cap");

    let single = dir.path().join("single.json");
    let s = varopt::ScenarioSet::new(vec![vec![0.3], vec![-0.2], vec![0.1], vec![0.4], vec![0.0]], vec![]).unwrap();
    InstanceFile::inline(&s, &ProblemSpec::new(0.2, f64::NEG_INFINITY)).save(&single).unwrap();
    let out = varopt(&["certify", "--instance", single.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["lower"].as_f64().unwrap() - 0.0).abs() < 1e-12);
}

#[test]
fn oracle_frontier_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = write_e1(dir.path(), &common::e1_spec());
    let out = varopt(&["oracle", "--instance", &e1]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["nu"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    let out_dir = dir.path().join("fr");
    let out = varopt(&[
        "frontier", "--builtin", "plateau", "--risk", "var", "--grid-lo", "0.25", "--grid-hi", "0.75", "--grid-step", "0.025",
        "--check-duality", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["duality_consistent"], true);
    assert!(!v["plateaus"].as_array().unwrap().is_empty());
    let csv = std::fs::read_to_string(out_dir.join("frontier.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("level,value,plateau_id"));
    assert_eq!(csv.lines().count(), 22);

    assert_eq!(varopt(&["solve"]).status.code(), Some(1));
    assert_eq!(varopt(&["nonsense"]).status.code(), Some(1));
    assert_eq!(varopt(&["--help"]).status.code(), Some(0));
}

#[test]
fn bench_is_deterministic_modulo_timing() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = varopt(&[
            "bench", "--ns", "3", "--ms", "30", "--alpha", "0.1", "--grid-k", "2", "--seed", "5", "--format", "json",
            "--out", out_dir.to_str().unwrap(),
        ]);
        // 2 when some cell's lower bound is too loose to certify.
        assert!(matches!(out.status.code(), Some(0 | 2)), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("bench.json")).unwrap()).unwrap();
        v["table2"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| (r["mu0"].clone(), r["var_star"].clone(), r["var"].clone()))
            .collect::<Vec<_>>()
    };
    let a = run("a");
    assert_eq!(a.len(), 2);
    assert_eq!(a, run("b"));
}
