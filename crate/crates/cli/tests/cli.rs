//! End-to-end runs of the binary: exit codes, diagnostics and byte-level
//! determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ideallab"))
        .args(args)
        .env_remove("IDEALLAB_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(name: &str) -> String {
    data(name).display().to_string()
}

#[test]
fn passing_certificate_exits_zero() {
    let out = run(&["bjn", "verify", &path("density_bjn_cert.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "bjn verify");
    assert_eq!(v["result"]["pass"], true);
    assert_eq!(
        v["result"]["certificate"]["report"]["rule"],
        "bjn-conditions"
    );
    assert!(
        v["result"]["certificate"]["report"]["citation"]
            .as_str()
            .unwrap()
            .len()
            > 20
    );
}

#[test]
fn saved_certificate_reverifies() {
    let out = run(&["bjn", "verify", &path("density_bjn_cert.json")]);
    let cert = json(&out)["result"]["certificate"].clone();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cert.json");
    std::fs::write(&file, serde_json::to_vec(&cert).unwrap()).unwrap();
    let again = run(&["bjn", "verify", file.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(json(&again)["result"]["certificate"], cert);
}

#[test]
fn failing_certificate_exits_one() {
    let out = run(&["bjn", "verify", &path("density_bjn_fail.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["result"]["pass"], false);
}

#[test]
fn prob_form_passes() {
    let out = run(&["bjn", "prob-form", &path("density_prob.json")]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn malformed_rational_exits_two() {
    let out = run(&["measure", "info", "--measure", &path("bad_rational.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["code"], "MALFORMED_RATIONAL");

    let lam = path("pair.json");
    let out = run(&[
        "reduce", "transfer", "--lambda", &lam, "--mu", &lam, "--eps", "1/0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["code"], "MALFORMED_RATIONAL");
}

#[test]
fn usage_errors_are_machine_readable() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["code"], "USAGE");
    let out = run(&[
        "set",
        "contains",
        "--set",
        &path("missing.json"),
        "--n",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["code"], "INVALID_INPUT");
}

#[test]
fn status_of_density_filter() {
    let out = run(&["ideal", "status", "--filter", &path("fd.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["jnp"], "NO_JNP");
    assert_eq!(r["bjnp"], "BJNP");
    assert_eq!(r["bjnp_verdict"]["rule"], "density-bjnp");
    assert!(r["jnp_verdict"]["citation"].is_string());

    let r = json(&run(&[
        "ideal",
        "status",
        "--filter",
        &path("free_sum.json"),
    ]));
    assert_eq!(r["result"]["jnp"], "JNP");
    assert_eq!(r["result"]["jnp_verdict"]["rule"], "free-sum");
    let r = json(&run(&[
        "ideal",
        "status",
        "--filter",
        &path("frechet.json"),
    ]));
    assert_eq!(r["result"]["jnp"], "JNP");
}

#[test]
fn config_defaults_and_overrides_are_echoed() {
    let out = run(&[
        "--config",
        &path("empty_config.json"),
        "ideal",
        "status",
        "--filter",
        &path("frechet.json"),
    ]);
    let cfg = &json(&out)["config"];
    assert_eq!(cfg["precision_bits"], 128);
    assert_eq!(cfg["horizon"], 65536);
    assert_eq!(cfg["lp_domain_cap"], 12);
    assert_eq!(cfg["tolerance"], "1/100");
    assert_eq!(cfg["format"], "json");

    let out = Command::new(env!("CARGO_BIN_EXE_ideallab"))
        .args([
            "ideal",
            "status",
            "--filter",
            &path("frechet.json"),
            "--tolerance",
            "1/7",
        ])
        .env("IDEALLAB_PRECISION_BITS", "256")
        .output()
        .unwrap();
    let cfg = &json(&out)["config"];
    assert_eq!(cfg["precision_bits"], 256);
    assert_eq!(cfg["tolerance"], "1/7");

    let out = run(&[
        "--lp-domain-cap",
        "99",
        "ideal",
        "status",
        "--filter",
        &path("frechet.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn text_format() {
    let out = run(&[
        "--format",
        "text",
        "ideal",
        "status",
        "--filter",
        &path("fd.json"),
    ]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("command: ideal status\n"));
    assert!(s.contains("jnp: \"NO_JNP\""));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cases: [&[&str]; 3] = [
        &[
            "construct",
            "separation",
            "--p",
            "1/2",
            "--q",
            "1",
            "--blocks",
            "3",
        ],
        &[
            "construct",
            "cover",
            "--n",
            "5",
            "--budget",
            "6",
            "--seed",
            "3",
        ],
        &["bjn", "verify", &path("density_bjn_cert.json")],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn separation_report_carries_trace_and_audit() {
    let out = run(&[
        "construct",
        "separation",
        "--p",
        "1/2",
        "--q",
        "1",
        "--blocks",
        "2",
    ]);
    let r = &json(&out)["result"];
    assert_eq!(r["separation"]["trace"].as_array().unwrap().len(), 2);
    assert_eq!(r["separation"]["trace"][0]["l0"], 64);
    assert_eq!(r["audit"]["pass"], true);
    assert_eq!(r["separation"]["rule"], "separation");
}

#[test]
fn selftest_is_deterministic_and_passes() {
    let a = run(&["selftest"]);
    let b = run(&["selftest"]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stdout)
    );
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["result"]["criteria"].as_array().unwrap().len(), 10);
    assert_eq!(v["result"]["config"]["precision_bits"], 128);
}

#[test]
fn injected_fault_names_criterion_two() {
    let out = run(&["selftest", "--inject-fault", "density"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let failed: Vec<&Value> = v["result"]["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .collect();
    assert_eq!(failed[0]["id"], 2);
    assert_eq!(failed[0]["name"], "density synthesis");
}
