//! End-to-end runs of the binary: exit codes, formats, seeds, fixtures.

use std::collections::BTreeSet;
use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler-audit")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scenario(name: &str) -> String {
    format!("{}/../core/scenarios/{name}.scn", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn input_errors_exit_two() {
    let o = run(&["audit", "--scenario", "/nonexistent/space.scn"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(code(&run(&["audit", "--bogus"])), 2);
    assert_eq!(code(&run(&["hpcheck", "y1 +", "--degree", "1"])), 2);
    assert_eq!(code(&run(&["derive", "nonsense"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    fs::write(&bad, "dim = 2\nmetric = [[\"1\", \"x1\"], [\"0\", \"1\"]]\n").unwrap();
    let o = run(&["audit", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn hpcheck_examples() {
    assert_eq!(code(&run(&["hpcheck", "y1*y2", "--degree", "2"])), 0);
    assert_eq!(code(&run(&["hpcheck", "alpha", "--degree", "1"])), 1);
    assert_eq!(code(&run(&["hpcheck", "r00 + s0", "--degree", "2"])), 1);
    let o = run(&["hpcheck", "alpha^2 + beta^2", "--degree", "2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.is_object());
}

#[test]
fn derive_prints_the_randers_k() {
    let o = run(&["derive", "k", "--case", "randers"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("# Randers case"));
    assert_eq!(
        stdout(&o).lines().last().unwrap(),
        "K^im_m = (1/2*alpha*sigma0*n + 1/2*alpha*sigma0)*bi + (-1/2*alpha*beta*n - 1/2*alpha*beta)*sigmai"
    );
}

#[test]
fn audit_formats_agree_and_seed_is_reproducible() {
    let sc = scenario("warped");
    let args = ["audit", "--scenario", sc.as_str(), "--case", "randers", "--seed", "7"];
    let text = run(&args);
    assert_eq!(code(&text), 3, "{}", stdout(&text));
    let body = stdout(&text);
    assert!(body.lines().any(|l| l.starts_with("PASS") && l.contains("randers.total")));
    assert_eq!(body, stdout(&run(&args)));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&run(&json_args)), 3);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["tool"], "finsler-audit");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["summary"]["exit_code"], 3);
    let json_ids: BTreeSet<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    let text_ids: BTreeSet<&str> = body
        .lines()
        .filter(|l| ["PASS ", "FINDING ", "FAIL "].iter().any(|p| l.starts_with(p)))
        .filter_map(|l| l.split_whitespace().nth(1))
        .collect();
    assert_eq!(json_ids, text_ids);
}

#[test]
fn selftest_passes_on_bundled_fixtures() {
    let o = run(&["selftest"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains(", 0 failed"));
}

#[test]
fn corrupted_fixture_fails_selftest() {
    let path = format!("{}/../core/fixtures/printed.fx", env!("CARGO_MANIFEST_DIR"));
    let good = fs::read_to_string(path).unwrap();
    let bad = good.replacen("A     : pass := -12*k^2", "A     : pass := 12*k^2", 1);
    assert_ne!(good, bad);
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("printed.fx");
    fs::write(&f, bad).unwrap();
    let o = run(&["selftest", "--fixtures", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("FAIL") && l.contains("scalars.A")), "{out}");
}
