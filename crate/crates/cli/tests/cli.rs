use std::path::PathBuf;
use std::process::{Command, Output};

use mld_core::fixtures;
use mld_core::germ_file::{self, Germ};
use serde_json::{json, Value};

fn mld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mld")).args(args).env_remove("MLD_THREADS").output().expect("runs")
}

fn write_file(name: &str, body: &str) -> String {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

/// Two branches of coefficient 1/2 sharing three points, origin included.
const TANGENT_HALVES: &str = r#"{"kind":"smooth","branches":[{"coeff":"1/2"},{"coeff":"1/2"}],"contacts":[[0,1,3]]}"#;

#[test]
fn mld_of_tangent_halves() {
    let f = write_file("tangent.json", TANGENT_HALVES);
    let o = mld(&["mld", &f]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["value"], "1");
    assert_eq!(v["certified"], true);
}

#[test]
fn a2_family_value_at_k3() {
    let body = germ_file::serialize(&Germ::Smooth(fixtures::example_4_2(3)));
    let f = write_file("ex4_2_k3.json", &body);
    let v = stdout_json(&mld(&["mld", &f]));
    assert_eq!((&v["value"], &v["depth"], &v["witness_a0"], &v["certified"]), (&json!("1/4"), &json!(3), &json!("4"), &json!(true)));
}

#[test]
fn constants_for_a_coefficient_set() {
    let o = mld(&["constants", "--coeffs", "1/2,1/3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o), json!({"gamma":"1/6","n0":1159,"epsilon":"1/288","delta":"1/12"}));
    let o = mld(&["--format", "csv", "constants", "--gamma", "1/3"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "gamma,n0,epsilon,delta\n1/3,292,1/72,1/6\n");
}

#[test]
fn pld_formats_agree() {
    let f = write_file(
        "a3.json",
        r#"{"kind":"singular","graph":{"weights":[2,2,2],"edges":[[0,1],[1,2]]},"attachments":[{"coeff":"1/2","host":0}]}"#,
    );
    let v = stdout_json(&mld(&["pld", &f]));
    assert_eq!(v["pld"], "5/8");
    let csv = String::from_utf8(mld(&["--format", "csv", "pld", &f]).stdout).unwrap();
    assert!(csv.starts_with("index,id,weight,a,a0\n0,v0,2,5/8,1\n"), "{csv}");
    let text = String::from_utf8(mld(&["--format", "text", "pld", &f]).stdout).unwrap();
    assert!(text.contains("pld: 5/8"), "{text}");
}

#[test]
fn witnesses_respect_the_depth_bound() {
    let f = write_file("tangent_w.json", TANGENT_HALVES);
    let v = stdout_json(&mld(&["witnesses", "--depth", "3", &f]));
    assert_eq!(v["count"], 3);
    assert_eq!(v["truncated"], false);
    let last = &v["witnesses"][2];
    assert_eq!(last["witness"], "origin:O/b{0,1}/b{0,1}");
    assert_eq!(last["witness_a0"], "4");
}

#[test]
fn tower_identity_suite_passes_and_is_byte_stable() {
    let args = ["verify", "tower-identity", "--trials", "1000", "--seed", "7"];
    let a = mld(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let v = stdout_json(&a);
    assert_eq!(v["passed"], true);
    assert_eq!(v["cases"], 1000);
    let b = mld(&[&args[..], &["--sequential"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let c = mld(&[&args[..], &["--threads", "3"]].concat());
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn failing_suite_exits_two() {
    let o = mld(&["verify", "fib-bound", "--trials", "200", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout_json(&o)["passed"], false);
}

#[test]
fn computation_errors_exit_one() {
    let f = write_file("minus_one.json", r#"{"kind":"singular","graph":{"weights":[1],"edges":[]},"attachments":[]}"#);
    let o = mld(&["pld", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert_eq!(stderr_json(&o)["error"], "pld");
}

#[test]
fn parse_errors_exit_three() {
    let cases = [
        r#"{"kind":"smooth","branches":[{"coeff":"0.5"}]}"#,
        r#"{"kind":"smooth","branches":[{"coeff":"3/2"}]}"#,
        r#"{"kind":"smooth","branches":[{"coeff":"1/2"}],"contacts":[[0,4,2]]}"#,
        r#"{"kind":"singular","graph":{"weights":[2],"edges":[[0,1]]}}"#,
        r#"{"kind":"cusp"}"#,
        "not json",
    ];
    for (i, body) in cases.iter().enumerate() {
        let f = write_file(&format!("bad{i}.json"), body);
        let o = mld(&["mld", &f]);
        assert_eq!(o.status.code(), Some(3), "{body}");
        assert_eq!(stderr_json(&o)["error"], "germ_file", "{body}");
    }
    assert_eq!(stderr_json(&mld(&["mld", "/nonexistent/germ.json"]))["error"], "io");
    assert_eq!(mld(&["constants", "--coeffs", "0.5"]).status.code(), Some(3));
    assert_eq!(mld(&["verify", "no-such-suite"]).status.code(), Some(3));
    assert_eq!(mld(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(mld(&["--help"]).status.code(), Some(0));
}

#[test]
fn thread_count_comes_from_the_environment() {
    let args = ["verify", "weight-lemma", "--trials", "50", "--seed", "3"];
    let plain = mld(&args);
    let env = Command::new(env!("CARGO_BIN_EXE_mld")).args(args).env("MLD_THREADS", "2").output().unwrap();
    assert_eq!(plain.status.code(), Some(0));
    assert_eq!(plain.stdout, env.stdout);
}
