use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn lov() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lov"));
    c.env_remove("LOV_CUTOFF").env_remove("LOV_SEED");
    c
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    lov().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = lov()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn temp_circuit(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn cz_layouts_are_equivalent() {
    let o = run(&[
        "equiv",
        data("cz_left.lov").to_str().unwrap(),
        data("cz_right.lov").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("equivalent"));
}

#[test]
fn different_phases_are_distinct() {
    let a = temp_circuit("circuit 1 -> 1\nps 0 0.1\n");
    let b = temp_circuit("circuit 1 -> 1\nps 0 0.2\n");
    let o = run(&[
        "--format",
        "json",
        "equiv",
        a.path().to_str().unwrap(),
        b.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["result"]["verdict"], "distinct_nf");
    assert_eq!(v["result"]["witness"]["input"], serde_json::json!([1]));
}

#[test]
fn bell_generator_output() {
    let o = run(&[
        "--format",
        "json",
        "eval",
        data("bell.lov").to_str().unwrap(),
        "--input",
        "1,0,1,0,0,0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let terms = v["result"]["output"]["terms"].as_array().unwrap();
    let logical: f64 = terms
        .iter()
        .filter(|t| {
            let occ: Vec<u64> = t[0].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
            occ == [1, 0, 1, 0] || occ == [0, 1, 0, 1]
        })
        .map(|t| t[1][0].as_f64().unwrap().powi(2) + t[1][1].as_f64().unwrap().powi(2))
        .sum();
    assert!((logical - 1.0 / 9.0).abs() < 1e-12, "{logical}");
}

#[test]
fn envelope_fields_in_order() {
    let o = run(&["--format", "json", "rank", data("bell.lov").to_str().unwrap()]);
    let text = stdout(&o);
    let (c, v, r) = (
        text.find("\"command\"").unwrap(),
        text.find("\"version\"").unwrap(),
        text.find("\"result\"").unwrap(),
    );
    assert!(c < v && v < r);
    assert_eq!(json(&o)["command"], "rank");
}

#[test]
fn synth_output_normalizes_from_stdin() {
    let s = run(&["synth", "--random", "4", "--seed", "7"]);
    assert_eq!(s.status.code(), Some(0));
    let n = run_stdin(&["normalize", "-"], &s.stdout);
    assert_eq!(n.status.code(), Some(0), "{}", stderr(&n));
    assert!(stdout(&n).starts_with("normal 4 -> 4 n_aux=0 m_aux=0"));
    // Normalizing a triangle leaves its grid alone.
    let grid = run(&["synth", "--random", "4", "--seed", "7", "--emit", "json"]);
    let t: Value = serde_json::from_slice(&grid.stdout).unwrap();
    let nf = run_stdin(&["--format", "json", "normalize", "-"], &s.stdout);
    let got = &json(&nf)["result"]["triangle"];
    for key in ["theta", "phi"] {
        let (a, b) = (t[key].to_string(), got[key].to_string());
        let fa: Vec<f64> = serde_json::from_str::<Vec<Vec<f64>>>(&a).unwrap().concat();
        let fb: Vec<f64> = serde_json::from_str::<Vec<Vec<f64>>>(&b).unwrap().concat();
        assert!(fa.iter().zip(&fb).all(|(x, y)| (x - y).abs() < 1e-9), "{key}");
    }
}

#[test]
fn seed_flag_beats_environment() {
    let flag = run(&["synth", "--random", "3", "--seed", "5"]);
    let env = lov()
        .args(["synth", "--random", "3"])
        .env("LOV_SEED", "5")
        .output()
        .unwrap();
    let both = lov()
        .args(["synth", "--random", "3", "--seed", "6"])
        .env("LOV_SEED", "5")
        .output()
        .unwrap();
    let six = run(&["synth", "--random", "3", "--seed", "6"]);
    assert_eq!(flag.stdout, env.stdout);
    assert_eq!(both.stdout, six.stdout);
    assert_ne!(flag.stdout, six.stdout);
}

#[test]
fn cutoff_from_environment() {
    let src = temp_circuit("circuit 0 -> 1\nsource 1 { 3: 1 }\n");
    let o = lov()
        .args(["eval", src.path().to_str().unwrap()])
        .env("LOV_CUTOFF", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stderr(&o).starts_with("error[budget]:"), "{}", stderr(&o));
}

#[test]
fn fmt_round_trips() {
    let dsl = std::fs::read_to_string(data("cz_left.lov")).unwrap();
    let j = run_stdin(&["fmt", "-"], dsl.as_bytes());
    assert_eq!(j.status.code(), Some(0));
    assert!(stdout(&j).trim_start().starts_with('{'));
    let back = run_stdin(&["fmt", "-"], &j.stdout);
    assert_eq!(stdout(&back), dsl);
}

#[test]
fn trace_lines() {
    let o = run(&["normalize", "--trace", data("bell.lov").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("step=1 rule="), "{first}");
    assert!(first.contains(" loc=") && first.contains(" rank=("));
}

#[test]
fn euler_solvers_emit_both_sides() {
    // BS(theta) on modes 0 and 1 with cos = 0.6.
    let rot = temp_circuit("[[[0.6,0],[0,0.8],[0,0]],[[0,0.8],[0.6,0],[0,0]],[[0,0],[0,0],[1,0]]]");
    let o = run(&["euler3", rot.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["lhs"].as_array().unwrap().len(), 3);
    assert_eq!(v["rhs"].as_array().unwrap().len(), 3);
    let o = run_stdin(&["euler2", "-"], b"[[[0.6,0],[0,0.8]],[[0,0.8],[0.6,0]]]");
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["lhs"].as_array().unwrap().len(), 4);
}

#[test]
fn axiom_table() {
    let o = run(&["check-axioms", "--instances", "3", "--axiom", "e2", "--axiom", "h2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("e2") && text.contains("h2"));
    let bad = run(&["check-axioms", "--axiom", "nope"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).starts_with("error[usage]:"));
}

#[test]
fn error_prefixes_and_codes() {
    let missing = run(&["rank", "/no/such/file.lov"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).starts_with("error[io]:"));

    let bad = temp_circuit("circuit 1 -> 1\nfrobnicate 0\n");
    let o = run(&["rank", bad.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[parse]:"), "{}", stderr(&o));

    let o = run(&["equiv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[usage]:"));

    let a = temp_circuit("circuit 1 -> 1\n");
    let b = temp_circuit("circuit 2 -> 2\n");
    let o = run(&["equiv", a.path().to_str().unwrap(), b.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[shape]:"), "{}", stderr(&o));

    let o = run(&["--amp-eps", "0", "rank", a.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_succeeds() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("normalize"));
}
