use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TWO_BODY: [&str; 8] = ["--n", "10", "--K", "2", "--phi", "0.5235987756", "--theta", "2.6179938780"];
const REFERENCE: &str = "-2,0,0.5,-1,0.5";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stoqbell"))
        .args(args)
        .env_remove("STOQBELL_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json_stdout(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn with<'a>(base: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = base.to_vec();
    v.extend_from_slice(extra);
    v
}

#[test]
fn operator_verdicts_and_exit_codes() {
    let args = with(&["operator"], &TWO_BODY);
    let ok = run(&with(&args, &["--alpha", REFERENCE]));
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    let doc = json_stdout(&ok);
    assert_eq!(doc["stoquastic"]["stoquastic"], true);
    assert_eq!(doc["matrix"]["dim"], 11);
    assert_eq!(doc["manifest"]["command"], "operator");

    let bad = run(&[
        "operator", "--n", "10", "--K", "2", "--phi", "1.5707963268", "--theta", "2.6179938780", "--alpha",
        "1,0,0,0,0",
    ]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("not stoquastic"));

    assert_eq!(code(&run(&args)), 64);
    // five coefficients are order 2
    assert_eq!(code(&run(&["operator", "--n", "10", "--K", "3", "--phi", "1", "--theta", "2", "--alpha", REFERENCE])), 64);
    assert_eq!(code(&run(&["operator", "--n", "10", "--phi", "1", "--theta", "2", "--alpha", "1,2,3"])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
}

#[test]
fn operator_block_option() {
    let o = run(&with(&with(&["operator"], &TWO_BODY), &["--alpha", REFERENCE, "--block", "3"]));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = json_stdout(&o);
    assert_eq!(doc["block"]["two_j"], 6);
    assert_eq!(doc["matrix"]["dim"], 7);
    let o = run(&with(&with(&["operator"], &TWO_BODY), &["--alpha", REFERENCE, "--block", "2.5"]));
    assert_eq!(code(&o), 64);
}

#[test]
fn degrees_match_radians() {
    let rad = run(&with(&with(&["bounds"], &TWO_BODY), &["--alpha", REFERENCE]));
    let deg = run(&[
        "--deg", "bounds", "--n", "10", "--phi", "30", "--theta", "150", "--alpha", REFERENCE,
    ]);
    let (a, b) = (json_stdout(&rad), json_stdout(&deg));
    let ga = a["bounds"]["gap"].as_f64().unwrap();
    let gb = b["bounds"]["gap"].as_f64().unwrap();
    assert!((ga - gb).abs() < 1e-9);
}

#[test]
fn cone_counts() {
    let o = run(&with(&["cone"], &TWO_BODY));
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("3 rays, 2 lines"));
    let doc = json_stdout(&o);
    assert_eq!(doc["cone"]["K"], 2);
    assert_eq!(doc["cone"]["hyperplanes"].as_array().unwrap().len(), 3);

    let o = run(&["cone", "--n", "10", "--K", "3", "--phi", "0.5235987756", "--theta", "2.6179938780"]);
    assert!(stderr(&o).contains("13 rays, 3 lines"), "{}", stderr(&o));

    let o = run(&with(&with(&["cone"], &TWO_BODY), &["--analytic"]));
    assert!(stderr(&o).contains("3 rays, 2 lines"));
    assert_eq!(json_stdout(&o)["source"], "analytic");
}

#[test]
fn analytic_cone_falls_back_when_sin_phi_vanishes() {
    let o = run(&["cone", "--n", "10", "--K", "2", "--phi", "0", "--theta", "2.6179938780", "--analytic"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("warning") && err.contains("numeric"), "{err}");
    let doc = json_stdout(&o);
    assert_eq!(doc["source"], "numeric");
    assert_eq!(doc["degenerate"], true);
}

#[test]
fn bounds_reference_gap() {
    let o = run(&with(&with(&["bounds"], &TWO_BODY), &["--alpha", REFERENCE]));
    assert_eq!(code(&o), 0);
    let doc = json_stdout(&o);
    let g = doc["bounds"]["gap"].as_f64().unwrap();
    assert!((g - 1.05442).abs() < 5e-6);
    assert_eq!(doc["bounds"]["beta_c"].as_f64(), Some(-20.0));
    // at most 12 significant digits
    let text = doc["bounds"]["beta_q"].to_string();
    assert!(text.trim_start_matches('-').replace('.', "").trim_start_matches('0').len() <= 12, "{text}");
}

#[test]
fn bounds_without_violation_is_null() {
    let o = run(&with(&with(&["bounds"], &TWO_BODY), &["--alpha", "0,0,0,0,0"]));
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("gap undefined"));
    let doc = json_stdout(&o);
    assert!(doc["bounds"]["gap"].is_null());
    assert_eq!(doc["bounds"]["gap_status"], "classical_bound_nonnegative");
}

#[test]
fn cone_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cone = dir.path().join("cone.json");
    let o = run(&with(&with(&["cone"], &TWO_BODY), &["--out", cone.to_str().unwrap()]));
    assert_eq!(code(&o), 0);
    assert!(read_json(&cone)["manifest"]["timestamp"].is_string());

    let fast = ["--restarts", "2", "--grid-points", "31", "--seed", "3"];
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let trace = dir.path().join("trace.csv");
    let o = run(&with(
        &with(&["optimize", "--cone-file", cone.to_str().unwrap()], &fast),
        &["--out", a.to_str().unwrap(), "--trace", trace.to_str().unwrap()],
    ));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&with(&with(&with(&["optimize"], &TWO_BODY), &fast), &["--out", b.to_str().unwrap()]));
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let (a, b) = (read_json(&a), read_json(&b));
    assert_eq!(a["membership"]["member"], true);
    assert_eq!(a["membership"]["member"], b["membership"]["member"]);
    assert_eq!(a["stoquastic"]["stoquastic"], true);
    let (ga, gb) = (a["result"]["gap"].as_f64().unwrap(), b["result"]["gap"].as_f64().unwrap());
    assert!((ga - gb).abs() < 1e-9, "{ga} vs {gb}");
    assert_eq!(a["manifest"]["seed"], 3);

    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("pass,coord,value,gap\n"));
    assert!(trace.with_file_name("trace.csv.manifest.json").exists());
}

#[test]
fn optimize_needs_a_cone() {
    assert_eq!(code(&run(&["optimize", "--n", "10"])), 64);
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"n\": 3}").unwrap();
    assert_eq!(code(&run(&["optimize", "--cone-file", junk.to_str().unwrap()])), 64);
}

#[test]
fn optimize_is_reproducible() {
    let args = with(&with(&["optimize"], &TWO_BODY), &["--restarts", "2", "--grid-points", "21", "--seed", "11"]);
    let (a, b) = (json_stdout(&run(&args)), json_stdout(&run(&args)));
    assert_eq!(a["result"], b["result"]);
}

#[test]
fn scan_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = run(&[
        "scan", "--n", "10", "--alpha", REFERENCE, "--phi-range", "0,3.14159", "--theta-range", "-3.14159,0",
        "--res-phi", "4", "--res-theta", "3", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "phi,theta,beta_q,beta_c,gap,violation");
    assert_eq!(lines.len(), 13);
    assert!(lines[1].starts_with("0,-3.14159,"));
    let m = read_json(&dir.path().join("scan.csv.manifest.json"));
    assert_eq!(m["manifest"]["command"], "scan");
    assert_eq!(code(&run(&["scan", "--n", "10", "--alpha", REFERENCE, "--phi-range", "1,2,3"])), 64);
}

#[test]
fn parent_ghz_decomposition() {
    let o = run(&["parent", "--state", "ghz", "--n", "3", "--decompose"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("max K = 3"));
    let doc = json_stdout(&o);
    assert_eq!(doc["max_order"], 3);
    assert_eq!(doc["stoquastic"]["stoquastic"], true);
    let first = &doc["decomposition"][0];
    assert!(first["w"].is_array() && first["K"].is_number() && first["coeff"].is_number());
}

#[test]
fn parent_states() {
    let o = run(&["parent", "--state", "gaussian", "--n", "8"]);
    assert_eq!(code(&o), 0);
    let amps = json_stdout(&o)["state"].as_array().unwrap().len();
    assert_eq!(amps, 9);
    let o = run(&["parent", "--state", "custom", "--amplitudes", "1,0,1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(&["parent", "--state", "custom", "--amplitudes", "1,-1,1"])), 1);
    assert_eq!(code(&run(&["parent", "--state", "gaussian", "--n", "4", "--sigma", "-1"])), 64);
    assert_eq!(code(&run(&["parent", "--state", "ghz"])), 64);
}

#[test]
fn class_verification() {
    let base = [
        "class", "--x", "1", "--y", "1", "--sigma", "-1", "--tau", "-1", "--mu", "0", "--phi", "0.5235987756",
        "--theta", "2.6179938780", "--n", "9",
    ];
    let o = run(&with(&base, &["--verify"]));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("all 5 blocks stoquastic"));
    let doc = json_stdout(&o);
    assert_eq!(doc["report"]["per_block_stoquastic"].as_array().unwrap().len(), 5);
    assert!(doc["report"]["A_prime"].is_number());

    // θ off the solution set
    let off = [
        "class", "--x", "1", "--y", "1", "--sigma", "-1", "--tau", "-1", "--mu", "0", "--phi", "0.5235987756",
        "--theta", "2.0", "--n", "9",
    ];
    assert_eq!(code(&run(&off)), 2);
    let mut zero = base.to_vec();
    zero[6] = "0";
    assert_eq!(code(&run(&zero)), 64);
}

#[test]
fn threads_flag_and_env() {
    let o = run(&with(&["--threads", "2", "cone"], &TWO_BODY));
    assert_eq!(code(&o), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_stoqbell"))
        .args(with(&["cone"], &TWO_BODY))
        .env("STOQBELL_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(json_stdout(&o)["manifest"]["params"]["threads"], 1);
}
