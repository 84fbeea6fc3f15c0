use std::process::{Command, Output};

use supertau::report::Report;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supertau")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn zero_curvature_suite_passes() {
    let o = run(&["verify", "kdv", "--suite", "zero-curvature", "--nmax", "2", "--mmax", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("2/2 checks passed"));
}

#[test]
fn cp1_h_table_in_latex() {
    let o = run(&["compute", "h", "--spec", "cp1.json", "--pmax", "2", "--format", "latex"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for line in ["h_{1,0} = u", "h_{2,0} = v", "h_{2,2} = v e^{u} + \\frac{v^3}{6}"] {
        assert!(s.contains(line), "{} missing in\n{}", line, s);
    }
}

#[test]
fn r_table_latex_has_half_u_squared() {
    let o = run(&["compute", "kdv", "--pmax", "0", "--format", "latex"]);
    assert!(stdout(&o).contains("\\frac{u^2}{2}"), "{}", stdout(&o));
}

#[test]
fn json_report_round_trips_and_is_reproducible() {
    let args = ["verify", "spec", "--spec", "cp1", "--format", "json", "--no-timestamp"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    let r: Report = serde_json::from_slice(&a.stdout).unwrap();
    assert!(r.timestamp.is_none());
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", stdout(&a));
    assert!(r.environment.contains_key("spec_sha256"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate", "h"]).status.code(), Some(2));
    assert_eq!(run(&["limit", "h"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "spec", "--spec", "missing.json"]).status.code(), Some(3));
    assert_eq!(run(&["verify", "virasoro", "--spec", "kdv", "--c0", "x"]).status.code(), Some(3));
    // the L_{-1} odd part closes only for c0 in {0, 1}
    let sym = run(&["verify", "virasoro", "--spec", "kdv", "--suite", "algebra", "--m", "-1", "1"]);
    assert_eq!(sym.status.code(), Some(1));
    assert!(stdout(&sym).contains("holds for c0 in {0, 1}"));
    let pinned = run(&["verify", "virasoro", "--spec", "kdv", "--suite", "algebra", "--m", "-1", "1", "--c0", "1"]);
    assert_eq!(pinned.status.code(), Some(0), "{}", stdout(&pinned));
}

#[test]
fn virasoro_tables_export_as_json() {
    let o = run(&["export", "virasoro", "--spec", "kdv", "--m", "0", "--P", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let t = supertau::virasoro::VirasoroCoefficients::from_json(&v[0]).unwrap();
    assert_eq!(t, supertau::virasoro::kdv_coefficients(0, 3));
}

#[test]
fn dispersionless_limit() {
    let o = run(&["limit", "kdv", "--pmax", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("h.json");
    let o = run(&["export", "h", "--spec", "onedim", "--pmax", "1", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 2);
}
