use std::process::{Command, Output};

use serde_json::Value;

fn fibpow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibpow")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn solve_lists_solutions() {
    for (y, want) in [("3", "(3,2,1), (6,2,2)"), ("7", "(5,3,1)"), ("11", "(6,4,1)"), ("10", "(6,3,1), (16,7,3)")] {
        let o = fibpow(&["solve", y]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o), want, "y = {y}");
    }
}

#[test]
fn zeckendorf_of_thousand() {
    let o = fibpow(&["zeckendorf", "1000"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "F16 + F7");
}

#[test]
fn reduce_cf_reports_max_quotient() {
    let o = fibpow(&["reduce", "cf", "--mu", "log(sqrt(5))/log(alpha)", "--count", "216"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("max partial quotient up to 216: 330"), "{}", stdout(&o));
}

#[test]
fn bounds_prints_both() {
    let o = fibpow(&["bounds", "2"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.starts_with("n < ") && s.contains("n - m < "), "{s}");
}

#[test]
fn reduce_lll_reads_stdin() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_fibpow"))
        .args(["reduce", "lll", "--target", "0,0"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"1 0\n0 1\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("distance >= "), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec!["solve", "1"],
        vec!["zeckendorf", "0"],
        vec!["no-such-command"],
        vec!["prove", "--n1-max", "2"],
        vec!["prove", "--precision-bits", "64"],
        vec!["--jobs", "0", "zeckendorf", "5"],
        vec!["reduce", "cf", "--mu", "foo"],
        vec!["reduce", "cf", "--mu", "log(0)"],
    ] {
        assert_eq!(code(&fibpow(&args)), 64, "{args:?}");
    }
}

#[test]
fn unseparated_bakdav_is_numeric_failure() {
    let mu = "log(alpha)/log(3)";
    let o = fibpow(&["reduce", "bakdav", "--mu", mu, "--tau", mu, "--n-bound", "1000", "--c1", "2", "--c2", "log(3)"]);
    assert_eq!(code(&o), 2);
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            for k in ["elapsed", "wall_time", "resumed"] {
                m.remove(k);
            }
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn prove_small_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cert.json");
    let out_s = out.to_str().unwrap();
    let o = fibpow(&["prove", "--n1-max", "16", "--skip-cascade", "--out", out_s]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut first: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(first["schema_version"], "fibpow-cert/1");
    assert_eq!(first["totals"]["instances"], 105);
    let ys: Vec<&String> = first["multi_solution_y"].as_object().unwrap().keys().collect();
    assert_eq!(ys, ["10", "2", "3", "4", "6"]);

    // drop the last records as if the run had been interrupted
    let partial = out.with_extension("partial.jsonl");
    let text = std::fs::read_to_string(&partial).unwrap();
    let kept: Vec<&str> = text.lines().take(60).collect();
    std::fs::write(&partial, kept.join("\n") + "\n{\"n1\": 9, \"m1").unwrap();
    let o = fibpow(&["prove", "--n1-max", "16", "--skip-cascade", "--resume", "--out", out_s]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut second: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(second["totals"]["resumed"], 60);
    strip_timing(&mut first);
    strip_timing(&mut second);
    assert_eq!(first, second);

    let csv = dir.path().join("cert.csv");
    let o = fibpow(&["prove", "--n1-max", "8", "--skip-cascade", "--format", "csv", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("y,n,m,a,source_pair\n"));
    assert!(body.contains("2,4,2,2,\"(4,2)\""), "{body}");
}
