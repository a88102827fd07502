use std::fs;
use std::process::Command;

use pivp_cli::{run, EXIT_INPUT, EXIT_NO_RESULT, EXIT_SUCCESS};
use pivp_core::io::read_trace;

const SPIKING: &str = r#"{
  "name": "spiking",
  "dim": 2,
  "t0": "0",
  "y0": ["0", "1"],
  "polys": [
    [{"coeff": "4", "exponents": [0, 1]}, {"coeff": "-1", "exponents": [1, 0]}],
    [{"coeff": "-1", "exponents": [0, 1]}]
  ]
}"#;

const TAN: &str = r#"{
  "name": "blowup",
  "dim": 1,
  "t0": "0",
  "y0": ["0"],
  "polys": [[{"coeff": "1", "exponents": [0]}, {"coeff": "1", "exponents": [2]}]]
}"#;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pivp").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_prints_values_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_temp(&dir, "problem.json", SPIKING);
    let (code, out, err) = invoke(&["solve", &file, "--time", "2", "--eps", "2^-10"]);
    assert_eq!(code, EXIT_SUCCESS, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5, "{out}");
    assert!(lines[0].starts_with("y[0] = ") && lines[0].contains('/'));
    // 8e^{-2} = 1.0826822658929...
    assert!(lines[1].trim_start().starts_with("~ 1.08268226"), "{}", lines[1]);
    let digits: String = lines[1].chars().filter(char::is_ascii_digit).collect();
    assert_eq!(digits.len(), 30);
    assert!(lines[4].starts_with("steps: ") && lines[4].contains("final hint: "));
}

#[test]
fn quiet_suppresses_summary() {
    let (code, out, _) = invoke(&["solve", "--builtin", "exp", "--time", "1", "--quiet"]);
    assert_eq!(code, EXIT_SUCCESS);
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn accuracy_forms_give_identical_results() {
    let (_, a, _) = invoke(&["solve", "--builtin", "decay", "--time", "3", "--eps", "2^-12"]);
    let (_, b, _) = invoke(&["solve", "--builtin", "decay", "--time", "3", "--eps", "1/4096"]);
    assert_eq!(a, b);
}

#[test]
fn trace_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_temp(&dir, "problem.json", SPIKING);
    let trace = dir.path().join("out.csv");
    let (code, out, _) = invoke(&[
        "solve",
        &file,
        "--time",
        "2",
        "--eps",
        "2^-10",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_SUCCESS);
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("i,t_start,delta_t,beta,omega,y_norm_after\n"));
    let (rows, summary) = read_trace(&text).unwrap();
    let summary = summary.unwrap();
    assert_eq!(rows.len(), summary.steps);
    assert!(out.contains(&format!("steps: {}, final hint: {}", summary.steps, summary.final_hint)));
}

#[test]
fn blow_up_exhausts_hints() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_temp(&dir, "blowup.json", TAN);
    let (code, out, err) = invoke(&["solve", &file, "--time", "2", "--max-hint", "64"]);
    assert_eq!(code, EXIT_NO_RESULT);
    assert!(out.is_empty());
    assert!(err.contains("last hint tried: 64"), "{err}");
}

#[test]
fn fixed_hint_abort_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("abort.csv");
    let (code, _, err) = invoke(&[
        "solve",
        "--builtin",
        "exp",
        "--time",
        "5",
        "--hint",
        "1",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_NO_RESULT);
    assert!(err.contains("hint 1"), "{err}");
    assert!(read_trace(&fs::read_to_string(&trace).unwrap()).is_ok());
}

#[test]
fn input_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.json", &SPIKING.replace(r#"["0", "1"]"#, r#"["0"]"#));
    let cases: Vec<Vec<&str>> = vec![
        vec!["solve", &bad, "--time", "2"],
        vec!["solve", "--builtin", "exp", "--time", "x"],
        vec!["solve", "--builtin", "exp", "--time", "1", "--eps", "2^-q"],
        vec!["solve", "--builtin", "exp", "--time", "1", "--eps", "0"],
        vec!["solve", "--builtin", "cosh", "--time", "1"],
        vec!["solve", "--builtin", "exp"],
        vec!["solve", "/nonexistent/problem.json", "--time", "1"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let (code, out, err) = invoke(&args);
        assert_eq!(code, EXIT_INPUT, "{args:?}: {out}{err}");
        assert!(!err.is_empty());
    }
    let (code, _, err) = invoke(&["solve", &bad, "--time", "2"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("y0"), "{err}");
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = invoke(&["solve", "--help"]);
    assert_eq!(code, EXIT_SUCCESS);
    assert!(out.contains("--max-hint"));
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_pivp");
    let ok = Command::new(bin)
        .args(["solve", "--builtin", "exp", "--time", "1/2"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_SUCCESS));
    let bad = Command::new(bin).args(["solve", "--time", "1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INPUT));
}
