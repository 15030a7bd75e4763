use std::fs;
use std::path::Path;

use multiholo::cli::{run, EXIT_CHECK_FAILED, EXIT_DATA, EXIT_MAX_ITERS, EXIT_OK, EXIT_USAGE};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("multiholo").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn sample(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).display().to_string();
    let mut args = vec!["sample-map", "n=6"];
    args.extend_from_slice(extra);
    let out = format!("out={path}");
    args.push(&out);
    let (code, _, err) = invoke(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    path
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in\n{report}"))
}

#[test]
fn verify_triad_passes_for_every_family() {
    for f in ["hermitian", "conformal", "associative", "cayley"] {
        let (code, out, err) = invoke(&["verify-triad", &format!("family={f}"), "samples=200"]);
        assert_eq!(code, EXIT_OK, "{f}: {err}{out}");
        assert_eq!(value(&out, "pass"), "true");
    }
}

#[test]
fn unknown_family_and_key_are_usage_errors() {
    let (code, _, err) = invoke(&["verify-triad", "family=banana"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("banana"));
    let (code, _, err) = invoke(&["verify-triad", "family=associative", "--set", "colour=blue"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("colour"));
    let (code, _, _) = invoke(&["check-map", "input=/nonexistent/map.gmap"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn truncated_map_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = sample(dir.path(), "m.gmap", &[]);
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() / 2]).unwrap();
    let (code, _, err) = invoke(&["check-map", &format!("input={path}")]);
    assert_eq!(code, EXIT_DATA, "{err}");
}

#[test]
fn report_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let inc = sample(dir.path(), "inc.gmap", &["kind=inclusion"]);
    let (code, out, _) = invoke(&["report", &format!("input={inc}")]);
    assert_eq!(code, EXIT_OK, "{out}");
    let wavy = sample(dir.path(), "wavy.gmap", &["kind=perturbed"]);
    let (code, out, _) = invoke(&["report", &format!("input={wavy}")]);
    assert_eq!(code, EXIT_CHECK_FAILED, "{out}");
    let gap: f64 = value(&out, "gap").parse().unwrap();
    assert!(gap > 0.0);
}

#[test]
fn flow_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let wavy = sample(dir.path(), "wavy.gmap", &["kind=perturbed"]);
    let out = dir.path().join("flowed.gmap").display().to_string();
    let (code, stdout, err) = invoke(&["flow", &format!("input={wavy}"), "--out", &out, "--set", "grad_tol=0", "--set", "max_iters=5"]);
    assert_eq!(code, EXIT_MAX_ITERS, "{err}");
    assert_eq!(value(&stdout, "termination"), "maxiters");
    assert_eq!(value(&stdout, "iterations"), "5");
    let history = fs::read_to_string(format!("{out}.history.csv")).unwrap();
    assert_eq!(history.lines().count(), 1 + 6);

    let (code, stdout, err) = invoke(&["flow", &format!("input={wavy}"), "--out", &out]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(value(&stdout, "termination"), "converged");
    let (code, report, _) = invoke(&["report", &format!("input={out}"), "tol=1e-6"]);
    assert_eq!(code, EXIT_OK, "{report}");
}

#[test]
fn precedence_of_settings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# comment\nfamily = cayley\nsamples = 50\nseed = 1\n").unwrap();
    let cfg = cfg.display().to_string();
    let (_, out, _) = invoke(&["verify-triad", "--config", &cfg]);
    assert_eq!(value(&out, "seed"), "1");
    assert_eq!(value(&out, "dim"), "8");
    let (_, out, _) = invoke(&["verify-triad", "--config", &cfg, "seed=2"]);
    assert_eq!(value(&out, "seed"), "2");
    let (_, out, _) = invoke(&["verify-triad", "--config", &cfg, "seed=2", "--set", "seed=3"]);
    assert_eq!(value(&out, "seed"), "3");
    let (_, out, _) = invoke(&["verify-triad", "--config", &cfg, "seed=2", "--set", "seed=3", "--seed", "4"]);
    assert_eq!(value(&out, "seed"), "4");
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = invoke(&["verify-triad", "family=associative", "samples=300", "--seed", "9"]);
    let b = invoke(&["verify-triad", "family=associative", "samples=300", "--seed", "9"]);
    assert_eq!(a, b);
    let wavy = sample(dir.path(), "wavy.gmap", &["kind=perturbed"]);
    let run_flow = |name: &str| {
        let out = dir.path().join(name).display().to_string();
        let (code, _, _) = invoke(&["flow", &format!("input={wavy}"), "--out", &out]);
        assert_eq!(code, EXIT_OK);
        (fs::read(&out).unwrap(), fs::read(format!("{out}.history.csv")).unwrap())
    };
    assert_eq!(run_flow("x.gmap"), run_flow("y.gmap"));
}
