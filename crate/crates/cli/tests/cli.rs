use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defect-spectra"))
        .args(args)
        .env_remove("DEFECT_SPECTRA_THREADS")
        .output()
        .unwrap()
}

fn stderr_line(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).trim().to_string()
}

#[test]
fn solve_pseudoharmonic_reports_both_branches() {
    let c = config("pseudoharmonic.toml");
    let o = run(&["solve", "--config", c.to_str().unwrap(), "--solver", "closed"]);
    assert!(o.status.success(), "{}", stderr_line(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let printed = &v["result"]["closed_form"]["value"]["printed"];
    // Evaluated independently at 30 digits.
    let expect = [("e_plus", 17.841_095_386_484_113), ("e_minus", -4.222_056_689_752_435)];
    for (key, e) in expect {
        let got = printed[key][0].as_f64().unwrap();
        assert!((got - e).abs() <= 1e-12 * e.abs(), "{key}: {got}");
        assert_eq!(printed[key][1].as_f64().unwrap(), 0.0);
    }
    assert_eq!(v["config"]["potential"]["family"], "pseudoharmonic");
    assert_eq!(v["result"]["series"]["status"], "skipped");
}

#[test]
fn empty_sweep_is_an_input_error() {
    let c = config("empty-sweep.toml");
    let o = run(&["sweep", "--config", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let line = stderr_line(&o);
    assert!(line.starts_with("defect-spectra: error[input]: "), "{line}");
    assert_eq!(line.lines().count(), 1);
}

#[test]
fn periodicity_passes_on_default_anharmonic_config() {
    let c = config("anharmonic.toml");
    let o = run(&["periodicity", "--config", c.to_str().unwrap(), "--nu-max", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr_line(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    // Header plus 7 rows for each of the three solvers.
    assert_eq!(table.lines().count(), 1 + 3 * 7);
    assert!(table.lines().skip(1).all(|l| l.ends_with("PASS")));
}

#[test]
fn unknown_flag_and_missing_config_exit_one() {
    let c = config("anharmonic.toml");
    for args in [
        vec!["solve", "--config", c.to_str().unwrap(), "--no-such-flag"],
        vec!["solve"],
        vec!["solve", "--config", "/nonexistent/job.toml"],
        vec!["solve", "--config", c.to_str().unwrap(), "--grid-n", "5"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr_line(&o).starts_with("defect-spectra: error[input]: "), "{args:?}");
    }
}

#[test]
fn missing_series_root_is_a_solver_failure() {
    // l = 1 with this flux puts the degree-1 roots off the real axis.
    let c = config("anharmonic.toml");
    let o = run(&["wavefunction", "--config", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr_line(&o).starts_with("defect-spectra: error[solver]: "));
}

#[test]
fn wavefunction_csv_has_header_and_both_sides() {
    let c = config("quasi-exact.toml");
    let o = run(&["wavefunction", "--config", c.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr_line(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("side,r,psi,density,normalized"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 201);
    assert!(rows[0].starts_with("inner,0.0,"));
    assert!(rows.last().unwrap().starts_with("outer,10.0,"));
}

#[test]
fn oracle_document_has_convergence_and_cross_check() {
    let c = config("quasi-exact.toml");
    let o = run(&["oracle", "--config", c.to_str().unwrap(), "--grid-n", "400"]);
    assert!(o.status.success(), "{}", stderr_line(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let sides = v["result"]["sides"].as_array().unwrap();
    assert_eq!(sides.len(), 2);
    for s in sides {
        assert!(s["max_relative_gap"].as_f64().unwrap() < 1e-6);
        assert!(s["finite_difference"]["value"]["error_estimates"].is_array());
    }
    assert_eq!(v["config"]["solver"]["grid_n"], 400);
}

#[test]
fn json_config_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("job.json");
    std::fs::write(
        &job,
        r#"{"potential": {"family": "inverse-square", "gamma": 1.0}, "geometry": {"beta": 0.5}, "particle": {"l": 2}}"#,
    )
    .unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["compare", "--config", job.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr_line(&o));
    let summary = String::from_utf8(o.stdout).unwrap();
    assert!(summary.contains("verdict: non-physical"), "{summary}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["result"]["verdict"], "non-physical");
}

#[test]
fn bad_thread_count_is_rejected() {
    let c = config("sweep-beta.toml");
    let o = Command::new(env!("CARGO_BIN_EXE_defect-spectra"))
        .args(["sweep", "--config", c.to_str().unwrap()])
        .env("DEFECT_SPECTRA_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_csv_has_one_row_per_point() {
    let c = config("sweep-beta.toml");
    let o = run(&["sweep", "--config", c.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr_line(&o));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(r.records().count(), 9 * 3);
}
