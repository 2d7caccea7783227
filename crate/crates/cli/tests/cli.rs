use std::process::{Command, Output};

fn cnsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnsplit")).args(args).output().expect("binary runs")
}

const SMALL: [&str; 4] = ["--n", "40", "--tau-list", "0.02,0.01,0.005"];

#[test]
fn passing_run_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = vec!["--preset", "fig6", "--out", out];
    args.extend(SMALL);
    let o = cnsplit(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    for name in ["fig6.csv", "fig6.verdicts.ndjson", "fig6.meta.json"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("PASS order StrangCN L2"), "{stderr}");
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let mut args = vec!["--preset", "fig2b", "--methods", "StrangCN2", "--norms", "L2,Einf_0"];
    args.extend(SMALL);
    let o = cnsplit(&args);
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "experiment,method,norm,tau,error");
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(lines[1..].iter().all(|l| l.starts_with("fig2b,StrangCN2,")));
}

#[test]
fn failing_predicate_exits_with_one() {
    let o = cnsplit(&["--preset", "fig5", "--methods", "StrangEXP", "--tau-list", "0.02"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL StrangEXP error at smallest tau"));
}

#[test]
fn numerical_failure_exits_with_two() {
    let o = cnsplit(&["--preset", "fig1a", "--n", "20", "--tau-list", "0.03"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn bad_arguments_exit_with_two() {
    for args in [
        vec!["--preset", "fig4"],
        vec!["--preset", "fig1a", "--norms", "Linf"],
        vec!["--preset", "fig1a", "--tau-list", "abc"],
        vec![],
    ] {
        assert_eq!(cnsplit(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unknown_method_exits_with_two() {
    let o = cnsplit(&["--preset", "fig1a", "--methods", "StrangFoo", "--n", "20"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bounds_preset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = cnsplit(&["--preset", "bounds", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let verdicts = std::fs::read_to_string(dir.path().join("bounds.verdicts.ndjson")).unwrap();
    assert!(verdicts.lines().count() > 10);
    assert!(verdicts.lines().all(|l| l.contains("\"pass\":true")));
}
