use std::path::Path;
use std::process::{Command, Output};

fn onsort(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onsort"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Report lines minus the wall-clock field, for determinism comparisons.
fn strip_ms(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| {
            l.split_whitespace()
                .filter(|tok| !tok.starts_with("ms="))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

#[test]
fn run_prints_one_line_per_match() {
    let out = onsort(&[
        "run",
        "--algo",
        "sort1d-fixed",
        "--adversary",
        "iid-uniform",
        "--n",
        "16,32",
        "--trials",
        "2",
        "--seed",
        "1",
    ]);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for line in &lines {
        assert!(line.contains("cost="), "line: {line}");
        assert!(line.contains("ratio="), "line: {line}");
    }
}

#[test]
fn identical_invocations_agree_up_to_timing() {
    let args = [
        "run",
        "--algo",
        "sort1d",
        "--adversary",
        "sort1d-dist",
        "--n",
        "64",
        "--trials",
        "3",
        "--seed",
        "9",
    ];
    let a = stdout_of(&onsort(&args));
    let b = stdout_of(&onsort(&args));
    assert_eq!(strip_ms(&a), strip_ms(&b));
}

#[test]
fn out_flag_appends_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let out = onsort(&[
        "run",
        "--algo",
        "uniform",
        "--adversary",
        "iid-labels",
        "--n",
        "32",
        "--trials",
        "2",
        "--out",
        csv.to_str().unwrap(),
    ]);
    stdout_of(&out);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("n,trial,seed,cost,opt"));
}

#[test]
fn scale_reports_a_power_law_fit() {
    let out = onsort(&[
        "scale",
        "--algo",
        "sort1d-fixed",
        "--adversary",
        "iid-uniform",
        "--n",
        "16,64,256,1024",
        "--trials",
        "3",
    ]);
    let text = stdout_of(&out);
    assert!(text.contains("median n=16 "));
    assert!(text.contains("slope="), "output: {text}");
    assert!(text.contains("r2="));
}

#[test]
fn config_file_drives_a_run_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg,
        "algo = uniform\nadversary = uniform-epochs\nn = 64\nk-types = 4\ngamma = 1.5\nseed = 3\n",
    )
    .unwrap();
    let out = onsort(&["run", "--config", cfg.to_str().unwrap()]);
    let text = stdout_of(&out);
    assert_eq!(text.lines().count(), 1);

    // --trials overrides the config's default of one trial
    let out = onsort(&["run", "--config", cfg.to_str().unwrap(), "--trials", "2"]);
    assert_eq!(stdout_of(&out).lines().count(), 2);
}

#[test]
fn oracle_scores_a_real_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("values.trace");
    std::fs::write(&trace, "kind=real n=3\n0.5\n0.25\n1\n").unwrap();
    let out = onsort(&["oracle", trace.to_str().unwrap()]);
    let text = stdout_of(&out);
    assert!(text.contains("opt=0.75"), "output: {text}");
    assert!(text.contains("method=formula"));
}

#[test]
fn oracle_scores_point_traces_exactly_when_small() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("points.trace");
    // unit-square corners: the best open path walks three sides
    std::fs::write(
        &trace,
        "kind=point:2 n=4\n0,0\n1,1\n0,1\n1,0\n",
    )
    .unwrap();
    let out = onsort(&["oracle", trace.to_str().unwrap()]);
    let text = stdout_of(&out);
    assert!(text.contains("opt=3"), "output: {text}");
    assert!(text.contains("method=exact"));
}

#[test]
fn coin_game_reports_max_splits() {
    let out = onsort(&["coin-game", "--n", "8", "--k", "2"]);
    let text = stdout_of(&out);
    assert!(text.contains("max_splits=3"), "output: {text}");
}

#[test]
fn bad_ids_fail_with_a_diagnostic() {
    let out = onsort(&[
        "run",
        "--algo",
        "nope",
        "--adversary",
        "iid-uniform",
        "--n",
        "16",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown algorithm"), "stderr: {err}");
}

#[test]
fn oracle_rejects_missing_files() {
    let out = onsort(&["oracle", Path::new("/definitely/not/here").to_str().unwrap()]);
    assert!(!out.status.success());
}
