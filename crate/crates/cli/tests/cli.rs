use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_superdirective"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn se_sweep_writes_csv_metadata_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["se-sweep", "--trials", "3", "--seed", "9", "--out", out, "--plot"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("se.csv")).unwrap();
    assert!(csv.starts_with("sweep,label,metric,mean,stderr,trials\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 9);
    let meta = std::fs::read_to_string(dir.path().join("se.meta.json")).unwrap();
    assert!(meta.contains("\"seed\": 9"));
    assert!(meta.contains("\"trials\": 3"));
    let svg = std::fs::read_to_string(dir.path().join("se.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["estimate-sweep", "--trials", "5", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("estimation.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn config_file_and_preset_selection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        r#"{"name": "tiny_gain", "array": {"antennas": 4, "spacing": 0.25}, "users": 1,
            "sectors": [[0, 20]], "precoders": ["mrt", "sp"], "trials": 4,
            "gain_sweep": {"antenna_counts": [2, 4]}}"#,
    );
    let out = dir.path().to_str().unwrap();
    let o = run(&["gain-sweep", "--config", &cfg, "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("tiny_gain.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);

    let o = run(&["se-sweep", "--preset", "aperture", "--trials", "2", "--out", out]);
    assert!(o.status.success());
    assert!(dir.path().join("aperture.csv").exists());
}

#[test]
fn pattern_runs_without_trials() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["pattern", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("pattern.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 721);
}

#[test]
fn print_config_round_trips() {
    let o = run(&["wideband-sweep", "--print-config", "--seed", "5"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("\"seed\": 5"));
    assert!(text.contains("frequencies_hz"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"array": {"antennas": 4, "spacing": 0.25}, "users": 1, "bogus": true}"#,
    );
    let o = run(&["gain-sweep", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));

    let o = run(&["gain-sweep", "--config", "/nonexistent/x.json"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["se-sweep", "--preset", "nope"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["se-sweep", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["wideband-sweep", "--preset", "se"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "inf.json",
        r#"{"array": {"antennas": 4, "spacing": 0.25}, "users": 5, "precoders": ["insp"], "trials": 2}"#,
    );
    let o = run(&["se-sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn shipped_configs_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let o = run(&["se-sweep", "--config", path.to_str().unwrap(), "--print-config"]);
            assert!(o.status.success(), "{}", path.display());
            n += 1;
        }
    }
    assert!(n >= 8);
}
