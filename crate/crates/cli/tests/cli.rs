use std::path::Path;
use std::process::Command;

fn fracton(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fracton"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn evolve(out: &Path, workers: &str) {
    let o = fracton(&[
        "evolve",
        "-L",
        "15",
        "--sites",
        "5,11",
        "--steps",
        "200",
        "--realizations",
        "40",
        "--record-every",
        "50",
        "--average-from",
        "100",
        "--seed",
        "3",
        "--workers",
        workers,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    evolve(&dir.path().join("one"), "1");
    evolve(&dir.path().join("four"), "4");
    for file in [
        "meta.json",
        "profile_t200.csv",
        "profile_avg.csv",
        "metrics.csv",
    ] {
        let a = std::fs::read(dir.path().join("one").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("four").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["evolve", "-L", "5", "--sites", "9", "--out", out],
        vec!["maxent", "-L", "6", "--q", "6", "--p", "21", "--out", out],
        vec!["krylov", "-L", "6", "--sites", "2", "--width", "9"],
        vec!["reproduce"],
        vec!["no-such-command"],
    ] {
        let o = fracton(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn small_commands_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = fracton(&["enumerate", "-L", "8", "--q", "1", "--p", "4", "--out", out]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["sector_size"].as_u64().unwrap() > 0);
    assert!(dir.path().join("enumeration.csv").exists());

    let o = fracton(&["maxent", "-L", "14", "--q", "2", "--p", "7", "--out", out]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["linearized"]["lambda_q"], "111/182");

    let o = fracton(&["blocks", "-L", "6", "--mode", "graph"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["mismatches"].as_array().unwrap().is_empty()));

    let o = fracton(&["analytic", "-L", "80", "--sites", "20,60", "--out", out]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["moments"]["charge"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn reproduce_runs_a_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("krylov.toml");
    std::fs::write(
        &spec,
        "kind = \"krylov_report\"\nseed = 2\nlengths = [8]\nad_length = 8\nad_steps = 200\nad_average_from = 50\nad_realizations = 4\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = fracton(&[
        "reproduce",
        spec.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(out.join("krylov_report/summary.json")).unwrap();
    assert!(summary.contains("run_vs_component"));
    assert!(out.join("krylov_report/meta.json").exists());
}
