use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
name = "small"
seed = 3

[environment]
kind = "checkerboard"
rows = 4
cols = 4
gap_fraction = 0.1
cell_pixels = 8
feature_spacing = 0.0625

[roadmap]
beta = 0.5
rho = 0.3

[svgd]
step_size = 0.02
max_iters = 20
bandwidth = 0.005

[bench]
samplers = [{ prior = "uniform" }, { prior = "uniform", svgd = true }]
n = [10, 20]
seeds = [0, 1, 2]

[run]
n = 20
"#;

fn svprm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svprm")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("small.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run_in(dir: &Path, config: &Path, sub: &str, out: &str) -> Output {
    let out_dir = dir.join(out);
    let output = svprm(&[sub, "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--jobs", "2"]);
    assert!(output.status.success(), "{sub}: {}", String::from_utf8_lossy(&output.stderr));
    output
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn missing_config_fails_with_its_path() {
    let out = svprm(&["bench", "--config", "/nonexistent/dir/nothing.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/dir/nothing.toml"));
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[roadmap]\nbeta = 2.0\nrho = 0.1\n");
    let out = svprm(&["build", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    run_in(dir.path(), &cfg, "run", "out");
    for name in ["report.csv", "report.json", "roadmap.json", "scene.svg", "trace.csv", "plan.json", "curves.svg"] {
        assert!(dir.path().join("out").join(name).is_file(), "{name} missing");
    }
    let csv = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    // samplers x sizes x seeds
    assert_eq!(data_rows(&csv).len(), 2 * 2 * 3);
    let trace = std::fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert_eq!(data_rows(&trace).len(), 20);
    let svg = std::fs::read_to_string(dir.path().join("out/scene.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn bench_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let c = cfg.to_str().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(svprm(&["bench", "--config", c, "--out", a.to_str().unwrap(), "--jobs", "1"]).status.success());
    assert!(svprm(&["bench", "--config", c, "--out", b.to_str().unwrap(), "--jobs", "3"]).status.success());
    assert_eq!(std::fs::read(a.join("report.csv")).unwrap(), std::fs::read(b.join("report.csv")).unwrap());
}

#[test]
fn seed_flag_changes_the_trials() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let c = cfg.to_str().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(svprm(&["bench", "--config", c, "--out", a.to_str().unwrap()]).status.success());
    assert!(svprm(&["bench", "--config", c, "--out", b.to_str().unwrap(), "--seed", "4"]).status.success());
    let ra = std::fs::read_to_string(a.join("report.csv")).unwrap();
    let rb = std::fs::read_to_string(b.join("report.csv")).unwrap();
    assert_ne!(data_rows(&ra), data_rows(&rb));
}

#[test]
fn no_seeds_gives_an_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("seeds = [0, 1, 2]", "seeds = []"));
    run_in(dir.path(), &cfg, "bench", "out");
    let csv = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert!(data_rows(&csv).is_empty());
}

#[test]
fn stage_commands_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let expected: [(&str, &[&str]); 6] = [
        ("gen", &["map.pgm", "scene.svg"]),
        ("fit", &["model.json", "scene.svg"]),
        ("infer", &["trace.csv", "particles.json", "scene.svg"]),
        ("build", &["roadmap.json", "scene.svg"]),
        ("plan", &["roadmap.json", "plan.json", "scene.svg"]),
        ("eval", &["report.csv", "report.json"]),
    ];
    for (sub, files) in expected {
        run_in(dir.path(), &cfg, sub, sub);
        for f in files {
            assert!(dir.path().join(sub).join(f).is_file(), "{sub} did not write {f}");
        }
    }
    let saved = dir.path().join("build/roadmap.json");
    let out = svprm(&[
        "render",
        "--roadmap",
        saved.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("render").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("render/scene.svg").is_file());
    let plan: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("plan/plan.json")).unwrap()).unwrap();
    assert_eq!(plan["config"]["name"], "small");
}
