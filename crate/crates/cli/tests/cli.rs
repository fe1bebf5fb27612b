use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn degenlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degenlab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) {
    fs::write(dir.join("run.toml"), text).unwrap();
}

const DRIFT: &str = r#"
[problem]
name = "linear_drift"
[params]
p = 3.0
lambda = 1.0
[grid]
cells = 12
[sweep]
eps = [1e-1, 1e-2, 1e-3]
"#;

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = degenlab(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_lists_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = degenlab(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("Exit status:") && text.contains("Newton"),
        "{text}"
    );
}

#[test]
fn comparison_sweep_on_linear_drift() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), DRIFT);
    let out = degenlab(
        dir.path(),
        &[
            "--config",
            "run.toml",
            "--out",
            "res",
            "sweep",
            "comparison",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut rdr = csv::Reader::from_path(dir.path().join("res/sweep_comparison.csv")).unwrap();
    let lhs_col = rdr
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == "comparison_lhs")
        .unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let lhs: f64 = rec.unwrap()[lhs_col].parse().unwrap();
        assert!(lhs <= 1e-10, "{lhs}");
        rows += 1;
    }
    assert_eq!(rows, 3);
    assert!(dir
        .path()
        .join("res/sweep_comparison.manifest.json")
        .exists());
}

#[test]
fn identical_config_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), DRIFT);
    let mut csvs = Vec::new();
    for out_dir in ["a", "b"] {
        let out = degenlab(
            dir.path(),
            &["--config", "run.toml", "--out", out_dir, "sweep", "energy"],
        );
        assert_eq!(out.status.code(), Some(0));
        csvs.push(fs::read(dir.path().join(out_dir).join("sweep_energy.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn outputs_stay_in_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), DRIFT);
    let out = degenlab(
        dir.path(),
        &["--config", "run.toml", "--out", "res", "sweep", "energy"],
    );
    assert_eq!(out.status.code(), Some(0));
    let mut top: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    top.sort();
    assert_eq!(top, ["res", "run.toml"]);
}

#[test]
fn config_failures_are_listed_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "[problem]\nname = \"cone\"\n[params]\np = 1.5\nlambda = 0.0\n[grid]\ncells = 8\n",
    );
    let out = degenlab(dir.path(), &["--config", "run.toml", "sweep", "energy"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let summary: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    let failures = summary["failures"].as_array().unwrap();
    let text: Vec<&str> = failures.iter().filter_map(|v| v.as_str()).collect();
    assert!(text.iter().any(|m| m.contains("p >= 2")), "{text:?}");
    assert!(text.iter().any(|m| m.contains("[sweep].eps")), "{text:?}");
}

#[test]
fn wrong_regime_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), DRIFT);
    let out = degenlab(
        dir.path(),
        &["--config", "run.toml", "sweep", "time-derivative"],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn small_campaign_passes() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "[campaign]\nsamples = 2000\n");
    let out = degenlab(
        dir.path(),
        &["--config", "run.toml", "--seed", "7", "check-inequalities"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("out/campaign.csv").exists());
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("out/campaign.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["campaign"]["seed"], 7);
    assert_eq!(manifest["passed"], true);
}

#[test]
fn solve_then_seminorm_then_report() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "[problem]\nname = \"mms_smooth\"\n[params]\np = 3.0\nlambda = 0.0\neps = 1e-2\n[grid]\ncells = 12\n",
    );
    let out = degenlab(dir.path(), &["--config", "run.toml", "solve"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "trajectory.bin",
        "trajectory.json",
        "solve_report.csv",
        "solve.manifest.json",
    ] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    fs::write(
        dir.path().join("norm.toml"),
        "[seminorm]\nkind = \"lp\"\ninput = \"out/trajectory.bin\"\nexponent = 3.0\nradius = 0.3\n",
    )
    .unwrap();
    let out = degenlab(dir.path(), &["--config", "norm.toml", "seminorm"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("out/seminorm.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("estimator,region,value"));
    let value: f64 = lines
        .next()
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(value > 0.0 && value.is_finite());

    let out = degenlab(dir.path(), &["report"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("solve.manifest.json") && text.contains("seminorm.manifest.json"),
        "{text}"
    );
}

#[test]
fn nonconvergence_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "[problem]\nname = \"mms_smooth\"\n[params]\np = 3.0\nlambda = 0.0\n[grid]\ncells = 12\n\
         [sweep]\neps = [1e-1]\n[newton]\nmax_iters = 1\nresidual_tol = 1e-14\n",
    );
    let out = degenlab(dir.path(), &["--config", "run.toml", "sweep", "energy"]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("out/sweep_energy.csv").exists());
}
