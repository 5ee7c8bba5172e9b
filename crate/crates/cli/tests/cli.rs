//! End-to-end tests of the `simmax` binary: exit codes, file outputs, and
//! determinism of the published artifacts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simmax"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).expect("write config");
    path
}

fn smoke_config(dir: &Path) -> PathBuf {
    write_config(
        dir,
        r#"
seed = 3

[env]
name = "asym22(1)"

[net]
trunk_widths = [16, 16]
head_hidden = [16]
value_bins = 11

[search]
n_sim = 16

[train]
n_iter = 2
n_ep = 4
grad_steps = 8
batch_size = 16
buffer_capacity = 256

[eval]
iters_list = [4, 8]
seeds = 2
"#,
    )
}

fn run_ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn train_smoke_writes_checkpoints_metrics_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());
    let out_dir = dir.path().join("run");
    let out = bin()
        .args(["train", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    run_ok(out);

    assert!(out_dir.join("config_resolved.toml").exists());
    assert!(out_dir.join("checkpoint_0001.saz").exists());
    assert!(out_dir.join("checkpoint_0002.saz").exists());
    let metrics = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = metrics.trim().lines().collect();
    assert_eq!(lines.len(), 3, "header plus one row per iteration");
    assert!(lines[0].starts_with("iteration,wall_seconds,"));
}

#[test]
fn invalid_gamma_exits_one_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[env]\nname = \"rps(1)\"\ngamma = 1.5\n");
    let out = bin()
        .args(["train", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("gamma"), "stderr: {stderr}");
}

#[test]
fn unwritable_output_location_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());
    // A regular file where the output directory should go.
    let blocker = dir.path().join("blocked");
    std::fs::write(&blocker, b"file").unwrap();
    let out = bin()
        .args(["train", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&blocker)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_prints_known_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());

    let out = bin()
        .args(["solve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("mp"))
        .args(["--set", "env.name=\"matching_pennies(1)\""])
        .output()
        .unwrap();
    let stdout = run_ok(out);
    assert!(stdout.contains("value 0.000000"), "stdout: {stdout}");

    let out = bin()
        .args(["solve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("asym"))
        .output()
        .unwrap();
    let stdout = run_ok(out);
    assert!(stdout.contains("value 0.200000"), "stdout: {stdout}");
    let table: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("asym/value_table.json")).unwrap())
            .unwrap();
    assert!((table["root_value"].as_f64().unwrap() - 0.2).abs() < 1e-8);
}

#[test]
fn solve_on_continuous_env_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());
    let out = bin()
        .args(["solve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("d"))
        .args(["--set", "env.name=\"dubin\"", "--set", "env.gamma=0.99"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tabular required"));
}

#[test]
fn eval_round_trip_reproduces_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());
    let train_dir = dir.path().join("train");
    run_ok(
        bin()
            .args(["train", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&train_dir)
            .output()
            .unwrap(),
    );
    let checkpoint = train_dir.join("checkpoint_0002.saz");

    let eval = |out_name: &str| -> (String, String) {
        let out_dir = dir.path().join(out_name);
        run_ok(
            bin()
                .args(["eval", "--config"])
                .arg(&config)
                .arg("--out")
                .arg(&out_dir)
                .arg("--checkpoint")
                .arg(&checkpoint)
                .output()
                .unwrap(),
        );
        (
            std::fs::read_to_string(out_dir.join("eval_rows.csv")).unwrap(),
            out_dir.display().to_string(),
        )
    };
    let (csv_a, _) = eval("eval-a");
    let (csv_b, _) = eval("eval-b");
    assert_eq!(csv_a, csv_b, "same checkpoint and seed must reproduce the report");

    // iters_list x seeds rows plus the header.
    assert_eq!(csv_a.trim().lines().count(), 1 + 2 * 2);
}

#[test]
fn corrupted_checkpoint_magic_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());
    let train_dir = dir.path().join("train");
    run_ok(
        bin()
            .args(["train", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&train_dir)
            .output()
            .unwrap(),
    );
    let checkpoint = train_dir.join("checkpoint_0001.saz");
    let mut bytes = std::fs::read(&checkpoint).unwrap();
    bytes[0] = b'Z';
    std::fs::write(&checkpoint, &bytes).unwrap();

    let out = bin()
        .args(["eval", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("eval"))
        .arg("--checkpoint")
        .arg(&checkpoint)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));
}

#[test]
fn bench_reports_throughput_and_deterministic_node_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());
    let bench = |out_name: &str| -> serde_json::Value {
        let out_dir = dir.path().join(out_name);
        run_ok(
            bin()
                .args(["bench", "--config"])
                .arg(&config)
                .arg("--out")
                .arg(&out_dir)
                .args(["--set", "bench.duration_ms=50"])
                .output()
                .unwrap(),
        );
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("bench.json")).unwrap()).unwrap()
    };
    let a = bench("bench-a");
    let b = bench("bench-b");
    assert!(a["sims_per_sec"].as_f64().unwrap() > 0.0);
    assert!(a["rm_solves_per_sec"].as_f64().unwrap() > 0.0);
    assert_eq!(a["node_count"], b["node_count"]);
}

#[test]
fn zero_simulations_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());
    let out = bin()
        .args(["bench", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("b"))
        .args(["--set", "search.n_sim=0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_sim"));
}

#[test]
fn continuous_eval_with_sampled_best_response_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
seed = 1

[env]
name = "dubin"
gamma = 0.99

[env.dubin]
horizon = 3

[net]
trunk_widths = [8]
head_hidden = []
value_bins = 11

[search]
n_sim = 8

[train]
n_iter = 1
n_ep = 2
grad_steps = 4
batch_size = 8
buffer_capacity = 64

[eval]
mode = "raw"
iters_list = [4]
seeds = 1
br = "sampled"
br_episodes = 4
br_search_sims = 8
"#,
    );
    let train_dir = dir.path().join("train");
    run_ok(
        bin()
            .args(["train", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&train_dir)
            .output()
            .unwrap(),
    );
    let out_dir = dir.path().join("eval");
    run_ok(
        bin()
            .args(["eval", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_dir)
            .arg("--checkpoint")
            .arg(train_dir.join("checkpoint_0001.saz"))
            .output()
            .unwrap(),
    );
    let csv = std::fs::read_to_string(out_dir.join("eval_rows.csv")).unwrap();
    assert!(csv.contains(",sampled"), "csv: {csv}");
}
