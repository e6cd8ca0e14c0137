//! End-to-end tests driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

use solarsynth::fixture;
use solarsynth::markov::{CountMatrix, TransitionMatrix};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_solarsynth"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn fixture_csv(dir: &Path) -> String {
    let path = dir.join("month.csv");
    std::fs::write(&path, fixture::generate_month(fixture::DEFAULT_SEED, 10).csv).unwrap();
    path.display().to_string()
}

#[test]
fn fit_writes_one_matrix_per_segment() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture_csv(dir.path());

    let summer = dir.path().join("summer");
    run_ok(&["fit", "--out", summer.to_str().unwrap(), &data]);
    assert!(summer.join("manifest.txt").exists());
    for k in 1..=5 {
        assert!(summer.join(format!("p_seg{k}.txt")).exists(), "p_seg{k}");
        assert!(summer.join(format!("n_seg{k}.txt")).exists(), "n_seg{k}");
    }
    assert!(!summer.join("p_seg6.txt").exists());

    let winter = dir.path().join("winter");
    run_ok(&[
        "fit",
        "--preset",
        "winter-paper",
        "--out",
        winter.to_str().unwrap(),
        &data,
    ]);
    for k in 1..=4 {
        assert!(winter.join(format!("p_seg{k}.txt")).exists(), "p_seg{k}");
    }
    assert!(!winter.join("p_seg5.txt").exists());
}

#[test]
fn emit_matrices_prints_each_segment() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture_csv(dir.path());
    let out = dir.path().join("model");
    let result = run_ok(&[
        "fit",
        "--emit-matrices",
        "--out",
        out.to_str().unwrap(),
        &data,
    ]);
    let stdout = String::from_utf8_lossy(&result.stdout);
    for k in 1..=5 {
        assert!(stdout.contains(&format!("# segment {k}")), "missing segment {k}");
    }
}

#[test]
fn missing_data_file_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("model");
    let result = bin()
        .args(["fit", "--out", out.to_str().unwrap(), "/no/such/file.csv"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
    assert!(!out.join("manifest.txt").exists());
    assert!(!out.join("p_seg1.txt").exists());
}

#[test]
fn evaluate_length_mismatch_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture_csv(dir.path());
    let synth = dir.path().join("short.csv");
    std::fs::write(
        &synth,
        "time_of_day,state_code,state_name\n04:30,1,L\n04:35,1,L\n04:40,2,M\n",
    )
    .unwrap();
    let result = bin()
        .args([
            "evaluate",
            "--out",
            dir.path().join("eval").to_str().unwrap(),
            "--synth",
            synth.to_str().unwrap(),
            &data,
        ])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(3));
}

#[test]
fn test_subcommand_writes_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture_csv(dir.path());
    let out = dir.path().join("reports");
    let result = run_ok(&[
        "test",
        "--fit-on",
        "pooled",
        "--out",
        out.to_str().unwrap(),
        &data,
    ]);
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("reject independence"));

    let dependency: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("dependency.json")).unwrap())
            .unwrap();
    assert_eq!(dependency["reject_independence"], true);
    assert_eq!(dependency["dof"], 9);
    let stationarity: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("stationarity.json")).unwrap())
            .unwrap();
    assert!(stationarity["stationary"].is_boolean());
}

/// Writes a model directory by hand: five published per-segment matrices
/// over the 04:30-19:30 window, with placeholder counts.
fn write_published_model(dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    let z = [0.0, 0.0, 0.0, 0.0];
    let matrices = vec![
        TransitionMatrix::from_rows([[0.9615, 0.0385, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], z, z])
            .unwrap(),
        TransitionMatrix::from_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.75, 0.25, 0.0],
            [0.0, 0.0, 0.80, 0.20],
            [0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap(),
        TransitionMatrix::<f64>::identity(),
        TransitionMatrix::from_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.5, 0.5, 0.0],
            [0.0, 0.0, 0.0588, 0.9412],
        ])
        .unwrap(),
        TransitionMatrix::from_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.1111, 0.8889, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap(),
    ];
    let counts =
        CountMatrix::from_counts([[52, 1, 0, 0], [1, 38, 1, 0], [0, 1, 5, 1], [0, 0, 1, 79]]);
    let mut manifest = String::from(
        "slot_minutes = 5\nboundaries = 04:30,07:30,10:30,13:30,16:30,19:30\n\
         threshold.lr = 200\nthreshold.mr = 450\nthreshold.max = 500\n\
         fit_on = repday\nsegments = 5\nempty_segments = \n",
    );
    for (k, m) in matrices.iter().enumerate() {
        let p_name = format!("p_seg{}.txt", k + 1);
        let n_name = format!("n_seg{}.txt", k + 1);
        std::fs::write(dir.join(&p_name), m.to_text()).unwrap();
        std::fs::write(dir.join(&n_name), counts.to_text()).unwrap();
        manifest.push_str(&format!("matrix.{} = {p_name}\n", k + 1));
        manifest.push_str(&format!("counts.{} = {n_name}\n", k + 1));
    }
    std::fs::write(dir.join("manifest.txt"), manifest).unwrap();
}

#[test]
fn published_matrices_from_disk_are_non_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model");
    write_published_model(&model);
    let out = dir.path().join("reports");
    run_ok(&[
        "test",
        "--model",
        model.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let stationarity: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("stationarity.json")).unwrap())
            .unwrap();
    assert_eq!(stationarity["stationary"], false);
    assert_eq!(stationarity["threshold"], 0.1);
}

#[test]
fn generate_then_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture_csv(dir.path());
    let out = dir.path().join("run");
    run_ok(&["fit", "--out", out.to_str().unwrap(), &data]);
    run_ok(&["generate", "--out", out.to_str().unwrap()]);

    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 181); // header + 180 slots
    assert!(trace.starts_with("time_of_day,state_code,state_name,w_L,w_M,w_H,w_VH,fallback\n"));
    let fallback: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("fallback.json")).unwrap())
            .unwrap();
    assert_eq!(fallback["slots"], 180);

    run_ok(&[
        "evaluate",
        "--out",
        out.to_str().unwrap(),
        "--synth",
        out.join("trace.csv").to_str().unwrap(),
        &data,
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("evaluation.json")).unwrap())
            .unwrap();
    assert_eq!(report["length"], 180);
    assert!(report["match_fraction"].as_f64().unwrap() >= 0.8);
    let overlay = std::fs::read_to_string(out.join("overlay.csv")).unwrap();
    assert_eq!(overlay.lines().count(), 181);
}

#[test]
fn strict_mode_changes_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model");
    write_published_model(&model);
    let plain = dir.path().join("plain");
    let strict = dir.path().join("strict");
    run_ok(&["generate", "--model", model.to_str().unwrap(), "--out", plain.to_str().unwrap()]);
    run_ok(&[
        "generate",
        "--strict-alg1",
        "--model",
        model.to_str().unwrap(),
        "--out",
        strict.to_str().unwrap(),
    ]);
    let a = std::fs::read_to_string(plain.join("trace.csv")).unwrap();
    let b = std::fs::read_to_string(strict.join("trace.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn carry_modes_agree_on_identity_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model");
    std::fs::create_dir_all(&model).unwrap();
    let identity = TransitionMatrix::<f64>::identity();
    let counts = CountMatrix::new();
    let mut manifest = String::from(
        "slot_minutes = 5\nboundaries = 06:00,09:00,12:00\n\
         threshold.lr = 200\nthreshold.mr = 450\nthreshold.max = 500\n\
         fit_on = repday\nsegments = 2\nempty_segments = \n",
    );
    for k in 1..=2 {
        std::fs::write(model.join(format!("p_seg{k}.txt")), identity.to_text()).unwrap();
        std::fs::write(model.join(format!("n_seg{k}.txt")), counts.to_text()).unwrap();
        manifest.push_str(&format!("matrix.{k} = p_seg{k}.txt\n"));
        manifest.push_str(&format!("counts.{k} = n_seg{k}.txt\n"));
    }
    std::fs::write(model.join("manifest.txt"), manifest).unwrap();

    let mut traces = Vec::new();
    for carry in ["distribution", "state"] {
        let out = dir.path().join(carry);
        run_ok(&[
            "generate",
            "--carry",
            carry,
            "--initial",
            "H",
            "--model",
            model.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        traces.push(std::fs::read_to_string(out.join("trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    assert!(traces[0].lines().skip(1).all(|l| l.contains(",3,H,")));
}

#[test]
fn sample_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture_csv(dir.path());
    let model = dir.path().join("model");
    run_ok(&["fit", "--out", model.to_str().unwrap(), &data]);

    let mut outputs = Vec::new();
    for name in ["s1", "s2"] {
        let out = dir.path().join(name);
        run_ok(&[
            "sample",
            "--seed",
            "9",
            "--model",
            model.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        outputs.push(std::fs::read_to_string(out.join("sample.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0].lines().count(), 181);

    let other = dir.path().join("s3");
    run_ok(&[
        "sample",
        "--seed",
        "10",
        "--model",
        model.to_str().unwrap(),
        "--out",
        other.to_str().unwrap(),
    ]);
    let third = std::fs::read_to_string(other.join("sample.csv")).unwrap();
    assert_ne!(outputs[0], third);
}

#[test]
fn dump_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = run_ok(&[
        "fit",
        "--dump-config",
        "--lr",
        "150",
        "--seed",
        "3",
        "--preset",
        "winter-paper",
        "--fit-on",
        "pooled",
    ]);
    let dumped = String::from_utf8(first.stdout).unwrap();
    assert!(dumped.contains("threshold.lr = 150"));
    assert!(dumped.contains("seed = 3"));

    let cfg_path = dir.path().join("run.conf");
    std::fs::write(&cfg_path, &dumped).unwrap();
    let second = run_ok(&["fit", "--dump-config", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(dumped, String::from_utf8(second.stdout).unwrap());
}
