//! CLI behavior: subcommands, exit codes, report files, reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oblivdsp"))
}

fn run(args: &[&str], out_dir: &Path) -> Output {
    bin()
        .args(args)
        .env("OBLIVDSP_OUT", out_dir)
        .output()
        .expect("binary runs")
}

fn tmpdir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("oblivdsp-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Small-but-real vitals override set: short window, shallow ring.
const VITALS_FAST: &[&str] = &[
    "--set",
    "frames=64",
    "--set",
    "fir_taps=31",
    "--set",
    "ring_dim=4096",
];

const GESTURE_FAST: &[&str] = &[
    "--set",
    "frames=4",
    "--set",
    "antennas=1",
    "--set",
    "range_bins=4",
    "--set",
    "chirps=8",
    "--set",
    "fc_dims=32 16 8 5",
    "--set",
    "ring_dim=2048",
];

#[test]
fn depth_audit_vitals_prints_nine_rows_and_exits_zero() {
    let dir = tmpdir("audit");
    let out = run(&["depth-audit", "--pipeline", "vitals"], &dir);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    for stage in [
        "energy",
        "soft_attention",
        "phase_extraction",
        "fir_filter",
        "taylor_arctan",
        "window_dft",
        "power_spectrum",
        "merge_sharpen",
        "weighted_freq_avg",
    ] {
        assert!(text.contains(stage), "missing stage {stage}");
    }
    assert!(text.contains("total depth: 11"));
    assert!(text.contains("[1, 2, 3, 4, 7, 8, 9, 10, 11]"));
}

#[test]
fn depth_audit_gesture_and_order_one() {
    let dir = tmpdir("audit2");
    let mut args = vec!["depth-audit", "--pipeline", "gesture"];
    args.extend_from_slice(GESTURE_FAST);
    let out = run(&args, &dir);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("[1, 2, 3, 5, 6, 6, 8, 10, 11]"));

    let mut args = vec![
        "depth-audit",
        "--pipeline",
        "vitals",
        "--set",
        "taylor_order=1",
    ];
    args.extend_from_slice(VITALS_FAST);
    let out = run(&args, &dir);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("total depth: 9"));
}

#[test]
fn trace_check_reports_identical_trials() {
    let dir = tmpdir("trace");
    let mut args = vec!["trace-check", "--pipeline", "gesture", "--trials", "10"];
    args.extend_from_slice(GESTURE_FAST);
    let out = run(&args, &dir);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("IDENTICAL (10/10)"));
}

#[test]
fn run_vitals_fixture_writes_reports_with_digest() {
    let dir = tmpdir("vitals");
    let out = run(&["run-vitals", "--backend", "exactsim"], &dir);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("target bin r̂ ="));
    assert!(text.contains("RR ="));
    assert!(text.contains("HR ="));
    for f in [
        "vitals_report.json",
        "vitals_report.txt",
        "vitals_trace.txt",
    ] {
        assert!(dir.join(f).exists(), "missing {f}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("vitals_report.json")).unwrap())
            .unwrap();
    assert!(json["config_digest"].as_str().unwrap().len() == 16);
    assert_eq!(
        json["security"].as_str().unwrap(),
        "desk-scale (NOT SECURE)"
    );

    // same config and seed reproduce the report byte-identically
    let first = std::fs::read(dir.join("vitals_report.json")).unwrap();
    let out = run(&["run-vitals", "--backend", "exactsim"], &dir);
    assert!(out.status.success());
    let second = std::fs::read(dir.join("vitals_report.json")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn synth_then_run_roundtrip() {
    let dir = tmpdir("synth");
    let out = run(
        &["synth", "--scene", "vitals", "--output", "cube.bin"],
        &dir,
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cube = dir.join("cube.bin");
    assert!(cube.exists());
    let out = run(
        &[
            "run-vitals",
            "--input",
            cube.to_str().unwrap(),
            "--backend",
            "exactsim",
        ],
        &dir,
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("target bin r̂ = 12.000"));
}

#[test]
fn run_gesture_with_operand_weights() {
    let dir = tmpdir("gesture");
    // write a 32-16-8-5 network as operand files
    use oblivdsp::fixtures::random_fc_net;
    use oblivdsp::kernels::PlainOperand;
    let net = random_fc_net(&[32, 16, 8, 5], 5);
    for (i, layer) in net.layers.iter().enumerate() {
        let rows = layer.weight.len();
        let cols = layer.weight[0].len();
        let flat: Vec<f64> = layer.weight.iter().flatten().copied().collect();
        PlainOperand::matrix(&format!("fc_weight_{}", i + 1), rows, cols, flat)
            .save(&dir.join(format!("fc_weight_{}.op", i + 1)))
            .unwrap();
        PlainOperand::vector(&format!("fc_bias_{}", i + 1), layer.bias.clone())
            .save(&dir.join(format!("fc_bias_{}.op", i + 1)))
            .unwrap();
    }
    let mut args = vec![
        "run-gesture",
        "--backend",
        "exactsim",
        "--weights-dir",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(GESTURE_FAST);
    let out = run(&args, &dir);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("predicted class = "));
    assert!(dir.join("gesture_report.json").exists());
}

#[test]
fn exit_codes_for_failure_modes() {
    let dir = tmpdir("exits");
    // invalid config → 5
    let out = run(&["run-vitals", "--set", "gamma=3"], &dir);
    assert_eq!(out.status.code(), Some(5), "gamma=3 is not a power of two");
    // unknown config key → 5
    let out = run(&["run-vitals", "--set", "bogus=1"], &dir);
    assert_eq!(out.status.code(), Some(5));
    // unreadable input → 4
    let out = run(&["run-vitals", "--input", "/nonexistent/cube.bin"], &dir);
    assert_eq!(out.status.code(), Some(4));
    // depth budget violation → 2
    let out = run(&["run-vitals", "--set", "depth=8"], &dir);
    assert_eq!(
        out.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn keygen_writes_key_files() {
    let dir = tmpdir("keys");
    let args = vec![
        "keygen",
        "--pipeline",
        "vitals",
        "--set",
        "frames=8",
        "--set",
        "range_bins=4",
        "--set",
        "fir_taps=3",
        "--set",
        "resp_low_hz=2.0",
        "--set",
        "resp_high_hz=4.0",
        "--set",
        "heart_low_hz=5.0",
        "--set",
        "heart_high_hz=8.0",
        "--set",
        "ring_dim=256",
    ];
    let out = run(&args, &dir);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.join("secret.key").exists());
    assert!(dir.join("eval.keys").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("Galois keys"));
}
