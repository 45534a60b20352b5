//! End-to-end tests of the installed binary: every subcommand, the exit
//! codes, and byte-determinism of repeated runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_motorpose"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

const POSE_HEADER: &str = "Synthetic poses\nImageFile, Camera Position [X Y Z W P Q R]\n\n";

fn identity_pose_file(dir: &Path) -> PathBuf {
    write(
        dir,
        "poses.txt",
        &format!("{POSE_HEADER}seq1/frame00001.png 0 0 0 1 0 0 0\n"),
    )
}

#[test]
fn encode_identity_pose_yields_identity_motor_row() {
    let tmp = TempDir::new().unwrap();
    let poses = identity_pose_file(tmp.path());
    let out = run(
        &[
            "encode",
            poses.to_str().unwrap(),
            "--format",
            "cambridge",
            "--lambda",
            "10",
            "--out",
            "motors.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("lambda: 10"));
    let csv = fs::read_to_string(tmp.path().join("motors.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "frame_id,alpha,b12,b13,b14,b23,b24,b34,gamma,lambda"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("seq1/frame00001.png,1.0000000000000000e0,0.0000000000000000e0"));
    assert!(row.ends_with(",1.0000000000000000e1"));
}

#[test]
fn encode_selects_lambda_from_area_and_override_wins() {
    let tmp = TempDir::new().unwrap();
    let poses = identity_pose_file(tmp.path());
    let from_area = run(
        &[
            "encode",
            poses.to_str().unwrap(),
            "--format",
            "cambridge",
            "--area",
            "5600",
            "--kind",
            "outdoor",
            "--out",
            "a.csv",
        ],
        tmp.path(),
    );
    assert!(from_area.status.success());
    assert!(stdout(&from_area).contains("lambda: 200"));

    let overridden = run(
        &[
            "encode",
            poses.to_str().unwrap(),
            "--format",
            "cambridge",
            "--area",
            "5600",
            "--kind",
            "outdoor",
            "--lambda",
            "50",
            "--out",
            "b.csv",
        ],
        tmp.path(),
    );
    assert!(overridden.status.success());
    assert!(stdout(&overridden).contains("lambda: 50"));
}

#[test]
fn encode_without_curvature_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let poses = identity_pose_file(tmp.path());
    let out = run(
        &[
            "encode",
            poses.to_str().unwrap(),
            "--format",
            "cambridge",
            "--out",
            "x.csv",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn encode_rejects_bad_rows_only_under_strict() {
    let tmp = TempDir::new().unwrap();
    let poses = write(
        tmp.path(),
        "poses.txt",
        &format!("{POSE_HEADER}good.png 0 0 0 1 0 0 0\nbad.png 0 0 0 2 0 0 0\n"),
    );
    let lenient = run(
        &[
            "encode",
            poses.to_str().unwrap(),
            "--format",
            "cambridge",
            "--lambda",
            "10",
            "--out",
            "m.csv",
        ],
        tmp.path(),
    );
    assert!(lenient.status.success());
    assert!(stdout(&lenient).contains("rejected: 1"));

    let strict = run(
        &[
            "encode",
            poses.to_str().unwrap(),
            "--format",
            "cambridge",
            "--lambda",
            "10",
            "--out",
            "m.csv",
            "--strict",
        ],
        tmp.path(),
    );
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn encode_parse_failure_exits_2() {
    let tmp = TempDir::new().unwrap();
    let poses = write(
        tmp.path(),
        "poses.txt",
        &format!("{POSE_HEADER}short.png 0 0 0 1 0 0\n"),
    );
    let out = run(
        &[
            "encode",
            poses.to_str().unwrap(),
            "--format",
            "cambridge",
            "--lambda",
            "10",
            "--out",
            "m.csv",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4"));
}

#[test]
fn encode_sevenscenes_directory() {
    let tmp = TempDir::new().unwrap();
    let scene = tmp.path().join("seq-01");
    fs::create_dir_all(&scene).unwrap();
    fs::write(
        scene.join("frame-000000.pose.txt"),
        "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n",
    )
    .unwrap();
    fs::write(
        scene.join("frame-000001.pose.txt"),
        "-1 0 0 1\n0 -1 0 0\n0 0 1 2\n0 0 0 1\n",
    )
    .unwrap();
    let out = run(
        &[
            "encode",
            tmp.path().to_str().unwrap(),
            "--format",
            "sevenscenes",
            "--lambda",
            "10",
            "--out",
            "m.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("frames: 2"));
    let csv = fs::read_to_string(tmp.path().join("m.csv")).unwrap();
    assert!(csv.contains("seq-01/frame-000000.pose.txt,1.0000000000000000e0"));
}

#[test]
fn encode_then_decode_composes_to_identity() {
    let tmp = TempDir::new().unwrap();
    let poses = write(
        tmp.path(),
        "poses.txt",
        &format!(
            "{POSE_HEADER}a.png 1 2 3 0.7071067811865476 0 0 0.7071067811865476\n\
             b.png -40 12.5 9 0.5 -0.5 0.5 -0.5\n"
        ),
    );
    let encode = run(
        &[
            "encode",
            poses.to_str().unwrap(),
            "--format",
            "cambridge",
            "--lambda",
            "200",
            "--out",
            "m.csv",
        ],
        tmp.path(),
    );
    assert!(encode.status.success());
    let decode = run(&["decode", "m.csv", "--out", "decoded.txt"], tmp.path());
    assert!(decode.status.success(), "{}", stderr(&decode));

    let text = fs::read_to_string(tmp.path().join("decoded.txt")).unwrap();
    let mut rows = text.lines().skip(3);
    let parse_row = |row: &str| -> Vec<f64> {
        row.split_whitespace()
            .skip(1)
            .map(|f| f.parse().unwrap())
            .collect()
    };
    let a = parse_row(rows.next().unwrap());
    assert!((a[0] - 1.0).abs() < 1e-9 && (a[1] - 2.0).abs() < 1e-9 && (a[2] - 3.0).abs() < 1e-9);
    let b = parse_row(rows.next().unwrap());
    assert!((b[0] + 40.0).abs() < 1e-9 && (b[1] - 12.5).abs() < 1e-9 && (b[2] - 9.0).abs() < 1e-9);
    // Quaternion recovered up to canonical sign.
    assert!((b[3] - 0.5).abs() < 1e-9 && (b[4] + 0.5).abs() < 1e-9);
}

fn three_frame_gt(tmp: &Path, lambda: &str, offset: bool) -> PathBuf {
    let shift = if offset { 1.0 } else { 0.0 };
    let rows: String = (0..3)
        .map(|i| {
            format!(
                "f{i}.png {} {} {} 1 0 0 0\n",
                i as f64 * 3.0 + shift,
                i as f64 - 1.0,
                0.25 * i as f64
            )
        })
        .collect();
    let poses = write(
        tmp,
        if offset {
            "poses_off.txt"
        } else {
            "poses_gt.txt"
        },
        &format!("{POSE_HEADER}{rows}"),
    );
    let out_name = if offset { "pred.csv" } else { "gt.csv" };
    let out = run(
        &[
            "encode",
            poses.to_str().unwrap(),
            "--format",
            "cambridge",
            "--lambda",
            lambda,
            "--out",
            out_name,
        ],
        tmp,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    tmp.join(out_name)
}

#[test]
fn eval_of_identical_runs_prints_zero_line() {
    let tmp = TempDir::new().unwrap();
    let gt = three_frame_gt(tmp.path(), "200", false);
    let out = run(
        &[
            "eval",
            "--gt",
            gt.to_str().unwrap(),
            "--pred",
            gt.to_str().unwrap(),
            "--out",
            "report.json",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("0.000m 0.000\u{b0} 100.0%"),
        "{}",
        stdout(&out)
    );
    let report = fs::read_to_string(tmp.path().join("report.json")).unwrap();
    assert!(report.contains("\"median_pos\": 0.0"));
    assert!(report.contains("\"pct_within\": 100.0"));
}

#[test]
fn eval_detects_unit_translation_offset_at_flat_curvature() {
    let tmp = TempDir::new().unwrap();
    let gt = three_frame_gt(tmp.path(), "1e6", false);
    let pred = three_frame_gt(tmp.path(), "1e6", true);
    let out = run(
        &[
            "eval",
            "--gt",
            gt.to_str().unwrap(),
            "--pred",
            pred.to_str().unwrap(),
            "--out",
            "report.json",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("1.000m"), "{}", stdout(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    let median = report["median_pos"].as_f64().unwrap();
    assert!((median - 1.0).abs() < 1e-6);
}

#[test]
fn eval_threshold_tightening_never_raises_pct() {
    let tmp = TempDir::new().unwrap();
    let gt = three_frame_gt(tmp.path(), "1e6", false);
    let pred = three_frame_gt(tmp.path(), "1e6", true);
    let pct_of = |thresholds: &str| -> f64 {
        let out = run(
            &[
                "eval",
                "--gt",
                gt.to_str().unwrap(),
                "--pred",
                pred.to_str().unwrap(),
                "--thresholds",
                thresholds,
            ],
            tmp.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
        let line = stdout(&out);
        let line = line.lines().last().unwrap().to_string();
        line.split_whitespace()
            .last()
            .unwrap()
            .trim_end_matches('%')
            .parse()
            .unwrap()
    };
    let loose = pct_of("10,10");
    let tight = pct_of("0.5,5");
    assert!(tight <= loose, "{tight} > {loose}");
    assert_eq!(loose, 100.0);
    assert_eq!(tight, 0.0);
}

#[test]
fn eval_frame_mismatch_exits_2_listing_offenders() {
    let tmp = TempDir::new().unwrap();
    let gt = three_frame_gt(tmp.path(), "200", false);
    let pred = write(
        tmp.path(),
        "pred.csv",
        "frame_id,alpha,b12,b13,b14,b23,b24,b34,gamma\nghost.png,1,0,0,0,0,0,0,0\n",
    );
    let out = run(
        &[
            "eval",
            "--gt",
            gt.to_str().unwrap(),
            "--pred",
            pred.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("ghost.png"));
    assert!(err.contains("f0.png"));
}

#[test]
fn eval_exports_histogram_and_cdf_csvs() {
    let tmp = TempDir::new().unwrap();
    let gt = three_frame_gt(tmp.path(), "200", false);
    let out = run(
        &[
            "eval",
            "--gt",
            gt.to_str().unwrap(),
            "--pred",
            gt.to_str().unwrap(),
            "--csv",
            "plots",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    for name in [
        "histogram_pos.csv",
        "histogram_rot.csv",
        "cdf_pos.csv",
        "cdf_rot.csv",
    ] {
        let text = fs::read_to_string(tmp.path().join("plots").join(name)).unwrap();
        assert!(text.lines().count() > 1, "{name} is empty");
    }
}

#[test]
fn check_passes_on_fresh_encode_output() {
    let tmp = TempDir::new().unwrap();
    let gt = three_frame_gt(tmp.path(), "200", false);
    let out = run(&["check", gt.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("result: PASS"));
}

#[test]
fn check_flags_perturbed_motor_naming_the_frame() {
    let tmp = TempDir::new().unwrap();
    let gt = three_frame_gt(tmp.path(), "200", false);
    let text = fs::read_to_string(&gt).unwrap();
    // Bump one coefficient of f1.png by 0.1.
    let perturbed: String = text
        .lines()
        .map(|line| {
            if line.starts_with("f1.png") {
                let mut fields: Vec<String> = line.split(',').map(str::to_string).collect();
                let alpha: f64 = fields[1].parse().unwrap();
                fields[1] = format!("{:.16e}", alpha + 0.1);
                fields.join(",")
            } else {
                line.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    let bad = write(tmp.path(), "perturbed.csv", &format!("{perturbed}\n"));
    let out = run(&["check", bad.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL file/unit-constraint"), "{text}");
    assert!(text.contains("frame f1.png"), "{text}");
}

#[test]
fn check_is_byte_deterministic_for_a_seed() {
    let tmp = TempDir::new().unwrap();
    let gt = three_frame_gt(tmp.path(), "200", false);
    let first = run(&["check", gt.to_str().unwrap(), "--seed", "7"], tmp.path());
    let second = run(&["check", gt.to_str().unwrap(), "--seed", "7"], tmp.path());
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    // A different seed still passes but reports different measurements.
    let other = run(&["check", gt.to_str().unwrap(), "--seed", "8"], tmp.path());
    assert!(other.status.success());
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn trace_reports_deviations() {
    let tmp = TempDir::new().unwrap();
    let poses = write(
        tmp.path(),
        "poses.txt",
        &format!("{POSE_HEADER}zero.png 0 0 0 1 0 0 0\nten.png 10 0 0 1 0 0 0\n"),
    );
    let out = run(
        &[
            "trace",
            poses.to_str().unwrap(),
            "--format",
            "cambridge",
            "--lambda",
            "10",
            "--out",
            "trace.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[1].starts_with("zero.png") && rows[1].ends_with("0.0000000000000000e0"));
    let ten: Vec<&str> = rows[2].split(',').collect();
    let deviation: f64 = ten[7].parse().unwrap();
    assert_eq!(deviation, 0.5);

    // Same file at lambda 1000: deviation shrinks below 1e-3.
    let out = run(
        &[
            "trace",
            poses.to_str().unwrap(),
            "--format",
            "cambridge",
            "--lambda",
            "1000",
            "--out",
            "trace1000.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let line = stdout(&out);
    let max_line = line
        .lines()
        .find(|l| l.starts_with("max_trace_deviation"))
        .unwrap();
    let value: f64 = max_line.split(": ").nth(1).unwrap().parse().unwrap();
    assert!(value < 1e-3, "{value}");
}

#[test]
fn cloudcheck_zero_for_identical_runs_and_epsilon_case() {
    let tmp = TempDir::new().unwrap();
    let gt = three_frame_gt(tmp.path(), "1000", false);
    let cloud = write(tmp.path(), "cloud.xyz", "0 0 0\n1 2 3\n-4 0.5 2\n");
    let out = run(
        &[
            "cloudcheck",
            cloud.to_str().unwrap(),
            "--gt",
            gt.to_str().unwrap(),
            "--pred",
            gt.to_str().unwrap(),
            "--out",
            "mse.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("median_mse: 0.000000e0"));

    // Single origin point, pure epsilon translation mismatch at lambda 1000.
    let origin_cloud = write(tmp.path(), "origin.xyz", "0 0 0\n");
    let gt1 = write(
        tmp.path(),
        "gt1.csv",
        "frame_id,alpha,b12,b13,b14,b23,b24,b34,gamma,lambda\n\
         f.png,1.0000000000000000e0,0,0,0,0,0,0,0,1.0000000000000000e3\n",
    );
    // Translation rotor for (1e-3, 0, 0) at lambda 1000.
    let s = (1000.0f64 * 1000.0 + 1e-6).sqrt();
    let pred1 = write(
        tmp.path(),
        "pred1.csv",
        &format!(
            "frame_id,alpha,b12,b13,b14,b23,b24,b34,gamma\nf.png,{:.16e},0,0,{:.16e},0,0,0,0\n",
            1000.0 / s,
            1e-3 / s
        ),
    );
    let out = run(
        &[
            "cloudcheck",
            origin_cloud.to_str().unwrap(),
            "--gt",
            gt1.to_str().unwrap(),
            "--pred",
            pred1.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let line = stdout(&out);
    let median_line = line.lines().find(|l| l.starts_with("median_mse")).unwrap();
    let value: f64 = median_line.split(": ").nth(1).unwrap().parse().unwrap();
    assert!(((value - 1e-6) / 1e-6).abs() < 1e-9, "{value}");
}

#[test]
fn cloudcheck_empty_cloud_exits_2() {
    let tmp = TempDir::new().unwrap();
    let gt = three_frame_gt(tmp.path(), "200", false);
    let cloud = write(tmp.path(), "empty.xyz", "");
    let out = run(
        &[
            "cloudcheck",
            cloud.to_str().unwrap(),
            "--gt",
            gt.to_str().unwrap(),
            "--pred",
            gt.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_deterministic() {
    let tmp = TempDir::new().unwrap();
    let poses = write(
        tmp.path(),
        "poses.txt",
        &format!("{POSE_HEADER}a.png 5 -3 2 0.5 0.5 0.5 0.5\nb.png 0 1 0 1 0 0 0\n"),
    );
    for name in ["one.csv", "two.csv"] {
        let out = run(
            &[
                "encode",
                poses.to_str().unwrap(),
                "--format",
                "cambridge",
                "--lambda",
                "200",
                "--out",
                name,
            ],
            tmp.path(),
        );
        assert!(out.status.success());
    }
    assert_eq!(
        fs::read(tmp.path().join("one.csv")).unwrap(),
        fs::read(tmp.path().join("two.csv")).unwrap()
    );
}

#[test]
fn unknown_usage_exits_2() {
    let tmp = TempDir::new().unwrap();
    let out = run(&["encode", "--format", "nonsense"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}
