//! Command-line front end: label conversion, prediction evaluation,
//! invariant checking, curvature diagnostics, and point-cloud cross-checks.
//!
//! Exit codes: 0 success, 1 invariant-check failure, 2 input or usage
//! error. Output files are written atomically (temp file + rename) so a
//! crashed run never leaves a truncated CSV behind.

mod check;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;

use motorpose::codec::{decode_motor, encode_pose, Motor};
use motorpose::embed::{spherical_trace, trace_deviation, Curvature};
use motorpose::io::{
    lambda_for_area, parse_cambridge, parse_ply_ascii_cloud, parse_sevenscenes, parse_xyz_cloud,
    read_motor_file, read_prediction_file, write_motor_file, write_pose_file, DatasetArea,
    MotorRecord, PoseRecord, QuatOrder, SceneKind,
};
use motorpose::metrics::{evaluate_run, pointcloud_mse, MetricsError, Thresholds};

#[derive(Parser)]
#[command(
    name = "motorpose",
    version,
    about = "Camera-pose motor tooling: encode labels, evaluate predictions, check invariants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a pose label source into a motor CSV
    Encode(EncodeArgs),
    /// Convert a motor CSV back into a row-based pose file
    Decode(DecodeArgs),
    /// Evaluate a prediction CSV against a ground-truth motor CSV
    Eval(EvalArgs),
    /// Run the seeded invariant checker, optionally over a motor CSV
    Check(CheckArgs),
    /// Emit per-frame Euclidean and spherical camera traces
    Trace(TraceArgs),
    /// Cross-check pose pairs by transforming a point cloud with both
    Cloudcheck(CloudcheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Three header lines, then `frame_path X Y Z qW qX qY qZ` rows
    Cambridge,
    /// A directory of per-frame homogeneous 4x4 matrix files (*.pose.txt)
    Sevenscenes,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Indoor,
    Outdoor,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QuatOrderArg {
    /// Scalar first: w x y z
    Wxyz,
    /// Scalar last: x y z w
    Xyzw,
}

#[derive(Args)]
struct LambdaArgs {
    /// Curvature scale in meters; overrides --area/--kind
    #[arg(long)]
    lambda: Option<f64>,
    /// Scene extent (m^2 outdoor, m^3 indoor) for automatic curvature choice
    #[arg(long)]
    area: Option<f64>,
    /// Scene kind accompanying --area
    #[arg(long, value_enum)]
    kind: Option<Kind>,
}

#[derive(Args)]
struct EncodeArgs {
    /// Pose label source: a file (cambridge) or directory (sevenscenes)
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Format,
    #[command(flatten)]
    lambda: LambdaArgs,
    /// Destination motor CSV
    #[arg(long)]
    out: PathBuf,
    /// Quaternion component order in cambridge rows
    #[arg(long, value_enum, default_value = "wxyz")]
    quat_order: QuatOrderArg,
    /// Treat 4x4 matrices as world-to-camera and invert them
    #[arg(long)]
    world_to_camera: bool,
    /// Fail (exit 2) if any record is rejected instead of warning
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct DecodeArgs {
    /// Motor CSV to decode
    input: PathBuf,
    /// Curvature override; defaults to each record's stored lambda
    #[arg(long)]
    lambda: Option<f64>,
    /// Destination pose file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth motor CSV (with lambda column)
    #[arg(long)]
    gt: PathBuf,
    /// Prediction CSV (motor CSV without the lambda column also accepted)
    #[arg(long)]
    pred: PathBuf,
    /// Curvature override; defaults to the ground-truth file's lambda
    #[arg(long)]
    lambda: Option<f64>,
    /// Error thresholds as `meters,degrees`
    #[arg(long, value_parser = parse_thresholds, default_value = "10,10")]
    thresholds: Thresholds,
    /// Write the full JSON report here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write histogram/CDF CSVs into this directory
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Optional motor CSV to run the file-data families on
    input: Option<PathBuf>,
    /// Seed for the randomized families
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    /// Pose label source: a file (cambridge) or directory (sevenscenes)
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Format,
    #[command(flatten)]
    lambda: LambdaArgs,
    /// Destination trace CSV
    #[arg(long)]
    out: PathBuf,
    /// Quaternion component order in cambridge rows
    #[arg(long, value_enum, default_value = "wxyz")]
    quat_order: QuatOrderArg,
    /// Treat 4x4 matrices as world-to-camera and invert them
    #[arg(long)]
    world_to_camera: bool,
}

#[derive(Args)]
struct CloudcheckArgs {
    /// Point cloud: ASCII XYZ, or ASCII PLY when the extension is .ply
    cloud: PathBuf,
    /// Ground-truth motor CSV
    #[arg(long)]
    gt: PathBuf,
    /// Prediction CSV
    #[arg(long)]
    pred: PathBuf,
    /// Curvature override; defaults to the ground-truth file's lambda
    #[arg(long)]
    lambda: Option<f64>,
    /// Destination per-frame MSE CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A command failure carrying its exit code: 1 for invariant-check
/// failures, 2 for input and usage problems.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn check() -> Self {
        Self {
            code: 1,
            message: "invariant check failed".to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("MOTORPOSE_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encode(args) => run_encode(args),
        Command::Decode(args) => run_decode(args),
        Command::Eval(args) => run_eval(args),
        Command::Check(args) => run_check(args),
        Command::Trace(args) => run_trace(args),
        Command::Cloudcheck(args) => run_cloudcheck(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn parse_thresholds(s: &str) -> Result<Thresholds, String> {
    let (pos, rot) = s
        .split_once(',')
        .ok_or_else(|| "expected `meters,degrees`".to_string())?;
    let pos_m: f64 = pos.trim().parse().map_err(|e| format!("bad meters: {e}"))?;
    let rot_deg: f64 = rot
        .trim()
        .parse()
        .map_err(|e| format!("bad degrees: {e}"))?;
    if !(pos_m.is_finite() && pos_m > 0.0 && rot_deg.is_finite() && rot_deg > 0.0) {
        return Err("thresholds must be positive".to_string());
    }
    Ok(Thresholds { pos_m, rot_deg })
}

impl LambdaArgs {
    fn resolve(&self) -> Result<Curvature, Failure> {
        if let Some(lambda) = self.lambda {
            return Curvature::new(lambda).map_err(|e| Failure::input(e.to_string()));
        }
        match (self.area, self.kind) {
            (Some(area), Some(kind)) => {
                let kind = match kind {
                    Kind::Indoor => SceneKind::Indoor,
                    Kind::Outdoor => SceneKind::Outdoor,
                };
                let area =
                    DatasetArea::new(area, kind).map_err(|e| Failure::input(e.to_string()))?;
                Ok(lambda_for_area(&area))
            }
            _ => Err(Failure::input(
                "no curvature: pass --lambda, or --area with --kind",
            )),
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Writes via a temp file in the destination directory plus rename, so
/// readers never observe a partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn load_pose_records(
    input: &Path,
    format: Format,
    quat_order: QuatOrderArg,
    world_to_camera: bool,
    strict: bool,
) -> Result<Vec<PoseRecord>, Failure> {
    let parse = match format {
        Format::Cambridge => {
            let order = match quat_order {
                QuatOrderArg::Wxyz => QuatOrder::WFirst,
                QuatOrderArg::Xyzw => QuatOrder::WLast,
            };
            let text = read_text(input)?;
            parse_cambridge(&text, order).map_err(|e| Failure::input(e.to_string()))?
        }
        Format::Sevenscenes => {
            let mut frames = Vec::new();
            for entry in walkdir::WalkDir::new(input).sort_by_file_name() {
                let entry = entry.map_err(|e| Failure::input(e.to_string()))?;
                if !entry.file_type().is_file() {
                    continue;
                }
                let name = entry.file_name().to_string_lossy();
                if !name.ends_with(".pose.txt") {
                    continue;
                }
                let rel = entry
                    .path()
                    .strip_prefix(input)
                    .unwrap_or(entry.path())
                    .to_string_lossy()
                    .replace('\\', "/");
                frames.push((rel, read_text(entry.path())?));
            }
            if frames.is_empty() {
                return Err(Failure::input(format!(
                    "{}: no *.pose.txt files found",
                    input.display()
                )));
            }
            parse_sevenscenes(&frames, world_to_camera)
                .map_err(|e| Failure::input(e.to_string()))?
        }
    };
    for rejected in &parse.rejected {
        warn!("rejected {}: {}", rejected.location, rejected.reason);
    }
    if strict && !parse.rejected.is_empty() {
        return Err(Failure::input(format!(
            "{} record(s) rejected under --strict",
            parse.rejected.len()
        )));
    }
    println!("frames: {}", parse.records.len());
    println!("rejected: {}", parse.rejected.len());
    Ok(parse.records)
}

/// Full distance of `M M~` from 1: scalar defect plus pseudoscalar leak.
fn full_unit_defect(m: &Motor) -> f64 {
    let scalar = m.scalar_norm_squared() - 1.0;
    let pseudo = m.pseudoscalar_defect();
    (scalar * scalar + pseudo * pseudo).sqrt()
}

fn display_lambda(lambda: f64) -> String {
    format!("{lambda}")
}

fn run_encode(args: EncodeArgs) -> Result<(), Failure> {
    let records = load_pose_records(
        &args.input,
        args.format,
        args.quat_order,
        args.world_to_camera,
        args.strict,
    )?;
    let c = args.lambda.resolve()?;
    let mut motor_records = Vec::with_capacity(records.len());
    let mut max_defect = 0.0f64;
    let mut max_deviation = 0.0f64;
    for rec in &records {
        let motor = encode_pose(&rec.pose, c);
        max_defect = max_defect.max(full_unit_defect(&motor));
        max_deviation = max_deviation.max(trace_deviation(&rec.pose.t, c));
        motor_records.push(MotorRecord {
            frame_id: rec.frame_id.clone(),
            motor,
            lambda: c.lambda(),
        });
    }
    let text = write_motor_file(&motor_records).map_err(|e| Failure::input(e.to_string()))?;
    write_atomic(&args.out, &text)?;
    println!("lambda: {}", display_lambda(c.lambda()));
    println!("max_unit_defect: {max_defect:.3e}");
    println!("max_trace_deviation: {max_deviation:.3e}");
    println!("wrote: {}", args.out.display());
    Ok(())
}

fn run_decode(args: DecodeArgs) -> Result<(), Failure> {
    let text = read_text(&args.input)?;
    let records = read_motor_file(&text).map_err(|e| Failure::input(e.to_string()))?;
    if records.is_empty() {
        return Err(Failure::input("motor file has no records"));
    }
    let mut poses = Vec::with_capacity(records.len());
    let mut max_residual = 0.0f64;
    let mut max_defect = 0.0f64;
    for rec in &records {
        let lambda = args.lambda.unwrap_or(rec.lambda);
        let c = Curvature::new(lambda).map_err(|e| Failure::input(e.to_string()))?;
        let decoded = decode_motor(&rec.motor, c)
            .map_err(|e| Failure::input(format!("frame {}: {e}", rec.frame_id)))?;
        max_residual = max_residual.max(decoded.residual);
        max_defect = max_defect.max(decoded.unit_defect);
        poses.push(PoseRecord {
            frame_id: rec.frame_id.clone(),
            pose: decoded.pose,
        });
    }
    let text = write_pose_file(&poses).map_err(|e| Failure::input(e.to_string()))?;
    write_atomic(&args.out, &text)?;
    println!("frames: {}", poses.len());
    println!("max_unit_defect: {max_defect:.3e}");
    println!("max_decode_residual: {max_residual:.3e}");
    println!("wrote: {}", args.out.display());
    Ok(())
}

/// Reads predictions from either the 9-column prediction CSV or a full
/// motor CSV (whose lambda column is ignored).
fn read_predictions(path: &Path) -> Result<Vec<(String, Motor)>, Failure> {
    let text = read_text(path)?;
    match read_prediction_file(&text) {
        Ok(records) => Ok(records),
        Err(pred_err) => match read_motor_file(&text) {
            Ok(records) => Ok(records.into_iter().map(|r| (r.frame_id, r.motor)).collect()),
            Err(_) => Err(Failure::input(format!("{}: {pred_err}", path.display()))),
        },
    }
}

/// The uniform lambda of a ground-truth file; mixed values are an error
/// because one evaluation runs at one curvature.
fn gt_lambda(records: &[MotorRecord]) -> Result<f64, Failure> {
    let first = records
        .first()
        .ok_or_else(|| Failure::input("ground-truth file has no records"))?
        .lambda;
    for rec in records {
        if rec.lambda != first {
            return Err(Failure::input(format!(
                "mixed lambda in ground truth: {} vs {} (frame {})",
                first, rec.lambda, rec.frame_id
            )));
        }
    }
    Ok(first)
}

fn list_offenders(names: &[String]) -> String {
    let mut out = String::new();
    for name in names.iter().take(10) {
        write!(out, "\n  {name}").unwrap();
    }
    if names.len() > 10 {
        write!(out, "\n  ... and {} more", names.len() - 10).unwrap();
    }
    out
}

fn run_eval(args: EvalArgs) -> Result<(), Failure> {
    let gt_text = read_text(&args.gt)?;
    let gt_records = read_motor_file(&gt_text).map_err(|e| Failure::input(e.to_string()))?;
    let lambda = args.lambda.unwrap_or(gt_lambda(&gt_records)?);
    let c = Curvature::new(lambda).map_err(|e| Failure::input(e.to_string()))?;

    // Labels must honor the unit constraint; predictions need not.
    let bad_labels: Vec<String> = gt_records
        .iter()
        .filter(|r| full_unit_defect(&r.motor) > 1e-6)
        .map(|r| r.frame_id.clone())
        .collect();
    if !bad_labels.is_empty() {
        return Err(Failure::input(format!(
            "{} ground-truth motor(s) violate the unit constraint:{}",
            bad_labels.len(),
            list_offenders(&bad_labels)
        )));
    }

    let gt: Vec<(String, Motor)> = gt_records
        .into_iter()
        .map(|r| (r.frame_id, r.motor))
        .collect();
    let pred = read_predictions(&args.pred)?;

    let report = match evaluate_run(&pred, &gt, c, args.thresholds) {
        Ok(report) => report,
        Err(MetricsError::FrameIdMismatch {
            missing_in_gt,
            missing_in_pred,
        }) => {
            let mut message = String::from("frame_id sets differ");
            if !missing_in_gt.is_empty() {
                write!(
                    message,
                    "; in predictions but not ground truth:{}",
                    list_offenders(&missing_in_gt)
                )
                .unwrap();
            }
            if !missing_in_pred.is_empty() {
                write!(
                    message,
                    "; in ground truth but not predictions:{}",
                    list_offenders(&missing_in_pred)
                )
                .unwrap();
            }
            return Err(Failure::input(message));
        }
        Err(e) => return Err(Failure::input(e.to_string())),
    };

    for excluded in &report.excluded {
        warn!("excluded {}: {}", excluded.frame_id, excluded.reason);
    }
    if let Some(out) = &args.out {
        write_atomic(out, &report.to_json_pretty())?;
        println!("wrote: {}", out.display());
    }
    if let Some(dir) = &args.csv {
        fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
        let hist_csv = |h: &motorpose::metrics::Histogram| {
            let mut out = String::from("bin_lo,bin_hi,count\n");
            for (i, count) in h.counts.iter().enumerate() {
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e}",
                    h.bin_edges[i],
                    h.bin_edges[i + 1],
                    count
                )
                .unwrap();
            }
            out
        };
        let cdf_csv = |values: &[f64]| {
            let mut out = String::from("error,cumulative_probability\n");
            let n = values.len() as f64;
            for (i, v) in values.iter().enumerate() {
                writeln!(out, "{:.16e},{:.16e}", v, (i + 1) as f64 / n).unwrap();
            }
            out
        };
        write_atomic(
            &dir.join("histogram_pos.csv"),
            &hist_csv(&report.histogram_pos),
        )?;
        write_atomic(
            &dir.join("histogram_rot.csv"),
            &hist_csv(&report.histogram_rot),
        )?;
        write_atomic(&dir.join("cdf_pos.csv"), &cdf_csv(&report.cdf_pos))?;
        write_atomic(&dir.join("cdf_rot.csv"), &cdf_csv(&report.cdf_rot))?;
        println!("wrote: {}", dir.display());
    }
    if report.excluded_count > 0 {
        println!("excluded: {}", report.excluded_count);
    }
    println!(
        "{:.3}m {:.3}\u{b0} {:.1}%",
        report.median_pos, report.median_rot, report.pct_within
    );
    Ok(())
}

fn run_check(args: CheckArgs) -> Result<(), Failure> {
    let loaded = match &args.input {
        Some(path) => {
            let text = read_text(path)?;
            let records = read_motor_file(&text).map_err(|e| Failure::input(e.to_string()))?;
            Some((path.display().to_string(), records))
        }
        None => None,
    };
    let results = check::run_all(args.seed, loaded.as_ref().map(|(_, r)| r.as_slice()));
    let report = check::render_report(
        args.seed,
        loaded.as_ref().map(|(path, r)| (path.as_str(), r.len())),
        &results,
    );
    print!("{report}");
    if let Some(out) = &args.out {
        write_atomic(out, &report)?;
    }
    if results.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        Err(Failure::check())
    }
}

fn run_trace(args: TraceArgs) -> Result<(), Failure> {
    let records = load_pose_records(
        &args.input,
        args.format,
        args.quat_order,
        args.world_to_camera,
        false,
    )?;
    let c = args.lambda.resolve()?;
    let mut out = String::from("frame_id,tx,ty,tz,sx,sy,sz,deviation\n");
    let mut max_deviation = 0.0f64;
    for rec in &records {
        let t = rec.pose.t;
        let s = spherical_trace(&t, c);
        let deviation = trace_deviation(&t, c);
        max_deviation = max_deviation.max(deviation);
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            rec.frame_id, t.x, t.y, t.z, s.x, s.y, s.z, deviation
        )
        .unwrap();
    }
    write_atomic(&args.out, &out)?;
    println!("lambda: {}", display_lambda(c.lambda()));
    println!("max_trace_deviation: {max_deviation:.3e}");
    println!("wrote: {}", args.out.display());
    Ok(())
}

fn run_cloudcheck(args: CloudcheckArgs) -> Result<(), Failure> {
    let cloud_text = read_text(&args.cloud)?;
    let cloud = if args
        .cloud
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("ply"))
    {
        parse_ply_ascii_cloud(&cloud_text)
    } else {
        parse_xyz_cloud(&cloud_text)
    }
    .map_err(|e| Failure::input(e.to_string()))?;
    if cloud.is_empty() {
        return Err(Failure::input(format!(
            "{}: point cloud is empty",
            args.cloud.display()
        )));
    }

    let gt_text = read_text(&args.gt)?;
    let gt_records = read_motor_file(&gt_text).map_err(|e| Failure::input(e.to_string()))?;
    let lambda = args.lambda.unwrap_or(gt_lambda(&gt_records)?);
    let c = Curvature::new(lambda).map_err(|e| Failure::input(e.to_string()))?;
    let pred = read_predictions(&args.pred)?;

    let mut pred_sorted: Vec<(String, Motor)> = pred;
    pred_sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let missing: Vec<String> = gt_records
        .iter()
        .filter(|r| {
            pred_sorted
                .binary_search_by(|p| p.0.as_str().cmp(&r.frame_id))
                .is_err()
        })
        .map(|r| r.frame_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Failure::input(format!(
            "{} ground-truth frame(s) have no prediction:{}",
            missing.len(),
            list_offenders(&missing)
        )));
    }

    let mut out = String::from("frame_id,mse,points_used,points_excluded\n");
    let mut mses = Vec::with_capacity(gt_records.len());
    let mut total_excluded = 0usize;
    for rec in &gt_records {
        let idx = pred_sorted
            .binary_search_by(|p| p.0.as_str().cmp(&rec.frame_id))
            .expect("checked above");
        let result = pointcloud_mse(&cloud, &rec.motor, &pred_sorted[idx].1, c)
            .map_err(|e| Failure::input(format!("frame {}: {e}", rec.frame_id)))?;
        writeln!(
            out,
            "{},{:.16e},{},{}",
            rec.frame_id, result.mse, result.points_used, result.points_excluded
        )
        .unwrap();
        total_excluded += result.points_excluded;
        mses.push(result.mse);
    }
    if let Some(path) = &args.out {
        write_atomic(path, &out)?;
        println!("wrote: {}", path.display());
    }
    mses.sort_by(|a, b| a.total_cmp(b));
    let median = if mses.len() % 2 == 1 {
        mses[mses.len() / 2]
    } else {
        0.5 * (mses[mses.len() / 2 - 1] + mses[mses.len() / 2])
    };
    println!("frames: {}", gt_records.len());
    println!("points: {}", cloud.len());
    if total_excluded > 0 {
        println!("excluded_points: {total_excluded}");
    }
    println!("median_mse: {median:.6e}");
    Ok(())
}
