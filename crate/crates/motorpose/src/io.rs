//! Dataset ingestion and motor-file interchange.
//!
//! Pose labels arrive either as whitespace-separated text rows
//! (`frame_path X Y Z qW qX qY qZ` after a three-line header) or as one
//! homogeneous 4x4 matrix file per frame. Motors travel as CSV with reals
//! rendered at 17 significant digits, which makes write-then-read bit-exact
//! for f64.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::codec::{rotmat_to_quat, CodecError, Motor, Pose, Quaternion, RotMatrix3};
use crate::embed::{Curvature, EuclidPoint3};

/// Quaternions whose norm is further than this from one are rejected at
/// parse time instead of renormalized.
pub const QUAT_PARSE_TOL: f64 = 1e-3;

/// Header of the motor label CSV.
pub const MOTOR_CSV_HEADER: &str = "frame_id,alpha,b12,b13,b14,b23,b24,b34,gamma,lambda";

/// Header of the prediction CSV (no lambda column; it is supplied at
/// evaluation time).
pub const PREDICTION_CSV_HEADER: &str = "frame_id,alpha,b12,b13,b14,b23,b24,b34,gamma";

/// Errors from dataset parsing and motor-file I/O.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate frame_id {0:?}")]
    DuplicateFrameId(String),
    #[error("frame_id {0:?} contains a comma or newline and cannot be written to CSV")]
    UnwritableFrameId(String),
    #[error("unsupported cloud format: {0}")]
    UnsupportedCloud(String),
}

fn malformed(line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Malformed {
        line,
        message: message.into(),
    }
}

/// A frame id bound to its conventional pose label.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseRecord {
    pub frame_id: String,
    pub pose: Pose,
}

/// A frame id bound to its motor label and the curvature it was encoded at.
#[derive(Debug, Clone, PartialEq)]
pub struct MotorRecord {
    pub frame_id: String,
    pub motor: Motor,
    pub lambda: f64,
}

/// A record dropped during parsing, with where and why.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRecord {
    /// Line number or frame id, depending on the source layout.
    pub location: String,
    pub reason: String,
}

/// Result of parsing a multi-record pose source: the accepted records plus
/// the rejects, which the caller decides whether to tolerate.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseParse {
    pub records: Vec<PoseRecord>,
    pub rejected: Vec<RejectedRecord>,
}

/// Component order of quaternions in row-based pose files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuatOrder {
    /// `w x y z`, the public Cambridge Landmarks layout.
    WFirst,
    /// `x y z w`.
    WLast,
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64, DatasetError> {
    let v: f64 = field
        .parse()
        .map_err(|_| malformed(line, format!("{what}: cannot parse {field:?} as a number")))?;
    if !v.is_finite() {
        return Err(malformed(
            line,
            format!("{what}: non-finite value {field:?}"),
        ));
    }
    Ok(v)
}

/// Parses a Cambridge-style pose file: three header lines, then
/// `frame_path X Y Z qW qX qY qZ` rows (whitespace separated, blank lines
/// ignored).
///
/// Quaternions within [`QUAT_PARSE_TOL`] of unit norm are renormalized;
/// rows further out are rejected and reported. Structural problems (wrong
/// field count, unparseable numbers, duplicate frame ids) are hard errors
/// naming the line.
pub fn parse_cambridge(text: &str, order: QuatOrder) -> Result<PoseParse, DatasetError> {
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if line <= 3 {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 8 {
            return Err(malformed(
                line,
                format!(
                    "expected 8 fields (frame_path + 7 numbers), got {}",
                    fields.len()
                ),
            ));
        }
        let frame_id = fields[0].to_string();
        if !seen.insert(frame_id.clone()) {
            return Err(DatasetError::DuplicateFrameId(frame_id));
        }
        let mut nums = [0.0; 7];
        for (i, f) in fields[1..].iter().enumerate() {
            nums[i] = parse_f64(f, line, "pose row")?;
        }
        let t = EuclidPoint3::new(nums[0], nums[1], nums[2]);
        let (w, x, y, z) = match order {
            QuatOrder::WFirst => (nums[3], nums[4], nums[5], nums[6]),
            QuatOrder::WLast => (nums[6], nums[3], nums[4], nums[5]),
        };
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > QUAT_PARSE_TOL {
            rejected.push(RejectedRecord {
                location: format!("line {line} ({frame_id})"),
                reason: format!("quaternion norm {norm} off unit by more than {QUAT_PARSE_TOL}"),
            });
            continue;
        }
        let q = Quaternion::new(w / norm, x / norm, y / norm, z / norm)
            .expect("renormalized quaternion is unit");
        records.push(PoseRecord {
            frame_id,
            pose: Pose::new(t, q),
        });
    }
    Ok(PoseParse { records, rejected })
}

/// Parses per-frame homogeneous 4x4 matrix files, given as
/// `(frame_id, file content)` pairs.
///
/// The rotation block must be orthonormal with determinant +1 and the
/// bottom row must be `0 0 0 1`; frames that violate either (or fail to
/// parse at all) are rejected and reported rather than aborting the batch.
/// Matrices are taken as camera-to-world; set `world_to_camera` to invert
/// them on ingestion.
pub fn parse_sevenscenes(
    frames: &[(String, String)],
    world_to_camera: bool,
) -> Result<PoseParse, DatasetError> {
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = BTreeSet::new();
    for (frame_id, content) in frames {
        if !seen.insert(frame_id.clone()) {
            return Err(DatasetError::DuplicateFrameId(frame_id.clone()));
        }
        match parse_homogeneous_matrix(content, world_to_camera) {
            Ok(pose) => records.push(PoseRecord {
                frame_id: frame_id.clone(),
                pose,
            }),
            Err(reason) => rejected.push(RejectedRecord {
                location: frame_id.clone(),
                reason,
            }),
        }
    }
    Ok(PoseParse { records, rejected })
}

fn parse_homogeneous_matrix(content: &str, invert: bool) -> Result<Pose, String> {
    let values: Vec<f64> = content
        .split_whitespace()
        .map(|f| f.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("cannot parse matrix entry: {e}"))?;
    if values.len() != 16 {
        return Err(format!("expected 16 matrix entries, got {}", values.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err("matrix contains non-finite entries".to_string());
    }
    let bottom = &values[12..16];
    let bottom_ok = bottom[0].abs() <= 1e-6
        && bottom[1].abs() <= 1e-6
        && bottom[2].abs() <= 1e-6
        && (bottom[3] - 1.0).abs() <= 1e-6;
    if !bottom_ok {
        return Err(format!(
            "bottom row must be 0 0 0 1, got {} {} {} {}",
            bottom[0], bottom[1], bottom[2], bottom[3]
        ));
    }
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = values[4 * i + j];
        }
    }
    let mut t = [values[3], values[7], values[11]];
    if invert {
        // (R, t)^-1 = (R^T, -R^T t).
        let rt = [
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ];
        let ti = [
            -(rt[0][0] * t[0] + rt[0][1] * t[1] + rt[0][2] * t[2]),
            -(rt[1][0] * t[0] + rt[1][1] * t[1] + rt[1][2] * t[2]),
            -(rt[2][0] * t[0] + rt[2][1] * t[1] + rt[2][2] * t[2]),
        ];
        r = rt;
        t = ti;
    }
    let matrix = RotMatrix3::new(r).map_err(|e: CodecError| e.to_string())?;
    let q = rotmat_to_quat(&matrix);
    Ok(Pose::new(EuclidPoint3::new(t[0], t[1], t[2]), q))
}

/// Renders an f64 with 17 significant digits, enough for the exact bit
/// pattern to survive a round trip through text.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn check_frame_id(frame_id: &str) -> Result<(), DatasetError> {
    if frame_id.is_empty() || frame_id.contains(',') || frame_id.contains('\n') {
        return Err(DatasetError::UnwritableFrameId(frame_id.to_string()));
    }
    Ok(())
}

/// Serializes motor label records as CSV, LF line endings, preserving order.
pub fn write_motor_file(records: &[MotorRecord]) -> Result<String, DatasetError> {
    let mut out = String::from(MOTOR_CSV_HEADER);
    out.push('\n');
    for rec in records {
        check_frame_id(&rec.frame_id)?;
        write!(out, "{}", rec.frame_id).unwrap();
        for c in rec.motor.coeffs() {
            write!(out, ",{}", fmt_f64(c)).unwrap();
        }
        writeln!(out, ",{}", fmt_f64(rec.lambda)).unwrap();
    }
    Ok(out)
}

/// Parses a motor label CSV produced by [`write_motor_file`].
///
/// Structure is validated (header, nine coefficient columns, finite
/// numbers, unique frame ids); the unit constraint is deliberately not
/// enforced here, so that defective files can still be loaded for
/// diagnosis. Callers using the records as training labels should check
/// [`Motor::unit_defect`] themselves.
pub fn read_motor_file(text: &str) -> Result<Vec<MotorRecord>, DatasetError> {
    read_motor_csv(text, true).map(|records| {
        records
            .into_iter()
            .map(|(frame_id, motor, lambda)| MotorRecord {
                frame_id,
                motor,
                lambda: lambda.expect("lambda column present"),
            })
            .collect()
    })
}

/// Serializes prediction records (no lambda column), preserving order.
pub fn write_prediction_file(records: &[(String, Motor)]) -> Result<String, DatasetError> {
    let mut out = String::from(PREDICTION_CSV_HEADER);
    out.push('\n');
    for (frame_id, motor) in records {
        check_frame_id(frame_id)?;
        write!(out, "{}", frame_id).unwrap();
        for c in motor.coeffs() {
            write!(out, ",{}", fmt_f64(c)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses a prediction CSV (the motor CSV minus its lambda column).
pub fn read_prediction_file(text: &str) -> Result<Vec<(String, Motor)>, DatasetError> {
    read_motor_csv(text, false).map(|records| {
        records
            .into_iter()
            .map(|(frame_id, motor, _)| (frame_id, motor))
            .collect()
    })
}

fn read_motor_csv(
    text: &str,
    with_lambda: bool,
) -> Result<Vec<(String, Motor, Option<f64>)>, DatasetError> {
    let expected_header = if with_lambda {
        MOTOR_CSV_HEADER
    } else {
        PREDICTION_CSV_HEADER
    };
    let expected_fields = if with_lambda { 10 } else { 9 };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == expected_header => {}
        Some((_, header)) => {
            return Err(malformed(
                1,
                format!("expected header {expected_header:?}, got {header:?}"),
            ))
        }
        None => return Err(malformed(1, "empty file")),
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != expected_fields {
            return Err(malformed(
                line,
                format!(
                    "expected {expected_fields} comma-separated fields, got {}",
                    fields.len()
                ),
            ));
        }
        let frame_id = fields[0].to_string();
        if frame_id.is_empty() {
            return Err(malformed(line, "empty frame_id"));
        }
        if !seen.insert(frame_id.clone()) {
            return Err(DatasetError::DuplicateFrameId(frame_id));
        }
        let mut coeffs = [0.0; 8];
        for (i, f) in fields[1..9].iter().enumerate() {
            coeffs[i] = parse_f64(f, line, "motor coefficient")?;
        }
        let lambda = if with_lambda {
            Some(parse_f64(fields[9], line, "lambda")?)
        } else {
            None
        };
        out.push((frame_id, Motor::from_coeffs(coeffs), lambda));
    }
    Ok(out)
}

/// Scene extent from the dataset documentation: square meters outdoors,
/// cubic meters indoors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetArea {
    pub value: f64,
    pub kind: SceneKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    Indoor,
    Outdoor,
}

impl DatasetArea {
    pub fn new(value: f64, kind: SceneKind) -> Result<Self, DatasetError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(DatasetError::Malformed {
                line: 0,
                message: format!("area/volume must be positive, got {value}"),
            });
        }
        Ok(Self { value, kind })
    }
}

/// Curvature choice as a step function of scene extent: indoor scenes get
/// 10, outdoor scenes get 10 up to 1000 m^2, 200 up to 10000 m^2, and 1000
/// beyond. An explicit override on the command line always wins.
pub fn lambda_for_area(area: &DatasetArea) -> Curvature {
    let lambda = match area.kind {
        SceneKind::Indoor => 10.0,
        SceneKind::Outdoor if area.value <= 1000.0 => 10.0,
        SceneKind::Outdoor if area.value <= 10000.0 => 200.0,
        SceneKind::Outdoor => 1000.0,
    };
    Curvature::new(lambda).expect("table values are positive")
}

/// Parses an ASCII XYZ cloud: one `x y z` row per line, blanks ignored.
pub fn parse_xyz_cloud(text: &str) -> Result<Vec<EuclidPoint3>, DatasetError> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 3 {
            return Err(malformed(
                line,
                format!("expected at least 3 coordinates, got {}", fields.len()),
            ));
        }
        let x = parse_f64(fields[0], line, "cloud point")?;
        let y = parse_f64(fields[1], line, "cloud point")?;
        let z = parse_f64(fields[2], line, "cloud point")?;
        points.push(EuclidPoint3::new(x, y, z));
    }
    Ok(points)
}

/// Parses the vertex list of an ASCII PLY file, taking the first three
/// properties of each vertex as x, y, z.
pub fn parse_ply_ascii_cloud(text: &str) -> Result<Vec<EuclidPoint3>, DatasetError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, magic)) if magic.trim() == "ply" => {}
        _ => return Err(malformed(1, "not a PLY file (missing 'ply' magic)")),
    }
    let mut vertex_count: Option<usize> = None;
    let mut header_done = false;
    for (idx, raw) in lines.by_ref() {
        let line = idx + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        match fields.as_slice() {
            ["format", "ascii", ..] => {}
            ["format", other, ..] => {
                return Err(DatasetError::UnsupportedCloud(format!(
                    "PLY format {other:?}; only ascii is supported"
                )))
            }
            ["element", "vertex", n] => {
                vertex_count = Some(
                    n.parse()
                        .map_err(|_| malformed(line, format!("bad vertex count {n:?}")))?,
                );
            }
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => {}
        }
    }
    if !header_done {
        return Err(malformed(0, "PLY header has no end_header"));
    }
    let count =
        vertex_count.ok_or_else(|| malformed(0, "PLY header declares no vertex element"))?;
    let mut points = Vec::with_capacity(count);
    for (idx, raw) in lines {
        if points.len() == count {
            break;
        }
        let line = idx + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 3 {
            return Err(malformed(line, "vertex row has fewer than 3 values"));
        }
        let x = parse_f64(fields[0], line, "vertex")?;
        let y = parse_f64(fields[1], line, "vertex")?;
        let z = parse_f64(fields[2], line, "vertex")?;
        points.push(EuclidPoint3::new(x, y, z));
    }
    if points.len() != count {
        return Err(malformed(
            0,
            format!(
                "PLY declares {count} vertices but {} were found",
                points.len()
            ),
        ));
    }
    Ok(points)
}

/// Writes records back out in the row-based pose layout (three header
/// lines, then `frame_path X Y Z qW qX qY qZ`), at full precision so a
/// further parse-encode pass reproduces the same motors.
pub fn write_pose_file(records: &[PoseRecord]) -> Result<String, DatasetError> {
    let mut out = String::new();
    out.push_str("Decoded camera poses\n");
    out.push_str("ImageFile, Camera Position [X Y Z W P Q R]\n");
    out.push('\n');
    for rec in records {
        check_frame_id(&rec.frame_id)?;
        if rec.frame_id.contains(char::is_whitespace) {
            return Err(DatasetError::UnwritableFrameId(rec.frame_id.clone()));
        }
        let t = rec.pose.t;
        let [w, x, y, z] = rec.pose.rotation().components();
        writeln!(
            out,
            "{} {} {} {} {} {} {} {}",
            rec.frame_id,
            fmt_f64(t.x),
            fmt_f64(t.y),
            fmt_f64(t.z),
            fmt_f64(w),
            fmt_f64(x),
            fmt_f64(y),
            fmt_f64(z)
        )
        .unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "Visual Landmark Dataset V1\nImageFile, Camera Position [X Y Z W P Q R]\n\n";

    #[test]
    fn parses_identity_record() {
        let text = format!("{HEADER}seq1/frame00001.png 0 0 0 1 0 0 0\n");
        let parse = parse_cambridge(&text, QuatOrder::WFirst).unwrap();
        assert_eq!(parse.records.len(), 1);
        assert!(parse.rejected.is_empty());
        let rec = &parse.records[0];
        assert_eq!(rec.frame_id, "seq1/frame00001.png");
        assert_eq!(rec.pose.t, EuclidPoint3::ORIGIN);
        assert_eq!(rec.pose.rotation().components(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn header_lines_are_skipped_even_if_row_shaped() {
        let text =
            "a 1 2 3 1 0 0 0\nb 1 2 3 1 0 0 0\nc 1 2 3 1 0 0 0\nreal/frame.png 0 0 0 1 0 0 0\n";
        let parse = parse_cambridge(text, QuatOrder::WFirst).unwrap();
        assert_eq!(parse.records.len(), 1);
        assert_eq!(parse.records[0].frame_id, "real/frame.png");
    }

    #[test]
    fn wrong_field_count_names_the_line() {
        let text = format!("{HEADER}seq1/a.png 0 0 0 1 0 0\n");
        match parse_cambridge(&text, QuatOrder::WFirst) {
            Err(DatasetError::Malformed { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn drifted_quaternion_is_renormalized() {
        let text = format!("{HEADER}a.png 0 0 0 1.0005 0 0 0\n");
        let parse = parse_cambridge(&text, QuatOrder::WFirst).unwrap();
        assert_eq!(parse.records[0].pose.rotation().components()[0], 1.0);
    }

    #[test]
    fn far_from_unit_quaternion_is_rejected_not_fatal() {
        let text = format!("{HEADER}a.png 0 0 0 2 0 0 0\nb.png 0 0 0 1 0 0 0\n");
        let parse = parse_cambridge(&text, QuatOrder::WFirst).unwrap();
        assert_eq!(parse.records.len(), 1);
        assert_eq!(parse.rejected.len(), 1);
        assert!(parse.rejected[0].location.contains("a.png"));
    }

    #[test]
    fn quat_order_flag_reorders_components() {
        let text = format!("{HEADER}a.png 0 0 0 0.1 0.2 0.3 0.9273618495495704\n");
        let wlast = parse_cambridge(&text, QuatOrder::WLast).unwrap();
        let q = wlast.records[0].pose.rotation().components();
        assert!((q[0] - 0.9273618495495704).abs() < 1e-12);
        assert!((q[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn duplicate_frame_ids_are_fatal() {
        let text = format!("{HEADER}a.png 0 0 0 1 0 0 0\na.png 0 0 0 1 0 0 0\n");
        assert!(matches!(
            parse_cambridge(&text, QuatOrder::WFirst),
            Err(DatasetError::DuplicateFrameId(_))
        ));
    }

    const IDENTITY_4X4: &str = "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n";

    #[test]
    fn sevenscenes_identity() {
        let frames = vec![("frame-000000".to_string(), IDENTITY_4X4.to_string())];
        let parse = parse_sevenscenes(&frames, false).unwrap();
        assert_eq!(parse.records.len(), 1);
        let rec = &parse.records[0];
        assert_eq!(rec.pose.t, EuclidPoint3::ORIGIN);
        assert_eq!(rec.pose.rotation().components(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn sevenscenes_half_turn_with_translation() {
        let content = "-1 0 0 1\n0 -1 0 0\n0 0 1 2\n0 0 0 1\n";
        let frames = vec![("f".to_string(), content.to_string())];
        let parse = parse_sevenscenes(&frames, false).unwrap();
        let rec = &parse.records[0];
        assert_eq!(rec.pose.t, EuclidPoint3::new(1.0, 0.0, 2.0));
        assert_eq!(rec.pose.rotation().components(), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn sevenscenes_bad_bottom_row_rejects_frame() {
        let content = "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 2\n";
        let frames = vec![
            ("bad".to_string(), content.to_string()),
            ("good".to_string(), IDENTITY_4X4.to_string()),
        ];
        let parse = parse_sevenscenes(&frames, false).unwrap();
        assert_eq!(parse.records.len(), 1);
        assert_eq!(parse.rejected.len(), 1);
        assert_eq!(parse.rejected[0].location, "bad");
    }

    #[test]
    fn sevenscenes_non_orthonormal_rejects_frame() {
        let content = "1 0.5 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n";
        let frames = vec![("skewed".to_string(), content.to_string())];
        let parse = parse_sevenscenes(&frames, false).unwrap();
        assert!(parse.records.is_empty());
        assert_eq!(parse.rejected.len(), 1);
    }

    #[test]
    fn sevenscenes_inversion_flag() {
        // Camera-to-world (R = half turn about z, t = (1, 0, 2)) inverted.
        let content = "-1 0 0 1\n0 -1 0 0\n0 0 1 2\n0 0 0 1\n";
        let frames = vec![("f".to_string(), content.to_string())];
        let parse = parse_sevenscenes(&frames, true).unwrap();
        let rec = &parse.records[0];
        // R^T = R here; -R^T t = (1, 0, -2).
        assert_eq!(rec.pose.t, EuclidPoint3::new(1.0, 0.0, -2.0));
        assert_eq!(rec.pose.rotation().components(), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn motor_csv_round_trip_is_bit_exact() {
        let records = vec![
            MotorRecord {
                frame_id: "seq1/frame00001.png".to_string(),
                motor: Motor::IDENTITY,
                lambda: 10.0,
            },
            MotorRecord {
                frame_id: "seq1/frame00002.png".to_string(),
                motor: Motor::new(0.1, -0.2, 0.3, 0.4, 0.5, -0.6, 0.7, 0.1),
                lambda: 200.0,
            },
            MotorRecord {
                frame_id: "x".to_string(),
                motor: Motor::new(
                    std::f64::consts::FRAC_1_SQRT_2,
                    1.0 / 3.0,
                    -1e-17,
                    0.0,
                    -0.0,
                    2.5e-100,
                    1.0,
                    -7.7,
                ),
                lambda: 1e6,
            },
        ];
        let text = write_motor_file(&records).unwrap();
        assert!(text.starts_with(MOTOR_CSV_HEADER));
        let back = read_motor_file(&text).unwrap();
        assert_eq!(back.len(), records.len());
        for (a, b) in back.iter().zip(&records) {
            assert_eq!(a.frame_id, b.frame_id);
            assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
            for (x, y) in a.motor.coeffs().iter().zip(b.motor.coeffs()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn identity_motor_row_is_ones_and_zeros() {
        let records = vec![MotorRecord {
            frame_id: "f".to_string(),
            motor: Motor::IDENTITY,
            lambda: 10.0,
        }];
        let text = write_motor_file(&records).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("f,1.0000000000000000e0,0.0000000000000000e0"));
    }

    #[test]
    fn missing_column_errors_with_line() {
        let text = format!("{MOTOR_CSV_HEADER}\nf,1,0,0,0,0,0,0,0\n");
        match read_motor_file(&text) {
            Err(DatasetError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_motor_rows_error() {
        let text = format!("{MOTOR_CSV_HEADER}\nf,1,0,0,0,0,0,0,0,10\nf,1,0,0,0,0,0,0,0,10\n");
        assert!(matches!(
            read_motor_file(&text),
            Err(DatasetError::DuplicateFrameId(_))
        ));
    }

    #[test]
    fn prediction_csv_omits_lambda() {
        let records = vec![("f".to_string(), Motor::IDENTITY)];
        let text = write_prediction_file(&records).unwrap();
        assert!(text.starts_with(PREDICTION_CSV_HEADER));
        let back = read_prediction_file(&text).unwrap();
        assert_eq!(back[0].0, "f");
        assert_eq!(back[0].1.coeffs(), Motor::IDENTITY.coeffs());
    }

    #[test]
    fn lambda_table_rows() {
        let cases = [
            (50000.0, SceneKind::Outdoor, 1000.0), // Street
            (8000.0, SceneKind::Outdoor, 200.0),   // Great Court
            (5600.0, SceneKind::Outdoor, 200.0),   // King's
            (4800.0, SceneKind::Outdoor, 200.0),   // St. Mary's
            (2000.0, SceneKind::Outdoor, 200.0),   // Old Hospital
            (875.0, SceneKind::Outdoor, 10.0),     // Shop
            (18.0, SceneKind::Indoor, 10.0),       // Red Kitchen
            (7.5, SceneKind::Indoor, 10.0),        // Office
        ];
        for (value, kind, expected) in cases {
            let area = DatasetArea::new(value, kind).unwrap();
            assert_eq!(lambda_for_area(&area).lambda(), expected);
        }
    }

    #[test]
    fn area_must_be_positive() {
        assert!(DatasetArea::new(0.0, SceneKind::Indoor).is_err());
        assert!(DatasetArea::new(-5.0, SceneKind::Outdoor).is_err());
    }

    #[test]
    fn xyz_cloud_parses_and_skips_blanks() {
        let text = "1 2 3\n\n-4.5 0 2\n";
        let cloud = parse_xyz_cloud(text).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud[1], EuclidPoint3::new(-4.5, 0.0, 2.0));
    }

    #[test]
    fn ply_ascii_cloud_parses_vertices() {
        let text = "ply\nformat ascii 1.0\ncomment synthetic\nelement vertex 2\n\
                    property float x\nproperty float y\nproperty float z\nend_header\n\
                    0.5 1.5 -2.5\n1 2 3\n";
        let cloud = parse_ply_ascii_cloud(text).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud[0], EuclidPoint3::new(0.5, 1.5, -2.5));
    }

    #[test]
    fn binary_ply_is_unsupported() {
        let text = "ply\nformat binary_little_endian 1.0\nend_header\n";
        assert!(matches!(
            parse_ply_ascii_cloud(text),
            Err(DatasetError::UnsupportedCloud(_))
        ));
    }

    #[test]
    fn pose_file_round_trips_through_parser() {
        let q = Quaternion::new(0.5, -0.5, 0.5, -0.5).unwrap();
        let records = vec![PoseRecord {
            frame_id: "seq/f1.png".to_string(),
            pose: Pose::new(EuclidPoint3::new(1.25, -3.5, 0.125), q),
        }];
        let text = write_pose_file(&records).unwrap();
        let back = parse_cambridge(&text, QuatOrder::WFirst).unwrap();
        assert_eq!(back.records, records);
    }
}
