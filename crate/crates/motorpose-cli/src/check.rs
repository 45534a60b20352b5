//! Seeded invariant checker: re-runs the library's property families on
//! random inputs and, when a motor CSV is supplied, on its records.
//!
//! The report is a pure function of (seed, input bytes): families run in a
//! fixed order off one seeded stream and every number is formatted
//! explicitly, so repeated runs are byte-identical.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use motorpose::codec::{decode_motor, encode_pose, quat_to_rotor, Motor, Pose, Quaternion};
use motorpose::embed::{
    apply_motor, down_project, translation_rotor, up_project, Curvature, EuclidPoint3, SpherePoint4,
};
use motorpose::ga::{Multivector16, MAX_GRADE};
use motorpose::io::MotorRecord;
use motorpose::metrics::rotational_error;

const LAMBDAS: [f64; 3] = [10.0, 200.0, 1000.0];

/// Outcome of one invariant family.
pub struct FamilyResult {
    pub name: &'static str,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
    /// Where the worst defect occurred, when that is worth naming.
    pub detail: Option<String>,
}

impl FamilyResult {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

fn random_mv(rng: &mut ChaCha8Rng) -> Multivector16 {
    let mut coeffs = [0.0; 16];
    for c in coeffs.iter_mut() {
        *c = rng.random_range(-1.0..1.0);
    }
    Multivector16::new(coeffs)
}

fn random_unit_quat(rng: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let w: f64 = rng.random_range(-1.0..1.0);
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        let z: f64 = rng.random_range(-1.0..1.0);
        let n2 = w * w + x * x + y * y + z * z;
        if (0.04..=1.0).contains(&n2) {
            let n = n2.sqrt();
            return Quaternion::new(w / n, x / n, y / n, z / n).unwrap();
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, max_norm: f64) -> EuclidPoint3 {
    let bound = max_norm / 3.0f64.sqrt();
    EuclidPoint3::new(
        rng.random_range(-bound..bound),
        rng.random_range(-bound..bound),
        rng.random_range(-bound..bound),
    )
}

fn quat_angle_deg(a: &Quaternion, b: &Quaternion) -> f64 {
    let [aw, ax, ay, az] = a.components();
    let b = if aw * b.w() + ax * b.x() + ay * b.y() + az * b.z() < 0.0 {
        b.negated()
    } else {
        *b
    };
    let [bw, bx, by, bz] = b.components();
    let diff =
        ((aw - bw).powi(2) + (ax - bx).powi(2) + (ay - by).powi(2) + (az - bz).powi(2)).sqrt();
    let sum =
        ((aw + bw).powi(2) + (ax + bx).powi(2) + (ay + by).powi(2) + (az + bz).powi(2)).sqrt();
    (4.0 * f64::atan2(diff, sum)).to_degrees()
}

fn rel_defect(lhs: &Multivector16, rhs: &Multivector16) -> f64 {
    (*lhs - *rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0)
}

/// Runs every family; `records` adds the file-data families.
pub fn run_all(seed: u64, records: Option<&[MotorRecord]>) -> Vec<FamilyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = vec![
        algebra_associativity(&mut rng),
        algebra_reversion(&mut rng),
        algebra_cyclicity(&mut rng),
        algebra_grade_completeness(&mut rng),
        algebra_anticommutation(),
        embed_unit_norm(&mut rng),
        embed_round_trip(&mut rng),
        embed_rotor_isometry(&mut rng),
        embed_origin_transport(&mut rng),
        codec_round_trip(&mut rng),
        codec_unit_constraint(&mut rng),
        codec_decode_residual(&mut rng),
        metrics_rotation_range(&mut rng),
    ];
    if let Some(records) = records {
        results.push(file_unit_constraint(records));
        results.push(file_decode_residual(records));
    }
    results
}

/// Renders the fixed-layout report. Exit-code decisions belong to the
/// caller; this only says what was measured.
pub fn render_report(seed: u64, input: Option<(&str, usize)>, results: &[FamilyResult]) -> String {
    let mut out = String::new();
    writeln!(out, "motorpose check").unwrap();
    writeln!(out, "seed: {seed}").unwrap();
    match input {
        Some((path, n)) => writeln!(out, "input: {path} ({n} records)").unwrap(),
        None => writeln!(out, "input: none").unwrap(),
    }
    let mut failed = 0;
    for r in results {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        if !r.passed() {
            failed += 1;
        }
        write!(
            out,
            "{status} {:<34} cases={:<6} worst={:<10} tol={:.1e}",
            r.name,
            r.cases,
            format!("{:.2e}", r.worst),
            r.tolerance
        )
        .unwrap();
        if let Some(detail) = &r.detail {
            write!(out, "  [{detail}]").unwrap();
        }
        out.push('\n');
    }
    if failed == 0 {
        writeln!(out, "result: PASS ({} families)", results.len()).unwrap();
    } else {
        writeln!(out, "result: FAIL ({failed} of {} families)", results.len()).unwrap();
    }
    out
}

fn algebra_associativity(rng: &mut ChaCha8Rng) -> FamilyResult {
    let cases = 2000;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (a, b, c) = (random_mv(rng), random_mv(rng), random_mv(rng));
        worst = worst.max(rel_defect(&((a * b) * c), &(a * (b * c))));
    }
    FamilyResult {
        name: "algebra/associativity",
        cases,
        worst,
        tolerance: 1e-12,
        detail: None,
    }
}

fn algebra_reversion(rng: &mut ChaCha8Rng) -> FamilyResult {
    let cases = 2000;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (a, b) = (random_mv(rng), random_mv(rng));
        worst = worst.max(rel_defect(&(a * b).reverse(), &(b.reverse() * a.reverse())));
    }
    FamilyResult {
        name: "algebra/reversion-antiautomorphism",
        cases,
        worst,
        tolerance: 1e-12,
        detail: None,
    }
}

fn algebra_cyclicity(rng: &mut ChaCha8Rng) -> FamilyResult {
    let cases = 2000;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (a, b) = (random_mv(rng), random_mv(rng));
        let ab = (a * b).scalar_part();
        let ba = (b * a).scalar_part();
        worst = worst.max((ab - ba).abs() / ab.abs().max(1.0));
    }
    FamilyResult {
        name: "algebra/scalar-cyclicity",
        cases,
        worst,
        tolerance: 1e-12,
        detail: None,
    }
}

fn algebra_grade_completeness(rng: &mut ChaCha8Rng) -> FamilyResult {
    let cases = 2000;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let a = random_mv(rng);
        let mut sum = Multivector16::ZERO;
        for k in 0..=MAX_GRADE {
            sum = sum + a.grade_project(k).unwrap();
        }
        worst = worst.max((sum - a).norm());
    }
    FamilyResult {
        name: "algebra/grade-completeness",
        cases,
        worst,
        tolerance: 0.0,
        detail: None,
    }
}

fn algebra_anticommutation() -> FamilyResult {
    let basis = [
        Multivector16::E1,
        Multivector16::E2,
        Multivector16::E3,
        Multivector16::E4,
    ];
    let mut worst = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let defect = if i == j {
                (*a * *b - Multivector16::ONE).norm()
            } else {
                (*a * *b + *b * *a).norm()
            };
            worst = worst.max(defect);
        }
    }
    FamilyResult {
        name: "algebra/basis-anticommutation",
        cases: 16,
        worst,
        tolerance: 0.0,
        detail: None,
    }
}

fn embed_unit_norm(rng: &mut ChaCha8Rng) -> FamilyResult {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for lambda in [1.0, 10.0, 200.0, 1000.0] {
        let c = Curvature::new(lambda).unwrap();
        for _ in 0..500 {
            let x = random_point(rng, 10.0 * lambda);
            worst = worst.max((up_project(&x, c).norm() - 1.0).abs());
            cases += 1;
        }
    }
    FamilyResult {
        name: "embed/unit-norm",
        cases,
        worst,
        tolerance: 1e-12,
        detail: None,
    }
}

fn embed_round_trip(rng: &mut ChaCha8Rng) -> FamilyResult {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for lambda in [1.0, 10.0, 200.0, 1000.0] {
        let c = Curvature::new(lambda).unwrap();
        for _ in 0..500 {
            let x = random_point(rng, 100.0 * lambda);
            let back = down_project(&up_project(&x, c), c).unwrap();
            worst = worst.max(back.sub(&x).norm() / (1.0 + x.norm()));
            cases += 1;
        }
    }
    FamilyResult {
        name: "embed/round-trip",
        cases,
        worst,
        tolerance: 1e-12,
        detail: None,
    }
}

fn embed_rotor_isometry(rng: &mut ChaCha8Rng) -> FamilyResult {
    let cases = 500;
    let mut worst = 0.0f64;
    for i in 0..cases {
        let lambda = LAMBDAS[i % LAMBDAS.len()];
        let c = Curvature::new(lambda).unwrap();
        let m = encode_pose(
            &Pose::new(random_point(rng, lambda), random_unit_quat(rng)),
            c,
        );
        let x = up_project(&random_point(rng, lambda), c);
        let y = up_project(&random_point(rng, lambda), c);
        let mx = apply_motor(&m, &x).unwrap().point;
        let my = apply_motor(&m, &y).unwrap().point;
        worst = worst.max((mx.dot(&my) - x.dot(&y)).abs());
    }
    FamilyResult {
        name: "embed/rotor-isometry",
        cases,
        worst,
        tolerance: 1e-10,
        detail: None,
    }
}

fn embed_origin_transport(rng: &mut ChaCha8Rng) -> FamilyResult {
    let cases = 500;
    let mut worst = 0.0f64;
    for i in 0..cases {
        let lambda = LAMBDAS[i % LAMBDAS.len()];
        let c = Curvature::new(lambda).unwrap();
        let a = random_point(rng, 2.0 * lambda);
        let m = Motor::from_translation(&translation_rotor(&a, c));
        let got = apply_motor(&m, &SpherePoint4::ORIGIN)
            .unwrap()
            .point
            .components();
        let want = up_project(&a, c).components();
        for k in 0..4 {
            worst = worst.max((got[k] - want[k]).abs());
        }
    }
    FamilyResult {
        name: "embed/origin-transport",
        cases,
        worst,
        tolerance: 1e-12,
        detail: None,
    }
}

struct CodecSamples {
    pos: f64,
    rot: f64,
    unit: f64,
    residual: f64,
}

fn codec_samples(rng: &mut ChaCha8Rng, cases: usize) -> CodecSamples {
    let mut out = CodecSamples {
        pos: 0.0,
        rot: 0.0,
        unit: 0.0,
        residual: 0.0,
    };
    for i in 0..cases {
        let lambda = LAMBDAS[i % LAMBDAS.len()];
        let c = Curvature::new(lambda).unwrap();
        let pose = Pose::new(random_point(rng, lambda / 2.0), random_unit_quat(rng));
        let motor = encode_pose(&pose, c);
        out.unit = out.unit.max(motor.unit_defect());
        let decoded = decode_motor(&motor, c).unwrap();
        out.pos = out.pos.max(decoded.pose.t.sub(&pose.t).norm());
        out.rot = out
            .rot
            .max(quat_angle_deg(&decoded.pose.rotation(), &pose.rotation()));
        out.residual = out.residual.max(decoded.residual);
    }
    out
}

fn codec_round_trip(rng: &mut ChaCha8Rng) -> FamilyResult {
    let cases = 300;
    let s = codec_samples(rng, cases);
    FamilyResult {
        name: "codec/round-trip",
        cases,
        worst: s.pos.max(s.rot),
        tolerance: 1e-9,
        detail: None,
    }
}

fn codec_unit_constraint(rng: &mut ChaCha8Rng) -> FamilyResult {
    let cases = 300;
    let s = codec_samples(rng, cases);
    FamilyResult {
        name: "codec/unit-constraint",
        cases,
        worst: s.unit,
        tolerance: 1e-12,
        detail: None,
    }
}

fn codec_decode_residual(rng: &mut ChaCha8Rng) -> FamilyResult {
    let cases = 300;
    let s = codec_samples(rng, cases);
    FamilyResult {
        name: "codec/decode-residual",
        cases,
        worst: s.residual,
        tolerance: 1e-10,
        detail: None,
    }
}

fn metrics_rotation_range(rng: &mut ChaCha8Rng) -> FamilyResult {
    let cases = 1000;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let a = quat_to_rotor(&random_unit_quat(rng));
        let b = quat_to_rotor(&random_unit_quat(rng));
        for err in [
            rotational_error(&a, &b),
            rotational_error(&a, &a),
            rotational_error(&a, &a.reverse()),
        ] {
            // Distance outside [0, 180], which must be identically zero.
            worst = worst.max((-err).max(err - 180.0).max(0.0));
            if err.is_nan() {
                worst = f64::INFINITY;
            }
        }
    }
    FamilyResult {
        name: "metrics/rotation-error-range",
        cases,
        worst,
        tolerance: 0.0,
        detail: None,
    }
}

fn file_unit_constraint(records: &[MotorRecord]) -> FamilyResult {
    let mut worst = 0.0f64;
    let mut detail = None;
    for rec in records {
        let defect = rec
            .motor
            .unit_defect()
            .max(rec.motor.pseudoscalar_defect().abs());
        if defect > worst {
            worst = defect;
            detail = Some(format!("frame {}", rec.frame_id));
        }
    }
    FamilyResult {
        name: "file/unit-constraint",
        cases: records.len(),
        worst,
        tolerance: 1e-6,
        detail,
    }
}

fn file_decode_residual(records: &[MotorRecord]) -> FamilyResult {
    let mut worst = 0.0f64;
    let mut detail = None;
    let mut cases = 0;
    for rec in records {
        // Residual is only meaningful for motors that satisfy the unit
        // constraint; defective ones already fail the family above.
        if rec.motor.unit_defect() > 1e-9 || rec.motor.pseudoscalar_defect().abs() > 1e-9 {
            continue;
        }
        cases += 1;
        let c = match Curvature::new(rec.lambda) {
            Ok(c) => c,
            Err(_) => {
                worst = f64::INFINITY;
                detail = Some(format!("frame {}: bad lambda {}", rec.frame_id, rec.lambda));
                continue;
            }
        };
        match decode_motor(&rec.motor, c) {
            Ok(decoded) => {
                if decoded.residual > worst {
                    worst = decoded.residual;
                    detail = Some(format!("frame {}", rec.frame_id));
                }
            }
            Err(e) => {
                worst = f64::INFINITY;
                detail = Some(format!("frame {}: {e}", rec.frame_id));
            }
        }
    }
    FamilyResult {
        name: "file/decode-residual",
        cases,
        worst,
        tolerance: 1e-10,
        detail,
    }
}
