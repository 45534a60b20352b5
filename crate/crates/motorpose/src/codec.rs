//! Conversion between conventional pose labels and 8-coefficient motors.
//!
//! A pose (translation + unit quaternion) becomes the motor `M = T R`,
//! the geometric product of the translation rotor and the rotation rotor.
//! Decoding runs the reverse procedure: transport the origin to read the
//! translation, then strip the translation rotor off the motor to recover
//! the rotation.

use thiserror::Error;

use crate::embed::{
    apply_motor, down_project, translation_rotor, Curvature, EmbedError, EuclidPoint3,
    SpherePoint4, TranslationRotor,
};
use crate::ga::{blade, Multivector16};

/// Quaternions and rotors further than this from unit norm are rejected;
/// anything closer is renormalized on ingestion.
pub const ROTOR_UNIT_TOL: f64 = 1e-6;

/// Orthonormality and determinant tolerance for ingested rotation matrices.
pub const ROTMAT_TOL: f64 = 1e-5;

/// Motors whose scalar norm deviates from one by at least this much are
/// rejected by the decoder instead of renormalized.
pub const MOTOR_REJECT_DEFECT: f64 = 0.5;

/// Decode residual above this, on a motor that satisfied its unit
/// constraint, indicates an internal inconsistency rather than input noise.
pub const DECODE_RESIDUAL_TOL: f64 = 1e-6;

/// Errors from pose/motor conversion.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("quaternion norm {0} deviates from 1 by more than {ROTOR_UNIT_TOL:e}")]
    NonUnitQuaternion(f64),
    #[error("rotor norm {0} deviates from 1 by more than {ROTOR_UNIT_TOL:e}")]
    NonUnitRotor(f64),
    #[error("matrix is not orthonormal within {ROTMAT_TOL:e} (defect {0:e})")]
    NotOrthonormal(f64),
    #[error("matrix determinant {0} is not +1 within {ROTMAT_TOL:e}")]
    NotProperRotation(f64),
    #[error("motor scalar norm deviates from 1 by {0:e}; rejecting (limit {MOTOR_REJECT_DEFECT})")]
    MotorRejected(f64),
    #[error(
        "stripped rotor magnitude {0} is too small; the motor carries no recoverable rotation"
    )]
    DegenerateRotation(f64),
    #[error("motor is identically zero")]
    ZeroMotor,
    #[error("multivector has odd-grade magnitude {0:e}; not a motor")]
    OddGradeResidual(f64),
    #[error(
        "decode residual {0:e} exceeds {DECODE_RESIDUAL_TOL:e} on a unit motor; \
         translation recovery is inconsistent"
    )]
    InconsistentDecode(f64),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// A unit quaternion `w + x i + y j + z k`, scalar part first.
///
/// Construction renormalizes inputs within [`ROTOR_UNIT_TOL`] of unit norm
/// and rejects anything further out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Quaternion {
    pub const IDENTITY: Self = Self {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self, CodecError> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > ROTOR_UNIT_TOL {
            return Err(CodecError::NonUnitQuaternion(norm));
        }
        Ok(Self {
            w: w / norm,
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn components(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn negated(&self) -> Self {
        Self {
            w: -self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Resolves the double cover: flips the sign so that `w > 0`, or if `w`
    /// is zero, so that the first nonzero of `x, y, z` is positive.
    pub fn canonicalized(&self) -> Self {
        let lead = [self.w, self.x, self.y, self.z]
            .into_iter()
            .find(|c| *c != 0.0)
            .unwrap_or(0.0);
        if lead < 0.0 {
            self.negated()
        } else {
            *self
        }
    }

    /// Rotates a vector by the sandwich `q v q*`.
    pub fn rotate(&self, v: &EuclidPoint3) -> EuclidPoint3 {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        // q v: Hamilton product with a pure-vector quaternion.
        let rw = -x * v.x - y * v.y - z * v.z;
        let rx = w * v.x + y * v.z - z * v.y;
        let ry = w * v.y + z * v.x - x * v.z;
        let rz = w * v.z + x * v.y - y * v.x;
        // (q v) q* with q* = (w, -x, -y, -z).
        EuclidPoint3::new(
            -rw * x + rx * w - ry * z + rz * y,
            -rw * y + ry * w - rz * x + rx * z,
            -rw * z + rz * w - rx * y + ry * x,
        )
    }
}

/// A unit rotor of the 3D even subalgebra: scalar plus `e12, e13, e23`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotor3 {
    scalar: f64,
    b12: f64,
    b13: f64,
    b23: f64,
}

impl Rotor3 {
    pub const IDENTITY: Self = Self {
        scalar: 1.0,
        b12: 0.0,
        b13: 0.0,
        b23: 0.0,
    };

    pub fn new(scalar: f64, b12: f64, b13: f64, b23: f64) -> Result<Self, CodecError> {
        let norm = (scalar * scalar + b12 * b12 + b13 * b13 + b23 * b23).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > ROTOR_UNIT_TOL {
            return Err(CodecError::NonUnitRotor(norm));
        }
        Ok(Self {
            scalar: scalar / norm,
            b12: b12 / norm,
            b13: b13 / norm,
            b23: b23 / norm,
        })
    }

    pub fn scalar(&self) -> f64 {
        self.scalar
    }

    pub fn bivector(&self) -> [f64; 3] {
        [self.b12, self.b13, self.b23]
    }

    pub fn reverse(&self) -> Self {
        Self {
            scalar: self.scalar,
            b12: -self.b12,
            b13: -self.b13,
            b23: -self.b23,
        }
    }

    pub fn to_multivector(&self) -> Multivector16 {
        let mut coeffs = [0.0; 16];
        coeffs[blade::SCALAR] = self.scalar;
        coeffs[blade::E12] = self.b12;
        coeffs[blade::E13] = self.b13;
        coeffs[blade::E23] = self.b23;
        Multivector16::new(coeffs)
    }

    /// Rotates a vector by the sandwich `R v R~` through the full algebra.
    pub fn rotate(&self, v: &EuclidPoint3) -> EuclidPoint3 {
        let mv = self.to_multivector();
        let mut vec = [0.0; 16];
        vec[blade::E1] = v.x;
        vec[blade::E2] = v.y;
        vec[blade::E3] = v.z;
        let out = mv * Multivector16::new(vec) * mv.reverse();
        EuclidPoint3::new(
            out.coeff(blade::E1),
            out.coeff(blade::E2),
            out.coeff(blade::E3),
        )
    }
}

/// A row-major 3x3 rotation matrix, validated as orthonormal with
/// determinant +1 on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotMatrix3 {
    m: [[f64; 3]; 3],
}

impl RotMatrix3 {
    pub fn new(m: [[f64; 3]; 3]) -> Result<Self, CodecError> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CodecError::NotOrthonormal(f64::INFINITY));
        }
        // Worst entry of M^T M - I.
        let mut defect = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((dot - target).abs());
            }
        }
        if defect > ROTMAT_TOL {
            return Err(CodecError::NotOrthonormal(defect));
        }
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if (det - 1.0).abs() > ROTMAT_TOL {
            return Err(CodecError::NotProperRotation(det));
        }
        Ok(Self { m })
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.m
    }
}

/// A conventional camera-pose label: translation plus unit quaternion.
///
/// The quaternion is stored with canonical sign so that equal rotations
/// compare equal regardless of which half of the double cover they arrived
/// on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub t: EuclidPoint3,
    q: Quaternion,
}

impl Pose {
    pub const IDENTITY: Self = Self {
        t: EuclidPoint3::ORIGIN,
        q: Quaternion::IDENTITY,
    };

    pub fn new(t: EuclidPoint3, q: Quaternion) -> Self {
        Self {
            t,
            q: q.canonicalized(),
        }
    }

    pub fn rotation(&self) -> Quaternion {
        self.q
    }
}

/// A roto-translation of the spherical model: the even-grade element
/// `alpha + b12 e12 + b13 e13 + b14 e14 + b23 e23 + b24 e24 + b34 e34
/// + gamma e1234`.
///
/// The field order here is the serialization order. Codec-produced motors
/// satisfy `M M~ = 1` to machine precision; motors read from prediction
/// files may not, and their defect is measured rather than assumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motor {
    pub alpha: f64,
    pub b12: f64,
    pub b13: f64,
    pub b14: f64,
    pub b23: f64,
    pub b24: f64,
    pub b34: f64,
    pub gamma: f64,
}

impl Motor {
    pub const IDENTITY: Self = Self {
        alpha: 1.0,
        b12: 0.0,
        b13: 0.0,
        b14: 0.0,
        b23: 0.0,
        b24: 0.0,
        b34: 0.0,
        gamma: 0.0,
    };

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: f64,
        b12: f64,
        b13: f64,
        b14: f64,
        b23: f64,
        b24: f64,
        b34: f64,
        gamma: f64,
    ) -> Self {
        Self::from_coeffs([alpha, b12, b13, b14, b23, b24, b34, gamma])
    }

    /// Builds a motor from coefficients in serialization order.
    pub fn from_coeffs(c: [f64; 8]) -> Self {
        assert!(
            c.iter().all(|v| v.is_finite()),
            "motor coefficients must be finite"
        );
        Self {
            alpha: c[0],
            b12: c[1],
            b13: c[2],
            b14: c[3],
            b23: c[4],
            b24: c[5],
            b34: c[6],
            gamma: c[7],
        }
    }

    /// Coefficients in serialization order.
    pub fn coeffs(&self) -> [f64; 8] {
        [
            self.alpha, self.b12, self.b13, self.b14, self.b23, self.b24, self.b34, self.gamma,
        ]
    }

    pub fn from_translation(t: &TranslationRotor) -> Self {
        let [b14, b24, b34] = t.bivector();
        Self {
            alpha: t.scalar(),
            b12: 0.0,
            b13: 0.0,
            b14,
            b23: 0.0,
            b24,
            b34,
            gamma: 0.0,
        }
    }

    pub fn from_rotor(r: &Rotor3) -> Self {
        let [b12, b13, b23] = r.bivector();
        Self {
            alpha: r.scalar(),
            b12,
            b13,
            b14: 0.0,
            b23,
            b24: 0.0,
            b34: 0.0,
            gamma: 0.0,
        }
    }

    pub fn to_multivector(&self) -> Multivector16 {
        let mut coeffs = [0.0; 16];
        coeffs[blade::SCALAR] = self.alpha;
        coeffs[blade::E12] = self.b12;
        coeffs[blade::E13] = self.b13;
        coeffs[blade::E14] = self.b14;
        coeffs[blade::E23] = self.b23;
        coeffs[blade::E24] = self.b24;
        coeffs[blade::E34] = self.b34;
        coeffs[blade::E1234] = self.gamma;
        Multivector16::new(coeffs)
    }

    /// Extracts a motor from an even-grade multivector, rejecting inputs
    /// with odd-grade magnitude above rounding noise.
    pub fn from_multivector(mv: &Multivector16) -> Result<Self, CodecError> {
        let odd = [
            blade::E1,
            blade::E2,
            blade::E3,
            blade::E4,
            blade::E123,
            blade::E124,
            blade::E134,
            blade::E234,
        ]
        .iter()
        .map(|&i| mv.coeff(i) * mv.coeff(i))
        .sum::<f64>()
        .sqrt();
        if odd > 1e-9 * mv.norm().max(1.0) {
            return Err(CodecError::OddGradeResidual(odd));
        }
        Ok(Self {
            alpha: mv.coeff(blade::SCALAR),
            b12: mv.coeff(blade::E12),
            b13: mv.coeff(blade::E13),
            b14: mv.coeff(blade::E14),
            b23: mv.coeff(blade::E23),
            b24: mv.coeff(blade::E24),
            b34: mv.coeff(blade::E34),
            gamma: mv.coeff(blade::E1234),
        })
    }

    pub fn reverse(&self) -> Self {
        Self {
            alpha: self.alpha,
            b12: -self.b12,
            b13: -self.b13,
            b14: -self.b14,
            b23: -self.b23,
            b24: -self.b24,
            b34: -self.b34,
            gamma: self.gamma,
        }
    }

    pub fn negated(&self) -> Self {
        Self::from_coeffs(self.coeffs().map(|c| -c))
    }

    /// Geometric product of two motors (the even subalgebra is closed).
    pub fn geometric_product(&self, other: &Self) -> Self {
        Self::from_multivector(&(self.to_multivector() * other.to_multivector()))
            .expect("product of even elements is even")
    }

    /// The scalar part of `M M~`: the squared Euclidean norm of the eight
    /// coefficients, since every blade here squares to -1 under reversion
    /// pairing except the scalar and pseudoscalar which square to +1.
    pub fn scalar_norm_squared(&self) -> f64 {
        self.coeffs().iter().map(|c| c * c).sum()
    }

    /// `|<M M~>_0 - 1|`: how far the motor is from the unit constraint in
    /// its scalar part.
    pub fn unit_defect(&self) -> f64 {
        (self.scalar_norm_squared() - 1.0).abs()
    }

    /// The `e1234` coefficient of `M M~`. Zero for any genuine
    /// roto-translation; nonzero values mean the eight coefficients do not
    /// describe a rigid motion at all.
    pub fn pseudoscalar_defect(&self) -> f64 {
        let p = self.to_multivector() * self.to_multivector().reverse();
        p.coeff(blade::E1234)
    }

    /// Scales the motor so that `<M M~>_0 = 1`.
    pub fn normalized(&self) -> Result<Self, CodecError> {
        let n = self.scalar_norm_squared().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(CodecError::ZeroMotor);
        }
        Ok(Self::from_coeffs(self.coeffs().map(|c| c / n)))
    }
}

/// The fixed quaternion-rotor isomorphism: `i -> -e23`, `j -> e13`,
/// `k -> -e12`, so `R = w - x e23 + y e13 - z e12`. Under it the rotor
/// sandwich `R v R~` reproduces the quaternion action `q v q*`.
pub fn quat_to_rotor(q: &Quaternion) -> Rotor3 {
    Rotor3 {
        scalar: q.w(),
        b12: -q.z(),
        b13: q.y(),
        b23: -q.x(),
    }
}

/// Inverse of [`quat_to_rotor`].
pub fn rotor_to_quat(r: &Rotor3) -> Quaternion {
    let [b12, b13, b23] = r.bivector();
    Quaternion {
        w: r.scalar(),
        x: -b23,
        y: b13,
        z: -b12,
    }
}

/// Extracts the unit quaternion of a rotation matrix using the max-trace
/// branch selection, which stays stable near 180-degree rotations. The
/// result carries canonical sign.
pub fn rotmat_to_quat(m: &RotMatrix3) -> Quaternion {
    let r = m.rows();
    let trace = r[0][0] + r[1][1] + r[2][2];
    let (w, x, y, z) = if trace >= r[0][0] && trace >= r[1][1] && trace >= r[2][2] {
        let s = (1.0 + trace).sqrt() * 2.0;
        (
            0.25 * s,
            (r[2][1] - r[1][2]) / s,
            (r[0][2] - r[2][0]) / s,
            (r[1][0] - r[0][1]) / s,
        )
    } else if r[0][0] >= r[1][1] && r[0][0] >= r[2][2] {
        let s = (1.0 + r[0][0] - r[1][1] - r[2][2]).sqrt() * 2.0;
        (
            (r[2][1] - r[1][2]) / s,
            0.25 * s,
            (r[0][1] + r[1][0]) / s,
            (r[0][2] + r[2][0]) / s,
        )
    } else if r[1][1] >= r[2][2] {
        let s = (1.0 + r[1][1] - r[0][0] - r[2][2]).sqrt() * 2.0;
        (
            (r[0][2] - r[2][0]) / s,
            (r[0][1] + r[1][0]) / s,
            0.25 * s,
            (r[1][2] + r[2][1]) / s,
        )
    } else {
        let s = (1.0 + r[2][2] - r[0][0] - r[1][1]).sqrt() * 2.0;
        (
            (r[1][0] - r[0][1]) / s,
            (r[0][2] + r[2][0]) / s,
            (r[1][2] + r[2][1]) / s,
            0.25 * s,
        )
    };
    let norm = (w * w + x * x + y * y + z * z).sqrt();
    Quaternion {
        w: w / norm,
        x: x / norm,
        y: y / norm,
        z: z / norm,
    }
    .canonicalized()
}

/// Encodes a pose as the motor `M = T R`, sign-canonicalized so that
/// training targets are unique representatives of the double cover.
pub fn encode_pose(pose: &Pose, c: Curvature) -> Motor {
    let raw = encode_pose_raw(&pose.t, &pose.rotation(), c);
    canonicalize_motor(&raw).expect("encoded motor is unit, never zero")
}

/// The motor product `T R` before sign canonicalization, taking the
/// quaternion as-is. Exposed so the double-cover relationship between `q`
/// and `-q` encodings stays testable.
pub fn encode_pose_raw(t: &EuclidPoint3, q: &Quaternion, c: Curvature) -> Motor {
    let translation = Motor::from_translation(&translation_rotor(t, c));
    let rotation = Motor::from_rotor(&quat_to_rotor(q));
    translation.geometric_product(&rotation)
}

/// Flips the motor sign to the canonical representative: positive `alpha`,
/// or if `alpha` is zero, a positive first nonzero coefficient in
/// serialization order. Idempotent.
pub fn canonicalize_motor(m: &Motor) -> Result<Motor, CodecError> {
    let lead = m.coeffs().into_iter().find(|c| *c != 0.0);
    match lead {
        None => Err(CodecError::ZeroMotor),
        Some(c) if c < 0.0 => Ok(m.negated()),
        Some(_) => Ok(*m),
    }
}

/// A decoded motor: the recovered pose plus the diagnostics the decoder
/// measured along the way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedPose {
    pub pose: Pose,
    /// The recovered rotation as a rotor, for rotational-error evaluation.
    /// Carries the sign the motor decoded to (the error metric distinguishes
    /// `R` from `-R`), whereas `pose.rotation()` is the canonical-sign label
    /// representative.
    pub rotor: Rotor3,
    /// `|<M M~>_0 - 1|` of the input before renormalization.
    pub unit_defect: f64,
    /// Magnitude of the stripped motor outside the 3D rotor components
    /// `{1, e12, e13, e23}`.
    pub residual: f64,
}

/// Recovers the pose from a motor in four steps: transport the origin
/// (`D = M e4 M~`), project the displacement down to Euclidean space, build
/// the translation rotor of that displacement, and strip it off the motor
/// (`R = T~ M`) to leave the rotation.
///
/// Motors within [`MOTOR_REJECT_DEFECT`] of the unit constraint are
/// renormalized first and the defect reported; anything further out is
/// rejected.
pub fn decode_motor(m: &Motor, c: Curvature) -> Result<DecodedPose, CodecError> {
    let unit_defect = m.unit_defect();
    if unit_defect >= MOTOR_REJECT_DEFECT || !unit_defect.is_finite() {
        return Err(CodecError::MotorRejected(unit_defect));
    }
    let motor = m.normalized()?;

    let displaced = apply_motor(&motor, &SpherePoint4::ORIGIN)?;
    let d = down_project(&displaced.point, c)?;
    let t_d = translation_rotor(&d, c);
    let stripped = Motor::from_translation(&t_d.reverse()).geometric_product(&motor);

    let residual = (stripped.b14 * stripped.b14
        + stripped.b24 * stripped.b24
        + stripped.b34 * stripped.b34
        + stripped.gamma * stripped.gamma)
        .sqrt();
    let input_was_unit = unit_defect <= 1e-9 && m.pseudoscalar_defect().abs() <= 1e-9;
    if input_was_unit && residual > DECODE_RESIDUAL_TOL {
        return Err(CodecError::InconsistentDecode(residual));
    }
    // The stripped element satisfies <R R~>_0 = 1, so the rotor components
    // carry norm sqrt(1 - residual^2): renormalizing them loses nothing the
    // residual diagnostic does not already report. Only a motor whose
    // energy sits mostly outside the rotor components has no rotation to
    // recover.
    let rotor_norm = (stripped.alpha * stripped.alpha
        + stripped.b12 * stripped.b12
        + stripped.b13 * stripped.b13
        + stripped.b23 * stripped.b23)
        .sqrt();
    if rotor_norm <= 0.5 {
        return Err(CodecError::DegenerateRotation(rotor_norm));
    }
    let rotor = Rotor3 {
        scalar: stripped.alpha / rotor_norm,
        b12: stripped.b12 / rotor_norm,
        b13: stripped.b13 / rotor_norm,
        b23: stripped.b23 / rotor_norm,
    };
    let q = rotor_to_quat(&rotor);
    Ok(DecodedPose {
        pose: Pose::new(d, q),
        rotor,
        unit_defect,
        residual,
    })
}
