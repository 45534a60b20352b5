//! The 1D-up spherical model of 3D Euclidean geometry.
//!
//! A Euclidean point is embedded on the unit sphere of the 4D space spanned
//! by `e1..e4`, with `e4` playing the role of the origin. Translations become
//! rotors `(lambda + a e4) / sqrt(lambda^2 + |a|^2)`, where the curvature
//! scale `lambda` controls how noticeable the sphere's bending is: as
//! `lambda` grows the model flattens toward ordinary Euclidean space.

use thiserror::Error;

use crate::codec::Motor;
use crate::ga::{blade, Multivector16};

/// Embedded points whose norm deviates from one by more than this are
/// produced only by motors that violate their own unit constraint.
pub const SPHERE_UNIT_TOL: f64 = 1e-9;

/// Below this distance from the antipode `-e4`, down-projection divides by
/// a value so small that the result carries no useful precision.
pub const ANTIPODE_TOL: f64 = 1e-12;

/// Motors whose unit defect is below this are silently renormalized inside
/// [`apply_motor`]; larger defects are passed through as-is.
pub const MOTOR_RENORM_TOL: f64 = 1e-6;

/// Errors from the spherical embedding operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("curvature must be positive and finite, got {0}")]
    InvalidCurvature(f64),
    #[error("sphere point must be unit norm within {SPHERE_UNIT_TOL:e}, got norm {0}")]
    NotUnit(f64),
    #[error("point at infinity: embedded point is within {ANTIPODE_TOL:e} of the antipode -e4")]
    DegeneratePoint,
    #[error("sandwich output has non-grade-1 magnitude {0:e}; motor is not a versor")]
    InvalidMotor(f64),
}

/// Curvature scale of the spherical model, in the length unit of the data
/// (meters for camera-pose work). Strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature {
    lambda: f64,
}

impl Curvature {
    pub fn new(lambda: f64) -> Result<Self, EmbedError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(EmbedError::InvalidCurvature(lambda));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// A 3D Euclidean point or displacement, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclidPoint3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EuclidPoint3 {
    pub const ORIGIN: Self = Self {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        assert!(
            x.is_finite() && y.is_finite() && z.is_finite(),
            "point components must be finite"
        );
        Self { x, y, z }
    }

    pub fn norm_squared(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Component-wise difference, as a displacement.
    pub fn sub(&self, other: &Self) -> Self {
        Self {
            x: self.x - other.x,
            y: self.y - other.y,
            z: self.z - other.z,
        }
    }
}

/// A unit vector of the 4D space: the spherical image of a Euclidean point.
///
/// Coefficients of `e1, e2, e3, e4`. Points produced by [`up_project`] are
/// unit to machine precision; images under [`apply_motor`] inherit whatever
/// distortion the motor's unit defect implies, so `norm` is exposed for
/// diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint4 {
    v: [f64; 4],
}

impl SpherePoint4 {
    /// The embedded origin, `e4`.
    pub const ORIGIN: Self = Self {
        v: [0.0, 0.0, 0.0, 1.0],
    };

    /// Builds a sphere point, enforcing the unit-norm invariant.
    pub fn new(v1: f64, v2: f64, v3: f64, v4: f64) -> Result<Self, EmbedError> {
        let norm = (v1 * v1 + v2 * v2 + v3 * v3 + v4 * v4).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > SPHERE_UNIT_TOL {
            return Err(EmbedError::NotUnit(norm));
        }
        Ok(Self {
            v: [v1, v2, v3, v4],
        })
    }

    pub fn components(&self) -> [f64; 4] {
        self.v
    }

    pub fn norm(&self) -> f64 {
        self.v.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Euclidean inner product with another sphere point.
    pub fn dot(&self, other: &Self) -> f64 {
        self.v.iter().zip(other.v.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn to_multivector(&self) -> Multivector16 {
        let mut coeffs = [0.0; 16];
        coeffs[blade::E1] = self.v[0];
        coeffs[blade::E2] = self.v[1];
        coeffs[blade::E3] = self.v[2];
        coeffs[blade::E4] = self.v[3];
        Multivector16::new(coeffs)
    }
}

/// The rotor effecting a Euclidean translation in the spherical model:
/// scalar plus `e14, e24, e34` bivector components, unit by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationRotor {
    scalar: f64,
    b14: f64,
    b24: f64,
    b34: f64,
}

impl TranslationRotor {
    pub const IDENTITY: Self = Self {
        scalar: 1.0,
        b14: 0.0,
        b24: 0.0,
        b34: 0.0,
    };

    pub fn scalar(&self) -> f64 {
        self.scalar
    }

    pub fn bivector(&self) -> [f64; 3] {
        [self.b14, self.b24, self.b34]
    }

    pub fn reverse(&self) -> Self {
        Self {
            scalar: self.scalar,
            b14: -self.b14,
            b24: -self.b24,
            b34: -self.b34,
        }
    }

    pub fn to_multivector(&self) -> Multivector16 {
        let mut coeffs = [0.0; 16];
        coeffs[blade::SCALAR] = self.scalar;
        coeffs[blade::E14] = self.b14;
        coeffs[blade::E24] = self.b24;
        coeffs[blade::E34] = self.b34;
        Multivector16::new(coeffs)
    }
}

/// Embeds a Euclidean point on the unit 4-sphere:
/// `(2 lambda x + (lambda^2 - |x|^2) e4) / (lambda^2 + |x|^2)`.
///
/// The origin maps to `e4`; points at distance `lambda` map to the equator.
pub fn up_project(x: &EuclidPoint3, c: Curvature) -> SpherePoint4 {
    let lambda = c.lambda();
    let r2 = x.norm_squared();
    let denom = lambda * lambda + r2;
    let vec_scale = 2.0 * lambda / denom;
    SpherePoint4 {
        v: [
            vec_scale * x.x,
            vec_scale * x.y,
            vec_scale * x.z,
            (lambda * lambda - r2) / denom,
        ],
    }
}

/// Inverse of [`up_project`]: `x = lambda (v1, v2, v3) / (1 + v4)`.
///
/// Fails on (near-)antipodal input, which corresponds to the point at
/// infinity of the flat model.
pub fn down_project(point: &SpherePoint4, c: Curvature) -> Result<EuclidPoint3, EmbedError> {
    let [v1, v2, v3, v4] = point.v;
    let denom = 1.0 + v4;
    if denom < ANTIPODE_TOL {
        return Err(EmbedError::DegeneratePoint);
    }
    let s = c.lambda() / denom;
    Ok(EuclidPoint3 {
        x: s * v1,
        y: s * v2,
        z: s * v3,
    })
}

/// The rotor `(lambda + a e4) / sqrt(lambda^2 + |a|^2)` that translates
/// embedded points by `a`.
pub fn translation_rotor(a: &EuclidPoint3, c: Curvature) -> TranslationRotor {
    let lambda = c.lambda();
    let s = (lambda * lambda + a.norm_squared()).sqrt();
    TranslationRotor {
        scalar: lambda / s,
        b14: a.x / s,
        b24: a.y / s,
        b34: a.z / s,
    }
}

/// A sphere point moved by a motor sandwich, with the magnitude of the
/// non-grade-1 leakage as a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichImage {
    pub point: SpherePoint4,
    /// Euclidean norm of the sandwich output outside grade 1. Pure rounding
    /// noise for any even-grade motor.
    pub residual: f64,
}

/// Applies a motor to an embedded point by sandwiching: `M X M~`.
///
/// Motors with unit defect below [`MOTOR_RENORM_TOL`] are renormalized
/// first; beyond that the distortion is passed through to the output, whose
/// norm then deviates from one accordingly.
pub fn apply_motor(m: &Motor, x: &SpherePoint4) -> Result<SandwichImage, EmbedError> {
    let s0 = m.scalar_norm_squared();
    let mv = if (s0 - 1.0).abs() < MOTOR_RENORM_TOL && s0 > 0.0 {
        m.to_multivector() * (1.0 / s0.sqrt())
    } else {
        m.to_multivector()
    };
    let sandwich = mv * x.to_multivector() * mv.reverse();
    let residual = sandwich.norm_excluding_grade(1);
    if residual > 1e-6 {
        return Err(EmbedError::InvalidMotor(residual));
    }
    let point = SpherePoint4 {
        v: [
            sandwich.coeff(blade::E1),
            sandwich.coeff(blade::E2),
            sandwich.coeff(blade::E3),
            sandwich.coeff(blade::E4),
        ],
    };
    Ok(SandwichImage { point, residual })
}

/// Relative shrinkage `|t|^2 / (lambda^2 + |t|^2)` between a camera trace
/// drawn in the spherical model (rescaled by `lambda/2` so that it converges
/// to the Euclidean trace as `lambda` grows) and the Euclidean trace itself.
///
/// Zero at the origin, strictly decreasing in `lambda` for fixed `t != 0`.
pub fn trace_deviation(t: &EuclidPoint3, c: Curvature) -> f64 {
    let r2 = t.norm_squared();
    r2 / (c.lambda() * c.lambda() + r2)
}

/// The spherical trace point `t * lambda^2 / (lambda^2 + |t|^2)`: the
/// `lambda/2`-rescaled vector part of the embedding, plottable against the
/// Euclidean trace.
pub fn spherical_trace(t: &EuclidPoint3, c: Curvature) -> EuclidPoint3 {
    let s = 1.0 - trace_deviation(t, c);
    EuclidPoint3 {
        x: t.x * s,
        y: t.y * s,
        z: t.z * s,
    }
}
