//! Dense multivector arithmetic for the geometric algebra G(4,0).
//!
//! Basis vectors `e1..e4` all square to `+1`. A multivector carries 16
//! coefficients in the canonical blade order
//!
//! ```text
//! index : 0  1   2   3   4   5    6    7    8    9    10   11    12    13    14    15
//! blade : 1  e1  e2  e3  e4  e12  e13  e14  e23  e24  e34  e123  e124  e134  e234  e1234
//! ```
//!
//! This order is a public contract: motor serialization depends on the
//! relative position of the grade-{0,2,4} blades. Each blade is identified
//! internally by the bitset of its constituent basis vectors (`e1` = bit 0,
//! ..., `e4` = bit 3); products are computed by XOR-ing bitsets and counting
//! the transpositions needed to sort the concatenated factors.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Number of basis blades in G(4,0).
pub const BLADE_COUNT: usize = 16;

/// Highest grade in the algebra.
pub const MAX_GRADE: usize = 4;

/// Tolerance for the structural algebra laws (associativity, reversion
/// anti-automorphism, scalar-part cyclicity) on coefficients of order one.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Bitset of constituent basis vectors for each canonical blade index.
pub const BLADE_MASKS: [u8; BLADE_COUNT] = [
    0b0000, // 1
    0b0001, // e1
    0b0010, // e2
    0b0100, // e3
    0b1000, // e4
    0b0011, // e12
    0b0101, // e13
    0b1001, // e14
    0b0110, // e23
    0b1010, // e24
    0b1100, // e34
    0b0111, // e123
    0b1011, // e124
    0b1101, // e134
    0b1110, // e234
    0b1111, // e1234
];

/// Canonical index of each blade bitset (inverse of [`BLADE_MASKS`]).
pub const MASK_TO_INDEX: [usize; BLADE_COUNT] = {
    let mut inv = [0usize; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        inv[BLADE_MASKS[i] as usize] = i;
        i += 1;
    }
    inv
};

/// Grade (number of basis factors) of each canonical blade index.
pub const BLADE_GRADES: [usize; BLADE_COUNT] = {
    let mut g = [0usize; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        g[i] = BLADE_MASKS[i].count_ones() as usize;
        i += 1;
    }
    g
};

/// Human-readable blade names in canonical order.
pub const BLADE_NAMES: [&str; BLADE_COUNT] = [
    "1", "e1", "e2", "e3", "e4", "e12", "e13", "e14", "e23", "e24", "e34", "e123", "e124", "e134",
    "e234", "e1234",
];

/// Canonical blade indices by name, for readable coefficient access.
pub mod blade {
    pub const SCALAR: usize = 0;
    pub const E1: usize = 1;
    pub const E2: usize = 2;
    pub const E3: usize = 3;
    pub const E4: usize = 4;
    pub const E12: usize = 5;
    pub const E13: usize = 6;
    pub const E14: usize = 7;
    pub const E23: usize = 8;
    pub const E24: usize = 9;
    pub const E34: usize = 10;
    pub const E123: usize = 11;
    pub const E124: usize = 12;
    pub const E134: usize = 13;
    pub const E234: usize = 14;
    pub const E1234: usize = 15;
}

/// Error from grade selection with an out-of-range grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("grade {0} out of range 0..=4")]
pub struct GradeOutOfRange(pub usize);

/// A general element of G(4,0): 16 blade coefficients in canonical order.
///
/// Values are immutable after construction and every operation is a pure
/// function, so multivectors can be shared freely across threads.
#[derive(Clone, Copy, PartialEq)]
pub struct Multivector16 {
    coeffs: [f64; BLADE_COUNT],
}

impl Multivector16 {
    /// The zero multivector.
    pub const ZERO: Self = Self {
        coeffs: [0.0; BLADE_COUNT],
    };

    /// The scalar unit.
    pub const ONE: Self = Self::basis_const(blade::SCALAR);
    /// Basis vector `e1`.
    pub const E1: Self = Self::basis_const(blade::E1);
    /// Basis vector `e2`.
    pub const E2: Self = Self::basis_const(blade::E2);
    /// Basis vector `e3`.
    pub const E3: Self = Self::basis_const(blade::E3);
    /// Basis vector `e4`, the origin of the spherical model.
    pub const E4: Self = Self::basis_const(blade::E4);

    const fn basis_const(index: usize) -> Self {
        let mut coeffs = [0.0; BLADE_COUNT];
        coeffs[index] = 1.0;
        Self { coeffs }
    }

    /// Builds a multivector from coefficients in canonical blade order.
    ///
    /// Panics on non-finite coefficients; NaN and infinity are not admitted
    /// into the algebra.
    pub fn new(coeffs: [f64; BLADE_COUNT]) -> Self {
        assert!(
            coeffs.iter().all(|c| c.is_finite()),
            "multivector coefficients must be finite"
        );
        Self { coeffs }
    }

    /// A pure scalar.
    pub fn scalar(value: f64) -> Self {
        assert!(value.is_finite(), "scalar must be finite");
        let mut coeffs = [0.0; BLADE_COUNT];
        coeffs[blade::SCALAR] = value;
        Self { coeffs }
    }

    /// A single basis blade scaled by `value`.
    pub fn blade(index: usize, value: f64) -> Self {
        assert!(index < BLADE_COUNT, "blade index out of range");
        assert!(value.is_finite(), "coefficient must be finite");
        let mut coeffs = [0.0; BLADE_COUNT];
        coeffs[index] = value;
        Self { coeffs }
    }

    /// Coefficient of the blade at canonical index `i`.
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs[i]
    }

    /// All 16 coefficients in canonical order.
    pub fn coeffs(&self) -> &[f64; BLADE_COUNT] {
        &self.coeffs
    }

    /// Geometric product `self * other`.
    ///
    /// Bilinear and associative; the sign of each blade-pair product is the
    /// parity of the transpositions needed to sort the concatenated factor
    /// lists, and repeated factors contract to `+1`.
    pub fn geometric_product(&self, other: &Self) -> Self {
        let mut out = [0.0; BLADE_COUNT];
        for (&a, &ma) in self.coeffs.iter().zip(&BLADE_MASKS) {
            if a == 0.0 {
                continue;
            }
            for (&b, &mb) in other.coeffs.iter().zip(&BLADE_MASKS) {
                if b == 0.0 {
                    continue;
                }
                out[MASK_TO_INDEX[(ma ^ mb) as usize]] += reorder_sign(ma, mb) * a * b;
            }
        }
        Self { coeffs: out }
    }

    /// Reversion: the grade-k part is scaled by `(-1)^(k(k-1)/2)`.
    pub fn reverse(&self) -> Self {
        let mut out = self.coeffs;
        for (i, c) in out.iter_mut().enumerate() {
            if matches!(BLADE_GRADES[i], 2 | 3) {
                *c = -*c;
            }
        }
        Self { coeffs: out }
    }

    /// Keeps only the grade-`k` coefficients.
    pub fn grade_project(&self, k: usize) -> Result<Self, GradeOutOfRange> {
        if k > MAX_GRADE {
            return Err(GradeOutOfRange(k));
        }
        let mut out = [0.0; BLADE_COUNT];
        for i in 0..BLADE_COUNT {
            if BLADE_GRADES[i] == k {
                out[i] = self.coeffs[i];
            }
        }
        Ok(Self { coeffs: out })
    }

    /// The scalar part, `<a>_0`.
    pub fn scalar_part(&self) -> f64 {
        self.coeffs[blade::SCALAR]
    }

    /// Euclidean norm of the coefficient vector. Coincides with
    /// `sqrt(<a ã>_0)` for versors in this positive-signature algebra.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Euclidean norm of the coefficients outside grade `k`.
    pub fn norm_excluding_grade(&self, k: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| BLADE_GRADES[*i] != k)
            .map(|(_, c)| c * c)
            .sum::<f64>()
            .sqrt()
    }
}

/// Sign of the product of two basis blades given as bitsets: counts the
/// transpositions needed to merge the sorted factor lists.
fn reorder_sign(a: u8, b: u8) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0u32;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl fmt::Debug for Multivector16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multivector16({})", self)
    }
}

impl fmt::Display for Multivector16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if wrote {
                write!(f, " {} ", if c < 0.0 { "-" } else { "+" })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            if i == blade::SCALAR {
                write!(f, "{}", c.abs())?;
            } else {
                write!(f, "{}{}", c.abs(), BLADE_NAMES[i])?;
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for Multivector16 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self.coeffs;
        for (o, r) in out.iter_mut().zip(rhs.coeffs.iter()) {
            *o += r;
        }
        Self { coeffs: out }
    }
}

impl Sub for Multivector16 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self.coeffs;
        for (o, r) in out.iter_mut().zip(rhs.coeffs.iter()) {
            *o -= r;
        }
        Self { coeffs: out }
    }
}

impl Neg for Multivector16 {
    type Output = Self;
    fn neg(self) -> Self {
        let mut out = self.coeffs;
        for o in out.iter_mut() {
            *o = -*o;
        }
        Self { coeffs: out }
    }
}

impl Mul for Multivector16 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.geometric_product(&rhs)
    }
}

impl Mul<f64> for Multivector16 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        let mut out = self.coeffs;
        for o in out.iter_mut() {
            *o *= rhs;
        }
        Self { coeffs: out }
    }
}

impl From<f64> for Multivector16 {
    fn from(value: f64) -> Self {
        Self::scalar(value)
    }
}
