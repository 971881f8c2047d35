//! Small fixed-size matrix algebra: the 3×3 frame generators built from
//! coefficient triples, commutators, the real 3×3 exponential and the 2×2
//! spin matrix.
//!
//! Frame generators follow the row layout
//!
//! ```text
//! (   0      c1   -c3 )
//! ( -β·c1    0     c2 )
//! (  s·c3   -c2    0  )
//! ```
//!
//! where `s = 1` for the curve generator `(k, τ, σ)` and `s = β` for the
//! `(m1, m2, m3)` and `(ω1, ω2, ω3)` generators. The two placements are kept
//! distinct rather than unified.

use nalgebra::{DMatrix, Matrix2, Matrix3, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Mul, Sub};

use crate::error::{domain, Result, SolgeoError};

pub type Mat3 = Matrix3<f64>;
pub type Mat2c = Matrix2<Complex64>;
pub type Mat3c = Matrix3<Complex64>;
pub type CMat<const N: usize> = SMatrix<Complex64, N, N>;

/// A ±1 sign: the frame signature β or the spin metric sign r².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_value(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Sign::Plus)
        } else if v == -1.0 {
            Ok(Sign::Minus)
        } else {
            domain(format!("sign must be +1 or -1, got {v}"))
        }
    }
}

/// Which generator a coefficient triple fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    /// `(k, τ, σ)`: curve direction x.
    X,
    /// `(m1, m2, m3)`: direction y.
    Y,
    /// `(ω1, ω2, ω3)`: direction t.
    T,
}

/// Coefficients `(c1, c2, c3)` of a frame generator.
///
/// For [`Role::X`] the slots hold `(k, τ, σ)`; for [`Role::Y`] and
/// [`Role::T`] they hold `(m3, m1, m2)` and `(ω3, ω1, ω2)` respectively, so
/// that `c1` always sits in entry (1,2), `c2` in (2,3) and `c3` in (1,3).
/// Use [`CoeffTriple::curve`], [`CoeffTriple::surface_y`] and
/// [`CoeffTriple::surface_t`] to build them from the named quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffTriple {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub role: Role,
}

impl CoeffTriple {
    pub fn curve(k: f64, tau: f64, sigma: f64) -> Self {
        Self { c1: k, c2: tau, c3: sigma, role: Role::X }
    }

    pub fn surface_y(m1: f64, m2: f64, m3: f64) -> Self {
        Self { c1: m3, c2: m1, c3: m2, role: Role::Y }
    }

    pub fn surface_t(w1: f64, w2: f64, w3: f64) -> Self {
        Self { c1: w3, c2: w1, c3: w2, role: Role::T }
    }

    pub fn zero(role: Role) -> Self {
        Self { c1: 0.0, c2: 0.0, c3: 0.0, role }
    }

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite() && self.c3.is_finite()
    }

    /// Component-wise midpoint of two triples of the same role.
    pub fn midpoint(&self, other: &Self) -> Self {
        Self {
            c1: 0.5 * (self.c1 + other.c1),
            c2: 0.5 * (self.c2 + other.c2),
            c3: 0.5 * (self.c3 + other.c3),
            role: self.role,
        }
    }
}

/// Frame generator for a coefficient triple with signature `beta`.
pub fn skew_matrix(t: &CoeffTriple, beta: Sign) -> Result<Mat3> {
    if !t.is_finite() {
        return domain(format!("non-finite coefficient triple {t:?}"));
    }
    let b = beta.value();
    let s31 = match t.role {
        Role::X => 1.0,
        Role::Y | Role::T => b,
    };
    Ok(Mat3::new(
        0.0, t.c1, -t.c3, //
        -b * t.c1, 0.0, t.c2, //
        s31 * t.c3, -t.c2, 0.0,
    ))
}

/// `‖M + D Mᵀ D‖∞` with `D = diag(β, 1, 1)`; zero for generators of the
/// pseudo-orthogonal algebra.
pub fn generalized_antisymmetry_defect(m: &Mat3, beta: Sign) -> f64 {
    let d = Mat3::from_diagonal(&nalgebra::Vector3::new(beta.value(), 1.0, 1.0));
    (m + d * m.transpose() * d).amax()
}

/// `XY - YX` for any square matrix type with the usual operators.
pub fn commutator<M>(x: &M, y: &M) -> M
where
    for<'a> &'a M: Mul<&'a M, Output = M>,
    M: Sub<Output = M>,
{
    x * y - y * x
}

/// Commutator of dynamically sized matrices; rejects mismatched shapes.
pub fn commutator_dyn(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if x.shape() != y.shape() || x.nrows() != x.ncols() {
        return domain(format!(
            "commutator needs equal square shapes, got {:?} and {:?}",
            x.shape(),
            y.shape()
        ));
    }
    Ok(x * y - y * x)
}

/// Matrix exponential of a real 3×3 matrix.
///
/// Antisymmetric input goes through the Rodrigues formula, which returns an
/// orthogonal matrix up to rounding. Everything else uses Taylor scaling and
/// squaring.
pub fn expm(m: &Mat3) -> Result<Mat3> {
    if m.iter().any(|v| !v.is_finite()) {
        return domain("expm: non-finite matrix entry");
    }
    if (m + m.transpose()).amax() == 0.0 {
        Ok(expm_antisymmetric(m))
    } else {
        Ok(expm_series(m))
    }
}

fn expm_antisymmetric(m: &Mat3) -> Mat3 {
    // m = [w]x with w = (m32, m13, m21)
    let w = nalgebra::Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]);
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-4 {
        let t4 = theta2 * theta2;
        (1.0 - theta2 / 6.0 + t4 / 120.0, 0.5 - theta2 / 24.0 + t4 / 720.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    Mat3::identity() + m * a + m * m * b
}

/// Taylor scaling-and-squaring exponential for any real square matrix.
pub fn expm_series<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let norm = m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = m / 2f64.powi(squarings);
    let mut sum = SMatrix::<f64, N, N>::identity();
    let mut term = SMatrix::<f64, N, N>::identity();
    for j in 1..40 {
        term = term * a / j as f64;
        sum += term;
        if term.amax() <= 1e-17 * sum.amax() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// The 2×2 spin matrix `[[S3, S⁻], [r²·S⁺, -S3]]`, `S^± = S1 ± iS2`.
///
/// For `r² = +1` this is the Hermitian form with `r = 1`. For `r² = -1` the
/// imaginary `r` is absorbed by the constant similarity `diag(1, -i)`, which
/// keeps every entry in the real parameterization while preserving
/// `det S = -(S3² + r²(S1² + S2²))`.
pub fn spin_matrix(s1: f64, s2: f64, s3: f64, r2: Sign) -> Result<Mat2c> {
    let defect = spin_constraint_defect(s1, s2, s3, r2);
    if !defect.is_finite() || defect.abs() > 1e-10 {
        return Err(SolgeoError::Constraint {
            what: format!("S3² + r²(S1² + S2²) = 1 at S = ({s1}, {s2}, {s3})"),
            defect: defect.abs(),
        });
    }
    Ok(spin_matrix_unchecked(s1, s2, s3, r2))
}

pub(crate) fn spin_matrix_unchecked(s1: f64, s2: f64, s3: f64, r2: Sign) -> Mat2c {
    let minus = Complex64::new(s1, -s2);
    let plus = Complex64::new(s1, s2);
    Mat2c::new(Complex64::from(s3), minus, plus * r2.value(), Complex64::from(-s3))
}

/// `S3² + r²(S1² + S2²) - 1`.
pub fn spin_constraint_defect(s1: f64, s2: f64, s3: f64, r2: Sign) -> f64 {
    s3 * s3 + r2.value() * (s1 * s1 + s2 * s2) - 1.0
}

/// Embed a real matrix into the complex matrices of the same size.
pub fn complexify<const N: usize>(m: &SMatrix<f64, N, N>) -> CMat<N> {
    m.map(Complex64::from)
}
