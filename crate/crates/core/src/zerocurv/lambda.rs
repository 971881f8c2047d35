use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::{partial, Accuracy, AxisName, Field, GridSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaKind {
    /// `λ_ξ1 = λλ_ξ3`, `λ_ξ2 = λλ_ξ4` over ξ1..ξ4.
    SdymXi,
    /// `λ_β = λλ_ᾱ`, `λ_α = −λλ_β̄` over (x, y, z, t).
    MlxiiComplex,
}

/// Parameters of the rational spectral-parameter solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaParams {
    /// `λ = (n1ξ3 + n3 + m1ξ4 + m3) / (n4 + m4 − n1ξ1 − m1ξ2)`.
    SdymXi {
        n1: f64,
        n3: f64,
        n4: f64,
        #[serde(default)]
        m1: f64,
        #[serde(default)]
        m3: f64,
        #[serde(default)]
        m4: f64,
    },
    /// `λ = (a1x_ᾱ + a2x_β̄ + a3) / (a2x_α − a1x_β + a4)` with
    /// `x_α = (z+it)/2`, `x_ᾱ = (z−it)/2`, `x_β = (x+iy)/2`, `x_β̄ = (x−iy)/2`.
    MlxiiComplex { a1: f64, a2: f64, a3: f64, a4: f64 },
}

impl LambdaParams {
    pub fn kind(&self) -> LambdaKind {
        match self {
            LambdaParams::SdymXi { .. } => LambdaKind::SdymXi,
            LambdaParams::MlxiiComplex { .. } => LambdaKind::MlxiiComplex,
        }
    }

    fn axes(&self) -> [AxisName; 4] {
        use AxisName::*;
        match self {
            LambdaParams::SdymXi { .. } => [Xi1, Xi2, Xi3, Xi4],
            LambdaParams::MlxiiComplex { .. } => [X, Y, Z, T],
        }
    }

    /// Numerator and denominator at coordinates ordered as `axes()`.
    fn parts(&self, c: [f64; 4]) -> (Complex64, Complex64) {
        match *self {
            LambdaParams::SdymXi { n1, n3, n4, m1, m3, m4 } => {
                let num = n1 * c[2] + n3 + m1 * c[3] + m3;
                let den = n4 + m4 - n1 * c[0] - m1 * c[1];
                (num.into(), den.into())
            }
            LambdaParams::MlxiiComplex { a1, a2, a3, a4 } => {
                let (x, y, z, t) = (c[0], c[1], c[2], c[3]);
                let xa = Complex64::new(z, t) * 0.5;
                let xab = Complex64::new(z, -t) * 0.5;
                let xb = Complex64::new(x, y) * 0.5;
                let xbb = Complex64::new(x, -y) * 0.5;
                (xab * a1 + xbb * a2 + a3, xa * a2 - xb * a1 + a4)
            }
        }
    }

    /// Euclidean norm of the real gradient of the denominator.
    fn den_gradient(&self) -> f64 {
        match *self {
            LambdaParams::SdymXi { n1, m1, .. } => n1.hypot(m1),
            LambdaParams::MlxiiComplex { a1, a2, .. } => ((a1 * a1 + a2 * a2) / 2.0).sqrt(),
        }
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            LambdaParams::SdymXi { n1, n3, n4, m1, m3, m4 } => [n1, n3, n4, m1, m3, m4].iter().all(|v| v.is_finite()),
            LambdaParams::MlxiiComplex { a1, a2, a3, a4 } => [a1, a2, a3, a4].iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            domain("spectral-parameter constants must be finite")
        }
    }
}

/// Sampled spectral parameter with its pole mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub params: LambdaParams,
    pub lambda: Field<Complex64>,
    /// `true` where the point lies within `2h` of the pole locus.
    pub mask: Vec<bool>,
}

impl SpectralField {
    pub fn masked_fraction(&self) -> f64 {
        self.mask.iter().filter(|m| **m).count() as f64 / self.mask.len() as f64
    }
}

/// Sample `λ` on a grid carrying the four coordinates of its kind. Points
/// with `|den| < 2h·|∇den|` are masked (`h` the largest spacing); a point
/// exactly on the pole holds NaN.
pub fn lambda_field(params: LambdaParams, grid: &GridSpec) -> Result<SpectralField> {
    params.check()?;
    let axes = params.axes();
    let ids = axes.iter().map(|a| grid.axis_index(*a)).collect::<Result<Vec<_>>>()?;
    let radius = 2.0 * grid.max_h() * params.den_gradient();
    let n = grid.len();
    let mut lam = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    for p in 0..n {
        let c = grid.coords(p);
        let (num, den) = params.parts([c[ids[0]], c[ids[1]], c[ids[2]], c[ids[3]]]);
        let near = den.norm() < radius || den.norm() == 0.0;
        mask.push(near);
        lam.push(if den.norm() == 0.0 { Complex64::new(f64::NAN, f64::NAN) } else { num / den });
    }
    if mask.iter().all(|m| *m) {
        return domain("every grid point lies within the pole exclusion radius");
    }
    Ok(SpectralField { params, lambda: Field::new(grid.clone(), lam)?, mask })
}

/// Residuals of the two first-order equations for `λ`, plus the mask of
/// points excluded from norms (pole mask, or non-finite residual).
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaResidual {
    pub fields: Vec<(&'static str, Field<Complex64>)>,
    pub mask: Vec<bool>,
}

fn dirc(f: &Field<Complex64>, u: AxisName, v: AxisName, s: f64, acc: Accuracy) -> Result<Field<Complex64>> {
    let du = partial(f, u, acc)?;
    let dv = partial(f, v, acc)?;
    du.zip_map(&dv, |a, b| a + b * I * s)
}

pub fn lambda_residual(sf: &SpectralField, acc: Accuracy) -> Result<LambdaResidual> {
    use AxisName::*;
    let l = &sf.lambda;
    let (r1, r2, names) = match sf.params.kind() {
        LambdaKind::SdymXi => {
            let (d1, d2, d3, d4) = (partial(l, Xi1, acc)?, partial(l, Xi2, acc)?, partial(l, Xi3, acc)?, partial(l, Xi4, acc)?);
            let r1 = Field::new(l.grid().clone(), (0..l.len()).map(|i| d1.data()[i] - l.data()[i] * d3.data()[i]).collect())?;
            let r2 = Field::new(l.grid().clone(), (0..l.len()).map(|i| d2.data()[i] - l.data()[i] * d4.data()[i]).collect())?;
            (r1, r2, ["xi1_xi3", "xi2_xi4"])
        }
        LambdaKind::MlxiiComplex => {
            let da = dirc(l, Z, T, -1.0, acc)?;
            let dab = dirc(l, Z, T, 1.0, acc)?;
            let db = dirc(l, X, Y, -1.0, acc)?;
            let dbb = dirc(l, X, Y, 1.0, acc)?;
            let r1 = Field::new(l.grid().clone(), (0..l.len()).map(|i| db.data()[i] - l.data()[i] * dab.data()[i]).collect())?;
            let r2 = Field::new(l.grid().clone(), (0..l.len()).map(|i| da.data()[i] + l.data()[i] * dbb.data()[i]).collect())?;
            (r1, r2, ["beta_alphabar", "alpha_betabar"])
        }
    };
    let mask: Vec<bool> = (0..l.len())
        .map(|i| sf.mask[i] || !(r1.data()[i].is_finite() && r2.data()[i].is_finite()))
        .collect();
    if mask.iter().all(|m| *m) {
        return domain("every grid point is masked");
    }
    Ok(LambdaResidual { fields: vec![(names[0], r1), (names[1], r2)], mask })
}
