//! Soliton equations: residual evaluators, Lax matrices and the commutation
//! test of their linear problems, and the spin-to-soliton coefficient maps.

pub mod algebra;
mod lax;
mod maps;
mod pde;

pub use algebra::{jet_field, Diff, FdDiff, Jet, JetDiff, Scalar, X};
pub use lax::{build_lax, lax_commutation_defect, LaxDefect, LaxMatrices};
pub use maps::{amplitude_phase, map_spin_coeffs, mix_coefficient_ops, AmplitudeInputs, AmplitudePhase, MixOps, SpinCoeffMap, SpinMapKind};
pub use pde::SPIN_TOL;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Result, SolgeoError};
use crate::grid::{Accuracy, Field, Sample};
use crate::liealg::{Mat2c, Sign};

/// Equation registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqId {
    Ishimori,
    Ds,
    Mix,
    Mviii,
    Mxxxiv,
    Zii,
    Zi,
    MkdvC,
    MkdvR,
    Strachan,
    M3q,
    Mi,
}

impl EqId {
    pub const ALL: [EqId; 12] = [
        EqId::Ishimori,
        EqId::Ds,
        EqId::Mix,
        EqId::Mviii,
        EqId::Mxxxiv,
        EqId::Zii,
        EqId::Zi,
        EqId::MkdvC,
        EqId::MkdvR,
        EqId::Strachan,
        EqId::M3q,
        EqId::Mi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EqId::Ishimori => "ishimori",
            EqId::Ds => "ds",
            EqId::Mix => "mix",
            EqId::Mviii => "mviii",
            EqId::Mxxxiv => "mxxxiv",
            EqId::Zii => "zii",
            EqId::Zi => "zi",
            EqId::MkdvC => "mkdv_c",
            EqId::MkdvR => "mkdv_r",
            EqId::Strachan => "strachan",
            EqId::M3q => "m3q",
            EqId::Mi => "mi",
        }
    }

    /// Field names the equation reads.
    pub fn field_names(self) -> &'static [&'static str] {
        match self {
            EqId::Ishimori | EqId::Mix | EqId::Mi => &["S1", "S2", "S3", "u"],
            EqId::Mviii | EqId::Mxxxiv => &["S1", "S2", "S3", "w"],
            EqId::Ds | EqId::Zii | EqId::Zi | EqId::Strachan | EqId::M3q => &["q", "p", "v"],
            EqId::MkdvC => &["q", "p", "v1", "v2"],
            EqId::MkdvR => &["q", "v1"],
        }
    }
}

impl fmt::Display for EqId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EqId {
    type Err = SolgeoError;
    fn from_str(s: &str) -> Result<Self> {
        EqId::ALL
            .iter()
            .copied()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| SolgeoError::Domain(format!("unknown equation id '{s}'")))
    }
}

/// Equation parameters. `l = None` means `l = a` in the mix amplitude map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    pub alpha: Complex64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub beta: Sign,
    pub r2: Sign,
    pub l: Option<f64>,
    /// Spectral parameter of the Lax problems.
    pub lambda: f64,
    /// Flip the sign of the `p` equation of the Z-II system.
    pub zii_sign_variant: bool,
}

impl Default for SolitonParams {
    fn default() -> Self {
        Self {
            alpha: Complex64::new(1.0, 0.0),
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            beta: Sign::Plus,
            r2: Sign::Plus,
            l: None,
            lambda: 1.0,
            zii_sign_variant: false,
        }
    }
}

impl SolitonParams {
    pub const KEYS: [&'static str; 11] =
        ["alpha_re", "alpha_im", "a", "b", "c", "d", "beta", "r2", "l", "lambda", "zii_sign_variant"];

    /// Parameters from a key/value map; unknown keys are rejected.
    pub fn from_map(m: &BTreeMap<String, f64>) -> Result<Self> {
        let mut p = Self::default();
        for (k, &v) in m {
            if !v.is_finite() {
                return domain(format!("parameter '{k}' is not finite"));
            }
            match k.as_str() {
                "alpha_re" => p.alpha.re = v,
                "alpha_im" => p.alpha.im = v,
                "a" => p.a = v,
                "b" => p.b = v,
                "c" => p.c = v,
                "d" => p.d = v,
                "beta" => p.beta = Sign::from_value(v)?,
                "r2" => p.r2 = Sign::from_value(v)?,
                "l" => p.l = Some(v),
                "lambda" => p.lambda = v,
                "zii_sign_variant" => p.zii_sign_variant = v != 0.0,
                _ => return domain(format!("unknown parameter '{k}' (expected one of {:?})", Self::KEYS)),
            }
        }
        if p.alpha.norm() == 0.0 {
            return domain("alpha must be nonzero");
        }
        Ok(p)
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("alpha_re".into(), self.alpha.re);
        m.insert("alpha_im".into(), self.alpha.im);
        for (k, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d), ("lambda", self.lambda)] {
            m.insert(k.into(), v);
        }
        m.insert("beta".into(), self.beta.value());
        m.insert("r2".into(), self.r2.value());
        if let Some(l) = self.l {
            m.insert("l".into(), l);
        }
        m.insert("zii_sign_variant".into(), if self.zii_sign_variant { 1.0 } else { 0.0 });
        m
    }
}

/// Residual of one equation line.
#[derive(Debug, Clone, PartialEq)]
pub enum ResidualValues {
    Scalar(Field<Complex64>),
    Vector(Field<Vector3<Complex64>>),
    Matrix(Field<Mat2c>),
}

impl ResidualValues {
    pub fn max_norm(&self) -> f64 {
        self.max_norm_with_index(None).0
    }

    pub fn max_norm_with_index(&self, mask: Option<&[bool]>) -> (f64, usize) {
        match self {
            ResidualValues::Scalar(f) => f.max_norm_with_index(mask),
            ResidualValues::Vector(f) => f.max_norm_with_index(mask),
            ResidualValues::Matrix(f) => f.max_norm_with_index(mask),
        }
    }

    pub fn l2_norm(&self, mask: Option<&[bool]>) -> f64 {
        match self {
            ResidualValues::Scalar(f) => f.l2_norm(mask),
            ResidualValues::Vector(f) => f.l2_norm(mask),
            ResidualValues::Matrix(f) => f.l2_norm(mask),
        }
    }

    pub fn grid(&self) -> &crate::grid::GridSpec {
        match self {
            ResidualValues::Scalar(f) => f.grid(),
            ResidualValues::Vector(f) => f.grid(),
            ResidualValues::Matrix(f) => f.grid(),
        }
    }

    /// Largest entrywise difference between two residuals of one kind.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        fn d<T: Sample>(a: &Field<T>, b: &Field<T>) -> Result<f64> {
            a.check_same_grid(b)?;
            Ok(a.data().iter().zip(b.data()).fold(0.0, |m, (x, y)| m.max((*x - *y).max_abs())))
        }
        match (self, other) {
            (ResidualValues::Scalar(a), ResidualValues::Scalar(b)) => d(a, b),
            (ResidualValues::Vector(a), ResidualValues::Vector(b)) => d(a, b),
            (ResidualValues::Matrix(a), ResidualValues::Matrix(b)) => d(a, b),
            _ => domain("residuals of different kinds"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonResidual {
    pub name: &'static str,
    pub values: ResidualValues,
}

fn check_fields<T: Sample>(eq: EqId, fields: &BTreeMap<String, Field<T>>) -> Result<()> {
    let want = eq.field_names();
    for k in fields.keys() {
        if !want.contains(&k.as_str()) {
            return domain(format!("equation {eq} does not use field '{k}' (expects {want:?})"));
        }
    }
    let first = fields.get(want[0]).ok_or_else(|| SolgeoError::Domain(format!("missing field '{}'", want[0])))?;
    for n in want {
        let f = fields.get(*n).ok_or_else(|| SolgeoError::Domain(format!("missing field '{n}'")))?;
        first.check_same_grid(f)?;
        if !f.all_finite() {
            return domain(format!("field '{n}' has non-finite values"));
        }
    }
    pde::check_axes(eq, first.grid())
}

/// Residuals with an arbitrary derivative backend.
pub fn pde_residual_with<D: Diff>(
    eq: EqId,
    fields: &BTreeMap<String, Field<D::S>>,
    params: &SolitonParams,
    diff: &D,
) -> Result<Vec<SolitonResidual>> {
    check_fields(eq, fields)?;
    pde::residual(eq, &pde::Ctx { d: diff, f: fields }, params)
}

/// Residuals of sampled fields with finite differences.
pub fn pde_residual(
    eq: EqId,
    fields: &BTreeMap<String, Field<Complex64>>,
    params: &SolitonParams,
    acc: Accuracy,
) -> Result<Vec<SolitonResidual>> {
    pde_residual_with(eq, fields, params, &FdDiff(acc))
}

/// Residuals of closed-form fields carried as Taylor jets (exact derivatives).
pub fn pde_residual_analytic(
    eq: EqId,
    fields: &BTreeMap<String, Field<Jet>>,
    params: &SolitonParams,
) -> Result<Vec<SolitonResidual>> {
    pde_residual_with(eq, fields, params, &JetDiff)
}
