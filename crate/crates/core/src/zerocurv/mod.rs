//! Zero-curvature residuals for the matrix systems, the complex-coordinate
//! self-dual embedding, curvature two-forms with Hodge duality, and
//! spectral-parameter fields.

mod lambda;
mod sdym;

pub use lambda::{lambda_field, lambda_residual, LambdaKind, LambdaParams, SpectralField};
pub use sdym::{
    curvature, embed_sdym, embedded_prediction, flatness_from_embedded, hodge_dual, sdym_complex_residual, selfdual_defect, BracketSign, Coords, Curvature2Form,
    GaugePotential4D,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Result, SolgeoError};
use crate::grid::{partial, Accuracy, AxisName, Field};
use crate::liealg::CMat;

pub type MatField<const N: usize> = Field<CMat<N>>;

/// Registry of compatibility systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    /// `A_y − B_x + [A,B]` over (x, y).
    Gmce,
    /// The three pairwise flatness conditions of `A, B, C` over (x, y, t).
    Mlxii,
    /// Same, written for the 2×2 matrices `U, V, W`.
    MlxiiUvw,
    /// Monopole-type system with Higgs field `Phi`.
    Bogomolny,
    /// `−bB_ξ4 + B_ξ2 − D_ξ1 + [B,D]` over (ξ1, ξ2, ξ4).
    Mlxx3,
    /// `aD_ξ3 − bB_ξ4 + B_ξ2 − D_ξ1 + [B,D]` over ξ1..ξ4.
    Mlxx4,
    /// The four-matrix form with matrix coefficients `A, C`.
    Mlxx4Full,
    /// Self-dual system of `A1..A4` over (ξ1, ξ2, ξ4).
    Sdym3,
    /// Self-dual system of `A1..A4` over ξ1..ξ4.
    Sdym4,
    /// Six pairwise flatness conditions of `A, B, C, D` over ξ1..ξ4.
    Mlxii4,
    /// Self-duality in complex coordinates for `Aalpha, Aalphabar, Abeta, Abetabar`.
    SdymComplex,
}

impl System {
    pub const ALL: [System; 11] = [
        System::Gmce,
        System::Mlxii,
        System::MlxiiUvw,
        System::Bogomolny,
        System::Mlxx3,
        System::Mlxx4,
        System::Mlxx4Full,
        System::Sdym3,
        System::Sdym4,
        System::Mlxii4,
        System::SdymComplex,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            System::Gmce => "gmce",
            System::Mlxii => "mlxii",
            System::MlxiiUvw => "mlxii_uvw",
            System::Bogomolny => "bogomolny",
            System::Mlxx3 => "mlxx3",
            System::Mlxx4 => "mlxx4",
            System::Mlxx4Full => "mlxx4_full",
            System::Sdym3 => "sdym3",
            System::Sdym4 => "sdym4",
            System::Mlxii4 => "mlxii4",
            System::SdymComplex => "sdym_complex",
        }
    }

    /// Matrix fields the system expects, in order.
    pub fn field_names(self) -> &'static [&'static str] {
        match self {
            System::Gmce => &["A", "B"],
            System::Mlxii => &["A", "B", "C"],
            System::MlxiiUvw => &["U", "V", "W"],
            System::Bogomolny => &["Phi", "A", "B", "C"],
            System::Mlxx3 | System::Mlxx4 => &["B", "D"],
            System::Mlxx4Full | System::Mlxii4 => &["A", "B", "C", "D"],
            System::Sdym3 | System::Sdym4 => &["A1", "A2", "A3", "A4"],
            System::SdymComplex => &["Aalpha", "Aalphabar", "Abeta", "Abetabar"],
        }
    }

    /// Scalar parameters the system expects.
    pub fn scalar_names(self) -> &'static [&'static str] {
        match self {
            System::Mlxx3 => &["b"],
            System::Mlxx4 => &["a", "b"],
            _ => &[],
        }
    }

    /// Names of the residual fields returned, one per equation.
    pub fn residual_names(self) -> &'static [&'static str] {
        match self {
            System::Gmce => &["xy"],
            System::Mlxii => &["xy", "xt", "yt"],
            System::MlxiiUvw => &["xy", "xt", "yt"],
            System::Bogomolny => &["phi_t", "phi_y", "phi_x"],
            System::Mlxx3 | System::Mlxx4 => &["main"],
            System::Mlxx4Full => &["main", "a_flow", "ac_commute", "c_flow"],
            System::Sdym3 => &["f12", "a3_flow", "mixed"],
            System::Sdym4 => &["f12", "f34", "f41_minus_f32"],
            System::Mlxii4 => &["ab", "ac", "ad", "cb", "db", "cd"],
            System::SdymComplex => &["f_alpha_beta", "f_alphabar_betabar", "f_trace"],
        }
    }

    /// Axes the residual differentiates along.
    pub fn axes(self) -> &'static [AxisName] {
        use AxisName::*;
        match self {
            System::Gmce => &[X, Y],
            System::Mlxii | System::MlxiiUvw | System::Bogomolny => &[X, Y, T],
            System::Mlxx3 | System::Sdym3 => &[Xi1, Xi2, Xi4],
            System::Mlxx4 | System::Mlxx4Full | System::Sdym4 | System::Mlxii4 => &[Xi1, Xi2, Xi3, Xi4],
            System::SdymComplex => &[X, Y, T],
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for System {
    type Err = SolgeoError;
    fn from_str(s: &str) -> Result<Self> {
        System::ALL
            .iter()
            .copied()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| SolgeoError::Domain(format!("unknown system id '{s}'")))
    }
}

/// Named matrix fields on one grid, plus scalar parameters.
#[derive(Debug, Clone)]
pub struct ConnectionSet<const N: usize> {
    pub fields: BTreeMap<String, MatField<N>>,
    pub scalars: BTreeMap<String, f64>,
}

impl<const N: usize> ConnectionSet<N> {
    pub fn new() -> Self {
        Self { fields: BTreeMap::new(), scalars: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, f: MatField<N>) -> Self {
        self.fields.insert(name.to_string(), f);
        self
    }

    pub fn with_scalar(mut self, name: &str, v: f64) -> Self {
        self.scalars.insert(name.to_string(), v);
        self
    }

    fn get(&self, name: &str) -> Result<&MatField<N>> {
        self.fields.get(name).map_or_else(|| domain(format!("connection set lacks field '{name}'")), Ok)
    }

    fn scalar(&self, name: &str) -> Result<f64> {
        self.scalars.get(name).copied().map_or_else(|| domain(format!("connection set lacks scalar '{name}'")), Ok)
    }

    /// Arity and grid checks against a system.
    pub fn validate(&self, system: System) -> Result<()> {
        let want = system.field_names();
        if self.fields.len() != want.len() || want.iter().any(|n| !self.fields.contains_key(*n)) {
            let have: Vec<&str> = self.fields.keys().map(|s| s.as_str()).collect();
            return domain(format!("system {system} needs fields {want:?}, got {have:?}"));
        }
        for s in system.scalar_names() {
            let v = self.scalar(s)?;
            if !v.is_finite() {
                return domain(format!("scalar '{s}' is not finite"));
            }
        }
        let first = self.get(want[0])?;
        for n in want {
            if self.get(n)?.grid() != first.grid() {
                return domain(format!("field '{n}' is on a different grid than '{}'", want[0]));
            }
        }
        let need: &[AxisName] = if system == System::SdymComplex { &[AxisName::X, AxisName::Y, AxisName::T] } else { system.axes() };
        for ax in need {
            first.grid().axis_index(*ax)?;
        }
        Ok(())
    }
}

impl<const N: usize> Default for ConnectionSet<N> {
    fn default() -> Self {
        Self::new()
    }
}

/// One residual field with its label.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedResidual<const N: usize> {
    pub name: &'static str,
    pub field: MatField<N>,
}

/// Pointwise combination of several matrix fields on one grid.
pub(crate) fn combine<const N: usize, const K: usize>(
    fields: [&MatField<N>; K],
    f: impl Fn([CMat<N>; K]) -> CMat<N> + Sync + Send,
) -> MatField<N> {
    let grid = fields[0].grid().clone();
    let data = (0..grid.len()).into_par_iter().map(|i| f(fields.map(|x| x.data()[i]))).collect();
    Field::new(grid, data).unwrap()
}

fn c64(x: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(x, 0.0)
}

fn br<const N: usize>(x: &CMat<N>, y: &CMat<N>) -> CMat<N> {
    x * y - y * x
}

/// Evaluate every residual line of `system` with finite differences of the
/// given order.
pub fn zc_residual<const N: usize>(
    system: System,
    conn: &ConnectionSet<N>,
    acc: Accuracy,
) -> Result<Vec<NamedResidual<N>>> {
    conn.validate(system)?;
    let d = |name: &str, ax: AxisName| -> Result<MatField<N>> { partial(conn.get(name)?, ax, acc) };
    let g = |name: &str| conn.get(name);
    use AxisName::*;
    let out: Vec<MatField<N>> = match system {
        System::Gmce => {
            let (ay, bx) = (d("A", Y)?, d("B", X)?);
            vec![combine([&ay, &bx, g("A")?, g("B")?], |[ay, bx, a, b]| ay - bx + br(&a, &b))]
        }
        System::Mlxii | System::MlxiiUvw => {
            let n = if system == System::Mlxii { ["A", "B", "C"] } else { ["U", "V", "W"] };
            flatness_triple(conn, n, acc)?
        }
        System::Bogomolny => {
            let (phi, a, b, c) = (g("Phi")?, g("A")?, g("B")?, g("C")?);
            let (pt, py, px) = (d("Phi", T)?, d("Phi", Y)?, d("Phi", X)?);
            let (ay, at, bx, bt, cx, cy) = (d("A", Y)?, d("A", T)?, d("B", X)?, d("B", T)?, d("C", X)?, d("C", Y)?);
            vec![
                combine([&pt, phi, c, &ay, &bx, a, b], |[pt, phi, c, ay, bx, a, b]| {
                    pt + br(&phi, &c) + ay - bx + br(&a, &b)
                }),
                combine([&py, phi, b, &cx, &at, c, a], |[py, phi, b, cx, at, c, a]| {
                    py + br(&phi, &b) + cx - at + br(&c, &a)
                }),
                combine([&px, phi, a, &bt, &cy, b, c], |[px, phi, a, bt, cy, b, c]| {
                    px + br(&phi, &a) + bt - cy + br(&b, &c)
                }),
            ]
        }
        System::Mlxx3 => {
            let bb = conn.scalar("b")?;
            let (b4, b2, d1) = (d("B", Xi4)?, d("B", Xi2)?, d("D", Xi1)?);
            vec![combine([&b4, &b2, &d1, g("B")?, g("D")?], move |[b4, b2, d1, b, dd]| {
                -(b4 * c64(bb)) + b2 - d1 + br(&b, &dd)
            })]
        }
        System::Mlxx4 => {
            let (aa, bb) = (conn.scalar("a")?, conn.scalar("b")?);
            let (d3, b4, b2, d1) = (d("D", Xi3)?, d("B", Xi4)?, d("B", Xi2)?, d("D", Xi1)?);
            vec![combine([&d3, &b4, &b2, &d1, g("B")?, g("D")?], move |[d3, b4, b2, d1, b, dd]| {
                d3 * c64(aa) - b4 * c64(bb) + b2 - d1 + br(&b, &dd)
            })]
        }
        System::Mlxx4Full => {
            let (a, b, c, dd) = (g("A")?, g("B")?, g("C")?, g("D")?);
            let (d3, b4, b2, d1) = (d("D", Xi3)?, d("B", Xi4)?, d("B", Xi2)?, d("D", Xi1)?);
            let (a2, a4, c1, c3) = (d("A", Xi2)?, d("A", Xi4)?, d("C", Xi1)?, d("C", Xi3)?);
            vec![
                combine([a, &d3, c, &b4, &b2, &d1, b, dd], |[a, d3, c, b4, b2, d1, b, dd]| {
                    a * d3 - c * b4 + b2 - d1 + br(&b, &dd)
                }),
                combine([&a2, c, &a4, a, dd], |[a2, c, a4, a, dd]| a2 - c * a4 + br(&a, &dd)),
                combine([a, c], |[a, c]| br(&a, &c)),
                combine([&c1, a, &c3, c, b], |[c1, a, c3, c, b]| c1 - a * c3 + br(&c, &b)),
            ]
        }
        System::Sdym3 => {
            let (a1, a2, a3, a4) = (g("A1")?, g("A2")?, g("A3")?, g("A4")?);
            let (a2_1, a1_2) = (d("A2", Xi1)?, d("A1", Xi2)?);
            let (a3_4, a1_4, a4_1, a3_2) = (d("A3", Xi4)?, d("A1", Xi4)?, d("A4", Xi1)?, d("A3", Xi2)?);
            vec![
                combine([&a2_1, &a1_2, a2, a1], |[a2_1, a1_2, a2, a1]| a2_1 - a1_2 + br(&a2, &a1)),
                combine([&a3_4, a4, a3], |[a3_4, a4, a3]| -a3_4 + br(&a4, &a3)),
                combine([&a1_4, &a4_1, a1, a4, &a3_2, a2, a3], |[a1_4, a4_1, a1, a4, a3_2, a2, a3]| {
                    (a1_4 - a4_1 + br(&a1, &a4)) - (-a3_2 + br(&a2, &a3))
                }),
            ]
        }
        System::Sdym4 => {
            let (a1, a2, a3, a4) = (g("A1")?, g("A2")?, g("A3")?, g("A4")?);
            let (a2_1, a1_2, a4_3, a3_4) = (d("A2", Xi1)?, d("A1", Xi2)?, d("A4", Xi3)?, d("A3", Xi4)?);
            let (a1_4, a4_1, a2_3, a3_2) = (d("A1", Xi4)?, d("A4", Xi1)?, d("A2", Xi3)?, d("A3", Xi2)?);
            vec![
                combine([&a2_1, &a1_2, a2, a1], |[a2_1, a1_2, a2, a1]| a2_1 - a1_2 + br(&a2, &a1)),
                combine([&a4_3, &a3_4, a4, a3], |[a4_3, a3_4, a4, a3]| a4_3 - a3_4 + br(&a4, &a3)),
                combine([&a1_4, &a4_1, a1, a4, &a2_3, &a3_2, a2, a3], |[a1_4, a4_1, a1, a4, a2_3, a3_2, a2, a3]| {
                    (a1_4 - a4_1 + br(&a1, &a4)) - (a2_3 - a3_2 + br(&a2, &a3))
                }),
            ]
        }
        System::Mlxii4 => {
            let names = ["A", "B", "C", "D"];
            let axes = [Xi1, Xi2, Xi3, Xi4];
            // (first, second) such that residual = first_{ξ_j} − second_{ξ_i} + [first, second],
            // where ξ_i, ξ_j are the axes of first and second.
            let pairs = [(0, 1), (0, 2), (0, 3), (2, 1), (3, 1), (2, 3)];
            let mut v = Vec::with_capacity(6);
            for (p, q) in pairs {
                let fp = d(names[p], axes[q])?;
                let fq = d(names[q], axes[p])?;
                v.push(combine([&fp, &fq, g(names[p])?, g(names[q])?], |[fp, fq, x, y]| fp - fq + br(&x, &y)));
            }
            v
        }
        System::SdymComplex => {
            let pot = GaugePotential4D {
                a: [g("Aalpha")?.clone(), g("Aalphabar")?.clone(), g("Abeta")?.clone(), g("Abetabar")?.clone()],
                coords: Coords::Complex,
            };
            sdym_complex_residual(&pot, acc)?.to_vec()
        }
    };
    Ok(system.residual_names().iter().zip(out).map(|(name, field)| NamedResidual { name, field }).collect())
}

fn flatness_triple<const N: usize>(conn: &ConnectionSet<N>, n: [&str; 3], acc: Accuracy) -> Result<Vec<MatField<N>>> {
    use AxisName::*;
    let d = |name: &str, ax: AxisName| partial(conn.get(name)?, ax, acc);
    let (a, b, c) = (conn.get(n[0])?, conn.get(n[1])?, conn.get(n[2])?);
    let (ay, bx, at, cx, bt, cy) = (d(n[0], Y)?, d(n[1], X)?, d(n[0], T)?, d(n[2], X)?, d(n[1], T)?, d(n[2], Y)?);
    Ok(vec![
        combine([&ay, &bx, a, b], |[ay, bx, a, b]| ay - bx + br(&a, &b)),
        combine([&at, &cx, a, c], |[at, cx, a, c]| at - cx + br(&a, &c)),
        combine([&bt, &cy, b, c], |[bt, cy, b, c]| bt - cy + br(&b, &c)),
    ])
}

#[cfg(test)]
mod tests;
