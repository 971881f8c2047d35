use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{combine, MatField};
use crate::error::{domain, Result};
use crate::grid::{partial, Accuracy, AxisName, Field};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coordinates the four potential components refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coords {
    /// Real coordinates ξ1..ξ4.
    Xi,
    /// `(α, ᾱ, β, β̄)` with `∂α = ∂z − i∂t`, `∂ᾱ = ∂z + i∂t`,
    /// `∂β = ∂x − i∂y`, `∂β̄ = ∂x + i∂y`.
    Complex,
}

/// Sign in front of the bracket in `F_μν = ∂μAν − ∂νAμ ± [Aμ, Aν]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketSign {
    Plus,
    Minus,
}

/// Four potential components on one grid. Axes missing from the grid are
/// treated as directions of independence.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePotential4D<const N: usize> {
    pub a: [MatField<N>; 4],
    pub coords: Coords,
}

/// The six independent components `F12, F13, F14, F23, F24, F34`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curvature2Form<const N: usize> {
    pub comps: [MatField<N>; 6],
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl<const N: usize> Curvature2Form<N> {
    /// `F_μν` for 0-based indices; antisymmetric, zero on the diagonal.
    pub fn get(&self, mu: usize, nu: usize) -> Result<MatField<N>> {
        if mu > 3 || nu > 3 {
            return domain(format!("curvature index ({mu}, {nu}) out of range 0..4"));
        }
        if mu == nu {
            return Ok(Field::zeros(self.comps[0].grid()));
        }
        let (lo, hi) = if mu < nu { (mu, nu) } else { (nu, mu) };
        let k = PAIRS.iter().position(|p| *p == (lo, hi)).unwrap();
        Ok(if mu < nu { self.comps[k].clone() } else { -&self.comps[k] })
    }
}

fn pd<const N: usize>(f: &MatField<N>, ax: AxisName, acc: Accuracy) -> Result<Option<MatField<N>>> {
    if f.grid().has_axis(ax) {
        partial(f, ax, acc).map(Some)
    } else {
        Ok(None)
    }
}

/// `∂u + s·i·∂v` with absent axes contributing nothing.
fn complex_dir<const N: usize>(f: &MatField<N>, u: AxisName, v: AxisName, s: f64, acc: Accuracy) -> Result<MatField<N>> {
    let du = pd(f, u, acc)?.unwrap_or_else(|| Field::zeros(f.grid()));
    Ok(match pd(f, v, acc)? {
        Some(dv) => combine([&du, &dv], move |[a, b]| a + b * (I * s)),
        None => du,
    })
}

fn dir<const N: usize>(f: &MatField<N>, k: usize, coords: Coords, acc: Accuracy) -> Result<MatField<N>> {
    use AxisName::*;
    match coords {
        Coords::Xi => Ok(pd(f, AxisName::xi(k + 1), acc)?.unwrap_or_else(|| Field::zeros(f.grid()))),
        Coords::Complex => match k {
            0 => complex_dir(f, Z, T, -1.0, acc),
            1 => complex_dir(f, Z, T, 1.0, acc),
            2 => complex_dir(f, X, Y, -1.0, acc),
            _ => complex_dir(f, X, Y, 1.0, acc),
        },
    }
}

/// Curvature of a potential with the chosen bracket sign.
pub fn curvature<const N: usize>(pot: &GaugePotential4D<N>, sign: BracketSign, acc: Accuracy) -> Result<Curvature2Form<N>> {
    let g = pot.a[0].grid();
    if pot.a.iter().any(|f| f.grid() != g) {
        return domain("potential components live on different grids");
    }
    let mut d: Vec<Vec<MatField<N>>> = Vec::with_capacity(4);
    for k in 0..4 {
        let mut row = Vec::with_capacity(4);
        for a in &pot.a {
            row.push(dir(a, k, pot.coords, acc)?);
        }
        d.push(row);
    }
    let s = match sign {
        BracketSign::Plus => Complex64::new(1.0, 0.0),
        BracketSign::Minus => Complex64::new(-1.0, 0.0),
    };
    let comps = PAIRS.map(|(mu, nu)| {
        combine([&d[mu][nu], &d[nu][mu], &pot.a[mu], &pot.a[nu]], move |[dmn, dnm, am, an]| {
            dmn - dnm + (am * an - an * am) * s
        })
    });
    Ok(Curvature2Form { comps })
}

/// Euclidean Hodge dual with `ε1234 = 1`: `*F12 = F34`, `*F13 = F42`,
/// `*F14 = F23` and the converse.
pub fn hodge_dual<const N: usize>(f: &Curvature2Form<N>) -> Curvature2Form<N> {
    let c = &f.comps;
    Curvature2Form { comps: [c[5].clone(), -&c[4], c[3].clone(), c[2].clone(), -&c[1], c[0].clone()] }
}

/// `max |F − *F|` over all components and points.
pub fn selfdual_defect<const N: usize>(f: &Curvature2Form<N>) -> f64 {
    let d = hodge_dual(f);
    f.comps.iter().zip(&d.comps).map(|(a, b)| (a - b).max_norm()).fold(0.0, f64::max)
}

/// Complex-coordinate potential built from three matrix fields on (x, y, t):
/// `A_α = −iC`, `A_ᾱ = iC`, `A_β = A − iB`, `A_β̄ = A + iB`.
pub fn embed_sdym<const N: usize>(a: &MatField<N>, b: &MatField<N>, c: &MatField<N>) -> Result<GaugePotential4D<N>> {
    a.check_same_grid(b)?;
    a.check_same_grid(c)?;
    Ok(GaugePotential4D {
        a: [
            c.map(|m| m * (-I)),
            c.map(|m| m * I),
            combine([a, b], |[a, b]| a - b * I),
            combine([a, b], |[a, b]| a + b * I),
        ],
        coords: Coords::Complex,
    })
}

/// Self-duality residuals in complex coordinates: `F_αβ`, `F_ᾱβ̄` and
/// `F_αᾱ + F_ββ̄`, with `F_μν = ∂μAν − ∂νAμ − [Aμ, Aν]`.
pub fn sdym_complex_residual<const N: usize>(pot: &GaugePotential4D<N>, acc: Accuracy) -> Result<[MatField<N>; 3]> {
    if pot.coords != Coords::Complex {
        return domain("complex self-duality residual needs a complex-coordinate potential");
    }
    let f = curvature(pot, BracketSign::Minus, acc)?;
    let c = &f.comps;
    Ok([c[1].clone(), c[4].clone(), &c[0] + &c[5]])
}

/// The complex self-duality residuals of an embedded potential predicted
/// from the three flatness residuals `(r_xy, r_xt, r_yt)`:
/// `(−i r_xt − r_yt, i r_xt − r_yt, −2i r_xy)`.
pub fn embedded_prediction<const N: usize>(r: &[MatField<N>; 3]) -> [MatField<N>; 3] {
    [
        combine([&r[1], &r[2]], |[b, c]| b * (-I) - c),
        combine([&r[1], &r[2]], |[b, c]| b * I - c),
        r[0].map(|a| a * (I * -2.0)),
    ]
}

/// Inverse of [`embedded_prediction`].
pub fn flatness_from_embedded<const N: usize>(s: &[MatField<N>; 3]) -> [MatField<N>; 3] {
    [
        s[2].map(|m| m * (I * 0.5)),
        combine([&s[0], &s[1]], |[p, q]| (q - p) * (-I * 0.5)),
        combine([&s[0], &s[1]], |[p, q]| (p + q) * Complex64::new(-0.5, 0.0)),
    ]
}
