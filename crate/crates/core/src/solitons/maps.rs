use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::algebra::{FdDiff, X};
use super::pde::{mix_a, Ctx};
use super::SolitonParams;
use crate::error::{domain, Result};
use crate::grid::{antider_x, apply_m, partial, Accuracy, AxisName, Field, MOperator};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Points with `|k|` below this are excluded from divisions by `k`.
pub const K_ZERO: f64 = 1e-12;
/// Largest fraction of excluded points before the map refuses.
pub const MASK_BUDGET: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinMapKind {
    Ishimori,
    Mix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinCoeffMap {
    pub m1: Field<Complex64>,
    pub m2: Field<Complex64>,
    pub m3: Field<Complex64>,
    /// `(ω₁, ω₂, ω₃)`.
    pub omega: [Field<Complex64>; 3],
    /// `true` where `|k|` is too small to divide by; quotients are 0 there.
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixOps {
    pub a1: Field<Complex64>,
    pub a2: Field<Complex64>,
}

/// `A₁, A₂` of the mix spin system for a potential `u` on (x, y).
pub fn mix_coefficient_ops(u: &Field<f64>, params: &SolitonParams, acc: Accuracy) -> Result<MixOps> {
    let empty = BTreeMap::new();
    let cx = Ctx { d: &FdDiff(acc), f: &empty };
    let (a1, a2) = mix_a(&cx, &X(u.to_complex()), params)?;
    Ok(MixOps { a1: a1.0, a2: a2.0 })
}

fn inv_k(k: &Field<f64>) -> Result<(Field<Complex64>, Vec<bool>)> {
    let mask: Vec<bool> = k.data().iter().map(|v| v.abs() < K_ZERO).collect();
    let frac = mask.iter().filter(|m| **m).count() as f64 / mask.len() as f64;
    if frac > MASK_BUDGET {
        return domain(format!("k vanishes on {:.1}% of the grid (budget {:.0}%)", 100.0 * frac, 100.0 * MASK_BUDGET));
    }
    Ok((k.map(|v| if v.abs() < K_ZERO { Complex64::new(0.0, 0.0) } else { Complex64::new(1.0 / v, 0.0) }), mask))
}

fn zip3(a: &Field<Complex64>, b: &Field<Complex64>, c: &Field<Complex64>, f: impl Fn(Complex64, Complex64, Complex64) -> Complex64) -> Field<Complex64> {
    let data = (0..a.len()).map(|i| f(a.data()[i], b.data()[i], c.data()[i])).collect();
    Field::new(a.grid().clone(), data).unwrap()
}

/// Frame coefficients `m₁, m₂, m₃` and `ω₁, ω₂, ω₃` from the curve data
/// `k, τ` and the potential `u`, on an (x, y) grid. `∂ₓ⁻¹` is the
/// trapezoidal antiderivative vanishing at the lower x boundary, and the
/// undefined `ε` is taken as `β`.
pub fn map_spin_coeffs(
    kind: SpinMapKind,
    k: &Field<f64>,
    tau: &Field<f64>,
    u: &Field<f64>,
    p: &SolitonParams,
    acc: Accuracy,
) -> Result<SpinCoeffMap> {
    k.check_same_grid(tau)?;
    k.check_same_grid(u)?;
    if !(k.all_finite() && tau.all_finite() && u.all_finite()) {
        return domain("spin map inputs must be finite");
    }
    use AxisName::*;
    let (kc, tc, uc) = (k.to_complex(), tau.to_complex(), u.to_complex());
    let (ik, mask) = inv_k(k)?;
    let al = p.alpha;
    let al2 = al * al;
    let which = match kind {
        SpinMapKind::Ishimori => MOperator::M2Ish,
        SpinMapKind::Mix => MOperator::M2,
    };
    let mu = apply_m(&uc, which, al, p.a, p.b, acc)?;
    let beta = p.beta.value();
    let ty = partial(&tc, Y, acc)?;
    let ky = partial(&kc, Y, acc)?;
    let kx = partial(&kc, X, acc)?;
    let m1 = antider_x(&ty.zip_map(&mu, |t, m| t - m * (beta / (al2 * 2.0)))?)?;
    let m2 = mu.zip_map(&ik, |m, ik| -(m * ik) / (al2 * 2.0))?;
    let ikmu = ik.zip_map(&mu, |a, b| a * b)?;
    let m3 = antider_x(&zip3(&ky, &tc, &ikmu, |ky, t, q| ky + t * q / (al2 * 2.0)))?;
    let m3y = partial(&m3, Y, acc)?;
    let m2y = partial(&m2, Y, acc)?;
    let ux = partial(&uc, X, acc)?;
    let uy = partial(&uc, Y, acc)?;
    let (w2, w3) = match kind {
        SpinMapKind::Ishimori => {
            let w2 = (0..k.len())
                .map(|i| -kx.data()[i] - al2 * (m3y.data()[i] + m2.data()[i] * m1.data()[i]) + m2.data()[i] * ux.data()[i] * I)
                .collect();
            let w3 = (0..k.len())
                .map(|i| {
                    -(kc.data()[i] * tc.data()[i]) + al2 * (m2y.data()[i] - m3.data()[i] * m1.data()[i])
                        + kc.data()[i] * uy.data()[i] * I
                        + m3.data()[i] * ux.data()[i] * I
                })
                .collect();
            (w2, w3)
        }
        SpinMapKind::Mix => {
            let ops = mix_coefficient_ops(u, p, acc)?;
            let (a, b) = (p.a, p.b);
            let c1 = Complex64::new(4.0 * (a * a - 2.0 * a * b - b), 0.0);
            let c2 = al * (4.0 * (b - a));
            let w2 = (0..k.len())
                .map(|i| {
                    -(c1 * kx.data()[i]) - c2 * ky.data()[i] - al2 * (m3y.data()[i] + m2.data()[i] * m1.data()[i])
                        + m2.data()[i] * ops.a1.data()[i]
                })
                .collect();
            let w3 = (0..k.len())
                .map(|i| {
                    let kk = kc.data()[i];
                    -(c1 * kk * tc.data()[i]) - c2 * kk * m1.data()[i]
                        + al2 * (m2y.data()[i] - m3.data()[i] * m1.data()[i])
                        + kk * ops.a2.data()[i]
                        + m3.data()[i] * ops.a1.data()[i]
                })
                .collect();
            (w2, w3)
        }
    };
    let g = k.grid().clone();
    let w2 = Field::new(g.clone(), w2)?;
    let w3 = Field::new(g.clone(), w3)?;
    let w2x = partial(&w2, X, acc)?;
    let w1 = Field::new(g, (0..k.len()).map(|i| (-w2x.data()[i] + tc.data()[i] * w3.data()[i]) * ik.data()[i]).collect())?;
    Ok(SpinCoeffMap { m1, m2, m3, omega: [w1, w2, w3], mask })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePhase {
    pub a1_sq: Field<f64>,
    pub a2_sq: Field<f64>,
    pub gamma1: Field<Complex64>,
    pub gamma2: Field<Complex64>,
    /// Phases and the assembled `q = a₁e^{ib₁}`, `p = a₂e^{ib₂}`, when requested.
    pub b1: Option<Field<Complex64>>,
    pub b2: Option<Field<Complex64>>,
    pub q: Option<Field<Complex64>>,
    pub p: Option<Field<Complex64>>,
}

/// Inputs of [`amplitude_phase`]; `a` and `d` are the undefined gauge
/// fields of the phase integrands, zero when absent.
pub struct AmplitudeInputs<'a> {
    pub k: &'a Field<f64>,
    pub tau: &'a Field<f64>,
    pub m1: &'a Field<f64>,
    pub m2: &'a Field<f64>,
    pub m3: &'a Field<f64>,
    pub a: Option<&'a Field<Complex64>>,
    pub d: Option<&'a Field<Complex64>>,
}

/// Amplitudes `a₁², a₂²`, the phase sources `γ₁, γ₂`, and optionally the
/// phases and `q, p`.
pub fn amplitude_phase(
    kind: SpinMapKind,
    inp: &AmplitudeInputs,
    p: &SolitonParams,
    with_phase: bool,
    acc: Accuracy,
) -> Result<AmplitudePhase> {
    let (k, tau, m1, m2, m3) = (inp.k, inp.tau, inp.m1, inp.m2, inp.m3);
    for f in [tau, m1, m2, m3] {
        k.check_same_grid(f)?;
    }
    let ar = p.alpha.re;
    let ai = p.alpha.im;
    let an2 = p.alpha.norm_sqr();
    let kx = partial(k, AxisName::X, acc)?;
    let ky = partial(k, AxisName::Y, acc)?;
    let m3x = partial(m3, AxisName::X, acc)?;
    let n = k.len();
    let at = |f: &Field<f64>, i: usize| f.data()[i];

    // (l₁, l₂, prefactors) with the shared brace structure
    let (l1, l2, pre1, pre2, two) = match kind {
        SpinMapKind::Ishimori => (0.5, -0.5, 1.0, 1.0, 2.0),
        SpinMapKind::Mix => {
            if p.a == 0.0 || p.b == 0.0 {
                return domain("mix amplitudes need nonzero a and b");
            }
            let l = p.l.unwrap_or(p.a);
            let r = (p.a * p.a) / (p.b * p.b);
            (l + 1.0, l, r, 1.0 / r, 2.0)
        }
    };
    let mut a1p = Vec::with_capacity(n);
    let mut a2p = Vec::with_capacity(n);
    let mut g1 = Vec::with_capacity(n);
    let mut g2 = Vec::with_capacity(n);
    for i in 0..n {
        let (kk, t, n1, n2, n3) = (at(k, i), at(tau, i), at(m1, i), at(m2, i), at(m3, i));
        let (kxi, kyi, m3xi) = (kx.data()[i], ky.data()[i], m3x.data()[i]);
        let common = an2 / 4.0 * (n3 * n3 + n2 * n2);
        let rpart = kk * kk * n1 + n3 * kk * t + n2 * kxi;
        let ipart = kk * (2.0 * kyi - m3xi) - kxi * n3;
        let shared = an2 / 2.0 * (n3 * kk * n1 + n2 * kyi);
        match kind {
            SpinMapKind::Ishimori => {
                a1p.push(0.25 * kk * kk + common - 0.5 * ar * kk * n3 - 0.5 * ai * kk * n2);
                a2p.push(0.25 * kk * kk + common + 0.5 * ar * kk * n3 - 0.5 * ai * kk * n2);
                g1.push(I * (0.5 * kk * kk * t + shared - 0.5 * ar * rpart + 0.5 * ai * ipart));
                g2.push(-I * (0.5 * kk * kk * t + shared + 0.5 * ar * rpart + 0.5 * ai * ipart));
            }
            SpinMapKind::Mix => {
                a1p.push(l1 * l1 * kk * kk + common - l1 * ar * kk * n3 - l1 * ai * kk * n2);
                a2p.push(l2 * l2 * kk * kk + common - l2 * ar * kk * n3 + l2 * ai * kk * n2);
                g1.push(I * (two * l1 * l1 * kk * kk * t + shared - l1 * ar * rpart + l1 * ai * ipart));
                g2.push(-I * (two * l2 * l2 * kk * kk * t + shared - l2 * ar * rpart - l2 * ai * ipart));
            }
        }
    }
    let g = k.grid().clone();
    let a1_sq = Field::new(g.clone(), a1p.iter().map(|v| pre1 * v).collect())?;
    let a2_sq = Field::new(g.clone(), a2p.iter().map(|v| pre2 * v).collect())?;
    let gamma1 = Field::new(g.clone(), g1)?;
    let gamma2 = Field::new(g.clone(), g2)?;
    let mut out = AmplitudePhase { a1_sq, a2_sq, gamma1, gamma2, b1: None, b2: None, q: None, p: None };
    if !with_phase {
        return Ok(out);
    }
    for (name, vals) in [("a1'^2", &a1p), ("a2'^2", &a2p)] {
        if let Some(i) = vals.iter().position(|v| !(*v > 0.0)) {
            let loc: Vec<String> = g.location(i).iter().map(|(n, v)| format!("{n}={v:.6}")).collect();
            return domain(format!("{name} = {:.3e} is not positive at ({})", vals[i], loc.join(", ")));
        }
    }
    let zero = Field::zeros(&g);
    let af = inp.a.unwrap_or(&zero);
    let df = inp.d.unwrap_or(&zero);
    af.check_same_grid(k)?;
    df.check_same_grid(k)?;
    let gauge = |i: usize| {
        let (a, d) = (af.data()[i], df.data()[i]);
        a.conj() - a + d - d.conj()
    };
    let int1: Vec<Complex64> =
        (0..n).map(|i| -out.gamma1.data()[i] / (I * 2.0 * a1p[i]) - gauge(i)).collect();
    let int2: Vec<Complex64> =
        (0..n).map(|i| -out.gamma2.data()[i] / (I * 2.0 * a2p[i]) + gauge(i)).collect();
    let b1 = antider_x(&Field::new(g.clone(), int1)?)?;
    let b2 = antider_x(&Field::new(g.clone(), int2)?)?;
    let q = Field::new(g.clone(), (0..n).map(|i| (I * b1.data()[i]).exp() * out.a1_sq.data()[i].sqrt()).collect())?;
    let pp = Field::new(g, (0..n).map(|i| (I * b2.data()[i]).exp() * out.a2_sq.data()[i].sqrt()).collect())?;
    out.b1 = Some(b1);
    out.b2 = Some(b2);
    out.q = Some(q);
    out.p = Some(pp);
    Ok(out)
}
