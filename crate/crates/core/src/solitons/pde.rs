use nalgebra::Vector3;
use num_complex::Complex64;
use std::collections::BTreeMap;

use super::algebra::{Diff, Scalar, X};
use super::{EqId, ResidualValues, SolitonParams, SolitonResidual};
use crate::error::{domain, Result, SolgeoError};
use crate::grid::{AxisName, Field, MOperator};
use crate::liealg::Mat2c;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

type V<S> = [X<S>; 3];

fn cross<S: Scalar>(a: &V<S>, b: &V<S>) -> V<S> {
    [&a[1] * &b[2] - &a[2] * &b[1], &a[2] * &b[0] - &a[0] * &b[2], &a[0] * &b[1] - &a[1] * &b[0]]
}

fn dot<S: Scalar>(a: &V<S>, b: &V<S>) -> X<S> {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

pub(super) struct Ctx<'a, D: Diff> {
    pub d: &'a D,
    pub f: &'a BTreeMap<String, Field<D::S>>,
}

impl<D: Diff> Ctx<'_, D> {
    pub fn get(&self, name: &str) -> Result<X<D::S>> {
        self.f.get(name).map(|f| X(f.clone())).ok_or_else(|| SolgeoError::Domain(format!("missing field '{name}'")))
    }

    pub fn d(&self, f: &X<D::S>, ax: AxisName) -> Result<X<D::S>> {
        self.d.d(f, ax)
    }

    pub fn d2(&self, f: &X<D::S>, ax: AxisName) -> Result<X<D::S>> {
        self.d.d2(f, ax)
    }

    fn dv(&self, v: &V<D::S>, ax: AxisName) -> Result<V<D::S>> {
        Ok([self.d(&v[0], ax)?, self.d(&v[1], ax)?, self.d(&v[2], ax)?])
    }

    fn dv2(&self, v: &V<D::S>, ax: AxisName) -> Result<V<D::S>> {
        Ok([self.d2(&v[0], ax)?, self.d2(&v[1], ax)?, self.d2(&v[2], ax)?])
    }

    fn spin(&self) -> Result<V<D::S>> {
        Ok([self.get("S1")?, self.get("S2")?, self.get("S3")?])
    }

    /// `M₁`, `M₂` or `M₂` at `a=b=−½` applied to `f`.
    pub fn m_op(&self, f: &X<D::S>, which: MOperator, p: &SolitonParams) -> Result<X<D::S>> {
        use AxisName::*;
        let fx = self.d(f, X)?;
        let fxx = self.d2(f, X)?;
        let fxy = self.d(&fx, Y)?;
        let fyy = self.d2(f, Y)?;
        let al = p.alpha;
        let (a, b) = match which {
            MOperator::M2Ish => (-0.5, -0.5),
            _ => (p.a, p.b),
        };
        let (cyy, cxy, cxx) = match which {
            MOperator::M1 => (al * al, al * (4.0 * (b - a)), c(4.0 * (a * a - 2.0 * a * b - b))),
            MOperator::M2 | MOperator::M2Ish => (al * al, al * (-2.0 * (2.0 * a + 1.0)), c(4.0 * a * (a + 1.0))),
        };
        Ok(fyy.c(cyy) + fxy.c(cxy) + fxx.c(cxx))
    }
}

/// `A₁ = i{α(2b+1)u_y − 2(2ab+a+b)u_x}`,
/// `A₂ = i{4α⁻¹(2a²b+a²+2ab+b)u_x − 2(2ab+a+b)u_y}`.
pub(super) fn mix_a<D: Diff>(cx: &Ctx<D>, u: &X<D::S>, p: &SolitonParams) -> Result<(X<D::S>, X<D::S>)> {
    let (a, b, al) = (p.a, p.b, p.alpha);
    let ux = cx.d(u, AxisName::X)?;
    let uy = cx.d(u, AxisName::Y)?;
    let s = 2.0 * a * b + a + b;
    let a1 = (uy.c(al * (2.0 * b + 1.0)) - ux.r(2.0 * s)).c(I);
    let a2 = (ux.c(al.inv() * (4.0 * (2.0 * a * a * b + a * a + 2.0 * a * b + b))) - uy.r(2.0 * s)).c(I);
    Ok((a1, a2))
}

fn vec_values<S: Scalar>(v: &V<S>) -> Field<Vector3<Complex64>> {
    let (a, b, cc) = (v[0].values(), v[1].values(), v[2].values());
    let data = (0..a.len()).map(|i| Vector3::new(a.data()[i], b.data()[i], cc.data()[i])).collect();
    Field::new(a.grid().clone(), data).unwrap()
}

fn scalar<S: Scalar>(name: &'static str, f: X<S>) -> SolitonResidual {
    SolitonResidual { name, values: ResidualValues::Scalar(f.values()) }
}

fn vector<S: Scalar>(name: &'static str, f: V<S>) -> SolitonResidual {
    SolitonResidual { name, values: ResidualValues::Vector(vec_values(&f)) }
}

fn check_unit<S: Scalar>(s: &V<S>, r2: Option<f64>, tol: f64) -> Result<()> {
    let (a, b, cc) = (s[0].values(), s[1].values(), s[2].values());
    for i in 0..a.len() {
        let (s1, s2, s3) = (a.data()[i].re, b.data()[i].re, cc.data()[i].re);
        let defect = match r2 {
            None => (s1 * s1 + s2 * s2 + s3 * s3 - 1.0).abs(),
            Some(r2) => (s3 * s3 + r2 * (s1 * s1 + s2 * s2) - 1.0).abs(),
        };
        if !(defect <= tol) {
            let loc: Vec<String> = a.grid().location(i).iter().map(|(n, v)| format!("{n}={v:.6}")).collect();
            return Err(SolgeoError::Constraint {
                what: format!("spin normalization at ({})", loc.join(", ")),
                defect,
            });
        }
    }
    Ok(())
}

/// Spin constraint tolerance.
pub const SPIN_TOL: f64 = 1e-8;

pub(super) fn residual<D: Diff>(eq: EqId, cx: &Ctx<D>, p: &SolitonParams) -> Result<Vec<SolitonResidual>> {
    use AxisName::*;
    let al2 = p.alpha * p.alpha;
    Ok(match eq {
        EqId::Ishimori | EqId::Mix => {
            let s = cx.spin()?;
            check_unit(&s, None, SPIN_TOL)?;
            let u = cx.get("u")?;
            let st = cx.dv(&s, T)?;
            let sx = cx.dv(&s, X)?;
            let sy = cx.dv(&s, Y)?;
            let triple = dot(&s, &cross(&sx, &sy));
            if eq == EqId::Ishimori {
                let sxx = cx.dv2(&s, X)?;
                let syy = cx.dv2(&s, Y)?;
                let lap: V<D::S> = std::array::from_fn(|k| &sxx[k] + syy[k].c(al2));
                let w = cross(&s, &lap);
                let ux = cx.d(&u, X)?;
                let uy = cx.d(&u, Y)?;
                let spin = std::array::from_fn(|k| &st[k] - &w[k] - &ux * &sy[k] - &uy * &sx[k]);
                let uxx = cx.d2(&u, X)?;
                let uyy = cx.d2(&u, Y)?;
                let pot = uxx - uyy.c(al2) + triple.c(al2 * 2.0);
                vec![vector("spin", spin), scalar("potential", pot)]
            } else {
                let m1s: V<D::S> = [
                    cx.m_op(&s[0], MOperator::M1, p)?,
                    cx.m_op(&s[1], MOperator::M1, p)?,
                    cx.m_op(&s[2], MOperator::M1, p)?,
                ];
                let w = cross(&s, &m1s);
                let (a1, a2) = mix_a(cx, &u, p)?;
                let spin = std::array::from_fn(|k| &st[k] - &w[k] - &a2 * &sx[k] - &a1 * &sy[k]);
                let pot = cx.m_op(&u, MOperator::M2, p)? - triple.c(al2 * 2.0);
                vec![vector("spin", spin), scalar("potential", pot)]
            }
        }
        EqId::Mviii | EqId::Mxxxiv => {
            let s = cx.spin()?;
            check_unit(&s, None, SPIN_TOL)?;
            let w = cx.get("w")?;
            let st = cx.dv(&s, T)?;
            let sy = cx.dv(&s, Y)?;
            let syy = cx.dv2(&s, Y)?;
            let sw = cross(&s, &syy);
            let spin = std::array::from_fn(|k| &st[k] - &sw[k] - &w * &sy[k]);
            let wy = cx.d(&w, Y)?;
            let second = if eq == EqId::Mviii {
                let sx = cx.dv(&s, X)?;
                cx.d(&w, X)? + wy + dot(&s, &cross(&sx, &sy))
            } else {
                cx.d(&w, T)? + wy + dot(&sy, &syy)
            };
            vec![vector("spin", spin), scalar("w", second)]
        }
        EqId::Ds => {
            let (q, pp, v) = (cx.get("q")?, cx.get("p")?, cx.get("v")?);
            let lap = |f: &super::algebra::X<D::S>| -> Result<super::algebra::X<D::S>> {
                let fxx = cx.d2(f, X)?;
                let fyy = cx.d2(f, Y)?;
                Ok(fxx + fyy.c(al2))
            };
            let rq = cx.d(&q, T)?.c(I) + lap(&q)? + &v * &q;
            let rp = cx.d(&pp, T)?.c(-I) + lap(&pp)? + &v * &pp;
            let pq = &pp * &q;
            let vxx = cx.d2(&v, X)?;
            let vyy = cx.d2(&v, Y)?;
            let rv = vxx - vyy.c(al2) + lap(&pq)?.r(2.0);
            vec![scalar("q", rq), scalar("p", rp), scalar("v", rv)]
        }
        EqId::Zii => {
            let (q, pp, v) = (cx.get("q")?, cx.get("p")?, cx.get("v")?);
            let rq = cx.d(&q, T)?.c(I) + cx.m_op(&q, MOperator::M1, p)? + &v * &q;
            let rp0 = cx.d(&pp, T)?.c(I) - cx.m_op(&pp, MOperator::M1, p)? - &v * &pp;
            let rp = if p.zii_sign_variant { -rp0 } else { rp0 };
            let rv = cx.m_op(&v, MOperator::M2, p)? + cx.m_op(&(&pp * &q), MOperator::M1, p)?.r(2.0);
            vec![scalar("q", rq), scalar("p", rp), scalar("v", rv)]
        }
        EqId::Zi | EqId::Strachan | EqId::M3q => {
            let (q, pp, v) = (cx.get("q")?, cx.get("p")?, cx.get("v")?);
            let qxy = cx.d(&cx.d(&q, X)?, Y)?;
            let pxy = cx.d(&cx.d(&pp, X)?, Y)?;
            let qt = cx.d(&q, T)?.c(I);
            let pt = cx.d(&pp, T)?.c(-I);
            let (rq, rp) = match eq {
                EqId::Zi => (qt - (qxy + &v * &q), pt - (pxy + &v * &pp)),
                EqId::Strachan => {
                    let vqx = cx.d(&(&v * &q), X)?.c(I * (2.0 * p.c));
                    (qt - (qxy - &vqx), pt - (pxy + &vqx))
                }
                _ => {
                    let vqx = cx.d(&(&v * &q), X)?.c(I * (2.0 * p.c));
                    let d2 = p.d * p.d;
                    (qt - (qxy - &vqx + (&v * &q).r(d2)), pt - (pxy + &vqx + (&v * &pp).r(d2)))
                }
            };
            let rv = cx.d(&v, X)? - cx.d(&(&pp * &q), Y)?.r(2.0);
            vec![scalar("q", rq), scalar("p", rp), scalar("v", rv)]
        }
        EqId::MkdvC => {
            let (q, pp, v1, v2) = (cx.get("q")?, cx.get("p")?, cx.get("v1")?, cx.get("v2")?);
            let third = |f: &super::algebra::X<D::S>| -> Result<super::algebra::X<D::S>> { cx.d(&cx.d2(f, X)?, Y) };
            let rq = cx.d(&q, T)? + third(&q)? - cx.d(&(&q * &v1), X)? - &v2 * &q;
            let rp = cx.d(&pp, T)? + third(&pp)? - cx.d(&(&pp * &v1), X)? - &v2 * &pp;
            let rv1 = cx.d(&v1, X)? - cx.d(&(&pp * &q), Y)?.r(2.0);
            let qxy = cx.d(&cx.d(&q, X)?, Y)?;
            let pxy = cx.d(&cx.d(&pp, X)?, Y)?;
            let rv2 = cx.d(&v2, X)? - (&pp * &qxy - &pxy * &q).r(2.0);
            vec![scalar("q", rq), scalar("p", rp), scalar("v1", rv1), scalar("v2", rv2)]
        }
        EqId::MkdvR => {
            let (q, v1) = (cx.get("q")?, cx.get("v1")?);
            let qxxy = cx.d(&cx.d2(&q, X)?, Y)?;
            let rq = cx.d(&q, T)? + qxxy - cx.d(&(&q * &v1), X)?;
            let rv1 = cx.d(&v1, X)? - cx.d(&(&q * &q), Y)?.r(2.0 * p.beta.value());
            vec![scalar("q", rq), scalar("v1", rv1)]
        }
        EqId::Mi => {
            let s = cx.spin()?;
            check_unit(&s, Some(p.r2.value()), SPIN_TOL)?;
            let u = cx.get("u")?;
            let m = spin_matrix2(&s, p);
            let mx = dm(cx, &m, X)?;
            let my = dm(cx, &m, Y)?;
            let mt = dm(cx, &m, T)?;
            let inner: M2<D::S> = {
                let br = mm_sub(&mmul(&m, &my), &mmul(&my, &m));
                std::array::from_fn(|k| &br[k] + (&u * &m[k]).c(I * 2.0))
            };
            let flux = dm(cx, &inner, X)?;
            let spin: M2<D::S> = std::array::from_fn(|k| mt[k].c(I) - &flux[k]);
            let com = mm_sub(&mmul(&mx, &my), &mmul(&my, &mx));
            let prod = mmul(&m, &com);
            let tr = &prod[0] + &prod[3];
            let pot = cx.d(&u, X)? + tr.c((I * 2.0).inv());
            let vals: Vec<Field<Complex64>> = spin.iter().map(|f| f.values()).collect();
            let data = (0..vals[0].len())
                .map(|i| Mat2c::new(vals[0].data()[i], vals[1].data()[i], vals[2].data()[i], vals[3].data()[i]))
                .collect();
            vec![
                SolitonResidual { name: "spin", values: ResidualValues::Matrix(Field::new(vals[0].grid().clone(), data)?) },
                scalar("potential", pot),
            ]
        }
    })
}

/// 2×2 matrix of fields in row-major order.
type M2<S> = [X<S>; 4];

/// `S = (S₃, rS⁻; rS⁺, −S₃)` with `r = 1` for `r² = 1` and `r = i` for `r² = −1`.
fn spin_matrix2<S: Scalar>(s: &V<S>, p: &SolitonParams) -> M2<S> {
    let r = if p.r2.value() > 0.0 { c(1.0) } else { I };
    let sp = &s[0] + s[1].c(I);
    let sm = &s[0] - s[1].c(I);
    [s[2].clone(), sm.c(r), sp.c(r), -&s[2]]
}

fn dm<D: Diff>(cx: &Ctx<D>, m: &M2<D::S>, ax: AxisName) -> Result<M2<D::S>> {
    Ok([cx.d(&m[0], ax)?, cx.d(&m[1], ax)?, cx.d(&m[2], ax)?, cx.d(&m[3], ax)?])
}

fn mmul<S: Scalar>(a: &M2<S>, b: &M2<S>) -> M2<S> {
    [
        &a[0] * &b[0] + &a[1] * &b[2],
        &a[0] * &b[1] + &a[1] * &b[3],
        &a[2] * &b[0] + &a[3] * &b[2],
        &a[2] * &b[1] + &a[3] * &b[3],
    ]
}

fn mm_sub<S: Scalar>(a: &M2<S>, b: &M2<S>) -> M2<S> {
    std::array::from_fn(|k| &a[k] - &b[k])
}

/// Axes an equation differentiates along.
pub(super) fn required_axes(eq: EqId) -> &'static [AxisName] {
    use AxisName::*;
    match eq {
        EqId::Mxxxiv => &[Y, T],
        _ => &[X, Y, T],
    }
}

pub(super) fn check_axes(eq: EqId, g: &crate::grid::GridSpec) -> Result<()> {
    for ax in required_axes(eq) {
        if !g.has_axis(*ax) {
            return domain(format!("equation {eq} needs axis {ax}"));
        }
    }
    Ok(())
}
