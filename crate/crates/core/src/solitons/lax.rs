use nalgebra::SMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::collections::BTreeMap;

use super::{EqId, SolitonParams};
use crate::error::{domain, Result, SolgeoError};
use crate::grid::spectral::{invert_first_order, partial_spectral, wavenumbers};
use crate::grid::{partial, Accuracy, AxisName, Field, GridSpec};
use crate::liealg::{spin_constraint_defect, Mat2c, Mat3c};

const I: Complex64 = Complex64::new(0.0, 1.0);
const O: Complex64 = Complex64::new(0.0, 0.0);

/// Norm growth beyond this factor aborts an evolution.
pub const GROWTH_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub enum LaxMatrices {
    /// `e_x = (A₁ − λA₃)e`, `e_t = λe_y + A₂e`.
    Zi { a1: Field<Mat3c>, a2: Field<Mat3c>, a3: Field<Mat3c> },
    /// `e_x = −λA₃e`, `e_t = λe_y − λA₄e`.
    Mi { a3: Field<Mat3c>, a4: Field<Mat3c> },
    /// `αg_y = B₁g_x + B₀g`, `g_t = 2C₂g_xx + C₁g_x + C₀g`.
    Zii { b0: Field<Mat2c>, b1: Field<Mat2c>, c0: Field<Mat2c>, c1: Field<Mat2c>, c2: Field<Mat2c> },
}

fn get<'a>(f: &'a BTreeMap<String, Field<Complex64>>, name: &str) -> Result<&'a Field<Complex64>> {
    f.get(name).ok_or_else(|| SolgeoError::Domain(format!("missing field '{name}'")))
}

/// Spectral derivative on periodic axes, finite differences otherwise.
fn deriv(f: &Field<Complex64>, ax: AxisName, acc: Accuracy) -> Result<Field<Complex64>> {
    if f.grid().axis(ax)?.periodic {
        partial_spectral(f, ax, 1)
    } else {
        partial(f, ax, acc)
    }
}

fn build<const N: usize>(g: &GridSpec, parts: &[&Field<Complex64>], f: impl Fn(&[Complex64]) -> SMatrix<Complex64, N, N>) -> Field<SMatrix<Complex64, N, N>> {
    let mut buf = vec![O; parts.len()];
    let data = (0..g.len())
        .map(|i| {
            for (b, p) in buf.iter_mut().zip(parts) {
                *b = p.data()[i];
            }
            f(&buf)
        })
        .collect();
    Field::new(g.clone(), data).unwrap()
}

fn check_grid(fields: &BTreeMap<String, Field<Complex64>>, names: &[&str]) -> Result<GridSpec> {
    let g = get(fields, names[0])?.grid().clone();
    for n in names {
        let f = get(fields, n)?;
        if !f.grid().same_shape(&g) {
            return domain(format!("field '{n}' lives on a different grid"));
        }
        if !f.all_finite() {
            return domain(format!("field '{n}' has non-finite values"));
        }
    }
    Ok(g)
}

/// Lax matrices of the Z-I, M-I and Z-II linear problems.
pub fn build_lax(
    eq: EqId,
    fields: &BTreeMap<String, Field<Complex64>>,
    p: &SolitonParams,
    acc: Accuracy,
) -> Result<LaxMatrices> {
    use AxisName::*;
    match eq {
        EqId::Zi => {
            let g = check_grid(fields, &["q", "p", "v"])?;
            let (q, pp, v) = (get(fields, "q")?, get(fields, "p")?, get(fields, "v")?);
            let qy = deriv(q, Y, acc)?;
            let py = deriv(pp, Y, acc)?;
            let a1 = build(&g, &[q, pp], |s| {
                let (q, p) = (s[0], s[1]);
                Mat3c::new(O, I * (q - p), q + p, -I * (q - p), O, O, -(q + p), O, O)
            });
            let a2 = build(&g, &[&qy, &py, v], |s| {
                let (qy, py, v) = (s[0], s[1], s[2]);
                Mat3c::new(O, qy + py, I * (py - qy), -(qy + py), O, v, -I * (py - qy), -v, O)
            });
            let one = Complex64::new(1.0, 0.0);
            let a3 = Field::constant(&g, Mat3c::new(O, O, O, O, O, one, O, -one, O));
            Ok(LaxMatrices::Zi { a1, a2, a3 })
        }
        EqId::Mi => {
            let g = check_grid(fields, &["S1", "S2", "S3", "u"])?;
            let (s1, s2, s3, u) = (get(fields, "S1")?, get(fields, "S2")?, get(fields, "S3")?, get(fields, "u")?);
            for i in 0..g.len() {
                let d = spin_constraint_defect(s1.data()[i].re, s2.data()[i].re, s3.data()[i].re, p.r2).abs();
                if !(d <= super::SPIN_TOL) {
                    let loc: Vec<String> = g.location(i).iter().map(|(n, v)| format!("{n}={v:.6}")).collect();
                    return Err(SolgeoError::Constraint {
                        what: format!("spin normalization at ({})", loc.join(", ")),
                        defect: d,
                    });
                }
            }
            let r = if p.r2.value() > 0.0 { Complex64::new(1.0, 0.0) } else { I };
            let r2 = p.r2.value();
            let (s1y, s2y, s3y) = (deriv(s1, Y, acc)?, deriv(s2, Y, acc)?, deriv(s3, Y, acc)?);
            let a3 = build(&g, &[s1, s2, s3], |s| {
                let (s1, s2, s3) = (s[0], s[1], s[2]);
                Mat3c::new(O, r * s1, -I * r * s2, -r * s1, O, s3, I * r * s2, -s3, O)
            });
            let a4 = build(&g, &[s1, s2, s3, u, &s1y, &s2y, &s3y], |s| {
                let (s1, s2, s3, u, s1y, s2y, s3y) = (s[0], s[1], s[2], s[3], s[4], s[5], s[6]);
                let (sp, sm) = (s1 + I * s2, s1 - I * s2);
                let (spy, smy) = (s1y + I * s2y, s1y - I * s2y);
                let e = I * 2.0 * s3 * s2y - I * 2.0 * s2 * s3y + I * u * s1;
                let f = 2.0 * s3 * s1y - 2.0 * s1 * s3y - u * s2;
                let h = I * r2 * (sp * smy - sm * spy) - u * s3;
                Mat3c::new(O, -I * r * e, -r * f, I * r * e, O, -h, r * f, h, O)
            });
            Ok(LaxMatrices::Mi { a3, a4 })
        }
        EqId::Zii => {
            let g = check_grid(fields, &["q", "p", "v"])?;
            let (q, pp) = (get(fields, "q")?, get(fields, "p")?);
            let (a, b, al) = (p.a, p.b, p.alpha);
            let qx = deriv(q, X, acc)?;
            let qy = deriv(q, Y, acc)?;
            let py = deriv(pp, Y, acc)?;
            let pq = q.zip_map(pp, |q, p| p * q)?;
            let pqx = deriv(&pq, X, acc)?;
            let pqy = deriv(&pq, Y, acc)?;
            let rhs11 = pqx.zip_map(&pqy, |x, y| I * ((2.0 * b - a + 1.0) * x + al * y))?;
            let rhs22 = pqx.zip_map(&pqy, |x, y| I * ((a - 2.0 * b) * x - al * y))?;
            let c11 = invert_first_order(&rhs11, Complex64::new(a + 1.0, 0.0), -al)?;
            let c22 = invert_first_order(&rhs22, Complex64::new(a, 0.0), -al)?;
            // c₂₁ carries q_x, not p_x.
            let c12 = qx.zip_map(&qy, |x, y| I * (2.0 * b - a + 1.0) * x + I * al * y)?;
            let c21 = qx.zip_map(&py, |x, y| I * (a - 2.0 * b) * x - I * al * y)?;
            let b0 = build(&g, &[q, pp], |s| Mat2c::new(O, s[0], s[1], O));
            let c1 = b0.map(|m| m * I);
            let c0 = build(&g, &[&c11, &c12, &c21, &c22], |s| Mat2c::new(s[0], s[1], s[2], s[3]));
            let b1 = Field::constant(&g, Mat2c::new(Complex64::from(a + 1.0), O, O, Complex64::from(a)));
            let c2 = Field::constant(&g, Mat2c::new(Complex64::from(b + 1.0), O, O, Complex64::from(b)));
            Ok(LaxMatrices::Zii { b0, b1, c0, c1, c2 })
        }
        _ => domain(format!("no Lax matrices for equation {eq} (have zi, mi, zii)")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaxDefect {
    /// Largest entry of (first path − second path) at the far corner.
    pub defect: f64,
    /// Largest norm reached during either evolution, relative to the start.
    pub growth: f64,
    /// Steps taken along each of the two evolution directions.
    pub steps: [usize; 2],
}

/// States along one periodic line, as matrices acting on the frame.
type Line<const N: usize> = Vec<SMatrix<Complex64, N, N>>;

fn line_norm<const N: usize>(l: &Line<N>) -> f64 {
    l.iter().flat_map(|m| m.iter()).fold(0.0, |a, v| a.max(v.norm()))
}

fn axpy<const N: usize>(a: &Line<N>, h: f64, b: &Line<N>) -> Line<N> {
    a.iter().zip(b).map(|(x, y)| x + y * Complex64::from(h)).collect()
}

/// Apply a Fourier multiplier to each row of each matrix along the line.
/// `mult(row, k)` is the factor for wavenumber `k`.
fn fourier_rows<const N: usize>(l: &Line<N>, length: f64, mult: impl Fn(usize, f64) -> Complex64) -> Line<N> {
    let n = l.len();
    let mut planner = FftPlanner::new();
    let (fwd, inv) = (planner.plan_fft_forward(n), planner.plan_fft_inverse(n));
    let ks = wavenumbers(n, length);
    let mut out = l.clone();
    let mut buf = vec![O; n];
    for r in 0..N {
        for c in 0..N {
            for (b, m) in buf.iter_mut().zip(l) {
                *b = m[(r, c)];
            }
            fwd.process(&mut buf);
            for (j, (b, k)) in buf.iter_mut().zip(&ks).enumerate() {
                let k = if n.is_multiple_of(2) && j == n / 2 { 0.0 } else { *k };
                *b *= mult(r, k) / n as f64;
            }
            inv.process(&mut buf);
            for (b, m) in buf.iter().zip(out.iter_mut()) {
                m[(r, c)] = *b;
            }
        }
    }
    out
}

/// One Lawson RK4 step of `u' = L u + N(s, u)` with step `h`, where `E(τ)`
/// is the exact flow of `L` and `nl(0|1|2, u)` evaluates `N` at the start,
/// middle and end of the step.
fn lawson_step<const N: usize>(
    u: &Line<N>,
    h: f64,
    flow: &dyn Fn(&Line<N>, f64) -> Line<N>,
    nl: &dyn Fn(usize, &Line<N>) -> Line<N>,
) -> Line<N> {
    let k1 = nl(0, u);
    let k2 = nl(1, &flow(&axpy(u, h / 2.0, &k1), h / 2.0));
    let eu = flow(u, h / 2.0);
    let k3 = nl(1, &axpy(&eu, h / 2.0, &k2));
    let k4 = nl(2, &axpy(&flow(u, h), h, &flow(&k3, h / 2.0)));
    let mid = flow(&k2.iter().zip(&k3).map(|(a, b)| a + b).collect(), h / 2.0);
    let ek1 = flow(&k1, h);
    let base = flow(u, h);
    (0..u.len())
        .map(|i| base[i] + (ek1[i] + mid[i] * Complex64::from(2.0) + k4[i]) * Complex64::from(h / 6.0))
        .collect()
}

/// Index helper for a grid with axes named (x, y, t) in any order.
struct Idx {
    grid: GridSpec,
    dims: [usize; 3],
}

impl Idx {
    fn new(grid: &GridSpec) -> Result<Self> {
        if grid.ndim() != 3 {
            return domain("Lax commutation needs an (x, y, t) grid");
        }
        let dims = [grid.axis_index(AxisName::X)?, grid.axis_index(AxisName::Y)?, grid.axis_index(AxisName::T)?];
        Ok(Self { grid: grid.clone(), dims })
    }

    fn at(&self, x: usize, y: usize, t: usize) -> usize {
        let mut ids = [0; 3];
        ids[self.dims[0]] = x;
        ids[self.dims[1]] = y;
        ids[self.dims[2]] = t;
        self.grid.ravel(&ids)
    }

    fn n(&self, ax: usize) -> usize {
        self.grid.axes()[self.dims[ax]].n
    }

    fn h(&self, ax: usize) -> f64 {
        self.grid.axes()[self.dims[ax]].h
    }
}

struct Tracker {
    start: f64,
    peak: f64,
}

impl Tracker {
    fn see<const N: usize>(&mut self, l: &Line<N>) -> Result<()> {
        let n = line_norm(l);
        let g = n / self.start;
        if !(g <= GROWTH_LIMIT) {
            return Err(SolgeoError::Numerical(format!("evolution norm grew by {g:.3e}; step size unstable")));
        }
        self.peak = self.peak.max(g);
        Ok(())
    }
}

/// Compare the two orders of integrating a Lax pair over the whole grid:
/// from the first corner along one evolution direction then the other,
/// and in the opposite order. The initial frame `g0` (identity when
/// absent) is constant along the periodic line. Both evolution axes need
/// an odd number of points; each step spans two grid cells.
///
/// Z-I integrates `e_x` pointwise along periodic `y` and `e_t` as a PDE in
/// `y`; Z-II integrates `g_y` and `g_t` as PDEs in periodic `x`.
pub fn lax_commutation_defect(
    eq: EqId,
    fields: &BTreeMap<String, Field<Complex64>>,
    p: &SolitonParams,
    acc: Accuracy,
    g0: Option<&[Complex64]>,
) -> Result<LaxDefect> {
    let lax = build_lax(eq, fields, p, acc)?;
    match lax {
        LaxMatrices::Zi { a1, a2, a3 } => zi_defect(&a1, &a2, &a3, p.lambda, g0),
        LaxMatrices::Zii { b0, c0, c1, .. } => zii_defect(&b0, &c0, &c1, p, g0),
        LaxMatrices::Mi { .. } => domain("commutation test is implemented for zi and zii"),
    }
}

fn initial<const N: usize>(g0: Option<&[Complex64]>) -> Result<SMatrix<Complex64, N, N>> {
    match g0 {
        None => Ok(SMatrix::identity()),
        Some(v) if v.len() == N * N && v.iter().all(|c| c.is_finite()) => Ok(SMatrix::from_row_slice(v)),
        Some(v) => domain(format!("initial frame needs {} finite entries, got {}", N * N, v.len())),
    }
}

fn check_steps(idx: &Idx, ax: usize, name: &str) -> Result<usize> {
    let n = idx.n(ax);
    if n < 3 || n.is_multiple_of(2) {
        return domain(format!("{name} axis needs an odd number of points >= 3, got {n}"));
    }
    Ok((n - 1) / 2)
}

fn zi_defect(a1: &Field<Mat3c>, a2: &Field<Mat3c>, a3: &Field<Mat3c>, lambda: f64, g0: Option<&[Complex64]>) -> Result<LaxDefect> {
    let idx = Idx::new(a1.grid())?;
    let yax = idx.grid.axes()[idx.dims[1]].clone();
    if !yax.periodic {
        return domain("Z-I commutation needs a periodic y axis");
    }
    let sx = check_steps(&idx, 0, "x")?;
    let st = check_steps(&idx, 2, "t")?;
    let ny = idx.n(1);
    let (hx, ht) = (2.0 * idx.h(0), 2.0 * idx.h(2));
    let lam = Complex64::from(lambda);
    let start: Line<3> = vec![initial::<3>(g0)?; ny];
    let norm0 = line_norm(&start).max(f64::MIN_POSITIVE);

    let xmat = |xi: usize, yi: usize, ti: usize| {
        let k = idx.at(xi, yi, ti);
        a1.data()[k] - a3.data()[k] * lam
    };
    let x_sweep = |mut u: Line<3>, ti: usize, tr: &mut Tracker| -> Result<Line<3>> {
        for s in 0..sx {
            let x0 = 2 * s;
            u = (0..ny)
                .map(|y| {
                    let (m0, m1, m2) = (xmat(x0, y, ti), xmat(x0 + 1, y, ti), xmat(x0 + 2, y, ti));
                    let e = u[y];
                    let k1 = m0 * e;
                    let k2 = m1 * (e + k1 * Complex64::from(hx / 2.0));
                    let k3 = m1 * (e + k2 * Complex64::from(hx / 2.0));
                    let k4 = m2 * (e + k3 * Complex64::from(hx));
                    e + (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * Complex64::from(hx / 6.0)
                })
                .collect();
            tr.see(&u)?;
        }
        Ok(u)
    };
    let len = yax.length();
    let flow = |l: &Line<3>, tau: f64| fourier_rows(l, len, |_, k| (I * lam * k * tau).exp());
    let t_sweep = |mut u: Line<3>, xi: usize, tr: &mut Tracker| -> Result<Line<3>> {
        for s in 0..st {
            let t0 = 2 * s;
            let nl = |stage: usize, v: &Line<3>| -> Line<3> {
                (0..ny).map(|y| a2.data()[idx.at(xi, y, t0 + stage)] * v[y]).collect()
            };
            u = lawson_step(&u, ht, &flow, &nl);
            tr.see(&u)?;
        }
        Ok(u)
    };
    let (nx, nt) = (idx.n(0), idx.n(2));
    let (r1, r2) = rayon::join(
        || {
            let mut tr = Tracker { start: norm0, peak: 1.0 };
            let u = x_sweep(start.clone(), 0, &mut tr)?;
            let u = t_sweep(u, nx - 1, &mut tr)?;
            Ok::<_, SolgeoError>((u, tr.peak))
        },
        || {
            let mut tr = Tracker { start: norm0, peak: 1.0 };
            let u = t_sweep(start.clone(), 0, &mut tr)?;
            let u = x_sweep(u, nt - 1, &mut tr)?;
            Ok::<_, SolgeoError>((u, tr.peak))
        },
    );
    let ((u1, g1), (u2, g2)) = (r1?, r2?);
    Ok(LaxDefect { defect: diff(&u1, &u2), growth: g1.max(g2), steps: [sx, st] })
}

fn diff<const N: usize>(a: &Line<N>, b: &Line<N>) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| (x - y).iter().fold(m, |m, v| m.max(v.norm())))
}

fn zii_defect(b0: &Field<Mat2c>, c0: &Field<Mat2c>, c1: &Field<Mat2c>, p: &SolitonParams, g0: Option<&[Complex64]>) -> Result<LaxDefect> {
    let idx = Idx::new(b0.grid())?;
    let xax = idx.grid.axes()[idx.dims[0]].clone();
    if !xax.periodic {
        return domain("Z-II commutation needs a periodic x axis");
    }
    let sy = check_steps(&idx, 1, "y")?;
    let st = check_steps(&idx, 2, "t")?;
    let nx = idx.n(0);
    let (hy, ht) = (2.0 * idx.h(1), 2.0 * idx.h(2));
    let al = p.alpha;
    let speed = [Complex64::from(p.a + 1.0) / al, Complex64::from(p.a) / al];
    let diffusion = [2.0 * (p.b + 1.0), 2.0 * p.b];
    let start: Line<2> = vec![initial::<2>(g0)?; nx];
    let norm0 = line_norm(&start).max(f64::MIN_POSITIVE);
    let len = xax.length();

    let yflow = |l: &Line<2>, tau: f64| fourier_rows(l, len, |r, k| (speed[r] * I * k * tau).exp());
    let tflow = |l: &Line<2>, tau: f64| fourier_rows(l, len, |r, k| Complex64::from((-diffusion[r] * k * k * tau).exp()));
    let y_sweep = |mut u: Line<2>, ti: usize, tr: &mut Tracker| -> Result<Line<2>> {
        for s in 0..sy {
            let y0 = 2 * s;
            let nl = |stage: usize, v: &Line<2>| -> Line<2> {
                (0..nx).map(|x| b0.data()[idx.at(x, y0 + stage, ti)] * v[x] / al).collect()
            };
            u = lawson_step(&u, hy, &yflow, &nl);
            tr.see(&u)?;
        }
        Ok(u)
    };
    let t_sweep = |mut u: Line<2>, yi: usize, tr: &mut Tracker| -> Result<Line<2>> {
        for s in 0..st {
            let t0 = 2 * s;
            let nl = |stage: usize, v: &Line<2>| -> Line<2> {
                let vx = fourier_rows(v, len, |_, k| I * k);
                (0..nx)
                    .map(|x| {
                        let k = idx.at(x, yi, t0 + stage);
                        c1.data()[k] * vx[x] + c0.data()[k] * v[x]
                    })
                    .collect()
            };
            u = lawson_step(&u, ht, &tflow, &nl);
            tr.see(&u)?;
        }
        Ok(u)
    };
    let (ny, nt) = (idx.n(1), idx.n(2));
    let (r1, r2) = rayon::join(
        || {
            let mut tr = Tracker { start: norm0, peak: 1.0 };
            let u = y_sweep(start.clone(), 0, &mut tr)?;
            let u = t_sweep(u, ny - 1, &mut tr)?;
            Ok::<_, SolgeoError>((u, tr.peak))
        },
        || {
            let mut tr = Tracker { start: norm0, peak: 1.0 };
            let u = t_sweep(start.clone(), 0, &mut tr)?;
            let u = y_sweep(u, nt - 1, &mut tr)?;
            Ok::<_, SolgeoError>((u, tr.peak))
        },
    );
    let ((u1, g1), (u2, g2)) = (r1?, r2?);
    Ok(LaxDefect { defect: diff(&u1, &u2), growth: g1.max(g2), steps: [sy, st] })
}
