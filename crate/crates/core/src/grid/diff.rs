use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AxisName, Field, Sample};
use crate::error::{domain, Result, SolgeoError};

/// Formal order of the difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Accuracy {
    #[default]
    #[serde(rename = "2")]
    Second,
    #[serde(rename = "4")]
    Fourth,
}

impl Accuracy {
    pub fn order(self) -> usize {
        match self {
            Accuracy::Second => 2,
            Accuracy::Fourth => 4,
        }
    }
}

impl TryFrom<u32> for Accuracy {
    type Error = SolgeoError;
    fn try_from(v: u32) -> Result<Self> {
        match v {
            2 => Ok(Accuracy::Second),
            4 => Ok(Accuracy::Fourth),
            _ => domain(format!("accuracy must be 2 or 4, got {v}")),
        }
    }
}

// Integer weights over a common denominator; all rows sum to zero.
const C2: [(isize, f64); 2] = [(-1, -1.0), (1, 1.0)];
const L2: [(isize, f64); 3] = [(0, -3.0), (1, 4.0), (2, -1.0)];
const C4: [(isize, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
const L4_0: [(isize, f64); 5] = [(0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)];
const L4_1: [(isize, f64); 5] = [(-1, -3.0), (0, -10.0), (1, 18.0), (2, -6.0), (3, 1.0)];

// Second derivative. One-sided rows carry one extra point so the boundary
// keeps the interior order.
const SS2: [(isize, f64); 2] = [(-1, 1.0), (1, 1.0)];
const SL2: [(isize, f64); 3] = [(1, -5.0), (2, 4.0), (3, -1.0)];
const SS4: [(isize, f64); 4] = [(-2, -1.0), (-1, 16.0), (1, 16.0), (2, -1.0)];
const SL4_0: [(isize, f64); 5] = [(1, -154.0), (2, 214.0), (3, -156.0), (4, 61.0), (5, -10.0)];
const SL4_1: [(isize, f64); 5] = [(-1, 10.0), (1, -4.0), (2, 14.0), (3, -6.0), (4, 1.0)];

/// Stencil at line position `i` of `n` for derivative order `k`; the flag
/// says whether the stencil is mirrored for the far end.
fn stencil(acc: Accuracy, k: usize, periodic: bool, i: usize, n: usize) -> (&'static [(isize, f64)], bool) {
    let (c, l0, l1): (&'static [(isize, f64)], &'static [(isize, f64)], &'static [(isize, f64)]) = match (acc, k) {
        (Accuracy::Second, 1) => (&C2, &L2, &L2),
        (Accuracy::Second, _) => (&SS2, &SL2, &SL2),
        (Accuracy::Fourth, 1) => (&C4, &L4_0, &L4_1),
        (Accuracy::Fourth, _) => (&SS4, &SL4_0, &SL4_1),
    };
    match acc {
        Accuracy::Second => {
            if periodic || (i > 0 && i + 1 < n) {
                (c, false)
            } else {
                (l0, i != 0)
            }
        }
        Accuracy::Fourth => {
            if periodic || (i >= 2 && i + 2 < n) {
                (c, false)
            } else if i == 0 || i + 1 == n {
                (l0, i != 0)
            } else {
                (l1, i != 1)
            }
        }
    }
}

fn denominator(acc: Accuracy) -> f64 {
    match acc {
        Accuracy::Second => 2.0,
        Accuracy::Fourth => 12.0,
    }
}

/// First derivative along `axis`: centred stencils inside, one-sided
/// stencils of the same order at open boundaries, wrap-around on periodic
/// axes.
pub fn partial<T: Sample>(f: &Field<T>, axis: AxisName, acc: Accuracy) -> Result<Field<T>> {
    apply(f, axis, acc, 1)
}

/// Second derivative along `axis` with the same order as [`partial`] up to
/// the boundary. Applying [`partial`] twice loses one order there.
pub fn partial2<T: Sample>(f: &Field<T>, axis: AxisName, acc: Accuracy) -> Result<Field<T>> {
    apply(f, axis, acc, 2)
}

fn apply<T: Sample>(f: &Field<T>, axis: AxisName, acc: Accuracy, k: usize) -> Result<Field<T>> {
    let grid = f.grid();
    let d = grid.axis_index(axis)?;
    let ax = &grid.axes()[d];
    let n = ax.n;
    let need = acc.order() + k;
    if n < need {
        return domain(format!("axis {axis} has {n} points, derivative {k} at order {} needs {need}", acc.order()));
    }
    let stride = grid.stride(d);
    let scale = match (k, acc) {
        (1, _) => 1.0 / (denominator(acc) * ax.h),
        (_, Accuracy::Second) => 1.0 / (ax.h * ax.h),
        (_, Accuracy::Fourth) => 1.0 / (12.0 * ax.h * ax.h),
    };
    // odd derivatives change sign under reflection
    let flip = if k % 2 == 1 { -1.0 } else { 1.0 };
    let periodic = ax.periodic;
    let src = f.data();
    let data: Vec<T> = (0..src.len())
        .into_par_iter()
        .map(|idx| {
            let i = (idx / stride) % n;
            let base = idx - i * stride;
            let (st, mirror) = stencil(acc, k, periodic, i, n);
            let centre = src[idx];
            let mut acc_v = T::zero();
            // differencing against the centre value makes constants exact
            for &(off, w) in st {
                let (off, w) = if mirror { (-off, flip * w) } else { (off, w) };
                let j = if periodic {
                    (i as isize + off).rem_euclid(n as isize) as usize
                } else {
                    (i as isize + off) as usize
                };
                acc_v = acc_v + (src[base + j * stride] - centre).scale(w);
            }
            acc_v.scale(scale)
        })
        .collect();
    Field::new(grid.clone(), data)
}

/// Cumulative trapezoidal integral along `axis`, zero on the lower
/// boundary plane.
pub fn antiderivative<T: Sample>(f: &Field<T>, axis: AxisName) -> Result<Field<T>> {
    let grid = f.grid();
    let d = grid.axis_index(axis)?;
    let ax = &grid.axes()[d];
    let (n, h) = (ax.n, ax.h);
    let stride = grid.stride(d);
    let src = f.data();
    let mut out = vec![T::zero(); src.len()];
    let starts: Vec<usize> = (0..src.len()).filter(|idx| (idx / stride).is_multiple_of(n)).collect();
    let lines: Vec<(usize, Vec<T>)> = starts
        .par_iter()
        .map(|&base| {
            let mut line = Vec::with_capacity(n);
            let mut acc = T::zero();
            line.push(acc);
            for i in 1..n {
                acc = acc + (src[base + (i - 1) * stride] + src[base + i * stride]).scale(0.5 * h);
                line.push(acc);
            }
            (base, line)
        })
        .collect();
    for (base, line) in lines {
        for (i, v) in line.into_iter().enumerate() {
            out[base + i * stride] = v;
        }
    }
    Field::new(grid.clone(), out)
}

/// The inverse x-derivative with the zero-at-x-minimum gauge.
pub fn antider_x<T: Sample>(f: &Field<T>) -> Result<Field<T>> {
    antiderivative(f, AxisName::X)
}

/// Second-order operators in (x, y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MOperator {
    M1,
    M2,
    M2Ish,
}

/// `M₁f = α²f_yy + 4α(b−a)f_xy + 4(a²−2ab−b)f_xx`,
/// `M₂f = α²f_yy − 2α(2a+1)f_xy + 4a(a+1)f_xx`, and `M₂` at `a=b=−½`.
pub fn apply_m(
    f: &Field<Complex64>,
    which: MOperator,
    alpha: Complex64,
    a: f64,
    b: f64,
    acc: Accuracy,
) -> Result<Field<Complex64>> {
    let fx = partial(f, AxisName::X, acc)?;
    let fxx = partial2(f, AxisName::X, acc)?;
    let fxy = partial(&fx, AxisName::Y, acc)?;
    let fyy = partial2(f, AxisName::Y, acc)?;
    let (a, b) = match which {
        MOperator::M2Ish => (-0.5, -0.5),
        _ => (a, b),
    };
    let (cyy, cxy, cxx) = match which {
        MOperator::M1 => (alpha * alpha, alpha * (4.0 * (b - a)), Complex64::from(4.0 * (a * a - 2.0 * a * b - b))),
        MOperator::M2 | MOperator::M2Ish => {
            (alpha * alpha, alpha * (-2.0 * (2.0 * a + 1.0)), Complex64::from(4.0 * a * (a + 1.0)))
        }
    };
    let data = fyy
        .data()
        .par_iter()
        .zip(fxy.data().par_iter())
        .zip(fxx.data().par_iter())
        .map(|((&yy, &xy), &xx)| cyy * yy + cxy * xy + cxx * xx)
        .collect();
    Field::new(f.grid().clone(), data)
}
