//! Pointwise field algebra with pluggable derivatives: finite differences on
//! sampled data, or exact propagation of truncated Taylor jets.

use num_complex::Complex64;
use rayon::prelude::*;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{domain, Result};
use crate::grid::{partial, partial2, Accuracy, AxisName, Field, Sample};

/// Values that can be multiplied pointwise.
pub trait Scalar: Sample + Mul<Output = Self> {
    fn from_c(c: Complex64) -> Self;
    fn cmul(self, c: Complex64) -> Self;
    /// Point value (zeroth Taylor coefficient for jets).
    fn value(&self) -> Complex64;
}

impl Scalar for Complex64 {
    fn from_c(c: Complex64) -> Self {
        c
    }
    fn cmul(self, c: Complex64) -> Self {
        self * c
    }
    fn value(&self) -> Complex64 {
        *self
    }
}

/// Derivative backend.
pub trait Diff: Sync {
    type S: Scalar;
    fn d(&self, f: &X<Self::S>, axis: AxisName) -> Result<X<Self::S>>;
    /// Second derivative along one axis.
    fn d2(&self, f: &X<Self::S>, axis: AxisName) -> Result<X<Self::S>> {
        self.d(&self.d(f, axis)?, axis)
    }
}

/// Finite differences on sampled data.
#[derive(Debug, Clone, Copy)]
pub struct FdDiff(pub Accuracy);

impl Diff for FdDiff {
    type S = Complex64;
    fn d(&self, f: &X<Complex64>, axis: AxisName) -> Result<X<Complex64>> {
        partial(&f.0, axis, self.0).map(X)
    }
    fn d2(&self, f: &X<Complex64>, axis: AxisName) -> Result<X<Complex64>> {
        partial2(&f.0, axis, self.0).map(X)
    }
}

/// Exact derivatives of Taylor jets in (x, y, t).
#[derive(Debug, Clone, Copy, Default)]
pub struct JetDiff;

impl Diff for JetDiff {
    type S = Jet;
    fn d(&self, f: &X<Jet>, axis: AxisName) -> Result<X<Jet>> {
        let v = match axis {
            AxisName::X => 0,
            AxisName::Y => 1,
            AxisName::T => 2,
            other => return domain(format!("jets carry x, y, t only, not {other}")),
        };
        Ok(X(f.0.map(|j| j.deriv(v))))
    }
}

/// A field under pointwise arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct X<S: Sample>(pub Field<S>);

impl<S: Scalar> X<S> {
    pub fn constant_like(&self, c: Complex64) -> Self {
        X(Field::constant(self.0.grid(), S::from_c(c)))
    }

    pub fn c(&self, c: Complex64) -> Self {
        X(self.0.map(|v| v.cmul(c)))
    }

    pub fn r(&self, c: f64) -> Self {
        self.c(Complex64::new(c, 0.0))
    }

    pub fn values(&self) -> Field<Complex64> {
        self.0.map(|v| v.value())
    }

    fn zip(&self, o: &Self, f: impl Fn(S, S) -> S + Sync + Send) -> Self {
        assert_eq!(self.0.grid(), o.0.grid(), "pointwise operands on different grids");
        let data = self.0.data().par_iter().zip(o.0.data().par_iter()).map(|(a, b)| f(*a, *b)).collect();
        X(Field::new(self.0.grid().clone(), data).unwrap())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl<S: Scalar> $tr<&X<S>> for &X<S> {
            type Output = X<S>;
            fn $m(self, o: &X<S>) -> X<S> {
                self.zip(o, |a, b| a $op b)
            }
        }
        impl<S: Scalar> $tr<X<S>> for X<S> {
            type Output = X<S>;
            fn $m(self, o: X<S>) -> X<S> {
                &self $op &o
            }
        }
        impl<S: Scalar> $tr<&X<S>> for X<S> {
            type Output = X<S>;
            fn $m(self, o: &X<S>) -> X<S> {
                &self $op o
            }
        }
        impl<S: Scalar> $tr<X<S>> for &X<S> {
            type Output = X<S>;
            fn $m(self, o: X<S>) -> X<S> {
                self $op &o
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl<S: Scalar> Neg for &X<S> {
    type Output = X<S>;
    fn neg(self) -> X<S> {
        X(-&self.0)
    }
}

impl<S: Scalar> Neg for X<S> {
    type Output = X<S>;
    fn neg(self) -> X<S> {
        -&self
    }
}

/// Number of monomials `x^a y^b t^c` with `a+b+c ≤ 3`.
pub const JET_LEN: usize = 20;

const fn monomials() -> [[u8; 3]; JET_LEN] {
    let mut m = [[0u8; 3]; JET_LEN];
    let mut k = 0;
    let mut deg = 0u8;
    while deg <= 3 {
        let mut a = deg as i32;
        while a >= 0 {
            let mut b = deg as i32 - a;
            while b >= 0 {
                m[k] = [a as u8, b as u8, (deg as i32 - a - b) as u8];
                k += 1;
                b -= 1;
            }
            a -= 1;
        }
        deg += 1;
    }
    m
}

const MONO: [[u8; 3]; JET_LEN] = monomials();

const fn index_table() -> [[[u8; 4]; 4]; 4] {
    let mut t = [[[u8::MAX; 4]; 4]; 4];
    let mut k = 0;
    while k < JET_LEN {
        let m = MONO[k];
        t[m[0] as usize][m[1] as usize][m[2] as usize] = k as u8;
        k += 1;
    }
    t
}

const INDEX: [[[u8; 4]; 4]; 4] = index_table();

fn deg(k: usize) -> usize {
    let m = MONO[k];
    (m[0] + m[1] + m[2]) as usize
}

fn idx(a: usize, b: usize, c: usize) -> Option<usize> {
    if a + b + c > 3 {
        None
    } else {
        Some(INDEX[a][b][c] as usize)
    }
}

/// Taylor coefficients in the local offsets `(x−x₀, y−y₀, t−t₀)`, truncated
/// after total degree 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [Complex64; JET_LEN]);

impl Jet {
    pub fn constant(c: Complex64) -> Self {
        let mut j = [Complex64::new(0.0, 0.0); JET_LEN];
        j[0] = c;
        Jet(j)
    }

    /// The coordinate `v` (0 = x, 1 = y, 2 = t) around the value `at`.
    pub fn var(v: usize, at: f64) -> Self {
        let mut j = Self::constant(at.into());
        let e = [(v == 0) as usize, (v == 1) as usize, (v == 2) as usize];
        j.0[idx(e[0], e[1], e[2]).unwrap()] = Complex64::new(1.0, 0.0);
        j
    }

    /// Coefficient of `x^a y^b t^c`.
    pub fn coeff(&self, a: usize, b: usize, c: usize) -> Complex64 {
        idx(a, b, c).map_or(Complex64::new(0.0, 0.0), |k| self.0[k])
    }

    /// Partial derivative along variable `v`; the top-degree part is lost.
    pub fn deriv(&self, v: usize) -> Self {
        let mut out = [Complex64::new(0.0, 0.0); JET_LEN];
        for (k, m) in MONO.iter().enumerate() {
            let mut up = [m[0] as usize, m[1] as usize, m[2] as usize];
            up[v] += 1;
            if let Some(s) = idx(up[0], up[1], up[2]) {
                out[k] = self.0[s] * up[v] as f64;
            }
        }
        Jet(out)
    }

    /// `f(self)` given `f, f', f'', f'''` at the point value.
    pub fn compose(&self, d: [Complex64; 4]) -> Self {
        let mut delta = *self;
        delta.0[0] = Complex64::new(0.0, 0.0);
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let mut out = Self::constant(d[0]);
        for k in 0..JET_LEN {
            out.0[k] += delta.0[k] * d[1] + d2.0[k] * (d[2] * 0.5) + d3.0[k] * (d[3] / 6.0);
        }
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.0[0].exp();
        self.compose([e; 4])
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.0[0].sin(), self.0[0].cos());
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.0[0].sin(), self.0[0].cos());
        self.compose([c, -s, -c, s])
    }

    /// `1 / self`.
    pub fn recip(&self) -> Self {
        let r = self.0[0].inv();
        self.compose([r, -r * r, r * r * r * 2.0, -r * r * r * r * 6.0])
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        for k in 0..JET_LEN {
            self.0[k] += o.0[k];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        for k in 0..JET_LEN {
            self.0[k] -= o.0[k];
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for v in &mut self.0 {
            *v = -*v;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = [Complex64::new(0.0, 0.0); JET_LEN];
        for i in 0..JET_LEN {
            if self.0[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let di = deg(i);
            for j in 0..JET_LEN {
                if di + deg(j) > 3 {
                    continue;
                }
                let (a, b) = (MONO[i], MONO[j]);
                let k = INDEX[(a[0] + b[0]) as usize][(a[1] + b[1]) as usize][(a[2] + b[2]) as usize] as usize;
                out[k] += self.0[i] * o.0[j];
            }
        }
        Jet(out)
    }
}

impl Sample for Jet {
    fn zero() -> Self {
        Jet::constant(Complex64::new(0.0, 0.0))
    }
    fn scale(self, s: f64) -> Self {
        self.cmul(Complex64::new(s, 0.0))
    }
    fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
    fn sq_norm(&self) -> f64 {
        self.0.iter().map(|v| v.norm_sqr()).sum()
    }
    fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl Scalar for Jet {
    fn from_c(c: Complex64) -> Self {
        Jet::constant(c)
    }
    fn cmul(mut self, c: Complex64) -> Self {
        for v in &mut self.0 {
            *v *= c;
        }
        self
    }
    fn value(&self) -> Complex64 {
        self.0[0]
    }
}

/// Jet field of a closed-form function built from coordinate jets.
pub fn jet_field(grid: &crate::grid::GridSpec, f: impl Fn(Jet, Jet, Jet) -> Jet + Sync) -> Result<Field<Jet>> {
    let ids = [AxisName::X, AxisName::Y, AxisName::T].map(|a| grid.axis_index(a).ok());
    Ok(Field::from_fn(grid, |c| {
        let at = |k: usize| ids[k].map_or(0.0, |d| c[d]);
        f(Jet::var(0, at(0)), Jet::var(1, at(1)), Jet::var(2, at(2)))
    }))
}
