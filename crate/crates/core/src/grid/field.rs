use nalgebra::SMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::ops::{Add, Neg, Sub};

use super::GridSpec;
use crate::error::{domain, Result};

/// Values that can live on a grid and be differenced: real and complex
/// scalars, vectors and small matrices.
pub trait Sample:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> + 'static
{
    fn zero() -> Self;
    fn scale(self, s: f64) -> Self;
    /// Largest entry modulus.
    fn max_abs(&self) -> f64;
    /// Sum of squared entry moduli.
    fn sq_norm(&self) -> f64;
    fn is_finite(&self) -> bool;
}

impl Sample for f64 {
    fn zero() -> Self {
        0.0
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn max_abs(&self) -> f64 {
        self.abs()
    }
    fn sq_norm(&self) -> f64 {
        self * self
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Sample for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn max_abs(&self) -> f64 {
        self.norm()
    }
    fn sq_norm(&self) -> f64 {
        self.norm_sqr()
    }
    fn is_finite(&self) -> bool {
        Complex64::is_finite(*self)
    }
}

impl<const R: usize, const C: usize> Sample for SMatrix<f64, R, C> {
    fn zero() -> Self {
        Self::zeros()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn max_abs(&self) -> f64 {
        self.amax()
    }
    fn sq_norm(&self) -> f64 {
        self.norm_squared()
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl<const R: usize, const C: usize> Sample for SMatrix<Complex64, R, C> {
    fn zero() -> Self {
        Self::zeros()
    }
    fn scale(self, s: f64) -> Self {
        self * Complex64::from(s)
    }
    fn max_abs(&self) -> f64 {
        self.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
    fn sq_norm(&self) -> f64 {
        self.iter().map(|v| v.norm_sqr()).sum()
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// A grid plus one sample per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: GridSpec,
    data: Vec<T>,
}

impl<T: Sample> Field<T> {
    pub fn new(grid: GridSpec, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() {
            return domain(format!("field has {} samples, grid needs {}", data.len(), grid.len()));
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self { data: vec![T::zero(); grid.len()], grid: grid.clone() }
    }

    pub fn constant(grid: &GridSpec, v: T) -> Self {
        Self { data: vec![v; grid.len()], grid: grid.clone() }
    }

    /// Sample a function of the physical coordinates (axis order).
    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> T + Sync) -> Self {
        let data = (0..grid.len()).into_par_iter().map(|i| f(&grid.coords(i))).collect();
        Self { grid: grid.clone(), data }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U + Sync) -> Field<U> {
        Field { grid: self.grid.clone(), data: self.data.par_iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination with a field on the same grid.
    pub fn zip_map<U: Sample, V: Sample>(&self, other: &Field<U>, f: impl Fn(T, U) -> V + Sync) -> Result<Field<V>> {
        self.check_same_grid(other)?;
        let data = self.data.par_iter().zip(other.data.par_iter()).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field { grid: self.grid.clone(), data })
    }

    pub fn check_same_grid<U>(&self, other: &Field<U>) -> Result<()> {
        if self.grid != other.grid {
            return domain("fields live on different grids");
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest entry modulus over all points.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|v| v.max_abs()).fold(0.0, f64::max)
    }

    /// `(max, flat index of max)`; index 0 for an all-zero field.
    pub fn max_norm_with_index(&self, mask: Option<&[bool]>) -> (f64, usize) {
        let mut best = (0.0, 0);
        for (i, v) in self.data.iter().enumerate() {
            if mask.is_some_and(|m| m[i]) {
                continue;
            }
            let a = v.max_abs();
            if a > best.0 || a.is_nan() {
                best = (a, i);
            }
        }
        best
    }

    /// Grid-weighted L2 norm `sqrt(Σ |v|² · Π h)` over unmasked points.
    pub fn l2_norm(&self, mask: Option<&[bool]>) -> f64 {
        let cell: f64 = self.grid.axes().iter().map(|a| a.h).product();
        let s: f64 = self
            .data
            .iter()
            .enumerate()
            .filter(|(i, _)| !mask.is_some_and(|m| m[*i]))
            .map(|(_, v)| v.sq_norm())
            .sum();
        (s * cell).sqrt()
    }

    /// Max-norm over points at least `margin` away from open boundaries.
    pub fn interior_max_norm(&self, margin: usize) -> f64 {
        self.data
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.is_interior(*i, margin))
            .map(|(_, v)| v.max_abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v.scale(s))
    }
}

impl Field<f64> {
    pub fn to_complex(&self) -> Field<Complex64> {
        self.map(Complex64::from)
    }
}

impl Field<Complex64> {
    pub fn re(&self) -> Field<f64> {
        self.map(|v| v.re)
    }

    pub fn im(&self) -> Field<f64> {
        self.map(|v| v.im)
    }

    pub fn mul_scalar(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }
}

macro_rules! field_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<T: Sample> std::ops::$tr<&Field<T>> for &Field<T> {
            type Output = Field<T>;
            fn $method(self, rhs: &Field<T>) -> Field<T> {
                assert_eq!(self.grid, rhs.grid, "field arithmetic on different grids");
                let data = self.data.par_iter().zip(rhs.data.par_iter()).map(|(&a, &b)| a $op b).collect();
                Field { grid: self.grid.clone(), data }
            }
        }
    };
}

field_binop!(Add, add, +);
field_binop!(Sub, sub, -);

impl<T: Sample> Neg for &Field<T> {
    type Output = Field<T>;
    fn neg(self) -> Field<T> {
        self.map(|v| -v)
    }
}
