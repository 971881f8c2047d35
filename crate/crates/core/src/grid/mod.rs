//! Regular grids over one to four named axes, sampled fields, finite
//! differences and the field file formats.

mod diff;
mod field;
pub mod io;
pub mod spectral;

pub use diff::{antider_x, antiderivative, apply_m, partial, partial2, Accuracy, MOperator};
pub use field::{Field, Sample};

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{domain, Result};

/// Coordinate names understood by the grid layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    X,
    Y,
    Z,
    T,
    Xi1,
    Xi2,
    Xi3,
    Xi4,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::X => "x",
            AxisName::Y => "y",
            AxisName::Z => "z",
            AxisName::T => "t",
            AxisName::Xi1 => "xi1",
            AxisName::Xi2 => "xi2",
            AxisName::Xi3 => "xi3",
            AxisName::Xi4 => "xi4",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "x" => AxisName::X,
            "y" => AxisName::Y,
            "z" => AxisName::Z,
            "t" => AxisName::T,
            "xi1" | "ξ1" => AxisName::Xi1,
            "xi2" | "ξ2" => AxisName::Xi2,
            "xi3" | "ξ3" => AxisName::Xi3,
            "xi4" | "ξ4" => AxisName::Xi4,
            other => return domain(format!("unknown axis name '{other}'")),
        })
    }

    /// `ξ1..ξ4` by 1-based index.
    pub fn xi(i: usize) -> Self {
        match i {
            1 => AxisName::Xi1,
            2 => AxisName::Xi2,
            3 => AxisName::Xi3,
            4 => AxisName::Xi4,
            _ => panic!("xi axis index {i} out of 1..=4"),
        }
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One grid axis: `n` points `origin + i·h`, optionally periodic with
/// period `n·h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub n: usize,
    pub h: f64,
    #[serde(default)]
    pub origin: f64,
    #[serde(default)]
    pub periodic: bool,
}

impl Axis {
    pub fn new(name: AxisName, n: usize, h: f64) -> Self {
        Self { name, n, h, origin: 0.0, periodic: false }
    }

    /// `n` points covering `[lo, hi]` inclusive.
    pub fn span(name: AxisName, n: usize, lo: f64, hi: f64) -> Self {
        Self { name, n, h: (hi - lo) / (n as f64 - 1.0), origin: lo, periodic: false }
    }

    /// `n` points covering the period `[lo, lo + length)`.
    pub fn periodic(name: AxisName, n: usize, lo: f64, length: f64) -> Self {
        Self { name, n, h: length / n as f64, origin: lo, periodic: true }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.h
    }

    pub fn length(&self) -> f64 {
        self.n as f64 * self.h
    }
}

/// Product grid. Axis 0 varies fastest in the flat sample layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 5 {
            return domain(format!("grid needs 1..=5 axes, got {}", axes.len()));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.n < 2 {
                return domain(format!("axis {} has {} points (need at least 2)", a.name, a.n));
            }
            if !(a.h > 0.0 && a.h.is_finite()) || !a.origin.is_finite() {
                return domain(format!("axis {} has invalid spacing/origin", a.name));
            }
            if axes[..i].iter().any(|b| b.name == a.name) {
                return domain(format!("duplicate axis name {}", a.name));
            }
        }
        Ok(Self { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis_index(&self, name: AxisName) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .map_or_else(|| domain(format!("grid has no axis '{name}'")), Ok)
    }

    pub fn has_axis(&self, name: AxisName) -> bool {
        self.axes.iter().any(|a| a.name == name)
    }

    pub fn axis(&self, name: AxisName) -> Result<&Axis> {
        Ok(&self.axes[self.axis_index(name)?])
    }

    pub fn stride(&self, dim: usize) -> usize {
        self.axes[..dim].iter().map(|a| a.n).product()
    }

    /// Per-axis indices of a flat sample index.
    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        self.axes
            .iter()
            .map(|a| {
                let i = idx % a.n;
                idx /= a.n;
                i
            })
            .collect()
    }

    pub fn ravel(&self, ids: &[usize]) -> usize {
        let mut idx = 0;
        for (d, a) in self.axes.iter().enumerate().rev() {
            idx = idx * a.n + ids[d];
        }
        idx
    }

    /// Physical coordinates of a flat sample index, in axis order.
    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.unravel(idx).iter().zip(&self.axes).map(|(&i, a)| a.coord(i)).collect()
    }

    /// Coordinates keyed by axis name, for error messages and reports.
    pub fn location(&self, idx: usize) -> Vec<(AxisName, f64)> {
        self.axes.iter().map(|a| a.name).zip(self.coords(idx)).collect()
    }

    /// Largest spacing over all axes.
    pub fn max_h(&self) -> f64 {
        self.axes.iter().map(|a| a.h).fold(0.0, f64::max)
    }

    /// True when `idx` is at least `margin` points away from every
    /// non-periodic boundary.
    pub fn is_interior(&self, idx: usize, margin: usize) -> bool {
        self.unravel(idx)
            .iter()
            .zip(&self.axes)
            .all(|(&i, a)| a.periodic || (i >= margin && i + margin < a.n))
    }

    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self == other
    }
}
