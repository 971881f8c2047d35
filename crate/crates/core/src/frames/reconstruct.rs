use nalgebra::Vector3;
use rayon::prelude::*;
use std::io::Write;

use super::surface::{gwe_matrices, SurfaceData};
use super::propagate_matrices;
use crate::error::{domain, Result};
use crate::grid::{partial, Accuracy, AxisName, Field};
use crate::liealg::{commutator, Mat3};

/// Result of integrating the Gauss–Weingarten system.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub positions: Field<Vector3<f64>>,
    /// `(r_x, r_y, n)` stacked as rows at every point.
    pub frames: Field<Mat3>,
    /// `max |∂y(r_x) − ∂x(r_y)|` of the integrated tangent fields.
    pub mixed_partial_defect: f64,
    /// `max |A_y − B_x + [A, B]|` of the input data.
    pub gmce_residual: f64,
    /// The flag threshold `10·h²` for the residual above.
    pub gmce_threshold: f64,
    pub gmce_flagged: bool,
}

/// Integrate `Z_x = AZ, Z_y = BZ` for `Z = (r_x, r_y, n)` along x at the
/// first y, then along y for every x; positions follow by trapezoidal
/// integration of `r_x` and `r_y` in the same order. `frame0` rows are the
/// orthonormal directions (ê₁, ê₂, ê₃) fixing `r_x ∥ ê₁` and `n = ê₃` at
/// the origin.
pub fn reconstruct_surface(s: &SurfaceData, r0: Vector3<f64>, frame0: Option<Mat3>) -> Result<Reconstruction> {
    s.check_elliptic()?;
    let g = s.grid();
    if g.ndim() != 2 {
        return domain("surface reconstruction needs a 2D (x, y) grid");
    }
    let dx = g.axis_index(AxisName::X)?;
    let dy = g.axis_index(AxisName::Y)?;
    let (ax, ay) = (&g.axes()[dx], &g.axes()[dy]);
    let (nx, ny) = (ax.n, ay.n);
    let idx = |i: usize, j: usize| {
        let mut ids = [0usize; 2];
        ids[dx] = i;
        ids[dy] = j;
        g.ravel(&ids)
    };

    let basis = frame0.unwrap_or_else(Mat3::identity);
    let p0 = s.points()[idx(0, 0)];
    let (e1, e2, e3) = (basis.row(0), basis.row(1), basis.row(2));
    let se = p0.e.sqrt();
    let z0 = Mat3::from_rows(&[e1 * se, e1 * (p0.f / se) + e2 * (p0.det().sqrt() / se), e3.into_owned()]);

    let (a, b) = gwe_matrices(s);
    let row_a: Vec<Mat3> = (0..nx).map(|i| a.data()[idx(i, 0)]).collect();
    let base = propagate_matrices(&z0, &row_a, ax.h)?;
    let columns: Vec<Vec<Mat3>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let col: Vec<Mat3> = (0..ny).map(|j| b.data()[idx(i, j)]).collect();
            propagate_matrices(&base[i], &col, ay.h)
        })
        .collect::<Result<_>>()?;

    let mut zs = vec![Mat3::zeros(); g.len()];
    for (i, col) in columns.iter().enumerate() {
        for (j, z) in col.iter().enumerate() {
            zs[idx(i, j)] = *z;
        }
    }
    let rx = |z: &Mat3| -> Vector3<f64> { z.row(0).transpose() };
    let ry = |z: &Mat3| -> Vector3<f64> { z.row(1).transpose() };

    let mut pos = vec![Vector3::zeros(); g.len()];
    pos[idx(0, 0)] = r0;
    for i in 1..nx {
        pos[idx(i, 0)] = pos[idx(i - 1, 0)] + (rx(&zs[idx(i - 1, 0)]) + rx(&zs[idx(i, 0)])) * (0.5 * ax.h);
    }
    for i in 0..nx {
        for j in 1..ny {
            pos[idx(i, j)] = pos[idx(i, j - 1)] + (ry(&zs[idx(i, j - 1)]) + ry(&zs[idx(i, j)])) * (0.5 * ay.h);
        }
    }

    let frames = Field::new(g.clone(), zs)?;
    let rxf = frames.map(|z| rx(&z));
    let ryf = frames.map(|z| ry(&z));
    let mixed = (&partial(&rxf, AxisName::Y, Accuracy::Second)? - &partial(&ryf, AxisName::X, Accuracy::Second)?)
        .max_norm();

    let gmce = gmce_residual(&a, &b, Accuracy::Second)?.max_norm();
    let h = g.max_h();
    let threshold = 10.0 * h * h;
    Ok(Reconstruction {
        positions: Field::new(g.clone(), pos)?,
        frames,
        mixed_partial_defect: mixed,
        gmce_residual: gmce,
        gmce_threshold: threshold,
        gmce_flagged: !(gmce <= threshold),
    })
}

fn gmce_residual(a: &Field<Mat3>, b: &Field<Mat3>, acc: Accuracy) -> Result<Field<Mat3>> {
    let ay = partial(a, AxisName::Y, acc)?;
    let bx = partial(b, AxisName::X, acc)?;
    let data = (0..a.len())
        .into_par_iter()
        .map(|i| ay.data()[i] - bx.data()[i] + commutator(&a.data()[i], &b.data()[i]))
        .collect();
    Field::new(a.grid().clone(), data)
}

/// Wavefront OBJ: one vertex per grid point (axis 0 fastest) and one quad
/// per grid cell.
pub fn write_obj<W: Write>(positions: &Field<Vector3<f64>>, mut w: W) -> Result<()> {
    let g = positions.grid();
    if g.ndim() != 2 {
        return domain("OBJ export needs a 2D position field");
    }
    let (n0, n1) = (g.axes()[0].n, g.axes()[1].n);
    for p in positions.data() {
        writeln!(w, "v {} {} {}", p.x, p.y, p.z)?;
    }
    for j in 0..n1 - 1 {
        for i in 0..n0 - 1 {
            let v = |i: usize, j: usize| i + n0 * j + 1;
            writeln!(w, "f {} {} {} {}", v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1))?;
        }
    }
    Ok(())
}
