//! Moving frames: triad propagation along lines, the two-path commutation
//! defect, fundamental-form conversions and surface reconstruction.

mod reconstruct;
mod surface;

pub use reconstruct::{reconstruct_surface, write_obj, Reconstruction};
pub use surface::{
    build_uvw, coeffs_from_surface, frame_matrices, gwe_matrices, gwe_time_matrix, mi_velocities, p0_from_gamma302,
    time_coefficients, CoeffFields, SurfaceData, SurfacePoint, TimeCoefficients, TimePoint, Uvw,
};

use nalgebra::Vector3;

use crate::error::{domain, Result};
use crate::grid::{Axis, AxisName, Field, GridSpec};
use crate::liealg::{expm, skew_matrix, CoeffTriple, Mat3, Sign};

/// Three frame vectors with signature `beta`. For `beta = −1` the ambient
/// inner product is `diag(−1, 1, 1)`, so that `e1·e1 = −1` is attainable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTriad {
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
    pub e3: Vector3<f64>,
    pub beta: Sign,
}

impl FrameTriad {
    pub fn standard(beta: Sign) -> Self {
        Self { e1: Vector3::x(), e2: Vector3::y(), e3: Vector3::z(), beta }
    }

    /// Triad stacked as matrix rows.
    pub fn to_matrix(&self) -> Mat3 {
        Mat3::from_rows(&[self.e1.transpose(), self.e2.transpose(), self.e3.transpose()])
    }

    pub fn from_matrix(m: &Mat3, beta: Sign) -> Self {
        Self { e1: m.row(0).transpose(), e2: m.row(1).transpose(), e3: m.row(2).transpose(), beta }
    }

    fn metric(beta: Sign) -> Mat3 {
        Mat3::from_diagonal(&Vector3::new(beta.value(), 1.0, 1.0))
    }

    /// Matrix of pairwise inner products `e_i·e_j` in the ambient metric.
    pub fn gram(&self) -> Mat3 {
        let z = self.to_matrix();
        z * Self::metric(self.beta) * z.transpose()
    }

    /// `max |gram − diag(β,1,1)|`.
    pub fn orthonormality_defect(&self) -> f64 {
        (self.gram() - Self::metric(self.beta)).amax()
    }
}

/// A frame per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    pub frames: Field<Mat3>,
    pub beta: Sign,
}

impl FrameField {
    pub fn triad(&self, idx: usize) -> FrameTriad {
        FrameTriad::from_matrix(&self.frames.data()[idx], self.beta)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn max_orthonormality_defect(&self) -> f64 {
        (0..self.len()).map(|i| self.triad(i).orthonormality_defect()).fold(0.0, f64::max)
    }
}

/// One Lie-group midpoint step `Z ← expm(h·M) Z`.
fn step(z: &Mat3, m: &Mat3, h: f64) -> Result<Mat3> {
    Ok(expm(&(m * h))? * z)
}

/// Propagate `Z_x = A Z` along one axis from `start` using the skew
/// matrices of the coefficient samples, `Z_{n+1} = expm(h·A(c_mid)) Z_n`.
pub fn propagate_frenet(start: &FrameTriad, coeffs: &[CoeffTriple], beta: Sign, h: f64) -> Result<FrameField> {
    if coeffs.len() < 2 {
        return domain(format!("propagation needs at least 2 coefficient samples, got {}", coeffs.len()));
    }
    if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
        return domain(format!("non-finite coefficients at sample {i}"));
    }
    let grid = GridSpec::new(vec![Axis::new(AxisName::X, coeffs.len(), h)])?;
    let mut zs = Vec::with_capacity(coeffs.len());
    let mut z = start.to_matrix();
    zs.push(z);
    for w in coeffs.windows(2) {
        let m = skew_matrix(&w[0].midpoint(&w[1]), beta)?;
        z = step(&z, &m, h)?;
        zs.push(z);
    }
    Ok(FrameField { frames: Field::new(grid, zs)?, beta })
}

/// Propagate with general matrices sampled along a line: midpoint of
/// neighbouring samples, then the exponential step.
pub fn propagate_matrices(z0: &Mat3, mats: &[Mat3], h: f64) -> Result<Vec<Mat3>> {
    let mut out = Vec::with_capacity(mats.len());
    let mut z = *z0;
    out.push(z);
    for w in mats.windows(2) {
        z = step(&z, &((w[0] + w[1]) * 0.5), h)?;
        out.push(z);
    }
    Ok(out)
}

/// Difference between the frames reached at the far (x, y) corner by
/// following x then y versus y then x.
pub fn commutation_defect_2d(start: &FrameTriad, a: &Field<Mat3>, b: &Field<Mat3>) -> Result<f64> {
    a.check_same_grid(b)?;
    let g = a.grid();
    if g.ndim() != 2 {
        return domain("commutation defect needs a 2D (x, y) grid");
    }
    let dx = g.axis_index(AxisName::X)?;
    let dy = g.axis_index(AxisName::Y)?;
    let (ax, ay) = (&g.axes()[dx], &g.axes()[dy]);
    let at = |f: &Field<Mat3>, i: usize, j: usize| {
        let mut ids = [0usize; 2];
        ids[dx] = i;
        ids[dy] = j;
        f.data()[g.ravel(&ids)]
    };
    let row = |f: &Field<Mat3>, j: usize| (0..ax.n).map(|i| at(f, i, j)).collect::<Vec<_>>();
    let col = |f: &Field<Mat3>, i: usize| (0..ay.n).map(|j| at(f, i, j)).collect::<Vec<_>>();
    let z0 = start.to_matrix();
    let zx = *propagate_matrices(&z0, &row(a, 0), ax.h)?.last().unwrap();
    let zxy = *propagate_matrices(&zx, &col(b, ax.n - 1), ay.h)?.last().unwrap();
    let zy = *propagate_matrices(&z0, &col(b, 0), ay.h)?.last().unwrap();
    let zyx = *propagate_matrices(&zy, &row(a, ay.n - 1), ax.h)?.last().unwrap();
    let d = (zxy - zyx).amax();
    if !d.is_finite() {
        return Err(crate::error::SolgeoError::Numerical("commutation defect is not finite".into()));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::commutator;
    use proptest::prelude::*;

    #[test]
    fn zero_coefficients_keep_frame() {
        let c = vec![CoeffTriple::curve(0.0, 0.0, 0.0); 20];
        let f = propagate_frenet(&FrameTriad::standard(Sign::Plus), &c, Sign::Plus, 0.1).unwrap();
        for i in 0..f.len() {
            assert_eq!(f.frames.data()[i], Mat3::identity());
        }
    }

    #[test]
    fn unit_curvature_rotates_tangent() {
        let n = 101;
        let h = 0.01;
        let c = vec![CoeffTriple::curve(1.0, 0.0, 0.0); n];
        let f = propagate_frenet(&FrameTriad::standard(Sign::Plus), &c, Sign::Plus, h).unwrap();
        for i in 0..n {
            let x = i as f64 * h;
            let e1 = f.triad(i).e1;
            assert!((e1 - Vector3::new(x.cos(), x.sin(), 0.0)).amax() < 1e-12);
        }
    }

    #[test]
    fn variable_curvature_is_second_order() {
        // k(x) = cos x: e1 = (cos θ, sin θ, 0) with θ = sin x
        let err = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let c: Vec<_> = (0..n).map(|i| CoeffTriple::curve((i as f64 * h).cos(), 0.0, 0.0)).collect();
            let f = propagate_frenet(&FrameTriad::standard(Sign::Plus), &c, Sign::Plus, h).unwrap();
            (0..n)
                .map(|i| {
                    let th = (i as f64 * h).sin();
                    (f.triad(i).e1 - Vector3::new(th.cos(), th.sin(), 0.0)).amax()
                })
                .fold(0.0, f64::max)
        };
        let r = err(41) / err(81);
        assert!((r - 4.0).abs() < 0.3, "ratio {r}");
    }

    #[test]
    fn gram_preserved_over_thousand_steps() {
        let n = 1001;
        let h = 0.01;
        let c: Vec<_> = (0..n)
            .map(|i| {
                let x = i as f64 * h;
                CoeffTriple::curve(1.0 + 0.3 * x.sin(), 0.5 * (2.0 * x).cos(), 0.2 * x)
            })
            .collect();
        let f = propagate_frenet(&FrameTriad::standard(Sign::Plus), &c, Sign::Plus, h).unwrap();
        assert!(f.max_orthonormality_defect() <= 1e-12);
    }

    #[test]
    fn pseudo_gram_preserved_for_negative_signature() {
        let c: Vec<_> = (0..200)
            .map(|i| CoeffTriple::surface_y(0.3, -0.2 + 0.001 * i as f64, 0.4))
            .collect();
        let f = propagate_frenet(&FrameTriad::standard(Sign::Minus), &c, Sign::Minus, 0.01).unwrap();
        assert!(f.max_orthonormality_defect() <= 1e-11);
    }

    #[test]
    fn rejects_bad_input() {
        let s = FrameTriad::standard(Sign::Plus);
        assert!(propagate_frenet(&s, &[CoeffTriple::curve(1.0, 0.0, 0.0)], Sign::Plus, 0.1).is_err());
        let c = vec![CoeffTriple::curve(f64::NAN, 0.0, 0.0); 3];
        assert!(propagate_frenet(&s, &c, Sign::Plus, 0.1).is_err());
    }

    fn xy_grid(n: usize) -> GridSpec {
        GridSpec::new(vec![Axis::span(AxisName::X, n, 0.0, 1.0), Axis::span(AxisName::Y, n, 0.0, 1.0)]).unwrap()
    }

    #[test]
    fn commutation_defect_trivial_cases() {
        let g = xy_grid(9);
        let z = Field::zeros(&g);
        let s = FrameTriad::standard(Sign::Plus);
        assert_eq!(commutation_defect_2d(&s, &z, &z).unwrap(), 0.0);
        let a = skew_matrix(&CoeffTriple::curve(0.7, 0.0, 0.0), Sign::Plus).unwrap();
        let b = a * 2.0;
        assert_eq!(commutator(&a, &b).amax(), 0.0);
        let d = commutation_defect_2d(&s, &Field::constant(&g, a), &Field::constant(&g, b)).unwrap();
        assert!(d <= 1e-12);
    }

    proptest! {
        #[test]
        fn triad_roundtrip(v in proptest::array::uniform9(-2.0f64..2.0)) {
            let m = Mat3::from_row_slice(&v);
            prop_assert_eq!(FrameTriad::from_matrix(&m, Sign::Plus).to_matrix(), m);
        }
    }
}
