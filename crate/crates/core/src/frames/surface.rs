use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::error::{domain, Result};
use crate::grid::{antider_x, partial, Accuracy, AxisName, Field, GridSpec};
use crate::liealg::{Mat2c, Mat3, Sign};

/// Fundamental forms, Christoffel symbols and Weingarten coefficients at
/// one point. `gam{k}_{ij}` is Γᵏᵢⱼ.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurfacePoint {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub gam1_11: f64,
    pub gam2_11: f64,
    pub gam1_12: f64,
    pub gam2_12: f64,
    pub gam1_22: f64,
    pub gam2_22: f64,
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
}

impl SurfacePoint {
    /// `EG − F²`.
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    fn values(&self) -> [f64; 16] {
        [
            self.e, self.f, self.g, self.l, self.m, self.n, self.gam1_11, self.gam2_11, self.gam1_12, self.gam2_12,
            self.gam1_22, self.gam2_22, self.p11, self.p12, self.p21, self.p22,
        ]
    }

    fn set(&mut self, k: usize, v: f64) {
        let slot = match k {
            0 => &mut self.e,
            1 => &mut self.f,
            2 => &mut self.g,
            3 => &mut self.l,
            4 => &mut self.m,
            5 => &mut self.n,
            6 => &mut self.gam1_11,
            7 => &mut self.gam2_11,
            8 => &mut self.gam1_12,
            9 => &mut self.gam2_12,
            10 => &mut self.gam1_22,
            11 => &mut self.gam2_22,
            12 => &mut self.p11,
            13 => &mut self.p12,
            14 => &mut self.p21,
            _ => &mut self.p22,
        };
        *slot = v;
    }

    pub const NAMES: [&'static str; 16] = [
        "E", "F", "G", "L", "M", "N", "G1_11", "G2_11", "G1_12", "G2_12", "G1_22", "G2_22", "p11", "p12", "p21", "p22",
    ];
}

/// Time Christoffel symbols Γᵏ₀ⱼ.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimePoint {
    pub gam1_01: f64,
    pub gam2_01: f64,
    pub gam3_01: f64,
    pub gam1_02: f64,
    pub gam2_02: f64,
    pub gam3_02: f64,
    pub gam1_03: f64,
    pub gam2_03: f64,
}

impl TimePoint {
    pub const NAMES: [&'static str; 8] = ["G1_01", "G2_01", "G3_01", "G1_02", "G2_02", "G3_02", "G1_03", "G2_03"];

    fn values(&self) -> [f64; 8] {
        [self.gam1_01, self.gam2_01, self.gam3_01, self.gam1_02, self.gam2_02, self.gam3_02, self.gam1_03, self.gam2_03]
    }

    fn set(&mut self, k: usize, v: f64) {
        let slot = match k {
            0 => &mut self.gam1_01,
            1 => &mut self.gam2_01,
            2 => &mut self.gam3_01,
            3 => &mut self.gam1_02,
            4 => &mut self.gam2_02,
            5 => &mut self.gam3_02,
            6 => &mut self.gam1_03,
            _ => &mut self.gam2_03,
        };
        *slot = v;
    }
}

/// Surface data sampled on an (x, y[, t]) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceData {
    grid: GridSpec,
    points: Vec<SurfacePoint>,
    time: Option<Vec<TimePoint>>,
    upsilon: Option<Vec<[f64; 3]>>,
}

impl SurfaceData {
    pub fn new(grid: GridSpec, points: Vec<SurfacePoint>) -> Result<Self> {
        if points.len() != grid.len() {
            return domain(format!("surface data has {} points, grid needs {}", points.len(), grid.len()));
        }
        grid.axis_index(AxisName::X)?;
        grid.axis_index(AxisName::Y)?;
        if let Some(i) = points.iter().position(|p| p.values().iter().any(|v| !v.is_finite())) {
            return domain(format!("non-finite surface data at {:?}", grid.location(i)));
        }
        Ok(Self { grid, points, time: None, upsilon: None })
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> SurfacePoint + Sync) -> Result<Self> {
        let points = (0..grid.len()).into_par_iter().map(|i| f(&grid.coords(i))).collect();
        Self::new(grid.clone(), points)
    }

    pub fn with_time(mut self, time: Vec<TimePoint>) -> Result<Self> {
        if time.len() != self.grid.len() {
            return domain("time coefficients do not match the grid");
        }
        self.time = Some(time);
        Ok(self)
    }

    pub fn with_upsilon(mut self, ups: Vec<[f64; 3]>) -> Result<Self> {
        if ups.len() != self.grid.len() {
            return domain("velocity coefficients do not match the grid");
        }
        self.upsilon = Some(ups);
        Ok(self)
    }

    /// Assemble from named scalar fields (`E`, `F`, ..., `p22`, optional
    /// `G1_01`..`G2_03`, optional `U1`..`U3`). Missing form fields are zero.
    pub fn from_fields(fields: &BTreeMap<String, Field<f64>>) -> Result<Self> {
        let grid = match fields.get("E") {
            Some(e) => e.grid().clone(),
            None => return domain("surface data needs at least the field E"),
        };
        for (name, f) in fields {
            f.check_same_grid(fields.get("E").unwrap())
                .map_err(|_| crate::error::SolgeoError::Domain(format!("field {name} is on a different grid")))?;
        }
        let known: Vec<&str> =
            SurfacePoint::NAMES.iter().chain(TimePoint::NAMES.iter()).copied().chain(["U1", "U2", "U3"]).collect();
        if let Some(bad) = fields.keys().find(|k| !known.contains(&k.as_str())) {
            return domain(format!("unknown surface field '{bad}'"));
        }
        let mut points = vec![SurfacePoint::default(); grid.len()];
        for (k, name) in SurfacePoint::NAMES.iter().enumerate() {
            if let Some(f) = fields.get(*name) {
                for (p, v) in points.iter_mut().zip(f.data()) {
                    p.set(k, *v);
                }
            }
        }
        let mut s = Self::new(grid.clone(), points)?;
        if TimePoint::NAMES.iter().any(|n| fields.contains_key(*n)) {
            let mut t = vec![TimePoint::default(); grid.len()];
            for (k, name) in TimePoint::NAMES.iter().enumerate() {
                if let Some(f) = fields.get(*name) {
                    for (p, v) in t.iter_mut().zip(f.data()) {
                        p.set(k, *v);
                    }
                }
            }
            s = s.with_time(t)?;
        }
        if ["U1", "U2", "U3"].iter().any(|n| fields.contains_key(*n)) {
            let mut u = vec![[0.0; 3]; grid.len()];
            for (k, name) in ["U1", "U2", "U3"].iter().enumerate() {
                if let Some(f) = fields.get(*name) {
                    for (p, v) in u.iter_mut().zip(f.data()) {
                        p[k] = *v;
                    }
                }
            }
            s = s.with_upsilon(u)?;
        }
        Ok(s)
    }

    /// Inverse of [`SurfaceData::from_fields`].
    pub fn to_fields(&self) -> BTreeMap<String, Field<f64>> {
        let mut out = BTreeMap::new();
        for (k, name) in SurfacePoint::NAMES.iter().enumerate() {
            out.insert(name.to_string(), self.scalar(|p| p.values()[k]));
        }
        if let Some(t) = &self.time {
            for (k, name) in TimePoint::NAMES.iter().enumerate() {
                let data = t.iter().map(|p| p.values()[k]).collect();
                out.insert(name.to_string(), Field::new(self.grid.clone(), data).unwrap());
            }
        }
        if let Some(u) = &self.upsilon {
            for (k, name) in ["U1", "U2", "U3"].iter().enumerate() {
                let data = u.iter().map(|p| p[k]).collect();
                out.insert(name.to_string(), Field::new(self.grid.clone(), data).unwrap());
            }
        }
        out
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn points(&self) -> &[SurfacePoint] {
        &self.points
    }

    pub fn time(&self) -> Option<&[TimePoint]> {
        self.time.as_deref()
    }

    pub fn upsilon(&self) -> Option<&[[f64; 3]]> {
        self.upsilon.as_deref()
    }

    /// Scalar field derived pointwise from the surface data.
    pub fn scalar(&self, f: impl Fn(&SurfacePoint) -> f64 + Sync + Send) -> Field<f64> {
        Field::new(self.grid.clone(), self.points.par_iter().map(f).collect()).unwrap()
    }

    /// Checks `E > 0` and `g > 0`, naming the first offending point.
    pub fn check_elliptic(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            if p.e <= 0.0 {
                return domain(format!("E = {} is not positive at {:?}", p.e, self.grid.location(i)));
            }
            if p.det() <= 0.0 {
                return domain(format!("g = EG - F^2 = {} is not positive at {:?}", p.det(), self.grid.location(i)));
            }
        }
        Ok(())
    }

    fn require_time(&self) -> Result<&[TimePoint]> {
        match &self.time {
            Some(t) => Ok(t),
            None => domain("surface data carries no time coefficients"),
        }
    }
}

/// Frame coefficients derived from surface data.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffFields {
    pub k: Field<f64>,
    pub sigma: Field<f64>,
    pub tau: Field<f64>,
    pub m1: Field<f64>,
    pub m2: Field<f64>,
    pub m3: Field<f64>,
    pub omega: Option<[Field<f64>; 3]>,
}

/// `k = L/√E, σ = (g/E)Γ²₁₁, τ = −(g/√E)p₁₂, m₁ = −(g/√E)p₂₂,
/// m₂ = (g/E)Γ²₁₂, m₃ = M/√E` and, with time data,
/// `ω₁ = −gΓ²₀₃/√E, ω₂ = (g/E)Γ²₀₃, ω₃ = Γ³₀₁/√E`.
pub fn coeffs_from_surface(s: &SurfaceData) -> Result<CoeffFields> {
    s.check_elliptic()?;
    let omega = match s.time() {
        Some(t) => {
            let f = |h: &dyn Fn(&SurfacePoint, &TimePoint) -> f64| {
                Field::new(s.grid().clone(), s.points().iter().zip(t).map(|(p, q)| h(p, q)).collect()).unwrap()
            };
            Some([
                f(&|p, q| -p.det() * q.gam2_03 / p.e.sqrt()),
                f(&|p, q| p.det() / p.e * q.gam2_03),
                f(&|p, q| q.gam3_01 / p.e.sqrt()),
            ])
        }
        None => None,
    };
    Ok(CoeffFields {
        k: s.scalar(|p| p.l / p.e.sqrt()),
        sigma: s.scalar(|p| p.det() / p.e * p.gam2_11),
        tau: s.scalar(|p| -p.det() / p.e.sqrt() * p.p12),
        m1: s.scalar(|p| -p.det() / p.e.sqrt() * p.p22),
        m2: s.scalar(|p| p.det() / p.e * p.gam2_12),
        m3: s.scalar(|p| p.m / p.e.sqrt()),
        omega,
    })
}

/// The 2×2 matrices of the g-linear problem `g_x = Ug, g_y = Vg, g_t = Wg`.
#[derive(Debug, Clone, PartialEq)]
pub struct Uvw {
    pub u: Field<Mat2c>,
    pub v: Field<Mat2c>,
    pub w: Option<Field<Mat2c>>,
}

fn half_over_i_sqrt_e(e: f64) -> Complex64 {
    Complex64::new(0.0, -0.5 / e.sqrt())
}

fn herm(d: f64, re: f64, im12: f64) -> Mat2c {
    Mat2c::new(Complex64::from(-d), Complex64::new(re, im12), Complex64::new(re, -im12), Complex64::from(d))
}

pub fn build_uvw(s: &SurfaceData) -> Result<Uvw> {
    s.check_elliptic()?;
    let grid = s.grid().clone();
    let u = s
        .points()
        .iter()
        .map(|p| {
            let (sg, r) = (p.det().sqrt(), (p.det() / p.e).sqrt());
            herm(sg * p.p12, p.l, r * p.gam2_11) * half_over_i_sqrt_e(p.e)
        })
        .collect();
    let v = s
        .points()
        .iter()
        .map(|p| {
            let (sg, r) = (p.det().sqrt(), (p.det() / p.e).sqrt());
            herm(sg * p.p22, p.m, -r * p.gam2_12) * half_over_i_sqrt_e(p.e)
        })
        .collect();
    let w = match s.time() {
        Some(t) => Some(Field::new(
            grid.clone(),
            s.points()
                .iter()
                .zip(t)
                .map(|(p, q)| {
                    let (sg, r) = (p.det().sqrt(), (p.det() / p.e).sqrt());
                    herm(sg * q.gam2_03, q.gam3_01, -r * q.gam2_01) * half_over_i_sqrt_e(p.e)
                })
                .collect(),
        )?),
        None => None,
    };
    Ok(Uvw { u: Field::new(grid.clone(), u)?, v: Field::new(grid, v)?, w })
}

/// The Gauss–Weingarten matrices acting on `Z = (r_x, r_y, n)`.
pub fn gwe_matrices(s: &SurfaceData) -> (Field<Mat3>, Field<Mat3>) {
    let a = s
        .points()
        .iter()
        .map(|p| Mat3::new(p.gam1_11, p.gam2_11, p.l, p.gam1_12, p.gam2_12, p.m, p.p11, p.p12, 0.0))
        .collect();
    let b = s
        .points()
        .iter()
        .map(|p| Mat3::new(p.gam1_12, p.gam2_12, p.m, p.gam1_22, p.gam2_22, p.n, p.p21, p.p22, 0.0))
        .collect();
    (Field::new(s.grid().clone(), a).unwrap(), Field::new(s.grid().clone(), b).unwrap())
}

/// The time matrix `C` acting on `Z`, built from Γᵏ₀ⱼ.
pub fn gwe_time_matrix(s: &SurfaceData) -> Result<Field<Mat3>> {
    let t = s.require_time()?;
    let c = t
        .iter()
        .map(|q| Mat3::new(q.gam1_01, q.gam2_01, q.gam3_01, q.gam1_02, q.gam2_02, q.gam3_02, q.gam1_03, q.gam2_03, 0.0))
        .collect();
    Field::new(s.grid().clone(), c)
}

/// Frame matrices in the orthogonal basis `(r_x/√E, n, e1∧e2)` for the
/// x, y and t directions.
pub fn frame_matrices(s: &SurfaceData, beta: Sign) -> Result<(Field<Mat3>, Field<Mat3>, Option<Field<Mat3>>)> {
    s.check_elliptic()?;
    let b = beta.value();
    let build = |e: f64, g: f64, first: f64, gam: f64, pp: f64| {
        let se = e.sqrt();
        Mat3::new(
            0.0,
            first,
            -g / se * gam,
            -b * first,
            0.0,
            -g * pp,
            b * g / se * gam,
            g * pp,
            0.0,
        ) / se
    };
    let a = s.points().iter().map(|p| build(p.e, p.det(), p.l, p.gam2_11, p.p12)).collect();
    let bm = s.points().iter().map(|p| build(p.e, p.det(), p.m, p.gam2_12, p.p22)).collect();
    let c = match s.time() {
        Some(t) => Some(Field::new(
            s.grid().clone(),
            s.points().iter().zip(t).map(|(p, q)| build(p.e, p.det(), q.gam3_01, q.gam2_01, q.gam2_03)).collect(),
        )?),
        None => None,
    };
    Ok((Field::new(s.grid().clone(), a)?, Field::new(s.grid().clone(), bm)?, c))
}

/// Velocity coefficients of the isotropic spin reduction:
/// `Υ₁ = u + MF/√g, Υ₂ = −M/√g, Υ₃ = Γ²₁₂√g`, with
/// `u = ∂x⁻¹[√g(LΓ²₁₂ − MΓ²₁₁)]` when not supplied.
pub fn mi_velocities(s: &SurfaceData, u: Option<&Field<f64>>) -> Result<[Field<f64>; 3]> {
    s.check_elliptic()?;
    let u = match u {
        Some(u) => {
            u.check_same_grid(&s.scalar(|p| p.e))?;
            u.clone()
        }
        None => antider_x(&s.scalar(|p| p.det().sqrt() * (p.l * p.gam2_12 - p.m * p.gam2_11)))?,
    };
    let mf = s.scalar(|p| p.m * p.f / p.det().sqrt());
    Ok([&u + &mf, s.scalar(|p| -p.m / p.det().sqrt()), s.scalar(|p| p.gam2_12 * p.det().sqrt())])
}

/// The three time-Christoffel formulas obtained from the velocities,
/// under neutral names. They are conventionally labelled Γ¹₀₁, Γ¹₀₂, Γ¹₀₃,
/// though the right-hand sides of the last two look like Γ²₀₁ and Γ³₀₁.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeCoefficients {
    /// `Υ₁ₓ + Υ₁Γ¹₁₁ + Υ₂Γ¹₁₂ + Υ₃p₁₁`
    pub c01a: Field<f64>,
    /// `Υ₂ₓ + Υ₁Γ²₁₁ + Υ₂Γ²₁₂ + Υ₃p₁₂`
    pub c01b: Field<f64>,
    /// `Υ₃ₓ + Υ₁L + Υ₂M`
    pub c01c: Field<f64>,
}

pub fn time_coefficients(s: &SurfaceData, upsilon: &[Field<f64>; 3], acc: Accuracy) -> Result<TimeCoefficients> {
    let dx: Vec<Field<f64>> = upsilon.iter().map(|u| partial(u, AxisName::X, acc)).collect::<Result<_>>()?;
    let pts = s.points();
    let comb = |k: usize, f: &dyn Fn(&SurfacePoint, f64, f64, f64) -> f64| -> Result<Field<f64>> {
        let data = (0..pts.len())
            .map(|i| {
                dx[k].data()[i] + f(&pts[i], upsilon[0].data()[i], upsilon[1].data()[i], upsilon[2].data()[i])
            })
            .collect();
        Field::new(s.grid().clone(), data)
    };
    Ok(TimeCoefficients {
        c01a: comb(0, &|p, u1, u2, u3| u1 * p.gam1_11 + u2 * p.gam1_12 + u3 * p.p11)?,
        c01b: comb(1, &|p, u1, u2, u3| u1 * p.gam2_11 + u2 * p.gam2_12 + u3 * p.p12)?,
        c01c: comb(2, &|p, u1, u2, _| u1 * p.l + u2 * p.m)?,
    })
}

/// `p₀₁ = FΓ³₀₂/g, p₀₂ = −EΓ³₀₂/g`.
pub fn p0_from_gamma302(s: &SurfaceData, gam3_02: &Field<f64>) -> Result<(Field<f64>, Field<f64>)> {
    s.check_elliptic()?;
    s.scalar(|p| p.e).check_same_grid(gam3_02)?;
    let pts = s.points();
    let mk = |f: &dyn Fn(&SurfacePoint, f64) -> f64| {
        Field::new(s.grid().clone(), pts.iter().zip(gam3_02.data()).map(|(p, &c)| f(p, c)).collect())
    };
    Ok((mk(&|p, c| p.f * c / p.det())?, mk(&|p, c| -p.e * c / p.det())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;
    use crate::liealg::{skew_matrix, CoeffTriple};
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(vec![Axis::span(AxisName::X, n, -0.5, 0.5), Axis::span(AxisName::Y, n, 0.0, 1.0)]).unwrap()
    }

    fn sphere(x: f64) -> SurfacePoint {
        let c2 = x.cos().powi(2);
        SurfacePoint {
            e: 1.0,
            g: c2,
            l: 1.0,
            n: c2,
            gam2_12: -x.tan(),
            gam1_22: x.sin() * x.cos(),
            p11: -1.0,
            p22: -1.0,
            ..Default::default()
        }
    }

    fn random_point(rng: &mut ChaCha8Rng) -> SurfacePoint {
        let e = rng.random_range(0.5..2.0);
        let f = rng.random_range(-0.4..0.4);
        let mut p = SurfacePoint { e, f, g: rng.random_range(0.5..2.0) + f * f / e, ..Default::default() };
        for k in 3..16 {
            p.set(k, rng.random_range(-1.0..1.0));
        }
        p
    }

    #[test]
    fn plane_gives_zero_coefficients() {
        let s = SurfaceData::from_fn(&grid(5), |_| SurfacePoint { e: 1.0, g: 1.0, ..Default::default() }).unwrap();
        let c = coeffs_from_surface(&s).unwrap();
        for f in [&c.k, &c.sigma, &c.tau, &c.m1, &c.m2, &c.m3] {
            assert_eq!(f.max_norm(), 0.0);
        }
        let uvw = build_uvw(&s).unwrap();
        assert_eq!(uvw.u.max_norm(), 0.0);
        assert_eq!(uvw.v.max_norm(), 0.0);
    }

    #[test]
    fn sphere_patch_coefficients() {
        let g = grid(7);
        let s = SurfaceData::from_fn(&g, |c| sphere(c[0])).unwrap();
        let c = coeffs_from_surface(&s).unwrap();
        for i in 0..g.len() {
            let x = g.coords(i)[0];
            let c2 = x.cos().powi(2);
            assert!((c.k.data()[i] - 1.0).abs() < 1e-15);
            assert_eq!(c.sigma.data()[i], 0.0);
            assert_eq!(c.tau.data()[i], 0.0);
            assert_eq!(c.m3.data()[i], 0.0);
            assert!((c.m2.data()[i] + c2 * x.tan()).abs() < 1e-15);
            assert!((c.m1.data()[i] - c2).abs() < 1e-15);
        }
    }

    #[test]
    fn doubling_l_doubles_k_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<_> = (0..25).map(|_| random_point(&mut rng)).collect();
        let s1 = SurfaceData::new(grid(5), pts.clone()).unwrap();
        let s2 = SurfaceData::new(grid(5), pts.iter().map(|p| SurfacePoint { l: 2.0 * p.l, ..*p }).collect()).unwrap();
        let (c1, c2) = (coeffs_from_surface(&s1).unwrap(), coeffs_from_surface(&s2).unwrap());
        assert_eq!(c2.k, c1.k.scale(2.0));
        assert_eq!(c1.sigma, c2.sigma);
        assert_eq!(c1.tau, c2.tau);
    }

    #[test]
    fn non_elliptic_data_is_located() {
        let s = SurfaceData::from_fn(&grid(5), |c| SurfacePoint {
            e: 1.0,
            g: if c[0] > 0.2 { -1.0 } else { 1.0 },
            ..Default::default()
        })
        .unwrap();
        let err = coeffs_from_surface(&s).unwrap_err().to_string();
        assert!(err.contains("g = EG - F^2") && err.contains("0.25"), "{err}");
    }

    #[test]
    fn x_role_skew_matches_orthogonal_frame_matrix_for_positive_signature() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<_> = (0..25).map(|_| random_point(&mut rng)).collect();
        let s = SurfaceData::new(grid(5), pts).unwrap();
        let c = coeffs_from_surface(&s).unwrap();
        let (a, b, _) = frame_matrices(&s, Sign::Plus).unwrap();
        for i in 0..25 {
            let d = |f: &Field<f64>| f.data()[i];
            let ax = skew_matrix(&CoeffTriple::curve(d(&c.k), d(&c.tau), d(&c.sigma)), Sign::Plus).unwrap();
            let by = skew_matrix(&CoeffTriple::surface_y(d(&c.m1), d(&c.m2), d(&c.m3)), Sign::Plus).unwrap();
            assert!((ax - a.data()[i]).amax() <= 1e-14 * a.data()[i].amax().max(1.0));
            assert!((by - b.data()[i]).amax() <= 1e-14 * b.data()[i].amax().max(1.0));
        }
        // the y matrix agrees for the negative signature as well
        let (_, bm, _) = frame_matrices(&s, Sign::Minus).unwrap();
        for i in 0..25 {
            let d = |f: &Field<f64>| f.data()[i];
            let by = skew_matrix(&CoeffTriple::surface_y(d(&c.m1), d(&c.m2), d(&c.m3)), Sign::Minus).unwrap();
            assert!((by - bm.data()[i]).amax() <= 1e-14 * bm.data()[i].amax().max(1.0));
        }
    }

    /// The x-direction 2×2 matrix written out entry by entry.
    fn u_oracle(p: &SurfacePoint) -> Mat2c {
        let g = p.e * p.g - p.f * p.f;
        let pre = Complex64::new(1.0, 0.0) / (Complex64::new(0.0, 2.0) * p.e.sqrt());
        let s = (g / p.e).sqrt() * p.gam2_11;
        Mat2c::new(
            pre * (-g.sqrt() * p.p12),
            pre * Complex64::new(p.l, s),
            pre * Complex64::new(p.l, -s),
            pre * (g.sqrt() * p.p12),
        )
    }

    #[test]
    fn u_matches_entrywise_oracle() {
        let g = grid(6);
        let s = SurfaceData::from_fn(&g, |c| sphere(c[0])).unwrap();
        let uvw = build_uvw(&s).unwrap();
        for (i, p) in s.points().iter().enumerate() {
            assert!((uvw.u.data()[i] - u_oracle(p)).iter().all(|d| d.norm() <= 1e-14));
        }
    }

    /// Matrix of `X ↦ [U, X]` on the basis (σ₃, −σ₂, σ₁): row k holds the
    /// coordinates of `[U, b_k]`.
    fn adjoint_matrix(u: &Mat2c) -> Mat3 {
        let i = Complex64::i();
        let one = Complex64::from(1.0);
        let zero = Complex64::from(0.0);
        let basis = [
            Mat2c::new(one, zero, zero, -one),
            Mat2c::new(zero, i, -i, zero),
            Mat2c::new(zero, one, one, zero),
        ];
        let mut m = Mat3::zeros();
        for (k, b) in basis.iter().enumerate() {
            let c = u * b - b * u;
            for (l, bl) in basis.iter().enumerate() {
                m[(k, l)] = ((bl.adjoint() * c).trace() / 2.0).re;
            }
        }
        m
    }

    proptest! {
        #[test]
        fn uvw_traceless_anti_hermitian(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = SurfaceData::new(grid(2), (0..4).map(|_| random_point(&mut rng)).collect()).unwrap();
            let t: Vec<TimePoint> = (0..4).map(|_| TimePoint {
                gam2_01: rng.random_range(-1.0..1.0), gam3_01: rng.random_range(-1.0..1.0),
                gam2_03: rng.random_range(-1.0..1.0), ..Default::default()
            }).collect();
            let s = s.with_time(t).unwrap();
            let uvw = build_uvw(&s).unwrap();
            for f in [&uvw.u, &uvw.v, uvw.w.as_ref().unwrap()] {
                for m in f.data() {
                    prop_assert!(m.trace().norm() <= 1e-15);
                    prop_assert!((m + m.adjoint()).iter().all(|v| v.norm() <= 1e-15));
                }
            }
        }

        #[test]
        fn adjoint_of_u_is_the_orthogonal_frame_matrix_when_g_is_one(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = random_point(&mut rng);
            p.g = (1.0 + p.f * p.f) / p.e;
            let s = SurfaceData::new(grid(2), vec![p; 4]).unwrap();
            let u = build_uvw(&s).unwrap().u.data()[0];
            let (a, _, _) = frame_matrices(&s, Sign::Plus).unwrap();
            prop_assert!((adjoint_matrix(&u) - a.data()[0]).amax() <= 1e-12);
        }
    }

    #[test]
    fn velocities() {
        let g = grid(9);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<_> = (0..g.len()).map(|_| SurfacePoint { m: 0.0, ..random_point(&mut rng) }).collect();
        let s = SurfaceData::new(g.clone(), pts).unwrap();
        let ups = mi_velocities(&s, None).unwrap();
        assert_eq!(ups[1].max_norm(), 0.0);

        let flat: Vec<_> = s.points().iter().map(|p| SurfacePoint { l: 0.0, gam2_12: 0.0, gam2_11: 0.0, ..*p }).collect();
        let s0 = SurfaceData::new(g.clone(), flat).unwrap();
        let ups0 = mi_velocities(&s0, None).unwrap();
        // u ≡ 0, so Υ₁ = MF/√g = 0 with M = 0
        assert_eq!(ups0[0].max_norm(), 0.0);

        let pts: Vec<_> = (0..g.len()).map(|_| random_point(&mut rng)).collect();
        let s = SurfaceData::new(g.clone(), pts).unwrap();
        let u = Field::from_fn(&g, |c| c[0] * c[1]);
        let ups = mi_velocities(&s, Some(&u)).unwrap();
        for (i, p) in s.points().iter().enumerate() {
            let sg = (p.e * p.g - p.f * p.f).sqrt();
            assert!((ups[0].data()[i] - (u.data()[i] + p.m * p.f / sg)).abs() <= 1e-14);
            assert!((ups[1].data()[i] + p.m / sg).abs() <= 1e-14);
            assert!((ups[2].data()[i] - p.gam2_12 * sg).abs() <= 1e-14);
        }
    }

    #[test]
    fn time_data_coefficients() {
        let g = grid(6);
        let s = SurfaceData::from_fn(&g, |c| sphere(c[0]))
            .unwrap()
            .with_time(vec![TimePoint { gam3_01: 2.0, gam2_03: 0.5, ..Default::default() }; g.len()])
            .unwrap();
        let c = coeffs_from_surface(&s).unwrap();
        let om = c.omega.unwrap();
        for i in 0..g.len() {
            let gg = s.points()[i].det();
            assert!((om[0].data()[i] + gg * 0.5).abs() < 1e-15);
            assert!((om[1].data()[i] - gg * 0.5).abs() < 1e-15);
            assert_eq!(om[2].data()[i], 2.0);
        }
        let ups = [Field::constant(&g, 1.0), Field::constant(&g, 0.0), Field::constant(&g, 0.0)];
        let tc = time_coefficients(&s, &ups, Accuracy::Second).unwrap();
        // Υ = (1, 0, 0): c01a = Γ¹₁₁, c01b = Γ²₁₁, c01c = L
        assert_eq!(tc.c01a.max_norm(), 0.0);
        assert_eq!(tc.c01b.max_norm(), 0.0);
        assert!(tc.c01c.data().iter().all(|&v| v == 1.0));
        let (p01, p02) = p0_from_gamma302(&s, &Field::constant(&g, 1.0)).unwrap();
        assert_eq!(p01.max_norm(), 0.0);
        for (i, p) in s.points().iter().enumerate() {
            assert!((p02.data()[i] + 1.0 / p.det()).abs() < 1e-15);
        }
    }

    #[test]
    fn field_map_roundtrip() {
        let g = grid(4);
        let s = SurfaceData::from_fn(&g, |c| sphere(c[0])).unwrap();
        let back = SurfaceData::from_fields(&s.to_fields()).unwrap();
        assert_eq!(back, s);
        let mut bad = s.to_fields();
        bad.insert("Q".into(), Field::zeros(&g));
        assert!(SurfaceData::from_fields(&bad).is_err());
    }
}
