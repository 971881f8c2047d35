//! Built-in manufactured cases with closed-form data and their oracles.

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Result, SolgeoError};
use crate::frames::{SurfaceData, SurfacePoint};
use crate::grid::{Axis, AxisName, Field, GridSpec};
use crate::liealg::CMat;
use crate::solitons::{jet_field, EqId, Jet, Scalar, SolitonParams};
use crate::zerocurv::{lambda_field, ConnectionSet, LambdaParams, SpectralField, System};

/// Default seed of the randomized cases.
pub const CASE_SEED: u64 = 20240611;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseName {
    PlanewaveDs,
    PlanewaveZi,
    UniformSpin,
    PureGauge,
    RationalLambda,
    RationalLambdaComplex,
    SpherePatch,
    Cylinder,
    Plane,
    StrachanReduction,
    ZiReduction,
}

impl CaseName {
    pub const ALL: [CaseName; 11] = [
        CaseName::PlanewaveDs,
        CaseName::PlanewaveZi,
        CaseName::UniformSpin,
        CaseName::PureGauge,
        CaseName::RationalLambda,
        CaseName::RationalLambdaComplex,
        CaseName::SpherePatch,
        CaseName::Cylinder,
        CaseName::Plane,
        CaseName::StrachanReduction,
        CaseName::ZiReduction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseName::PlanewaveDs => "planewave-ds",
            CaseName::PlanewaveZi => "planewave-zi",
            CaseName::UniformSpin => "uniform-spin",
            CaseName::PureGauge => "pure-gauge",
            CaseName::RationalLambda => "rational-lambda",
            CaseName::RationalLambdaComplex => "rational-lambda-complex",
            CaseName::SpherePatch => "sphere-patch",
            CaseName::Cylinder => "cylinder",
            CaseName::Plane => "plane",
            CaseName::StrachanReduction => "strachan-reduction",
            CaseName::ZiReduction => "zi-reduction",
        }
    }

    /// Case-specific knobs and their defaults; other keys are equation
    /// parameters.
    pub fn knobs(self) -> &'static [(&'static str, f64)] {
        match self {
            CaseName::PlanewaveDs => &[("k", 1.0), ("l", 0.5), ("v0", 0.3), ("omega_scale", 1.0)],
            CaseName::PlanewaveZi => &[("k", 1.0), ("l", 1.0), ("v0", 0.5), ("omega_scale", 1.0), ("amp", 1.0), ("ny", 16.0)],
            CaseName::RationalLambda => &[("n1", 1.0), ("n3", 0.0), ("n4", 1.0), ("m1", 0.0), ("m3", 0.0), ("m4", 0.0)],
            CaseName::RationalLambdaComplex => &[("a1", 1.0), ("a2", 0.5), ("a3", 0.2), ("a4", 2.0)],
            _ => &[],
        }
    }

    /// Points per axis at refinement level 0.
    pub fn default_n(self) -> usize {
        match self {
            CaseName::PlanewaveDs | CaseName::PlanewaveZi => 9,
            CaseName::UniformSpin | CaseName::StrachanReduction | CaseName::ZiReduction | CaseName::Plane => 9,
            CaseName::PureGauge => 11,
            CaseName::RationalLambda | CaseName::RationalLambdaComplex => 6,
            CaseName::SpherePatch | CaseName::Cylinder => 17,
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseName {
    type Err = SolgeoError;
    fn from_str(s: &str) -> Result<Self> {
        CaseName::ALL.iter().copied().find(|c| c.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = CaseName::ALL.iter().map(|c| c.as_str()).collect();
            SolgeoError::Domain(format!("unknown case '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

/// Points per axis at a refinement level: spacing halves per level.
pub fn level_n(n0: usize, level: usize) -> usize {
    (n0 - 1) * (1 << level) + 1
}

/// Exact shape a reconstructed surface should have.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceOracle {
    /// Points on the plane through the start point with normal `e3`.
    Plane,
    /// Unit radius about the line through `centre` along `axis`.
    Cylinder { centre: Vector3<f64>, axis: Vector3<f64> },
    /// Unit distance from `centre`.
    Sphere { centre: Vector3<f64> },
}

impl SurfaceOracle {
    /// Largest deviation of the positions from the exact shape.
    pub fn error(&self, positions: &Field<Vector3<f64>>) -> f64 {
        positions
            .data()
            .iter()
            .map(|p| match self {
                SurfaceOracle::Plane => p.z.abs(),
                SurfaceOracle::Cylinder { centre, axis } => {
                    let d = p - centre;
                    ((d - axis * d.dot(axis)).norm() - 1.0).abs()
                }
                SurfaceOracle::Sphere { centre } => ((p - centre).norm() - 1.0).abs(),
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub enum CaseData {
    /// Fields of a soliton equation, with jets when the case is closed-form.
    Soliton {
        eq: EqId,
        params: SolitonParams,
        fields: BTreeMap<String, Field<Complex64>>,
        jets: Option<BTreeMap<String, Field<Jet>>>,
    },
    /// The same fields checked under two parameter sets that must agree.
    Reduction {
        eq: EqId,
        params: SolitonParams,
        reference: (EqId, SolitonParams),
        fields: BTreeMap<String, Field<Complex64>>,
    },
    Connection { system: System, set: ConnectionSet<2> },
    Lambda(SpectralField),
    Surface { data: SurfaceData, oracle: SurfaceOracle },
}

impl CaseData {
    /// Named fields for export, in name order.
    pub fn export(&self) -> Vec<(String, ExportField)> {
        match self {
            CaseData::Soliton { fields, .. } | CaseData::Reduction { fields, .. } => {
                fields.iter().map(|(k, f)| (k.clone(), ExportField::Complex(f.clone()))).collect()
            }
            CaseData::Connection { set, .. } => {
                set.fields.iter().map(|(k, f)| (k.clone(), ExportField::Matrix2(f.clone()))).collect()
            }
            CaseData::Lambda(sf) => vec![
                ("lambda".into(), ExportField::Complex(sf.lambda.clone())),
                (
                    "mask".into(),
                    ExportField::Real(Field::new(sf.lambda.grid().clone(), sf.mask.iter().map(|m| if *m { 1.0 } else { 0.0 }).collect()).unwrap()),
                ),
            ],
            CaseData::Surface { data, .. } => data.to_fields().into_iter().map(|(k, f)| (k, ExportField::Real(f))).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ExportField {
    Real(Field<f64>),
    Complex(Field<Complex64>),
    Matrix2(Field<CMat<2>>),
}

/// Split a parameter map into the case knobs (with defaults filled in) and
/// the rest.
fn split(name: CaseName, params: &BTreeMap<String, f64>) -> (BTreeMap<&'static str, f64>, BTreeMap<String, f64>) {
    let mut knobs: BTreeMap<&'static str, f64> = name.knobs().iter().copied().collect();
    let mut rest = BTreeMap::new();
    for (k, v) in params {
        match name.knobs().iter().find(|(n, _)| n == k) {
            Some((n, _)) => {
                knobs.insert(n, *v);
            }
            None => {
                rest.insert(k.clone(), *v);
            }
        }
    }
    (knobs, rest)
}

fn no_extra(name: CaseName, rest: &BTreeMap<String, f64>) -> Result<()> {
    match rest.keys().next() {
        Some(k) => domain(format!("case {name} takes no parameter '{k}'")),
        None => Ok(()),
    }
}

fn cube(n: usize, hi: [f64; 3]) -> Result<GridSpec> {
    GridSpec::new(vec![
        Axis::span(AxisName::X, n, 0.0, hi[0]),
        Axis::span(AxisName::Y, n, 0.0, hi[1]),
        Axis::span(AxisName::T, n, 0.0, hi[2]),
    ])
}

fn wave(g: &GridSpec, k: f64, l: f64, w: f64, amp: f64) -> Result<(Field<Jet>, Field<Jet>)> {
    let ph = move |x: Jet, y: Jet, t: Jet| {
        x * Jet::constant(k.into()) + y * Jet::constant(l.into()) - t * Jet::constant(w.into())
    };
    let i = Complex64::i();
    let q = jet_field(g, move |x, y, t| (ph(x, y, t) * Jet::constant(i)).exp() * Jet::constant(amp.into()))?;
    let p = jet_field(g, move |x, y, t| (ph(x, y, t) * Jet::constant(-i)).exp())?;
    Ok((q, p))
}

fn soliton(eq: EqId, params: SolitonParams, jets: BTreeMap<String, Field<Jet>>) -> CaseData {
    let fields = jets.iter().map(|(k, f)| (k.clone(), f.map(|j| j.value()))).collect();
    CaseData::Soliton { eq, params, fields, jets: Some(jets) }
}

fn smooth_complex(g: &GridSpec, rng: &mut ChaCha8Rng) -> Field<Complex64> {
    let modes: Vec<([f64; 3], f64, Complex64)> = (0..3)
        .map(|_| {
            let k = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            (k, rng.random_range(0.0..TAU), Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        })
        .collect();
    Field::from_fn(g, move |c| modes.iter().map(|(k, ph, a)| a * (k[0] * c[0] + k[1] * c[1] + k[2] * c[2] + ph).sin()).sum())
}

/// Flat SU(2) connection `(G_x G⁻¹, G_y G⁻¹, G_t G⁻¹)` for
/// `G = exp(iaσ₃)·exp(ibσ₁)`, `a = sin(x + 2y) + t`, `b = xy − cos t`.
pub fn pure_gauge(g: &GridSpec) -> ConnectionSet<2> {
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let s3 = CMat::<2>::new(one, zero, zero, -one);
    let s1 = CMat::<2>::new(zero, one, one, zero);
    let comp = |k: usize| {
        Field::from_fn(g, move |c| {
            let (x, y, t) = (c[0], c[1], c[2]);
            let a = (x + 2.0 * y).sin() + t;
            let b = x * y - t.cos();
            let da = [(x + 2.0 * y).cos(), 2.0 * (x + 2.0 * y).cos(), 1.0][k];
            let db = [y, x, t.sin()][k];
            let e3 = CMat::<2>::new(Complex64::new(a.cos(), a.sin()), zero, zero, Complex64::new(a.cos(), -a.sin()));
            let e1 = CMat::<2>::identity() * Complex64::from(b.cos()) + s1 * (i * b.sin());
            let gm = e3 * e1;
            let gx = s3 * e3 * e1 * (i * da) + e3 * s1 * e1 * (i * db);
            gx * gm.try_inverse().expect("unitary")
        })
    };
    ConnectionSet::new().with("A", comp(0)).with("B", comp(1)).with("C", comp(2))
}

/// Build a case at a refinement level. `n0` overrides the level-0 size.
pub fn build_case(
    name: CaseName,
    n0: Option<usize>,
    level: usize,
    params: &BTreeMap<String, f64>,
    seed: u64,
) -> Result<CaseData> {
    let n0 = n0.unwrap_or(name.default_n());
    if n0 < 5 {
        return domain(format!("case {name} needs at least 5 points per axis, got {n0}"));
    }
    let n = level_n(n0, level);
    let (knobs, rest) = split(name, params);
    let kb = |k: &str| knobs[k];
    Ok(match name {
        CaseName::PlanewaveDs => {
            let p = SolitonParams::from_map(&rest)?;
            let al = p.alpha;
            if al.im != 0.0 {
                return domain("planewave-ds needs a real alpha");
            }
            let (k, l, v0) = (kb("k"), kb("l"), kb("v0"));
            let w = (k * k + al.re * al.re * l * l - v0) * kb("omega_scale");
            let g = cube(n, [1.0, 1.0, 0.5])?;
            let (q, pp) = wave(&g, k, l, w, 1.0)?;
            let v = Field::constant(&g, Jet::constant(v0.into()));
            soliton(EqId::Ds, p, [("q".to_string(), q), ("p".into(), pp), ("v".into(), v)].into())
        }
        CaseName::PlanewaveZi => {
            let p = SolitonParams::from_map(&rest)?;
            let (k, l, v0) = (kb("k"), kb("l"), kb("v0"));
            if l == 0.0 {
                return domain("planewave-zi needs l != 0 for a periodic y axis");
            }
            let ny = kb("ny");
            if !(ny >= 4.0 && ny.fract() == 0.0) {
                return domain("planewave-zi needs an integer ny >= 4");
            }
            let w = (v0 - k * l) * kb("omega_scale");
            let g = GridSpec::new(vec![
                Axis::span(AxisName::X, n, 0.0, 1.0),
                // ny is the coarse count; y refines with the other axes
                Axis::periodic(AxisName::Y, (ny as usize) << level, 0.0, TAU / l.abs()),
                Axis::span(AxisName::T, n, 0.0, 1.0),
            ])?;
            let (q, pp) = wave(&g, k, l, w, kb("amp"))?;
            let v = Field::constant(&g, Jet::constant(v0.into()));
            soliton(EqId::Zi, p, [("q".to_string(), q), ("p".into(), pp), ("v".into(), v)].into())
        }
        CaseName::UniformSpin => {
            let p = SolitonParams::from_map(&rest)?;
            let g = cube(n, [1.0, 1.0, 1.0])?;
            let z = Field::constant(&g, Jet::constant(0.0.into()));
            let one = Field::constant(&g, Jet::constant(1.0.into()));
            soliton(
                EqId::Ishimori,
                p,
                [("S1".to_string(), z.clone()), ("S2".into(), z.clone()), ("S3".into(), one), ("u".into(), z)].into(),
            )
        }
        CaseName::StrachanReduction | CaseName::ZiReduction => {
            let mut p = SolitonParams::from_map(&rest)?;
            let g = cube(n, [0.8, 0.7, 0.5])?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fields: BTreeMap<String, Field<Complex64>> =
                ["q", "p", "v"].iter().map(|k| (k.to_string(), smooth_complex(&g, &mut rng))).collect();
            let reference = if name == CaseName::StrachanReduction {
                p.d = 0.0;
                (EqId::Strachan, p)
            } else {
                p.c = 0.0;
                p.d = 1.0;
                (EqId::Zi, p)
            };
            CaseData::Reduction { eq: EqId::M3q, params: p, reference, fields }
        }
        CaseName::PureGauge => {
            no_extra(name, &rest)?;
            CaseData::Connection { system: System::Mlxii, set: pure_gauge(&cube(n, [0.6, 0.6, 0.6])?) }
        }
        CaseName::RationalLambda => {
            no_extra(name, &rest)?;
            let lp = LambdaParams::SdymXi {
                n1: kb("n1"),
                n3: kb("n3"),
                n4: kb("n4"),
                m1: kb("m1"),
                m3: kb("m3"),
                m4: kb("m4"),
            };
            let g = GridSpec::new((1..=4).map(|i| Axis::span(AxisName::xi(i), n, 0.0, 0.3)).collect())?;
            CaseData::Lambda(lambda_field(lp, &g)?)
        }
        CaseName::RationalLambdaComplex => {
            no_extra(name, &rest)?;
            let lp = LambdaParams::MlxiiComplex { a1: kb("a1"), a2: kb("a2"), a3: kb("a3"), a4: kb("a4") };
            let g = GridSpec::new([AxisName::X, AxisName::Y, AxisName::Z, AxisName::T].iter().map(|a| Axis::span(*a, n, 0.0, 0.3)).collect())?;
            CaseData::Lambda(lambda_field(lp, &g)?)
        }
        CaseName::Plane => {
            no_extra(name, &rest)?;
            let g = GridSpec::new(vec![Axis::span(AxisName::X, n, 0.0, 1.0), Axis::span(AxisName::Y, n, 0.0, 1.0)])?;
            let data = SurfaceData::from_fn(&g, |_| SurfacePoint { e: 1.0, g: 1.0, ..Default::default() })?;
            CaseData::Surface { data, oracle: SurfaceOracle::Plane }
        }
        CaseName::Cylinder => {
            no_extra(name, &rest)?;
            let g = GridSpec::new(vec![Axis::span(AxisName::X, n, 0.0, 1.5), Axis::span(AxisName::Y, n, 0.0, 1.0)])?;
            let data =
                SurfaceData::from_fn(&g, |_| SurfacePoint { e: 1.0, g: 1.0, l: 1.0, p11: -1.0, ..Default::default() })?;
            CaseData::Surface {
                data,
                oracle: SurfaceOracle::Cylinder { centre: Vector3::new(0.0, 0.0, 1.0), axis: Vector3::new(0.0, 1.0, 0.0) },
            }
        }
        CaseName::SpherePatch => {
            no_extra(name, &rest)?;
            // latitude x, longitude y on the unit sphere, inward normal
            let g = GridSpec::new(vec![Axis::span(AxisName::X, n, -0.5, 0.5), Axis::span(AxisName::Y, n, 0.0, 1.0)])?;
            let data = SurfaceData::from_fn(&g, |c| {
                let x = c[0];
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
            })?;
            CaseData::Surface { data, oracle: SurfaceOracle::Sphere { centre: Vector3::new(0.0, 0.0, 1.0) } }
        }
    })
}
