use super::*;
use crate::cases::pure_gauge;
use crate::grid::{Axis, GridSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C2 = CMat<2>;

fn grid(axes: &[AxisName], n: usize) -> GridSpec {
    GridSpec::new(axes.iter().map(|a| Axis::span(*a, n, 0.0, 0.6)).collect()).unwrap()
}

fn rand_mat(rng: &mut ChaCha8Rng) -> C2 {
    C2::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Smooth pseudo-random matrix field: a few sine modes with random
/// coefficient matrices.
fn smooth(g: &GridSpec, seed: u64) -> MatField<2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(C2, Vec<f64>, f64)> = (0..3)
        .map(|_| {
            let m = rand_mat(&mut rng);
            let k: Vec<f64> = (0..g.ndim()).map(|_| rng.random_range(-2.0..2.0)).collect();
            (m, k, rng.random_range(0.0..6.0))
        })
        .collect();
    Field::from_fn(g, move |c| {
        modes.iter().fold(C2::zeros(), |acc, (m, k, p)| {
            let arg: f64 = k.iter().zip(c).map(|(a, b)| a * b).sum::<f64>() + p;
            acc + m * Complex64::new(arg.sin(), 0.0)
        })
    })
}

fn set(names: &[&str], g: &GridSpec, seed: u64) -> ConnectionSet<2> {
    names.iter().enumerate().fold(ConnectionSet::new(), |s, (i, n)| s.with(n, smooth(g, seed + i as u64)))
}

fn max_diff(a: &MatField<2>, b: &MatField<2>) -> f64 {
    (a - b).max_norm()
}

#[test]
fn system_ids_roundtrip() {
    for s in System::ALL {
        assert_eq!(s.as_str().parse::<System>().unwrap(), s);
        assert!(!s.residual_names().is_empty());
    }
    assert!("nope".parse::<System>().is_err());
}

#[test]
fn validate_rejects_wrong_arity() {
    let g = grid(&[AxisName::X, AxisName::Y], 6);
    let c = set(&["A"], &g, 1);
    assert!(zc_residual(System::Gmce, &c, Accuracy::Second).is_err());
    let c = set(&["A", "B"], &g, 1);
    assert!(zc_residual(System::Mlxii, &c, Accuracy::Second).is_err());
    let c = set(&["B", "D"], &grid(&[AxisName::Xi1, AxisName::Xi2, AxisName::Xi4], 5), 1);
    assert!(zc_residual(System::Mlxx3, &c, Accuracy::Second).is_err());
}

#[test]
fn pure_gauge_flatness_converges() {
    let axes = [AxisName::X, AxisName::Y, AxisName::T];
    let err = |n: usize| {
        let r = zc_residual(System::Mlxii, &pure_gauge(&grid(&axes, n)), Accuracy::Second).unwrap();
        r.iter().map(|x| x.field.max_norm()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(11), err(21));
    assert!(e2 < 2e-2);
    assert!((e1 / e2 - 4.0).abs() < 0.6, "ratio {}", e1 / e2);
    let e4 = |n: usize| {
        let r = zc_residual(System::Mlxii, &pure_gauge(&grid(&axes, n)), Accuracy::Fourth).unwrap();
        r.iter().map(|x| x.field.max_norm()).fold(0.0, f64::max)
    };
    assert!(e4(21) < e2);
}

#[test]
fn bogomolny_without_higgs_matches_flatness() {
    let g = grid(&[AxisName::X, AxisName::Y, AxisName::T], 7);
    let abc = set(&["A", "B", "C"], &g, 5);
    let flat = zc_residual(System::Mlxii, &abc, Accuracy::Second).unwrap();
    let bog = zc_residual(System::Bogomolny, &abc.clone().with("Phi", Field::zeros(&g)), Accuracy::Second).unwrap();
    assert_eq!(bog[0].field, flat[0].field);
    assert_eq!(bog[1].field, -&flat[1].field);
    assert_eq!(bog[2].field, flat[2].field);
}

#[test]
fn uvw_naming_is_the_same_system() {
    let g = grid(&[AxisName::X, AxisName::Y, AxisName::T], 6);
    let abc = set(&["A", "B", "C"], &g, 9);
    let uvw = ConnectionSet::new()
        .with("U", abc.fields["A"].clone())
        .with("V", abc.fields["B"].clone())
        .with("W", abc.fields["C"].clone());
    let r1 = zc_residual(System::Mlxii, &abc, Accuracy::Fourth).unwrap();
    let r2 = zc_residual(System::MlxiiUvw, &uvw, Accuracy::Fourth).unwrap();
    for (a, b) in r1.iter().zip(&r2) {
        assert_eq!(a.field, b.field);
    }
}

#[test]
fn gmce_swapping_roles_and_axes_negates() {
    let g = grid(&[AxisName::X, AxisName::Y], 8);
    let c = set(&["A", "B"], &g, 3);
    let r = zc_residual(System::Gmce, &c, Accuracy::Second).unwrap();
    let swapped = GridSpec::new(vec![Axis::span(AxisName::Y, 8, 0.0, 0.6), Axis::span(AxisName::X, 8, 0.0, 0.6)]).unwrap();
    let mv = |f: &MatField<2>| Field::new(swapped.clone(), f.data().to_vec()).unwrap();
    let c2 = ConnectionSet::new().with("A", mv(&c.fields["B"])).with("B", mv(&c.fields["A"]));
    let r2 = zc_residual(System::Gmce, &c2, Accuracy::Second).unwrap();
    assert_eq!(r2[0].field.data(), (-&r[0].field).data());
}

#[test]
fn pencil_expands_into_self_dual_components() {
    let axes = [AxisName::Xi1, AxisName::Xi2, AxisName::Xi3, AxisName::Xi4];
    let g = grid(&axes, 6);
    let a = set(&["A1", "A2", "A3", "A4"], &g, 11);
    let sd = zc_residual(System::Sdym4, &a, Accuracy::Second).unwrap();
    let pencil = |lam: f64| {
        let f = |p: &str, q: &str| combine([&a.fields[p], &a.fields[q]], move |[x, y]| x - y * Complex64::from(lam));
        let c = ConnectionSet::new()
            .with("B", f("A1", "A3"))
            .with("D", f("A2", "A4"))
            .with_scalar("a", lam)
            .with_scalar("b", lam);
        zc_residual(System::Mlxx4, &c, Accuracy::Second).unwrap().remove(0).field
    };
    let (r0, rp, rm) = (pencil(0.0), pencil(1.0), pencil(-1.0));
    let c1 = combine([&rp, &rm], |[p, m]| (p - m) * Complex64::from(0.5));
    let c2 = combine([&rp, &rm, &r0], |[p, m, z]| (p + m) * Complex64::from(0.5) - z);
    assert!(max_diff(&r0, &-&sd[0].field) < 1e-13);
    assert!(max_diff(&c1, &-&sd[2].field) < 1e-13);
    assert!(max_diff(&c2, &-&sd[1].field) < 1e-13);
}

#[test]
fn full_form_with_scalar_coefficients_reduces() {
    let axes = [AxisName::Xi1, AxisName::Xi2, AxisName::Xi3, AxisName::Xi4];
    let g = grid(&axes, 5);
    let bd = set(&["B", "D"], &g, 21);
    let (a, b) = (0.7, -1.3);
    let scal = |v: f64| Field::constant(&g, C2::identity() * Complex64::from(v));
    let full = bd.clone().with("A", scal(a)).with("C", scal(b));
    let r = zc_residual(System::Mlxx4Full, &full, Accuracy::Second).unwrap();
    let red = zc_residual(System::Mlxx4, &bd.with_scalar("a", a).with_scalar("b", b), Accuracy::Second).unwrap();
    assert!(max_diff(&r[0].field, &red[0].field) < 1e-13);
    assert_eq!(r[2].field.max_norm(), 0.0);
}

#[test]
fn three_dimensional_systems_run() {
    let g = grid(&[AxisName::Xi1, AxisName::Xi2, AxisName::Xi4], 6);
    let c = set(&["B", "D"], &g, 2).with_scalar("b", 0.5);
    assert_eq!(zc_residual(System::Mlxx3, &c, Accuracy::Second).unwrap().len(), 1);
    let c = set(&["A1", "A2", "A3", "A4"], &g, 2);
    let r = zc_residual(System::Sdym3, &c, Accuracy::Second).unwrap();
    assert_eq!(r.iter().map(|x| x.name).collect::<Vec<_>>(), ["f12", "a3_flow", "mixed"]);
    let g4 = grid(&[AxisName::Xi1, AxisName::Xi2, AxisName::Xi3, AxisName::Xi4], 5);
    let r = zc_residual(System::Mlxii4, &set(&["A", "B", "C", "D"], &g4, 4), Accuracy::Second).unwrap();
    assert_eq!(r.len(), 6);
}

#[test]
fn embedding_is_linear_in_flatness_residuals() {
    let g = grid(&[AxisName::X, AxisName::Y, AxisName::T], 7);
    let abc = set(&["A", "B", "C"], &g, 31);
    let flat = zc_residual(System::Mlxii, &abc, Accuracy::Second).unwrap();
    let flat = [flat[0].field.clone(), flat[1].field.clone(), flat[2].field.clone()];
    let pot = embed_sdym(&abc.fields["A"], &abc.fields["B"], &abc.fields["C"]).unwrap();
    let sd = sdym_complex_residual(&pot, Accuracy::Second).unwrap();
    let pred = embedded_prediction(&flat);
    for k in 0..3 {
        assert!(max_diff(&sd[k], &pred[k]) < 1e-13, "component {k}");
    }
    let back = flatness_from_embedded(&sd);
    for k in 0..3 {
        assert!(max_diff(&back[k], &flat[k]) < 1e-13);
    }
}

fn abelian_self_dual(n: usize) -> GaugePotential4D<1> {
    let g = grid(&[AxisName::Xi1, AxisName::Xi2, AxisName::Xi3, AxisName::Xi4], n);
    let s = |f: fn(f64, f64) -> f64| Field::from_fn(&g, move |c| CMat::<1>::new(f(c[0], c[1]).into()));
    GaugePotential4D {
        a: [
            Field::zeros(&g),
            Field::zeros(&g),
            s(|a, b| a.exp() * b.cos()),
            s(|a, b| -a.exp() * b.sin()),
        ],
        coords: Coords::Xi,
    }
}

#[test]
fn abelian_case_is_self_dual_and_solves_the_system() {
    let d = |n| selfdual_defect(&curvature(&abelian_self_dual(n), BracketSign::Plus, Accuracy::Second).unwrap());
    let (d1, d2) = (d(9), d(17));
    assert!(d2 < 1e-2);
    assert!((d1 / d2 - 4.0).abs() < 0.6, "ratio {}", d1 / d2);
    let p = abelian_self_dual(9);
    let names = ["A1", "A2", "A3", "A4"];
    let c = (0..4).fold(ConnectionSet::new(), |s, k| s.with(names[k], p.a[k].clone()));
    let r = zc_residual(System::Sdym4, &c, Accuracy::Fourth).unwrap();
    assert!(r.iter().all(|x| x.field.max_norm() < 1e-3));
}

#[test]
fn anti_self_dual_pair_has_defect_twice_the_entry() {
    let g = grid(&[AxisName::Xi1, AxisName::Xi2, AxisName::Xi3, AxisName::Xi4], 3);
    let m = C2::new(0.5.into(), 0.0.into(), Complex64::new(0.0, -0.25), 0.0.into());
    let mut comps: [MatField<2>; 6] = std::array::from_fn(|_| Field::zeros(&g));
    comps[0] = Field::constant(&g, m);
    comps[5] = Field::constant(&g, -m);
    let f = Curvature2Form { comps };
    assert_eq!(selfdual_defect(&f), 1.0);
    assert_eq!(f.get(1, 0).unwrap(), Field::constant(&g, -m));
    assert_eq!(f.get(2, 2).unwrap().max_norm(), 0.0);
    assert!(f.get(4, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hodge_is_an_involution(seed in 0u64..1000) {
        let g = grid(&[AxisName::Xi1, AxisName::Xi2, AxisName::Xi3, AxisName::Xi4], 3);
        let f = Curvature2Form { comps: std::array::from_fn(|k| smooth(&g, seed * 7 + k as u64)) };
        prop_assert_eq!(hodge_dual(&hodge_dual(&f)), f);
    }

    #[test]
    fn residual_is_gauge_covariant(seed in 0u64..1000) {
        let g = grid(&[AxisName::X, AxisName::Y, AxisName::T], 5);
        let c = set(&["A", "B", "C"], &g, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = rand_mat(&mut rng) + C2::identity() * Complex64::from(3.0);
        let qi = q.try_inverse().unwrap();
        let mut cg = ConnectionSet::new();
        for (k, f) in &c.fields {
            cg = cg.with(k, f.map(|m| q * m * qi));
        }
        let r = zc_residual(System::Mlxii, &c, Accuracy::Second).unwrap();
        let rg = zc_residual(System::Mlxii, &cg, Accuracy::Second).unwrap();
        for (a, b) in r.iter().zip(&rg) {
            let conj = a.field.map(|m| q * m * qi);
            prop_assert!(max_diff(&conj, &b.field) < 1e-11 * (1.0 + conj.max_norm()));
        }
    }
}

fn xi_grid(n: usize, hi: f64) -> GridSpec {
    GridSpec::new([AxisName::Xi1, AxisName::Xi2, AxisName::Xi3, AxisName::Xi4].iter().map(|a| Axis::span(*a, n, 0.0, hi)).collect())
        .unwrap()
}

fn lam_err(p: LambdaParams, g: &GridSpec) -> f64 {
    let sf = lambda_field(p, g).unwrap();
    let r = lambda_residual(&sf, Accuracy::Second).unwrap();
    r.fields.iter().map(|(_, f)| f.max_norm_with_index(Some(&r.mask)).0).fold(0.0, f64::max)
}

#[test]
fn spectral_parameter_residual_is_second_order() {
    let p = LambdaParams::SdymXi { n1: 1.0, n3: 0.0, n4: 1.0, m1: 0.0, m3: 0.0, m4: 0.0 };
    let (e1, e2) = (lam_err(p, &xi_grid(11, 0.3)), lam_err(p, &xi_grid(21, 0.3)));
    assert!((e1 / e2 - 4.0).abs() < 0.6, "ratio {}", e1 / e2);
}

#[test]
fn complex_spectral_parameter_solves_its_equations() {
    let p = LambdaParams::MlxiiComplex { a1: 0.7, a2: -0.4, a3: 1.2, a4: 2.0 };
    let g = |n| GridSpec::new([AxisName::X, AxisName::Y, AxisName::Z, AxisName::T].iter().map(|a| Axis::span(*a, n, 0.0, 0.5)).collect()).unwrap();
    let (e1, e2) = (lam_err(p, &g(6)), lam_err(p, &g(11)));
    assert!(e2 < 1e-3);
    assert!((e1 / e2 - 4.0).abs() < 0.6, "ratio {}", e1 / e2);
}

#[test]
fn poles_are_masked() {
    // pole on ξ1 = 0.25 inside [0, 0.5]
    let p = LambdaParams::SdymXi { n1: 1.0, n3: 0.0, n4: 0.25, m1: 0.0, m3: 0.0, m4: 0.0 };
    let g = xi_grid(9, 0.5);
    let sf = lambda_field(p, &g).unwrap();
    assert!(sf.masked_fraction() > 0.0 && sf.masked_fraction() < 1.0);
    for (i, m) in sf.mask.iter().enumerate() {
        let x1 = g.coords(i)[0];
        assert_eq!(*m, (x1 - 0.25).abs() < 2.0 * 0.0625);
    }
    let dead = LambdaParams::SdymXi { n1: 0.0, n3: 1.0, n4: 0.0, m1: 0.0, m3: 0.0, m4: 0.0 };
    assert!(lambda_field(dead, &g).is_err());
    assert!(lambda_field(p, &grid(&[AxisName::X, AxisName::Y], 4)).is_err());
}
