use nalgebra::Vector3;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};

use super::config::RunConfig;
use super::report::{Check, LevelStat, Report};
use crate::cases::{build_case, CaseData, CaseName, ExportField};
use crate::error::{domain, Result, SolgeoError};
use crate::frames::{propagate_frenet, reconstruct_surface, write_obj, FrameTriad, SurfaceData};
use crate::grid::io::{load, peek_header, save, ValueKind};
use crate::grid::{Field, GridSpec};
use crate::liealg::{CMat, CoeffTriple, Sign};
use crate::solitons::{
    lax_commutation_defect, pde_residual, pde_residual_analytic, EqId, SolitonParams, SolitonResidual,
};
use crate::zerocurv::{lambda_field, lambda_residual, zc_residual, ConnectionSet, LambdaKind, SpectralField, System};

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    domain(msg)
}

fn case_name(cfg: &RunConfig) -> Result<Option<CaseName>> {
    let Some(c) = cfg.case.as_deref() else { return Ok(None) };
    // `planewave` picks the plane wave of the requested equation
    let c = match (c, cfg.eq.as_deref()) {
        ("planewave", Some("ds")) => "planewave-ds",
        ("planewave", _) => "planewave-zi",
        (c, _) => c,
    };
    c.parse().map(Some)
}

fn levels(cfg: &RunConfig) -> std::ops::Range<usize> {
    0..cfg.refine
}

fn build(cfg: &RunConfig, name: CaseName, level: usize) -> Result<CaseData> {
    build_case(name, cfg.n, level, &cfg.params, cfg.seed)
}

fn only_one_target(cfg: &RunConfig) -> Result<()> {
    let n = [&cfg.system, &cfg.eq, &cfg.lambda, &cfg.lax].iter().filter(|x| x.is_some()).count();
    if n != 1 {
        return usage("check needs exactly one of --system, --eq, --lambda, --lax");
    }
    if cfg.case.is_some() && !cfg.inputs.is_empty() {
        return usage("give either --case or --input fields, not both");
    }
    if cfg.case.is_none() && cfg.inputs.is_empty() {
        return usage("check needs --case or --input fields");
    }
    Ok(())
}

/// `check`: residual, reduction, spectral-parameter or Lax checks.
pub fn cmd_check(cfg: &RunConfig) -> Result<Report> {
    only_one_target(cfg)?;
    cfg.check_inputs()?;
    let mut report = Report::new(cfg);
    if let Some(s) = &cfg.system {
        let system: System = s.parse()?;
        report.run("system", || check_system(cfg, system))?;
    } else if let Some(e) = &cfg.eq {
        let eq: EqId = e.parse()?;
        report.run("eq", || check_eq(cfg, eq))?;
    } else if let Some(k) = &cfg.lambda {
        let kind: LambdaKind = serde_json::from_value(serde_json::Value::String(k.clone()))
            .map_err(|_| SolgeoError::Domain(format!("unknown spectral-parameter kind '{k}' (sdym_xi, mlxii_complex)")))?;
        report.run("lambda", || check_lambda(cfg, kind))?;
    } else if let Some(l) = &cfg.lax {
        let eq: EqId = l.parse()?;
        report.run("lax", || check_lax(cfg, eq))?;
    }
    Ok(report)
}

fn load_matrix_fields(cfg: &RunConfig) -> Result<ConnectionSet<2>> {
    let mut set = ConnectionSet::new();
    for (name, p) in &cfg.inputs {
        let f: Field<CMat<2>> = load(p).map_err(|e| SolgeoError::Domain(format!("input '{name}': {e}")))?;
        set = set.with(name, f);
    }
    for (k, v) in &cfg.params {
        set = set.with_scalar(k, *v);
    }
    Ok(set)
}

fn check_system(cfg: &RunConfig, system: System) -> Result<Vec<Check>> {
    let acc = cfg.acc()?;
    let sets: Vec<ConnectionSet<2>> = match case_name(cfg)? {
        Some(name) => levels(cfg)
            .map(|l| match build(cfg, name, l)? {
                CaseData::Connection { set, .. } => Ok(set),
                _ => usage(format!("case {name} does not provide matrix fields")),
            })
            .collect::<Result<_>>()?,
        None => vec![load_matrix_fields(cfg)?],
    };
    let mut per: Vec<Vec<LevelStat>> = vec![Vec::new(); system.residual_names().len()];
    for set in &sets {
        for (i, r) in zc_residual(system, set, acc)?.into_iter().enumerate() {
            per[i].push(LevelStat::of_field(&r.field, None));
        }
    }
    let [lo, hi] = cfg.tol.window(acc.order());
    Ok(system
        .residual_names()
        .iter()
        .zip(per)
        .map(|(n, lv)| Check::refinement(format!("{system}.{n}"), lv, lo, hi, cfg.tol.identity, cfg.tol.residual))
        .collect())
}

fn load_complex_fields(cfg: &RunConfig) -> Result<BTreeMap<String, Field<Complex64>>> {
    cfg.inputs
        .iter()
        .map(|(name, p)| {
            let wrap = |e: SolgeoError| SolgeoError::Domain(format!("input '{name}': {e}"));
            let f = match peek_header(p).map_err(wrap)?.kind {
                ValueKind::Real => load::<f64>(p).map_err(wrap)?.to_complex(),
                _ => load::<Complex64>(p).map_err(wrap)?,
            };
            Ok((name.clone(), f))
        })
        .collect()
}

fn residual_stats(r: &SolitonResidual) -> LevelStat {
    let (max, idx) = r.values.max_norm_with_index(None);
    LevelStat::from_norms(r.values.grid(), max, idx, r.values.l2_norm(None), 0.0)
}

fn check_eq(cfg: &RunConfig, eq: EqId) -> Result<Vec<Check>> {
    let acc = cfg.acc()?;
    let analytic = match cfg.mode.as_deref() {
        None | Some("analytic") => true,
        Some("fd") => false,
        Some(m) => return usage(format!("unknown mode '{m}' (analytic, fd)")),
    };
    let Some(name) = case_name(cfg)? else {
        let fields = load_complex_fields(cfg)?;
        let p = SolitonParams::from_map(&cfg.params)?;
        return Ok(pde_residual(eq, &fields, &p, acc)?
            .iter()
            .map(|r| Check::ceiling(format!("{eq}.{}", r.name), "residual", vec![residual_stats(r)], cfg.tol.residual))
            .collect());
    };
    let same_fields = |case_eq: EqId| {
        if case_eq.field_names() == eq.field_names() {
            Ok(())
        } else {
            usage(format!("case {name} provides fields for {case_eq}, not {eq}"))
        }
    };
    match build(cfg, name, 0)? {
        CaseData::Soliton { eq: case_eq, params, jets: Some(jets), .. } if analytic => {
            same_fields(case_eq)?;
            Ok(pde_residual_analytic(eq, &jets, &params)?
                .iter()
                .map(|r| {
                    Check::ceiling(format!("{eq}.{}", r.name), "analytic", vec![residual_stats(r)], cfg.tol.analytic)
                })
                .collect())
        }
        CaseData::Soliton { eq: case_eq, .. } => {
            same_fields(case_eq)?;
            let mut per: Vec<(&'static str, Vec<LevelStat>)> = Vec::new();
            for l in levels(cfg) {
                let CaseData::Soliton { params, fields, .. } = build(cfg, name, l)? else { unreachable!() };
                for (i, r) in pde_residual(eq, &fields, &params, acc)?.iter().enumerate() {
                    if per.len() <= i {
                        per.push((r.name, Vec::new()));
                    }
                    per[i].1.push(residual_stats(r));
                }
            }
            let [lo, hi] = cfg.tol.window(acc.order());
            Ok(per
                .into_iter()
                .map(|(n, lv)| Check::refinement(format!("{eq}.{n}"), lv, lo, hi, cfg.tol.identity, cfg.tol.residual))
                .collect())
        }
        CaseData::Reduction { eq: case_eq, params, reference: (ref_eq, ref_params), fields } => {
            if case_eq != eq {
                return usage(format!("case {name} checks {case_eq}, not {eq}"));
            }
            let full = pde_residual(eq, &fields, &params, acc)?;
            let reduced = pde_residual(ref_eq, &fields, &ref_params, acc)?;
            if full.len() != reduced.len() {
                return Err(SolgeoError::Numerical(format!("{eq} and {ref_eq} return different residual counts")));
            }
            full.iter()
                .zip(&reduced)
                .map(|(a, b)| {
                    let d = a.values.max_diff(&b.values)?;
                    Ok(Check::ceiling(
                        format!("{eq}.{}=={ref_eq}.{}", a.name, b.name),
                        "reduction",
                        vec![LevelStat::scalar(a.values.grid(), d)],
                        cfg.tol.reduction,
                    ))
                })
                .collect()
        }
        _ => usage(format!("case {name} does not provide soliton fields")),
    }
}

fn check_lambda(cfg: &RunConfig, kind: LambdaKind) -> Result<Vec<Check>> {
    let acc = cfg.acc()?;
    let fields: Vec<SpectralField> = match case_name(cfg)? {
        Some(name) => levels(cfg)
            .map(|l| match build(cfg, name, l)? {
                CaseData::Lambda(sf) if sf.params.kind() == kind => Ok(sf),
                _ => usage(format!("case {name} does not provide a {} spectral parameter", kind_str(kind))),
            })
            .collect::<Result<_>>()?,
        None => {
            let Some(p) = cfg.inputs.get("lambda") else {
                return usage("spectral-parameter input must be named 'lambda'");
            };
            let lambda: Field<Complex64> = load(p)?;
            // pole mask from the closed form when constants are given
            let params = lambda_params(kind, &cfg.params)?;
            let mask = lambda_field(params, lambda.grid())?.mask;
            vec![SpectralField { params, lambda, mask }]
        }
    };
    let mut per: Vec<(&'static str, Vec<LevelStat>)> = Vec::new();
    for sf in &fields {
        let r = lambda_residual(sf, acc)?;
        for (i, (n, f)) in r.fields.iter().enumerate() {
            if per.len() <= i {
                per.push((n, Vec::new()));
            }
            per[i].1.push(LevelStat::of_field(f, Some(&r.mask)));
        }
    }
    let [lo, hi] = cfg.tol.window(acc.order());
    Ok(per
        .into_iter()
        .map(|(n, lv)| {
            Check::refinement(format!("lambda.{}.{n}", kind_str(kind)), lv, lo, hi, cfg.tol.identity, cfg.tol.residual)
        })
        .collect())
}

fn kind_str(k: LambdaKind) -> &'static str {
    match k {
        LambdaKind::SdymXi => "sdym_xi",
        LambdaKind::MlxiiComplex => "mlxii_complex",
    }
}

fn lambda_params(kind: LambdaKind, m: &BTreeMap<String, f64>) -> Result<crate::zerocurv::LambdaParams> {
    let mut v = serde_json::Map::new();
    v.insert("kind".into(), kind_str(kind).into());
    for (k, x) in m {
        v.insert(k.clone(), (*x).into());
    }
    serde_json::from_value(serde_json::Value::Object(v))
        .map_err(|e| SolgeoError::Domain(format!("spectral-parameter constants: {e}")))
}

fn check_lax(cfg: &RunConfig, eq: EqId) -> Result<Vec<Check>> {
    let acc = cfg.acc()?;
    let Some(name) = case_name(cfg)? else {
        let fields = load_complex_fields(cfg)?;
        let p = SolitonParams::from_map(&cfg.params)?;
        let d = lax_commutation_defect(eq, &fields, &p, acc, None)?;
        let g = fields.values().next().unwrap().grid();
        return Ok(vec![Check::ceiling(format!("lax.{eq}"), "residual", vec![LevelStat::scalar(g, d.defect)], cfg.tol.residual)]);
    };
    let mut lv = Vec::new();
    for l in levels(cfg) {
        let CaseData::Soliton { params, fields, .. } = build(cfg, name, l)? else {
            return usage(format!("case {name} does not provide soliton fields"));
        };
        let d = lax_commutation_defect(eq, &fields, &params, acc, None)?;
        lv.push(LevelStat::scalar(fields.values().next().unwrap().grid(), d.defect));
    }
    Ok(vec![Check::decay(format!("lax.{eq}"), lv, cfg.tol.lax_ratio, cfg.tol.residual)])
}

/// `surface`: reconstruct from fundamental forms, export the mesh.
pub fn cmd_surface(cfg: &RunConfig) -> Result<Report> {
    cfg.check_inputs()?;
    let mut report = Report::new(cfg);
    report.run("surface", || {
        let mut runs = Vec::new();
        match case_name(cfg)? {
            Some(name) => {
                for l in levels(cfg) {
                    match build(cfg, name, l)? {
                        CaseData::Surface { data, oracle } => runs.push((data, Some(oracle))),
                        _ => return usage(format!("case {name} is not a surface case")),
                    }
                }
            }
            None => {
                let fields = cfg
                    .inputs
                    .iter()
                    .map(|(k, p)| Ok((k.clone(), load::<f64>(p).map_err(|e| SolgeoError::Domain(format!("input '{k}': {e}")))?)))
                    .collect::<Result<BTreeMap<_, _>>>()?;
                if fields.is_empty() {
                    return usage("surface needs --case or --input fields");
                }
                runs.push((SurfaceData::from_fields(&fields)?, None));
            }
        }
        let (mut gmce, mut mixed, mut shape) = (Vec::new(), Vec::new(), Vec::new());
        let mut mixed_ok = true;
        let mut last = None;
        for (data, oracle) in &runs {
            let rec = reconstruct_surface(data, Vector3::zeros(), None)?;
            let g = data.grid();
            let h = g.max_h();
            gmce.push(LevelStat::scalar(g, rec.gmce_residual));
            mixed.push(LevelStat::scalar(g, rec.mixed_partial_defect));
            mixed_ok &= rec.mixed_partial_defect <= cfg.tol.mixed_partial_factor * h * h;
            if let Some(o) = oracle {
                shape.push(LevelStat::scalar(g, o.error(&rec.positions)));
            }
            last = Some(rec);
        }
        let rec = last.unwrap();
        if let Some(p) = &cfg.obj {
            write_obj(&rec.positions, BufWriter::new(File::create(p)?))?;
        }
        if let Some(dir) = &cfg.out_dir {
            std::fs::create_dir_all(dir)?;
            save(&rec.positions, &dir.join("positions.sgf"))?;
        }
        let mut checks = vec![Check::ceiling("surface.gmce_residual", "ceiling", gmce, cfg.tol.gmce_ceiling)];
        let mut m = Check::ceiling("surface.mixed_partial", "ceiling", mixed, f64::INFINITY);
        m.pass = mixed_ok;
        m.tolerance.max = None;
        checks.push(m.with_note(format!("bound {}·h² per level", cfg.tol.mixed_partial_factor)));
        if !shape.is_empty() {
            let [lo, hi] = cfg.tol.window(2);
            let c = if shape.len() < 2 {
                let mut c = Check::ceiling("surface.shape_error", "oracle", shape, f64::INFINITY);
                c.tolerance.max = None;
                c.with_note("single level: reported only")
            } else {
                Check::refinement("surface.shape_error", shape, lo, hi, cfg.tol.identity, f64::INFINITY)
            };
            checks.push(c);
        }
        Ok(checks)
    })?;
    Ok(report)
}

/// `case`: write the fields of a built-in case.
pub fn cmd_case(cfg: &RunConfig) -> Result<Report> {
    let Some(name) = case_name(cfg)? else { return usage("case needs a case name") };
    let Some(dir) = &cfg.out_dir else { return usage("case needs --out-dir") };
    let data = build(cfg, name, cfg.refine - 1)?;
    std::fs::create_dir_all(dir)?;
    let mut report = Report::new(cfg);
    report.run("case", || {
        let mut checks = Vec::new();
        for (field, f) in data.export() {
            let path = dir.join(format!("{field}.sgf"));
            let g: GridSpec = match &f {
                ExportField::Real(x) => {
                    save(x, &path)?;
                    x.grid().clone()
                }
                ExportField::Complex(x) => {
                    save(x, &path)?;
                    x.grid().clone()
                }
                ExportField::Matrix2(x) => {
                    save(x, &path)?;
                    x.grid().clone()
                }
            };
            let mut c = Check::ceiling(format!("case.{field}"), "export", vec![LevelStat::scalar(&g, 0.0)], 0.0);
            c.tolerance.max = None;
            checks.push(c.with_note(format!("{field}.sgf")));
        }
        Ok(checks)
    })?;
    Ok(report)
}

/// `frame`: constant-coefficient frame propagation.
pub fn cmd_frame(cfg: &RunConfig) -> Result<Report> {
    let o = &cfg.frame;
    let beta = Sign::from_value(o.beta)?;
    if o.steps == 0 || !(o.h > 0.0 && o.h.is_finite()) {
        return usage("frame needs steps >= 1 and h > 0");
    }
    let mut report = Report::new(cfg);
    report.run("frame", || {
        let coeffs = vec![CoeffTriple::curve(o.k, o.tau, o.sigma); o.steps + 1];
        let ff = propagate_frenet(&FrameTriad::standard(beta), &coeffs, beta, o.h)?;
        let g = ff.frames.grid().clone();
        // pseudo-orthonormal frames grow without bound; judge drift relative to |Z|²
        let scale = ff.frames.data().iter().map(|z| z.amax()).fold(1.0f64, f64::max).powi(2);
        let drift = LevelStat::scalar(&g, ff.max_orthonormality_defect() / scale);
        let mut checks = vec![Check::ceiling("frame.gram_drift", "identity", vec![drift], cfg.tol.gram)
            .with_note(format!("relative to max entry squared ({scale:.3e})"))];
        if o.tau == 0.0 && o.sigma == 0.0 && beta == Sign::Plus {
            let err = (0..ff.len())
                .map(|i| {
                    let s = i as f64 * o.h;
                    (ff.triad(i).e1 - Vector3::new((o.k * s).cos(), (o.k * s).sin(), 0.0)).amax()
                })
                .fold(0.0, f64::max);
            checks.push(Check::ceiling("frame.circle_error", "analytic", vec![LevelStat::scalar(&g, err)], cfg.tol.residual));
        }
        if let Some(p) = &cfg.csv {
            let mut w = BufWriter::new(File::create(p)?);
            writeln!(w, "s,e1x,e1y,e1z,e2x,e2y,e2z,e3x,e3y,e3z")?;
            for i in 0..ff.len() {
                let t = ff.triad(i);
                write!(w, "{}", i as f64 * o.h)?;
                for v in [t.e1, t.e2, t.e3] {
                    write!(w, ",{},{},{}", v.x, v.y, v.z)?;
                }
                writeln!(w)?;
            }
            w.flush()?;
        }
        Ok(checks)
    })?;
    Ok(report)
}

