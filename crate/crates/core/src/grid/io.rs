//! Field files: a one-line JSON header followed by a raw little-endian
//! f64 payload (point-major, complex values interleaved re/im, matrices
//! row-major), plus a CSV mode for 1D/2D scalar fields.

use nalgebra::SMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Axis, AxisName, Field, GridSpec, Sample};
use crate::error::{Result, SolgeoError};

pub const FORMAT_TAG: &str = "solgeo-field";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Real,
    Complex,
    MatrixReal,
    MatrixComplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub format: String,
    pub version: u32,
    pub kind: ValueKind,
    pub rows: usize,
    pub cols: usize,
    pub axes: Vec<Axis>,
}

impl FieldHeader {
    fn components(&self) -> usize {
        let per = match self.kind {
            ValueKind::Real | ValueKind::MatrixReal => 1,
            ValueKind::Complex | ValueKind::MatrixComplex => 2,
        };
        per * self.rows * self.cols
    }
}

/// Sample types with a file representation.
pub trait FieldValue: Sample {
    const KIND: ValueKind;
    const ROWS: usize;
    const COLS: usize;
    fn push_components(&self, out: &mut Vec<f64>);
    fn from_components(c: &[f64]) -> Self;
    /// Build from the components of the real counterpart kind, if any.
    fn from_real_components(_c: &[f64]) -> Option<Self> {
        None
    }
    fn components() -> usize {
        let per = match Self::KIND {
            ValueKind::Real | ValueKind::MatrixReal => 1,
            _ => 2,
        };
        per * Self::ROWS * Self::COLS
    }
}

impl FieldValue for f64 {
    const KIND: ValueKind = ValueKind::Real;
    const ROWS: usize = 1;
    const COLS: usize = 1;
    fn push_components(&self, out: &mut Vec<f64>) {
        out.push(*self);
    }
    fn from_components(c: &[f64]) -> Self {
        c[0]
    }
}

impl FieldValue for Complex64 {
    const KIND: ValueKind = ValueKind::Complex;
    const ROWS: usize = 1;
    const COLS: usize = 1;
    fn push_components(&self, out: &mut Vec<f64>) {
        out.extend([self.re, self.im]);
    }
    fn from_components(c: &[f64]) -> Self {
        Complex64::new(c[0], c[1])
    }
    fn from_real_components(c: &[f64]) -> Option<Self> {
        Some(Complex64::from(c[0]))
    }
}

impl<const R: usize, const C: usize> FieldValue for SMatrix<f64, R, C> {
    const KIND: ValueKind = ValueKind::MatrixReal;
    const ROWS: usize = R;
    const COLS: usize = C;
    fn push_components(&self, out: &mut Vec<f64>) {
        for i in 0..R {
            for j in 0..C {
                out.push(self[(i, j)]);
            }
        }
    }
    fn from_components(c: &[f64]) -> Self {
        Self::from_fn(|i, j| c[i * C + j])
    }
}

impl<const R: usize, const C: usize> FieldValue for SMatrix<Complex64, R, C> {
    const KIND: ValueKind = ValueKind::MatrixComplex;
    const ROWS: usize = R;
    const COLS: usize = C;
    fn push_components(&self, out: &mut Vec<f64>) {
        for i in 0..R {
            for j in 0..C {
                out.extend([self[(i, j)].re, self[(i, j)].im]);
            }
        }
    }
    fn from_components(c: &[f64]) -> Self {
        Self::from_fn(|i, j| Complex64::new(c[2 * (i * C + j)], c[2 * (i * C + j) + 1]))
    }
    fn from_real_components(c: &[f64]) -> Option<Self> {
        Some(Self::from_fn(|i, j| Complex64::from(c[i * C + j])))
    }
}

fn header_for<T: FieldValue>(grid: &GridSpec) -> FieldHeader {
    FieldHeader {
        format: FORMAT_TAG.into(),
        version: FORMAT_VERSION,
        kind: T::KIND,
        rows: T::ROWS,
        cols: T::COLS,
        axes: grid.axes().to_vec(),
    }
}

pub fn write_field<T: FieldValue, W: Write>(f: &Field<T>, mut w: W) -> Result<()> {
    let header = serde_json::to_string(&header_for::<T>(f.grid()))?;
    w.write_all(header.as_bytes())?;
    w.write_all(b"\n")?;
    let mut comps = Vec::with_capacity(T::components());
    let mut buf = Vec::with_capacity(f.len() * T::components() * 8);
    for v in f.data() {
        comps.clear();
        v.push_components(&mut comps);
        for c in &comps {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_header<R: BufRead>(r: &mut R) -> Result<FieldHeader> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: FieldHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| SolgeoError::Format(format!("bad field header: {e}")))?;
    if header.format != FORMAT_TAG {
        return Err(SolgeoError::Format(format!("not a field file (format '{}')", header.format)));
    }
    if header.version != FORMAT_VERSION {
        return Err(SolgeoError::Format(format!("unsupported field version {}", header.version)));
    }
    Ok(header)
}

/// Read a field of sample type `T`. Real files are accepted where the
/// complex counterpart is requested.
pub fn read_field<T: FieldValue, R: Read>(r: R) -> Result<Field<T>> {
    let mut r = BufReader::new(r);
    let header = read_header(&mut r)?;
    let grid = GridSpec::new(header.axes.clone())?;
    if header.rows != T::ROWS || header.cols != T::COLS {
        return Err(SolgeoError::Format(format!(
            "field shape {}x{} does not match expected {}x{}",
            header.rows,
            header.cols,
            T::ROWS,
            T::COLS
        )));
    }
    let upcast = match (header.kind, T::KIND) {
        (a, b) if a == b => false,
        (ValueKind::Real, ValueKind::Complex) | (ValueKind::MatrixReal, ValueKind::MatrixComplex) => true,
        (a, b) => return Err(SolgeoError::Format(format!("field kind {a:?} cannot be read as {b:?}"))),
    };
    let nc = header.components();
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let want = grid.len() * nc * 8;
    if bytes.len() != want {
        return Err(SolgeoError::Format(format!("payload has {} bytes, expected {want}", bytes.len())));
    }
    let vals: Vec<f64> = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
    let data = vals
        .chunks_exact(nc)
        .map(|c| if upcast { T::from_real_components(c).unwrap() } else { T::from_components(c) })
        .collect();
    Field::new(grid, data)
}

pub fn save<T: FieldValue>(f: &Field<T>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_field(f, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load<T: FieldValue>(path: &Path) -> Result<Field<T>> {
    read_field(std::fs::File::open(path)?)
}

pub fn peek_header(path: &Path) -> Result<FieldHeader> {
    read_header(&mut BufReader::new(std::fs::File::open(path)?))
}

/// CSV with one row per point: axis coordinates, then `value` (real) or
/// `re,im` (complex).
pub fn write_csv<T: FieldValue, W: Write>(f: &Field<T>, mut w: W) -> Result<()> {
    let grid = f.grid();
    if grid.ndim() > 2 || !matches!(T::KIND, ValueKind::Real | ValueKind::Complex) {
        return Err(SolgeoError::Format("CSV mode supports 1D/2D scalar fields only".into()));
    }
    let mut cols: Vec<&str> = grid.axes().iter().map(|a| a.name.as_str()).collect();
    if T::KIND == ValueKind::Real {
        cols.push("value");
    } else {
        cols.extend(["re", "im"]);
    }
    writeln!(w, "{}", cols.join(","))?;
    let mut comps = Vec::new();
    for (i, v) in f.data().iter().enumerate() {
        comps.clear();
        v.push_components(&mut comps);
        let row: Vec<String> = grid.coords(i).iter().chain(&comps).map(|x| format!("{x:e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Inverse of [`write_csv`]; the grid is rebuilt from the distinct
/// coordinates (non-periodic).
pub fn read_csv<T: FieldValue, R: Read>(r: R) -> Result<Field<T>> {
    let fmt = |m: &str| SolgeoError::Format(m.to_string());
    let mut lines = BufReader::new(r).lines();
    let head = lines.next().ok_or_else(|| fmt("empty CSV"))??;
    let names: Vec<&str> = head.split(',').collect();
    let nval = T::components();
    if names.len() < nval + 1 || names.len() > nval + 2 {
        return Err(fmt("CSV column count does not match value kind"));
    }
    let ndim = names.len() - nval;
    let axes_names = names[..ndim].iter().map(|s| AxisName::parse(s)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| fmt(&format!("bad CSV number '{s}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != names.len() {
            return Err(fmt("ragged CSV row"));
        }
        rows.push(vals);
    }
    let mut axes = Vec::new();
    for (d, name) in axes_names.iter().enumerate() {
        let mut cs: Vec<f64> = rows.iter().map(|r| r[d]).collect();
        cs.sort_by(f64::total_cmp);
        cs.dedup();
        if cs.len() < 2 {
            return Err(fmt("CSV axis needs at least two distinct coordinates"));
        }
        axes.push(Axis::span(*name, cs.len(), cs[0], cs[cs.len() - 1]));
    }
    let grid = GridSpec::new(axes)?;
    if rows.len() != grid.len() {
        return Err(fmt("CSV rows do not form a full regular grid"));
    }
    let mut data = vec![T::zero(); grid.len()];
    for r in &rows {
        let ids: Vec<usize> = grid
            .axes()
            .iter()
            .enumerate()
            .map(|(d, a)| ((r[d] - a.origin) / a.h).round() as usize)
            .collect();
        data[grid.ravel(&ids)] = T::from_components(&r[ndim..]);
    }
    Field::new(grid, data)
}
