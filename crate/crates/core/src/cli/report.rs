use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use super::config::RunConfig;
use crate::error::Result;
use crate::grid::{GridSpec, Sample};
use crate::grid::Field;

/// Norms of one check at one grid level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStat {
    /// Points per axis.
    pub n: Vec<usize>,
    pub h: f64,
    pub max: f64,
    pub l2: f64,
    /// Axis coordinates of the largest entry.
    pub argmax: Vec<(String, f64)>,
    pub mask_fraction: f64,
}

impl LevelStat {
    pub fn from_norms(grid: &GridSpec, max: f64, idx: usize, l2: f64, mask_fraction: f64) -> Self {
        Self {
            n: grid.axes().iter().map(|a| a.n).collect(),
            h: grid.max_h(),
            max,
            l2,
            argmax: grid.location(idx).into_iter().map(|(a, v)| (a.as_str().to_string(), v)).collect(),
            mask_fraction,
        }
    }

    pub fn of_field<T: Sample>(f: &Field<T>, mask: Option<&[bool]>) -> Self {
        let (max, idx) = f.max_norm_with_index(mask);
        let frac = mask.map_or(0.0, |m| m.iter().filter(|x| **x).count() as f64 / m.len() as f64);
        Self::from_norms(f.grid(), max, idx, f.l2_norm(mask), frac)
    }

    /// A scalar quantity without a spatial location.
    pub fn scalar(grid: &GridSpec, v: f64) -> Self {
        Self {
            n: grid.axes().iter().map(|a| a.n).collect(),
            h: grid.max_h(),
            max: v,
            l2: v,
            argmax: Vec::new(),
            mask_fraction: 0.0,
        }
    }
}

/// Thresholds a check was judged against.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Threshold {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: &'static str,
    pub levels: Vec<LevelStat>,
    pub ratios: Vec<f64>,
    pub tolerance: Threshold,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Every level must stay at or below `max`.
    pub fn ceiling(name: impl Into<String>, kind: &'static str, levels: Vec<LevelStat>, max: f64) -> Self {
        let pass = levels.iter().all(|l| l.max <= max);
        Self {
            name: name.into(),
            kind,
            ratios: ratios(&levels),
            levels,
            tolerance: Threshold { max: Some(max), ..Default::default() },
            pass,
            note: None,
        }
    }

    /// Error ratios per halving inside `[lo, hi]`. A level is at roundoff
    /// when its value is below `floor / h²` (h capped at 1); a pair of
    /// levels both at roundoff, or one that reaches roundoff from above at a
    /// ratio of at least `lo`, is accepted. With one level the value must
    /// stay below `single`.
    pub fn refinement(
        name: impl Into<String>,
        levels: Vec<LevelStat>,
        lo: f64,
        hi: f64,
        floor: f64,
        single: f64,
    ) -> Self {
        let name = name.into();
        if levels.len() < 2 {
            return Self::ceiling(name, "residual", levels, single);
        }
        let r = ratios(&levels);
        // rounding in a second-difference residual grows like 1/h²
        let at_floor = |s: &LevelStat| s.max <= floor / s.h.min(1.0).powi(2);
        let pass = levels.windows(2).zip(&r).all(|(w, q)| {
            (at_floor(&w[0]) && at_floor(&w[1])) || (at_floor(&w[1]) && *q >= lo) || (*q >= lo && *q <= hi)
        });
        let note = levels.iter().all(at_floor).then(|| "at roundoff on every level".to_string());
        Self {
            name,
            kind: "refinement",
            levels,
            ratios: r,
            tolerance: Threshold { max: None, ratio_min: Some(lo), ratio_max: Some(hi) },
            pass,
            note,
        }
    }

    /// Ratios per halving of at least `min`.
    pub fn decay(name: impl Into<String>, levels: Vec<LevelStat>, min: f64, single: f64) -> Self {
        let name = name.into();
        if levels.len() < 2 {
            return Self::ceiling(name, "residual", levels, single);
        }
        let r = ratios(&levels);
        let pass = r.iter().all(|q| *q >= min);
        Self {
            name,
            kind: "decay",
            levels,
            ratios: r,
            tolerance: Threshold { max: None, ratio_min: Some(min), ratio_max: None },
            pass,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn ratios(levels: &[LevelStat]) -> Vec<f64> {
    levels.windows(2).map(|w| w[0].max / w[1].max).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Wall times in milliseconds; the only non-deterministic part.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<BTreeMap<String, f64>>,
}

impl Report {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            tool: "solgeo",
            version: env!("CARGO_PKG_VERSION"),
            command: config.command.clone(),
            seed: config.seed,
            config: config.clone(),
            checks: Vec::new(),
            pass: true,
            timing: config.timing.then(BTreeMap::new),
        }
    }

    /// Run `f`, record its checks and its wall time.
    pub fn run(&mut self, label: &str, f: impl FnOnce() -> Result<Vec<Check>>) -> Result<()> {
        let t0 = Instant::now();
        let checks = f()?;
        if let Some(t) = &mut self.timing {
            t.insert(label.to_string(), t0.elapsed().as_secs_f64() * 1e3);
        }
        for c in checks {
            self.push(c);
        }
        Ok(())
    }

    pub fn push(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Write to `path`, or stdout when `None`.
    pub fn write(&self, path: Option<&Path>) -> Result<()> {
        let s = self.to_json()?;
        match path {
            Some(p) => std::fs::write(p, s)?,
            None => std::io::stdout().write_all(s.as_bytes())?,
        }
        Ok(())
    }

    /// One line per check for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let last = c.levels.last().map_or(f64::NAN, |l| l.max);
            let ratios: Vec<String> = c.ratios.iter().map(|r| format!("{r:.2}")).collect();
            s += &format!(
                "{} {:<32} max={:.3e}{}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                last,
                if ratios.is_empty() { String::new() } else { format!(" ratios=[{}]", ratios.join(", ")) }
            );
        }
        s
    }
}
