use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::cases::CASE_SEED;
use crate::error::{Result, SolgeoError};
use crate::grid::Accuracy;

/// Pass/fail thresholds per check class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Algebraic identities between two evaluations.
    pub identity: f64,
    /// Entrywise agreement of an equation with its reduction.
    pub reduction: f64,
    /// Residuals evaluated with exact derivatives.
    pub analytic: f64,
    /// Single-level finite-difference residuals and defects.
    pub residual: f64,
    /// Accepted error ratio per halving for second-order schemes; scaled by
    /// `2^(p−2)` for order `p`.
    pub ratio_window: [f64; 2],
    /// Minimum defect ratio per halving of the Lax commutation test.
    pub lax_ratio: f64,
    /// Hard ceiling on the surface compatibility residual.
    pub gmce_ceiling: f64,
    /// Mixed-partial defect must stay below this multiple of `h²`.
    pub mixed_partial_factor: f64,
    /// Frame Gram-matrix drift.
    pub gram: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-13,
            reduction: 1e-15,
            analytic: 1e-10,
            residual: 1e-3,
            ratio_window: [3.5, 4.5],
            lax_ratio: 8.0,
            gmce_ceiling: 1.0,
            mixed_partial_factor: 10.0,
            gram: 1e-12,
        }
    }
}

impl Tolerances {
    /// Ratio window for a scheme of order `p`.
    pub fn window(&self, order: usize) -> [f64; 2] {
        let s = (1u64 << order) as f64 / 4.0;
        [self.ratio_window[0] * s, self.ratio_window[1] * s]
    }

    fn set(&mut self, key: &str, v: f64) -> Result<()> {
        match key {
            "identity" => self.identity = v,
            "reduction" => self.reduction = v,
            "analytic" => self.analytic = v,
            "residual" => self.residual = v,
            "ratio_lo" => self.ratio_window[0] = v,
            "ratio_hi" => self.ratio_window[1] = v,
            "lax_ratio" => self.lax_ratio = v,
            "gmce_ceiling" => self.gmce_ceiling = v,
            "mixed_partial_factor" => self.mixed_partial_factor = v,
            "gram" => self.gram = v,
            _ => return Err(SolgeoError::Domain(format!("unknown tolerance '{key}'"))),
        }
        Ok(())
    }
}

/// Constant-coefficient frame run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameOpts {
    pub k: f64,
    pub tau: f64,
    pub sigma: f64,
    pub beta: f64,
    pub h: f64,
    pub steps: usize,
}

impl Default for FrameOpts {
    fn default() -> Self {
        Self { k: 1.0, tau: 0.0, sigma: 0.0, beta: 1.0, h: 1e-2, steps: 1000 }
    }
}

/// Everything a run depends on. Loaded from `--config` JSON, then
/// overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub system: Option<String>,
    pub eq: Option<String>,
    pub lambda: Option<String>,
    pub lax: Option<String>,
    pub case: Option<String>,
    /// Input field files by field name.
    pub inputs: BTreeMap<String, PathBuf>,
    /// Points per axis at the coarsest level.
    pub n: Option<usize>,
    /// Number of refinement levels.
    pub refine: usize,
    /// Finite-difference order, 2 or 4.
    pub accuracy: usize,
    /// `analytic` or `fd` for cases that carry closed forms.
    pub mode: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub tol: Tolerances,
    pub frame: FrameOpts,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub obj: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            system: None,
            eq: None,
            lambda: None,
            lax: None,
            case: None,
            inputs: BTreeMap::new(),
            n: None,
            refine: 1,
            accuracy: 2,
            mode: None,
            params: BTreeMap::new(),
            tol: Tolerances::default(),
            frame: FrameOpts::default(),
            seed: CASE_SEED,
            out: None,
            obj: None,
            csv: None,
            out_dir: None,
            timing: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SolgeoError::Domain(format!("config '{}': {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| SolgeoError::Domain(format!("config '{}': {e}", path.display())))
    }

    pub fn acc(&self) -> Result<Accuracy> {
        match self.accuracy {
            2 => Ok(Accuracy::Second),
            4 => Ok(Accuracy::Fourth),
            a => Err(SolgeoError::Domain(format!("accuracy must be 2 or 4, got {a}"))),
        }
    }

    /// Apply `key=value` tolerance overrides.
    pub fn set_tolerances(&mut self, kv: &[(String, f64)]) -> Result<()> {
        for (k, v) in kv {
            self.tol.set(k, *v)?;
        }
        Ok(())
    }

    /// Input files must exist before any work starts.
    pub fn check_inputs(&self) -> Result<()> {
        for (name, p) in &self.inputs {
            if !p.is_file() {
                return Err(SolgeoError::Domain(format!("input '{name}': file '{}' not found", p.display())));
            }
        }
        if self.refine == 0 {
            return Err(SolgeoError::Domain("refine must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parse `key=value` with a float value.
pub fn parse_kv_f64(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

/// Parse `name=path`.
pub fn parse_kv_path(s: &str) -> std::result::Result<(String, PathBuf), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=path, got '{s}'"))?;
    Ok((k.trim().to_string(), PathBuf::from(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_scales_with_order() {
        let t = Tolerances::default();
        assert_eq!(t.window(2), [3.5, 4.5]);
        assert_eq!(t.window(4), [14.0, 18.0]);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"refine": 3}"#).is_ok());
        assert!(serde_json::from_str::<RunConfig>(r#"{"refnie": 3}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"tol": {"analytic": 1e-9, "x": 1}}"#).is_err());
    }

    #[test]
    fn kv_parsing() {
        assert_eq!(parse_kv_f64("k=1.5").unwrap(), ("k".into(), 1.5));
        assert!(parse_kv_f64("k").is_err());
        assert!(parse_kv_f64("k=a").is_err());
    }
}
