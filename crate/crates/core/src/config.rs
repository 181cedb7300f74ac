//! Run configuration read from TOML.
//!
//! Every frequency is in units of `γ` and every time in `1/γ`. Unknown keys are
//! rejected so that typos surface as schema errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dimer::DimerParams;
use crate::error::{Error, Result};
use crate::fock::{thermal_occupation_from_bath, SystemParams};
use crate::lindblad::EvolveOptions;
use crate::mean_field::{auto_cutoff, default_sweep_range};
use crate::ode::Tolerances;
use crate::scan::{log_grid, MapAxis, Model, TauMethod};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Prefix of every output file.
    pub name: String,
    pub system: SystemSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    pub sweep: Option<SweepSection>,
    pub steadystate: Option<GridSection>,
    pub spectrum: Option<SpectrumSection>,
    pub area_scan: Option<AreaScanSection>,
    pub resonance_map: Option<ResonanceMapSection>,
    pub kz: Option<KzSection>,
    pub dimer: Option<DimerSection>,
    pub qa: Option<QaSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub detuning: f64,
    pub nonlinearity: f64,
    /// Bath occupation; exclusive with `bath_beta_omega`.
    pub thermal_occupation: Option<f64>,
    /// `βω_c` of the bath, converted with the Bose–Einstein law.
    pub bath_beta_omega: Option<f64>,
    /// Fock cutoff; chosen from the mean-field population when absent.
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rtol: f64,
    pub atol: f64,
    pub tail_tol: f64,
    pub g2_floor: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let o = EvolveOptions::default();
        Self {
            rtol: o.tolerances.rtol,
            atol: o.tolerances.atol,
            tail_tol: o.tail_tol,
            g2_floor: o.g2_floor,
            max_steps: o.max_steps,
        }
    }
}

/// Drive range of the sweeps; the default covers the bistable window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSection {
    pub f_min: f64,
    pub f_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub range: Option<RangeSection>,
    /// `t_s γ²/ΔF` of each recorded loop.
    pub ratios: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    201
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
}

impl GridSection {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.f_max > self.f_min) || self.points < 2 {
            return Err(Error::Config("grid needs f_max > f_min and at least 2 points".into()));
        }
        let last = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| self.f_min + (self.f_max - self.f_min) * i as f64 / last)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub grid: GridSection,
    /// Extra points merged into the grid, typically around the transition.
    pub refine: Option<GridSection>,
    /// Second cutoff used to report the relative change of `λ_slow`.
    pub check_cutoff: Option<usize>,
}

impl SpectrumSection {
    pub fn values(&self) -> Result<Vec<f64>> {
        let mut v = self.grid.values()?;
        if let Some(r) = &self.refine {
            v.extend(r.values()?);
        }
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        Ok(v)
    }
}

/// Logarithmic grid of `t_s γ²/ΔF`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl RatioGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        log_grid(self.min, self.max, self.points).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaScanSection {
    #[serde(default = "default_models")]
    pub models: Vec<Model>,
    pub range: Option<RangeSection>,
    pub ratios: RatioGrid,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Quantum scans are repeated for each bath occupation listed here.
    pub thermal_occupations: Option<Vec<f64>>,
    /// Offset fits of mean-field scans use only ratios at or above this value.
    #[serde(default = "default_offset_fit_min")]
    pub offset_fit_min_ratio: f64,
}

fn default_models() -> Vec<Model> {
    vec![Model::Quantum]
}

fn default_offset_fit_min() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceMapSection {
    pub axis: MapAxis,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Values of the other parameter, one curve each; defaults to the system's.
    pub curves: Option<Vec<f64>>,
    pub method: TauMethod,
}

impl ResonanceMapSection {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.stop >= self.start) {
            return Err(Error::Config("resonance map needs step > 0 and stop ≥ start".into()));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + self.step * i as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KzSection {
    pub ratios: RatioGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimerSection {
    pub hopping: f64,
    /// Ratio of the recorded `g2_12` loop.
    #[serde(default = "default_dimer_trace_ratio")]
    pub trace_ratio: f64,
    pub range: Option<RangeSection>,
    pub ratios: Option<RatioGrid>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_true")]
    pub mean_field: bool,
}

fn default_dimer_trace_ratio() -> f64 {
    30.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaSection {
    pub range: Option<RangeSection>,
    pub ratios: RatioGrid,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Also run the master equation on the same grid.
    #[serde(default = "default_true")]
    pub compare_exact: bool,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Reads a TOML config, or the `config` member of a run manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            let v: serde_json::Value = serde_json::from_str(&text)?;
            let inner = v
                .get("config")
                .ok_or_else(|| Error::Config("manifest has no `config` member".into()))?;
            let c: Self = serde_json::from_value(inner.clone()).map_err(|e| Error::Config(e.to_string()))?;
            c.validate()?;
            return Ok(c);
        }
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config("`name` must be a non-empty file prefix".into()));
        }
        let s = &self.system;
        if s.thermal_occupation.is_some() && s.bath_beta_omega.is_some() {
            return Err(Error::Config(
                "give either thermal_occupation or bath_beta_omega, not both".into(),
            ));
        }
        self.site_params().map_err(|e| Error::Config(e.to_string()))?;
        let i = &self.integrator;
        if !(i.rtol > 0.0 && i.atol > 0.0 && i.tail_tol > 0.0 && i.g2_floor >= 0.0 && i.max_steps > 0) {
            return Err(Error::Config("integrator tolerances must be positive".into()));
        }
        for r in [
            self.sweep.as_ref().and_then(|s| s.range),
            self.area_scan.as_ref().and_then(|s| s.range),
            self.dimer.as_ref().and_then(|s| s.range),
            self.qa.as_ref().and_then(|s| s.range),
        ]
        .into_iter()
        .flatten()
        {
            if !(r.f_max > r.f_min && r.f_min >= 0.0) {
                return Err(Error::Config("range needs 0 ≤ f_min < f_max".into()));
            }
        }
        if let Some(s) = &self.sweep {
            if s.ratios.is_empty() || s.ratios.iter().any(|r| !(*r > 0.0)) {
                return Err(Error::Config("sweep.ratios must be non-empty and positive".into()));
            }
        }
        if let Some(s) = &self.spectrum {
            s.values()?;
        }
        if let Some(s) = &self.steadystate {
            s.values()?;
        }
        if let Some(s) = &self.area_scan {
            s.ratios.values()?;
            if s.models.is_empty() {
                return Err(Error::Config("area_scan.models must not be empty".into()));
            }
        }
        if let Some(s) = &self.resonance_map {
            s.grid()?;
        }
        if let Some(s) = &self.kz {
            s.ratios.values()?;
        }
        if let Some(s) = &self.qa {
            s.ratios.values()?;
        }
        if let Some(s) = &self.dimer {
            if let Some(r) = &s.ratios {
                r.values()?;
            }
            self.dimer_params().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Parameters with the configured cutoff, or a placeholder cutoff when the
    /// automatic one is requested (see [`Config::params_for_range`]).
    fn site_params(&self) -> Result<SystemParams> {
        let s = &self.system;
        let n_th = match (s.thermal_occupation, s.bath_beta_omega) {
            (Some(n), _) => n,
            (None, Some(b)) => thermal_occupation_from_bath(b),
            (None, None) => 0.0,
        };
        SystemParams::new(s.detuning, s.nonlinearity, s.cutoff.unwrap_or(1))?.with_thermal_occupation(n_th)
    }

    /// Parameters for sweeps reaching `f_max`.
    pub fn params_for_range(&self, f_max: f64) -> Result<SystemParams> {
        let p = self.site_params()?;
        match self.system.cutoff {
            Some(_) => Ok(p),
            None => p.with_cutoff(auto_cutoff(&p, f_max)),
        }
    }

    /// Configured drive range or the default one around the bistable window.
    pub fn range_or_default(&self, range: Option<RangeSection>) -> Result<(f64, f64)> {
        Ok(match range {
            Some(r) => (r.f_min, r.f_max),
            None => default_sweep_range(&self.site_params()?),
        })
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        let i = &self.integrator;
        EvolveOptions {
            tolerances: Tolerances {
                rtol: i.rtol,
                atol: i.atol,
            },
            tail_tol: i.tail_tol,
            g2_floor: i.g2_floor,
            max_steps: i.max_steps,
        }
    }

    /// Dimer parameters; the per-site cutoff defaults to 12, capped by the
    /// joint-dimension guard.
    pub fn dimer_params(&self) -> Result<DimerParams> {
        let section = self
            .dimer
            .as_ref()
            .ok_or_else(|| Error::Config("missing [dimer] section".into()))?;
        let p = self.site_params()?.with_cutoff(self.system.cutoff.unwrap_or(12))?;
        DimerParams::new(p, section.hopping)
    }

    /// Section lookup that reports the missing table by name.
    pub fn require<'a, T>(&self, section: &'a Option<T>, name: &str) -> Result<&'a T> {
        section
            .as_ref()
            .ok_or_else(|| Error::Config(format!("missing [{name}] section")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "demo"
[system]
detuning = 2.0
nonlinearity = 0.5
[sweep]
ratios = [10.0]
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = Config::from_toml(MINIMAL).unwrap();
        assert_eq!(c.sweep.as_ref().unwrap().samples, 201);
        assert_eq!(c.evolve_options(), EvolveOptions::default());
        let (lo, hi) = c.range_or_default(None).unwrap();
        assert!(hi > lo && lo >= 0.0);
        assert!(c.params_for_range(hi).unwrap().cutoff > 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("nonlinearity", "nonlinarity");
        assert!(matches!(Config::from_toml(&bad), Err(Error::Config(_))));
        let extra = format!("{MINIMAL}\n[extra]\nx = 1\n");
        assert!(Config::from_toml(&extra).is_err());
    }

    #[test]
    fn bath_temperature_conversion_and_exclusivity() {
        let c = Config::from_toml(&MINIMAL.replace("nonlinearity = 0.5", "nonlinearity = 0.5\nbath_beta_omega = 2.4")).unwrap();
        let p = c.params_for_range(2.0).unwrap();
        assert!((p.thermal_occupation - 1.0 / (2.4f64.exp() - 1.0)).abs() < 1e-15);
        let both = MINIMAL.replace("nonlinearity = 0.5", "nonlinearity = 0.5\nbath_beta_omega = 2.4\nthermal_occupation = 0.1");
        assert!(Config::from_toml(&both).is_err());
    }

    #[test]
    fn invalid_values_are_schema_errors() {
        assert!(Config::from_toml(&MINIMAL.replace("ratios = [10.0]", "ratios = [-1.0]")).is_err());
        assert!(Config::from_toml(&MINIMAL.replace("detuning = 2.0", "detuning = \"two\"")).is_err());
        assert!(Config::from_toml(&MINIMAL.replace("\"demo\"", "\"a/b\"")).is_err());
    }

    #[test]
    fn resonance_grid_is_inclusive() {
        let s = ResonanceMapSection {
            axis: MapAxis::Nonlinearity,
            start: 1.5,
            stop: 5.0,
            step: 0.25,
            curves: None,
            method: TauMethod::Adiabatic { intervals: 100 },
        };
        let g = s.grid().unwrap();
        assert_eq!(g.len(), 15);
        assert!((g[14] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn shipped_recipes_validate() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("recipes");
        let mut count = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let c = Config::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(Some(c.name.as_str()), path.file_stem().and_then(|s| s.to_str()));
            count += 1;
        }
        assert_eq!(count, 7);
    }
}
