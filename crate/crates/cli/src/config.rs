//! Experiment configuration: flat `key = value` text, presets and overrides.

use std::fmt;

use dephasing::params::PARAM_KEYS;
use dephasing::{BathKind, PhysicalParams, QuadratureSpec};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Gamma0Compare,
    GammaPair,
    Delta,
    DistanceSweep,
    OnedCompare,
    SpectralDensity,
    DensmatDemo,
    OracleSuite,
}

pub const KINDS: [ExperimentKind; 8] = [
    ExperimentKind::Gamma0Compare,
    ExperimentKind::GammaPair,
    ExperimentKind::Delta,
    ExperimentKind::DistanceSweep,
    ExperimentKind::OnedCompare,
    ExperimentKind::SpectralDensity,
    ExperimentKind::DensmatDemo,
    ExperimentKind::OracleSuite,
];

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::Gamma0Compare => "gamma0-compare",
            ExperimentKind::GammaPair => "gamma-pair",
            ExperimentKind::Delta => "delta",
            ExperimentKind::DistanceSweep => "distance-sweep",
            ExperimentKind::OnedCompare => "oned-compare",
            ExperimentKind::SpectralDensity => "spectral-density",
            ExperimentKind::DensmatDemo => "densmat-demo",
            ExperimentKind::OracleSuite => "oracle-suite",
        }
    }

    /// Short preset name accepted by `--preset`.
    pub fn preset_name(self) -> &'static str {
        match self {
            ExperimentKind::Gamma0Compare => "fig2",
            ExperimentKind::GammaPair => "fig3",
            ExperimentKind::Delta => "fig4",
            ExperimentKind::DistanceSweep => "fig5",
            ExperimentKind::OnedCompare => "fig6",
            ExperimentKind::SpectralDensity => "spectral",
            ExperimentKind::DensmatDemo => "densmat",
            ExperimentKind::OracleSuite => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        KINDS.into_iter().find(|k| k.label() == s || k.preset_name() == s)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Log-spaced points from 1 ns to 1 μs followed by a linear grid to `t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_log: usize,
    pub n_lin: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        dephasing::kernels::time_grid(self.t_max, self.n_log, self.n_lin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub params: PhysicalParams,
    pub grid: TimeGrid,
    /// Short-time window `[0, t_max]` with `n` intervals; `n = 0` disables it.
    pub inset_t_max: f64,
    pub inset_n: usize,
    /// Pair separations `2D`, in units of `L`.
    pub separations: Vec<f64>,
    pub baths: Vec<BathKind>,
    pub spec: QuadratureSpec,
    /// Spectral grid, angular frequency in units of `n0 g_B/ħ`.
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_omega: usize,
    pub log_x: bool,
}

impl ExperimentConfig {
    pub fn preset(kind: ExperimentKind) -> Self {
        let both = vec![BathKind::Condensate, BathKind::FreeBosons];
        let mut cfg = ExperimentConfig {
            kind,
            params: PhysicalParams::paper_sec4(),
            grid: TimeGrid { t_max: 0.5e-3, n_log: 40, n_lin: 200 },
            inset_t_max: 0.0,
            inset_n: 0,
            separations: Vec::new(),
            baths: both,
            spec: QuadratureSpec::default(),
            omega_min: 1e-4,
            omega_max: 1e2,
            n_omega: 121,
            log_x: false,
        };
        match kind {
            ExperimentKind::Gamma0Compare | ExperimentKind::Delta => {
                cfg.inset_t_max = 2e-6;
                cfg.inset_n = 100;
            }
            ExperimentKind::DistanceSweep => cfg.separations = vec![8.0, 16.0, 40.0],
            ExperimentKind::OnedCompare => {
                cfg.params = PhysicalParams::one_dimensional();
                cfg.grid.t_max = 1e-3;
            }
            ExperimentKind::DensmatDemo => {
                cfg.baths = vec![BathKind::Condensate];
                cfg.grid = TimeGrid { t_max: 0.5e-3, n_log: 10, n_lin: 50 };
            }
            ExperimentKind::SpectralDensity => cfg.log_x = true,
            ExperimentKind::GammaPair | ExperimentKind::OracleSuite => {}
        }
        cfg
    }

    /// Parse a config file. `kind` selects the preset the remaining keys
    /// are applied to; `fallback` is used when the file has no `kind`.
    pub fn from_text(text: &str, fallback: Option<ExperimentKind>) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(format!("config: {}", e.message())))?;
        let kind = match table.get("kind") {
            Some(toml::Value::String(s)) => ExperimentKind::parse(s).ok_or_else(|| CliError::Config(format!("unknown experiment kind `{s}`")))?,
            Some(_) => return Err(CliError::Config("`kind` must be a string".into())),
            None => fallback.ok_or_else(|| CliError::Config("config has no `kind` and no --preset was given".into()))?,
        };
        let mut cfg = Self::preset(kind);
        cfg.apply(table)?;
        Ok(cfg)
    }

    /// Apply `key=value` overrides, in order.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), CliError> {
        for o in overrides {
            let (key, value) = o.split_once('=').ok_or_else(|| CliError::Config(format!("override `{o}` is not of the form key=value")))?;
            let (key, value) = (key.trim(), value.trim());
            let parsed: toml::Value =
                format!("v = {value}").parse::<toml::Table>().ok().and_then(|mut t| t.remove("v")).unwrap_or_else(|| toml::Value::String(value.to_string()));
            let mut table = toml::Table::new();
            table.insert(key.to_string(), parsed);
            self.apply(table)?;
        }
        Ok(())
    }

    fn apply(&mut self, table: toml::Table) -> Result<(), CliError> {
        let (params, rest) = PhysicalParams::from_table(self.params.clone(), table)?;
        self.params = params;
        for (key, value) in rest {
            match key.as_str() {
                "kind" => {}
                "t_max" => self.grid.t_max = number(&key, &value)?,
                "n_log" => self.grid.n_log = count(&key, &value)?,
                "n_lin" => self.grid.n_lin = count(&key, &value)?,
                "inset_t_max" => self.inset_t_max = number(&key, &value)?,
                "inset_n" => self.inset_n = count(&key, &value)?,
                "rel_tol" => self.spec.rel_tol = number(&key, &value)?,
                "k_max_sigma" => self.spec.k_max_sigma = number(&key, &value)?,
                "max_subdivisions" => self.spec.max_subdivisions = count(&key, &value)?,
                "omega_min" => self.omega_min = number(&key, &value)?,
                "omega_max" => self.omega_max = number(&key, &value)?,
                "n_omega" => self.n_omega = count(&key, &value)?,
                "log_x" => {
                    self.log_x = value.as_bool().ok_or_else(|| CliError::Config("`log_x` must be true or false".into()))?;
                }
                "separations" | "distances" => self.separations = separations(&value)?,
                "baths" => self.baths = baths(&value)?,
                _ => {
                    return Err(CliError::Config(format!(
                        "unknown key `{key}` (parameters: {}; experiment keys: kind, t_max, n_log, n_lin, inset_t_max, inset_n, rel_tol, k_max_sigma, max_subdivisions, omega_min, omega_max, n_omega, log_x, separations, baths)",
                        PARAM_KEYS.join(", ")
                    )))
                }
            }
        }
        Ok(())
    }

    /// Check everything that can be checked before any integral is run.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate()?;
        self.spec.validate()?;
        if !(self.grid.t_max > 0.0 && self.grid.t_max.is_finite()) {
            return Err(CliError::Config("`t_max` must be finite and > 0".into()));
        }
        if self.grid.n_log + self.grid.n_lin == 0 {
            return Err(CliError::Config("`times`: the time grid is empty (n_log = n_lin = 0)".into()));
        }
        if self.inset_n > 0 && !(self.inset_t_max > 0.0 && self.inset_t_max.is_finite()) {
            return Err(CliError::Config("`inset_t_max` must be finite and > 0".into()));
        }
        if self.baths.is_empty() {
            return Err(CliError::Config("`baths` is empty".into()));
        }
        if self.kind == ExperimentKind::DistanceSweep && self.separations.is_empty() {
            return Err(CliError::Config("`separations` is empty".into()));
        }
        if let Some(s) = self.separations.iter().find(|&&s| !(s >= 2.0 && s.is_finite())) {
            return Err(CliError::Config(format!("separation {s}L is below the double-well size 2L")));
        }
        if self.kind == ExperimentKind::SpectralDensity && !(self.omega_min > 0.0 && self.omega_max > self.omega_min && self.n_omega >= 2) {
            return Err(CliError::Config("spectral grid needs 0 < omega_min < omega_max and n_omega >= 2".into()));
        }
        Ok(())
    }
}

fn number(key: &str, v: &toml::Value) -> Result<f64, CliError> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::Config(format!("`{key}` must be numeric"))),
    }
}

fn count(key: &str, v: &toml::Value) -> Result<usize, CliError> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(CliError::Config(format!("`{key}` must be a non-negative integer"))),
    }
}

fn separations(v: &toml::Value) -> Result<Vec<f64>, CliError> {
    match v {
        toml::Value::String(s) => parse_multiples_of_l(s),
        toml::Value::Array(a) => a.iter().map(|x| number("separations", x)).collect(),
        other => Ok(vec![number("separations", other)?]),
    }
}

fn baths(v: &toml::Value) -> Result<Vec<BathKind>, CliError> {
    let names: Vec<&str> = match v {
        toml::Value::String(s) => s.split(',').collect(),
        toml::Value::Array(a) => a.iter().filter_map(|x| x.as_str()).collect::<Vec<_>>(),
        _ => return Err(CliError::Config("`baths` must be a string such as \"condensate,free\"".into())),
    };
    if let toml::Value::Array(a) = v {
        if names.len() != a.len() {
            return Err(CliError::Config("`baths` entries must be strings".into()));
        }
    }
    names
        .into_iter()
        .map(|b| match b.trim() {
            "condensate" => Ok(BathKind::Condensate),
            "free" => Ok(BathKind::FreeBosons),
            other => Err(CliError::Config(format!("unknown bath `{other}` (expected condensate or free)"))),
        })
        .collect()
}

/// Parse `8L,16L,40L` (the `L` is optional) into multiples of `L`.
pub fn parse_multiples_of_l(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let p = p.trim();
            let num = p.strip_suffix('L').unwrap_or(p);
            num.trim().parse::<f64>().map_err(|_| CliError::Config(format!("cannot read distance `{p}` (expected e.g. 8L)")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_names() {
        for k in KINDS {
            assert_eq!(ExperimentKind::parse(k.label()), Some(k));
            assert_eq!(ExperimentKind::parse(k.preset_name()), Some(k));
            ExperimentConfig::preset(k).validate().unwrap();
        }
    }

    #[test]
    fn file_and_overrides() {
        let text = "kind = \"fig5\"\nD = 6e-7\nt_max = 1e-4\nseparations = \"8L, 40L\"\nbaths = \"free\"\n";
        let mut cfg = ExperimentConfig::from_text(text, None).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::DistanceSweep);
        assert_eq!(cfg.params.d, 6e-7);
        assert_eq!(cfg.separations, vec![8.0, 40.0]);
        assert_eq!(cfg.baths, vec![BathKind::FreeBosons]);
        cfg.apply_overrides(&["T=1e-8".into(), "n_lin = 7".into(), "baths=condensate,free".into()]).unwrap();
        assert_eq!(cfg.params.temperature, 1e-8);
        assert_eq!(cfg.grid.n_lin, 7);
        assert_eq!(cfg.baths.len(), 2);
    }

    #[test]
    fn errors_name_the_field() {
        let err = ExperimentConfig::from_text("bogus = 1", Some(ExperimentKind::Gamma0Compare)).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let mut cfg = ExperimentConfig::preset(ExperimentKind::Gamma0Compare);
        cfg.grid.n_log = 0;
        cfg.grid.n_lin = 0;
        assert!(cfg.validate().unwrap_err().to_string().contains("times"));
        assert!(ExperimentConfig::from_text("t_max = 1", None).is_err());
        assert!(parse_multiples_of_l("8L,x").is_err());
    }
}
