//! One-parameter sweeps: the same experiment at each value of an axis.

use std::fs;
use std::path::Path;

use dephasing::constants::BOHR_RADIUS;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiments::{max_delta_ratio, onset_time, run, RunOutput};
use crate::output::{fmt_f64, write_run};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    /// Half the inter-site separation.
    D,
    T,
    AAb,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "D" => Ok(Axis::D),
            "T" => Ok(Axis::T),
            "a_AB" => Ok(Axis::AAb),
            other => Err(CliError::Config(format!("unknown sweep axis `{other}` (expected D, T or a_AB)"))),
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Axis::D => "D",
            Axis::T => "T",
            Axis::AAb => "a_AB",
        }
    }
}

/// Parse sweep values. `L` multiplies by the well half-separation,
/// `a0` by the Bohr radius; bare numbers are SI.
pub fn parse_values(text: &str, l: f64) -> Result<Vec<(String, f64)>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (num, unit) = if let Some(n) = s.strip_suffix("a0") {
                (n, BOHR_RADIUS)
            } else if let Some(n) = s.strip_suffix('L') {
                (n, l)
            } else {
                (s, 1.0)
            };
            let v: f64 = num.trim().parse().map_err(|_| CliError::Config(format!("cannot read sweep value `{s}`")))?;
            Ok((s.to_string(), v * unit))
        })
        .collect()
}

/// `(bath, onset time or None, max |δ|/2Γ₀, Γ₀ at the last time)`.
pub type BathSummary = (String, Option<f64>, Option<f64>, Option<f64>);

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub label: String,
    pub value: f64,
    pub directory: String,
    pub baths: Vec<BathSummary>,
}

fn summarise(out: &RunOutput) -> Vec<BathSummary> {
    let mut rows = Vec::new();
    let mut baths: Vec<String> = out.curves.iter().filter_map(|c| c.bath.map(|b| b.label().to_string())).collect();
    baths.dedup();
    for bath in baths {
        let find =
            |q: &str| out.curves.iter().find(|c| c.bath.map(|b| b.label()) == Some(bath.as_str()) && c.quantity.starts_with(q) && !c.name.ends_with("_inset"));
        let gamma0: Option<Vec<f64>> =
            find("two_gamma0").map(|c| c.value.iter().map(|v| 0.5 * v).collect()).or_else(|| find("gamma0").map(|c| c.value.clone()));
        let delta = find("delta");
        let (onset, ratio) = match (&gamma0, delta) {
            (Some(g), Some(d)) => (onset_time(&d.x, g, &d.value), Some(max_delta_ratio(g, &d.value))),
            _ => (None, None),
        };
        rows.push((bath, onset, ratio, gamma0.and_then(|g| g.last().copied())));
    }
    rows
}

/// Run `base` once per value, each in its own subdirectory, and write a
/// summary table.
pub fn sweep(base: &ExperimentConfig, axis: Axis, values: &[(String, f64)], out_dir: &Path) -> Result<Vec<SweepPoint>, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep has no values".into()));
    }
    let mut points = Vec::new();
    for (i, (label, v)) in values.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.params.set(axis.key(), *v)?;
        let dir_name = format!("{:02}_{}={}", i, axis.key(), label);
        let out = run(&cfg)?;
        write_run(&out_dir.join(&dir_name), &cfg, &out)?;
        points.push(SweepPoint { label: label.clone(), value: *v, directory: dir_name, baths: summarise(&out) });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([axis.key(), "value_si", "bath", "onset_time_s", "max_delta_over_two_gamma0", "gamma0_at_t_max"]).expect("in-memory write");
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_else(|| "inf".into());
    for p in &points {
        for (bath, onset, ratio, g0) in &p.baths {
            w.write_record([
                p.label.clone(),
                fmt_f64(p.value),
                bath.clone(),
                opt(*onset),
                ratio.map(fmt_f64).unwrap_or_default(),
                g0.map(fmt_f64).unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
    }
    let path = out_dir.join("summary.csv");
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;
    fs::write(&path, w.into_inner().expect("in-memory flush")).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let json_path = out_dir.join("summary.json");
    let doc = serde_json::json!({ "axis": axis.key(), "kind": base.kind.label(), "points": points });
    fs::write(&json_path, serde_json::to_string_pretty(&doc).expect("summary serialises") + "\n").map_err(|source| CliError::Io { path: json_path, source })?;
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_units() {
        let v = parse_values("2L, 4L,1e-7, 27.5a0", 150e-9).unwrap();
        assert_eq!(v[0], ("2L".to_string(), 300e-9));
        assert_eq!(v[2].1, 1e-7);
        assert!((v[3].1 - 27.5 * BOHR_RADIUS).abs() < 1e-25);
        assert!(parse_values("xL", 1.0).is_err());
        assert!(Axis::parse("n0").is_err());
    }
}
