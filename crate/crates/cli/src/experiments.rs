//! Experiment runners. Each returns curves, extra results and a figure;
//! nothing here touches the filesystem.

use std::collections::BTreeMap;

use dephasing::coupling::PseudospinConfig;
use dephasing::densmat::{evolve, ContinuumModel, DephasingSource, ReducedDensityMatrix};
use dephasing::kernels::{linear_grid, log_log_slope};
use dephasing::{Bath, BathKind, Complex64, DecoherenceCurve, Dimension, PhysicalParams};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::svg::{Figure, Panel, Series};
use crate::{oracle_suite, CliError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRecord {
    pub name: String,
    pub quantity: String,
    pub bath: Option<BathKind>,
    pub dim: usize,
    /// Pair separation `2D` in units of `L`, where it applies.
    pub separation_l: Option<f64>,
    pub rel_tol: f64,
    pub x_label: String,
    pub x: Vec<f64>,
    pub value: Vec<f64>,
    pub abs_error: Vec<f64>,
}

impl CurveRecord {
    fn from_curve(c: &DecoherenceCurve, separation_l: Option<f64>) -> Self {
        CurveRecord {
            name: c.name.clone(),
            quantity: c.kind.label(c.dim),
            bath: Some(c.bath),
            dim: c.dim.as_usize(),
            separation_l,
            rel_tol: c.rel_tol,
            x_label: "t_seconds".into(),
            x: c.times.clone(),
            value: c.values.clone(),
            abs_error: c.abs_errors.clone(),
        }
    }

    fn scaled(mut self, factor: f64, name: String, quantity: &str) -> Self {
        self.name = name;
        self.quantity = quantity.into();
        self.value.iter_mut().for_each(|v| *v *= factor);
        self.abs_error.iter_mut().for_each(|v| *v *= factor.abs());
        self
    }

    fn renamed(mut self, name: String) -> Self {
        self.name = name;
        self
    }

    fn series(&self, label: &str) -> Series {
        Series { label: label.into(), xs: self.x.clone(), ys: self.value.clone() }
    }

    pub fn max_abs_error(&self) -> f64 {
        self.abs_error.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub curves: Vec<CurveRecord>,
    pub extra: Value,
    pub figure: Figure,
}

fn numerical(curve: &str) -> impl FnOnce(dephasing::Error) -> CliError + '_ {
    move |source| CliError::Numerical { curve: curve.to_string(), source }
}

fn bath(p: &PhysicalParams, kind: BathKind) -> Result<Bath, CliError> {
    Ok(Bath::new(p, kind)?)
}

fn bath_title(kind: BathKind) -> &'static str {
    match kind {
        BathKind::Condensate => "condensate",
        BathKind::FreeBosons => "free bosons",
    }
}

fn panel(title: impl Into<String>, y_label: &str, log_x: bool, series: Vec<Series>) -> Panel {
    Panel { title: title.into(), x_label: "t (s)".into(), y_label: y_label.into(), log_x, log_y: false, series }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::Gamma0Compare => gamma0_compare(cfg),
        ExperimentKind::GammaPair | ExperimentKind::OnedCompare => gamma_pair(cfg),
        ExperimentKind::Delta => delta(cfg),
        ExperimentKind::DistanceSweep => distance_sweep(cfg),
        ExperimentKind::SpectralDensity => spectral(cfg),
        ExperimentKind::DensmatDemo => densmat_demo(cfg),
        ExperimentKind::OracleSuite => oracle_suite::run(cfg),
    }
}

fn gamma0_compare(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let times = cfg.grid.times();
    let mut curves = Vec::new();
    let (mut main, mut inset) = (Vec::new(), Vec::new());
    for &kind in &cfg.baths {
        let b = bath(&cfg.params, kind)?;
        let name = format!("gamma0_{}", kind.label());
        let c = CurveRecord::from_curve(&b.gamma0_curve(&times, &cfg.spec).map_err(numerical(&name))?, None);
        main.push(c.series(bath_title(kind)));
        curves.push(c);
        if cfg.inset_n > 0 {
            let name = format!("{name}_inset");
            let short = linear_grid(cfg.inset_t_max, cfg.inset_n);
            let c = CurveRecord::from_curve(&b.gamma0_curve(&short, &cfg.spec).map_err(numerical(&name))?, None).renamed(name);
            inset.push(c.series(bath_title(kind)));
            curves.push(c);
        }
    }
    let mut panels = vec![panel("Γ₀(t)", "Γ₀", cfg.log_x, main)];
    if !inset.is_empty() {
        panels.push(panel("Γ₀(t), short times", "Γ₀", false, inset));
    }
    Ok(RunOutput { curves, extra: json!({}), figure: Figure { title: "Single-impurity decoherence exponent".into(), panels } })
}

/// Γ₁, Γ₂, 2Γ₀ and δ for one bath at half-separation `d_half`.
fn pair_curves(b: &Bath, d_half: f64, sep: Option<f64>, cfg: &ExperimentConfig, times: &[f64], suffix: &str) -> Result<[CurveRecord; 4], CliError> {
    let label = format!("pair_{}{suffix}", b.kind.label());
    let [g0, g1, g2, dl] = b.collective_curves(d_half, times, &cfg.spec).map_err(numerical(&label))?;
    let zero_label = g0.kind.label(b.dim);
    let r0 = CurveRecord::from_curve(&g0, sep);
    let two = r0.clone().scaled(2.0, format!("two_{}_{}", zero_label, b.kind.label()), &format!("two_{zero_label}"));
    let mut r1 = CurveRecord::from_curve(&g1, sep);
    let mut r2 = CurveRecord::from_curve(&g2, sep);
    let mut rd = CurveRecord::from_curve(&dl, sep);
    for r in [&mut r1, &mut r2, &mut rd] {
        r.name.push_str(suffix);
    }
    Ok([r1, r2, two, rd])
}

fn gamma_pair(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let times = cfg.grid.times();
    let mut curves = Vec::new();
    let mut panels = Vec::new();
    let one_d = cfg.params.dim == Dimension::One;
    let (g1, g2, g0) = if one_d { ("γ₁", "γ₂", "2γ₀") } else { ("Γ₁", "Γ₂", "2Γ₀") };
    for &kind in &cfg.baths {
        let b = bath(&cfg.params, kind)?;
        let sep = 2.0 * cfg.params.d / cfg.params.l;
        let [r1, r2, two, rd] = pair_curves(&b, cfg.params.d, Some(sep), cfg, &times, "")?;
        panels.push(panel(format!("{}, 2D = {}L", bath_title(kind), fmt_num(sep)), "exponent", cfg.log_x, vec![r1.series(g1), r2.series(g2), two.series(g0)]));
        curves.extend([r1, r2, two, rd]);
    }
    let dim = if one_d { "one" } else { "three" };
    Ok(RunOutput { curves, extra: json!({}), figure: Figure { title: format!("Two impurities in {dim} dimensions"), panels } })
}

fn delta(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let times = cfg.grid.times();
    let mut curves = Vec::new();
    let (mut main, mut inset) = (Vec::new(), Vec::new());
    for &kind in &cfg.baths {
        let b = bath(&cfg.params, kind)?;
        let sep = 2.0 * cfg.params.d / cfg.params.l;
        let [_, _, _, rd] = pair_curves(&b, cfg.params.d, Some(sep), cfg, &times, "")?;
        main.push(rd.series(bath_title(kind)));
        curves.push(rd);
        if cfg.inset_n > 0 {
            let short = linear_grid(cfg.inset_t_max, cfg.inset_n);
            let [_, _, _, rd] = pair_curves(&b, cfg.params.d, Some(sep), cfg, &short, "_inset")?;
            inset.push(rd.series(bath_title(kind)));
            curves.push(rd);
        }
    }
    let mut panels = vec![panel("δ(t)", "δ", cfg.log_x, main)];
    if !inset.is_empty() {
        panels.push(panel("δ(t), short times", "δ", false, inset));
    }
    Ok(RunOutput { curves, extra: json!({}), figure: Figure { title: "Collective deviation δ".into(), panels } })
}

/// Earliest time at which `|δ| > 2%` of `2Γ₀`, or `None` if it never is.
pub fn onset_time(times: &[f64], gamma0: &[f64], delta: &[f64]) -> Option<f64> {
    times.iter().zip(gamma0.iter().zip(delta)).find(|(_, (g, d))| **g > 0.0 && d.abs() > 0.02 * 2.0 * **g).map(|(t, _)| *t)
}

/// `max |δ|/(2Γ₀)` over points with `Γ₀ > 0`.
pub fn max_delta_ratio(gamma0: &[f64], delta: &[f64]) -> f64 {
    gamma0.iter().zip(delta).filter(|(g, _)| **g > 0.0).map(|(g, d)| d.abs() / (2.0 * g)).fold(0.0, f64::max)
}

fn distance_sweep(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let times = cfg.grid.times();
    let mut curves = Vec::new();
    let mut panels_g1 = Vec::new();
    let mut panels_g2 = Vec::new();
    let mut summary = BTreeMap::new();
    for &kind in &cfg.baths {
        let b = bath(&cfg.params, kind)?;
        let (mut s1, mut s2) = (Vec::new(), Vec::new());
        let mut two_gamma0 = None;
        let mut rows = Vec::new();
        for &sep in &cfg.separations {
            let suffix = format!("_sep{}L", fmt_num(sep));
            let d_half = 0.5 * sep * cfg.params.l;
            let [r1, r2, two, rd] = pair_curves(&b, d_half, Some(sep), cfg, &times, &suffix)?;
            s1.push(r1.series(&format!("2D = {}L", fmt_num(sep))));
            s2.push(r2.series(&format!("2D = {}L", fmt_num(sep))));
            let g0: Vec<f64> = two.value.iter().map(|v| 0.5 * v).collect();
            rows.push(json!({
                "separation_l": sep,
                "onset_time_s": onset_time(&times, &g0, &rd.value),
                "max_delta_over_two_gamma0": max_delta_ratio(&g0, &rd.value),
            }));
            if two_gamma0.is_none() {
                two_gamma0 = Some(two.clone().renamed(format!("two_gamma0_{}", kind.label())));
            }
            curves.extend([r1, r2, rd]);
        }
        if let Some(two) = two_gamma0 {
            s1.push(two.series("2Γ₀"));
            s2.push(two.series("2Γ₀"));
            curves.push(two);
        }
        panels_g1.push(panel(format!("Γ₁, {}", bath_title(kind)), "Γ₁", cfg.log_x, s1));
        panels_g2.push(panel(format!("Γ₂, {}", bath_title(kind)), "Γ₂", cfg.log_x, s2));
        summary.insert(kind.label().to_string(), Value::Array(rows));
    }
    panels_g1.extend(panels_g2);
    Ok(RunOutput { curves, extra: json!({ "onset": summary }), figure: Figure { title: "Dependence on the impurity separation".into(), panels: panels_g1 } })
}

fn spectral(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let mut curves = Vec::new();
    let mut series = Vec::new();
    let mut slopes = BTreeMap::new();
    let n = cfg.n_omega;
    let ratio = cfg.omega_max / cfg.omega_min;
    let grid: Vec<f64> = (0..n).map(|i| cfg.omega_min * ratio.powf(i as f64 / (n - 1) as f64)).collect();
    for &kind in &cfg.baths {
        let b = bath(&cfg.params, kind)?;
        let mu_omega = b.units.mu / b.units.time_unit;
        let omegas: Vec<f64> = grid.iter().map(|w| w * mu_omega).collect();
        let name = format!("spectral_density_{}", kind.label());
        let values = omegas.iter().map(|&w| b.spectral_density(w)).collect::<Result<Vec<f64>, _>>().map_err(numerical(&name))?;
        // fit window: two decades below n0 g_B
        let (fx, fy): (Vec<f64>, Vec<f64>) =
            omegas.iter().zip(&values).filter(|(w, _)| **w >= 1e-4 * mu_omega && **w <= 1e-2 * mu_omega).map(|(w, j)| (*w, *j)).unzip();
        if fx.len() >= 2 {
            slopes.insert(kind.label().to_string(), log_log_slope(&fx, &fy));
        }
        let rec = CurveRecord {
            name,
            quantity: "spectral_density".into(),
            bath: Some(kind),
            dim: cfg.params.dim.as_usize(),
            separation_l: None,
            rel_tol: 0.0,
            x_label: "omega_per_second".into(),
            x: omegas,
            abs_error: vec![0.0; values.len()],
            value: values,
        };
        series.push(rec.series(bath_title(kind)));
        curves.push(rec);
    }
    Ok(RunOutput {
        curves,
        extra: json!({ "low_frequency_slope": slopes, "fit_window_in_mu": [1e-4, 1e-2] }),
        figure: Figure {
            title: format!("Spectral density, d = {}", cfg.params.dim.as_usize()),
            panels: vec![Panel { title: "J(ω)".into(), x_label: "ω (1/s)".into(), y_label: "J (1/s)".into(), log_x: true, log_y: true, series }],
        },
    })
}

fn densmat_demo(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let times = cfg.grid.times();
    let kind = cfg.baths[0];
    let b = bath(&cfg.params, kind)?;
    let geometry = b.geometry(2);
    let plus = Complex64::new(0.5, 0.0);
    let rho0 = ReducedDensityMatrix::from_pure(2, &[plus; 4])?;
    let pairs = [("00_11", 0usize, 3usize, "|ρ₀₀,₁₁| (Γ₁)"), ("01_10", 1, 2, "|ρ₀₁,₁₀| (Γ₂)"), ("00_10", 0, 1, "|ρ₀₀,₁₀| (Γ₀)")];
    let mut curves = Vec::new();
    let mut series = Vec::new();
    for (label, i, j, legend) in pairs {
        let name = format!("coherence_{label}_{}", kind.label());
        let n = PseudospinConfig::from_index(i, 2);
        let m = PseudospinConfig::from_index(j, 2);
        let c = b.general_curve(&geometry, &n, &m, &times, &cfg.spec).map_err(numerical(&name))?;
        let r0 = rho0.get(i, j).norm();
        let value: Vec<f64> = c.values.iter().map(|g| r0 * (-g).exp()).collect();
        let abs_error = value.iter().zip(&c.abs_errors).map(|(v, e)| v * e).collect();
        let rec = CurveRecord {
            name,
            quantity: "coherence_magnitude".into(),
            bath: Some(kind),
            dim: cfg.params.dim.as_usize(),
            separation_l: Some(2.0 * cfg.params.d / cfg.params.l),
            rel_tol: cfg.spec.rel_tol,
            x_label: "t_seconds".into(),
            x: times.clone(),
            value,
            abs_error,
        };
        series.push(rec.series(legend));
        curves.push(rec);
    }
    let model = ContinuumModel { bath: b, geometry, spec: cfg.spec };
    let t_end = *times.last().expect("validated grid is non-empty");
    let rho = evolve(&rho0, t_end, &model).map_err(numerical("density_matrix"))?;
    let mut phases = BTreeMap::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let n = PseudospinConfig::from_index(i, 2);
            let m = PseudospinConfig::from_index(j, 2);
            let p = model.phases(&n, &m, t_end).map_err(numerical("phases"))?;
            phases.insert(format!("{i}_{j}"), json!({ "theta": p.theta, "xi": p.xi, "delta": p.delta }));
        }
    }
    let rho_json: Value = serde_json::from_str(&rho.to_json()).expect("density matrix JSON is valid");
    Ok(RunOutput {
        curves,
        extra: json!({
            "initial_state": "|++>",
            "t_final_s": t_end,
            "rho_final": rho_json,
            "phases_final": phases,
            "min_eigenvalue_final": rho.min_eigenvalue(),
        }),
        figure: Figure { title: "Two-impurity coherences from |++⟩".into(), panels: vec![panel(bath_title(kind), "|ρ|", cfg.log_x, series)] },
    })
}

/// Compact number for names: `8`, `2.5`.
pub fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}
