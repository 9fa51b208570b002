//! Brute-force checks bundled as an experiment.

use std::f64::consts::PI;

use dephasing::coupling::PseudospinConfig;
use dephasing::oracle::{glauber_residual, DiscreteSpinBoson};
use dephasing::{Bath, BathKind, Complex64, QuadratureSpec, ReducedDensityMatrix};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::experiments::{CurveRecord, RunOutput};
use crate::svg::{Figure, Panel, Series};
use crate::CliError;

/// Radial shells for the grid-convergence ladder at time `t`: enough to
/// sample the `sin²(Et/2)` oscillation at the cutoff wavenumber.
pub fn base_shells(bath: &Bath, t: f64) -> usize {
    let k_max = 8.0 / bath.units.sigma;
    let phase = bath.dispersion.energy(k_max) * bath.to_reduced_time(t);
    let n = (phase / 4.0).ceil() as usize;
    n.max(400).div_ceil(100) * 100
}

/// Relative errors of the grid sum against the continuum at three
/// refinement levels, halving the radial spacing each time.
pub fn grid_ladder(bath: &Bath, t: f64) -> Result<Vec<(usize, f64)>, dephasing::Error> {
    let geometry = bath.geometry(1);
    let n = PseudospinConfig::from_index(0, 1);
    let m = PseudospinConfig::from_index(1, 1);
    let spec = QuadratureSpec { rel_tol: 1e-12, ..QuadratureSpec::default() };
    let exact = bath.gamma_general(&geometry, &n, &m, t, &spec)?.value;
    let base = base_shells(bath, t);
    [base, 2 * base, 4 * base]
        .into_iter()
        .map(|nr| {
            let model = DiscreteSpinBoson::from_grid(bath, &geometry, nr, 4)?;
            let g = model.discrete_gamma(&n, &m, t)?;
            Ok((model.n_modes(), (g - exact) / exact))
        })
        .collect()
}

/// Three physical modes for two sites, scaled so that the largest
/// displacement stays near `target` (keeps a cutoff of 10 well converged).
pub fn small_model(bath: &Bath, cutoff: usize, target: f64) -> Result<DiscreteSpinBoson, dephasing::Error> {
    let geometry = bath.geometry(2);
    let s = bath.units.sigma;
    let cells = [(1.0 / s, 1.0, 1.0), (1.6 / s, 0.5, 1.0), (2.3 / s, -0.3, 1.0)];
    let mut model = DiscreteSpinBoson::from_cells(bath, &geometry, &cells, cutoff)?;
    let mut worst: f64 = 0.0;
    for (j, mode) in model.modes.iter().enumerate() {
        let sum: f64 = model.couplings[j * 4..j * 4 + 4].iter().map(|c| c.norm()).sum();
        worst = worst.max(2.0 * sum / mode.energy);
    }
    let scale = target / worst;
    model.couplings.iter_mut().for_each(|c| *c *= scale);
    Ok(model)
}

/// Largest deviations `(magnitude, phase)` between exact propagation and the
/// closed forms over all coherences of `|++⟩`, at `t` reduced time units.
pub fn dynamics_check(model: &DiscreteSpinBoson, t_reduced: f64) -> Result<(f64, f64, f64), dephasing::Error> {
    let d = 1usize << model.n_spins;
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let rho0 = ReducedDensityMatrix::from_pure(model.n_spins, &vec![amp; d])?;
    let t = t_reduced * model.time_unit;
    let out = model.exact_propagate(&rho0, t)?;
    let (mut mag, mut phase) = (0.0f64, 0.0f64);
    for a in 0..d {
        for b in 0..d {
            if a == b {
                continue;
            }
            let n = PseudospinConfig::from_index(a, model.n_spins);
            let m = PseudospinConfig::from_index(b, model.n_spins);
            let r = out.rho.get(a, b) / rho0.get(a, b);
            let g = model.discrete_gamma(&n, &m, t)?;
            let p = model.discrete_phases(&n, &m, t)?.total();
            mag = mag.max((r.norm() - (-g).exp()).abs());
            phase = phase.max(((r.arg() - p + PI).rem_euclid(2.0 * PI) - PI).abs());
        }
    }
    Ok((mag, phase, out.leakage))
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let num = |curve: &'static str| move |source| CliError::Numerical { curve: curve.into(), source };
    let b = Bath::new(&cfg.params, BathKind::Condensate)?;
    let mut curves = Vec::new();
    let mut series = Vec::new();
    let mut ladders = Vec::new();
    for t in [10e-6, 50e-6, 200e-6] {
        let ladder = grid_ladder(&b, t).map_err(num("grid_convergence"))?;
        let orders: Vec<f64> = ladder.windows(2).map(|w| (w[0].1 / w[1].1).abs().log2()).collect();
        ladders
            .push(json!({ "t_s": t, "levels": ladder.iter().map(|(n, e)| json!({"modes": n, "rel_error": e})).collect::<Vec<_>>(), "observed_order": orders }));
        let rec = CurveRecord {
            name: format!("grid_error_t{}us", (t * 1e6).round() as i64),
            quantity: "relative_error".into(),
            bath: Some(BathKind::Condensate),
            dim: b.dim.as_usize(),
            separation_l: None,
            rel_tol: 1e-12,
            x_label: "n_modes".into(),
            x: ladder.iter().map(|l| l.0 as f64).collect(),
            value: ladder.iter().map(|l| l.1).collect(),
            abs_error: vec![0.0; ladder.len()],
        };
        series.push(Series { label: format!("t = {} μs", (t * 1e6).round()), xs: rec.x.clone(), ys: rec.value.iter().map(|v| v.abs()).collect() });
        curves.push(rec);
    }

    let model = small_model(&b, 10, 0.3).map_err(num("exact_propagate"))?;
    let period = 2.0 * PI / model.modes[0].energy;
    let mut dynamics = Vec::new();
    for f in [0.37, 1.0, 2.6] {
        let (mag, phase, leak) = dynamics_check(&model, f * period).map_err(num("exact_propagate"))?;
        dynamics.push(json!({ "t_over_period": f, "max_magnitude_error": mag, "max_phase_error_rad": phase, "fock_leakage": leak }));
    }

    let mut fmodel = small_model(&b, 8, 0.02).map_err(num("factorization"))?;
    fmodel.modes.truncate(2);
    fmodel.couplings.truncate(2 * 4);
    let fperiod = 2.0 * PI / fmodel.modes[0].energy;
    let factorization = fmodel.factorization_residual(fperiod * fmodel.time_unit).map_err(num("factorization"))?;

    let glauber: Vec<_> = (2..=14)
        .map(|cut| {
            let half = glauber_residual(&[Complex64::new(0.5, 0.0)], cut)?;
            let one = glauber_residual(&[Complex64::new(1.0, 0.0)], cut)?;
            Ok(json!({ "cutoff": cut, "g_0.5": half, "g_1": one }))
        })
        .collect::<Result<_, dephasing::Error>>()
        .map_err(num("glauber"))?;

    Ok(RunOutput {
        curves,
        extra: json!({
            "grid_convergence": ladders,
            "dynamics_2spins_3modes_cutoff10": dynamics,
            "factorization_residual_2spins_2modes_cutoff8": factorization,
            "glauber_residual": glauber,
        }),
        figure: Figure {
            title: "Grid sum against the continuum".into(),
            panels: vec![Panel {
                title: "relative error of Γ₀".into(), x_label: "modes".into(), y_label: "|error|".into(), log_x: true, log_y: true, series
            }],
        },
    })
}
