//! Browser bindings. Each export takes plain numbers and returns a flat
//! `Float64Array`; the plain-Rust versions in [`demo`] are what the tests use.

use wasm_bindgen::prelude::*;

pub mod demo {
    use dephasing::constants::BOHR_RADIUS;
    use dephasing::kernels::linear_grid;
    use dephasing::{Bath, BathKind, PhysicalParams, QuadratureSpec};

    /// Slider state shared by all plots.
    #[derive(Debug, Clone, Copy)]
    pub struct Knobs {
        pub a_ab_bohr: f64,
        /// Condensate density in units of 1e20 m⁻³.
        pub n0_e20: f64,
        pub temperature_nk: f64,
    }

    fn params(k: Knobs) -> PhysicalParams {
        let mut p = PhysicalParams::paper_sec4();
        p.a_ab = k.a_ab_bohr * BOHR_RADIUS;
        p.n0 = k.n0_e20 * 1e20;
        p.temperature = k.temperature_nk * 1e-9;
        p
    }

    fn bath(k: Knobs, condensate: bool) -> Result<Bath, String> {
        let kind = if condensate { BathKind::Condensate } else { BathKind::FreeBosons };
        Bath::new(&params(k), kind).map_err(|e| e.to_string())
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec { rel_tol: 1e-6, ..QuadratureSpec::default() }
    }

    /// `[t..., Γ₀ condensate..., Γ₀ free...]` on `n + 1` points up to `t_max_us`.
    pub fn gamma0(k: Knobs, t_max_us: f64, n: usize) -> Result<Vec<f64>, String> {
        let times = linear_grid(t_max_us * 1e-6, n.max(1));
        let mut out = times.clone();
        for condensate in [true, false] {
            let c = bath(k, condensate)?.gamma0_curve(&times, &spec()).map_err(|e| e.to_string())?;
            out.extend(c.values);
        }
        Ok(out)
    }

    /// `[t..., 2Γ₀..., Γ₁..., Γ₂...]` for a pair at separation `sep_l` (2D in units of L).
    pub fn pair(k: Knobs, condensate: bool, sep_l: f64, t_max_us: f64, n: usize) -> Result<Vec<f64>, String> {
        let p = params(k);
        let times = linear_grid(t_max_us * 1e-6, n.max(1));
        let [g0, g1, g2, _] = bath(k, condensate)?.collective_curves(0.5 * sep_l * p.l, &times, &spec()).map_err(|e| e.to_string())?;
        let mut out = times;
        out.extend(g0.values.iter().map(|v| 2.0 * v));
        out.extend(g1.values);
        out.extend(g2.values);
        Ok(out)
    }

    /// `[ω/μ..., J condensate..., J free...]` on a log grid over `decades`
    /// decades ending at `10 μ`. `J` is in units of its value at `ω = μ`
    /// for the condensate.
    pub fn spectral(k: Knobs, decades: f64, n: usize) -> Result<Vec<f64>, String> {
        let n = n.max(2);
        let c = bath(k, true)?;
        let f = bath(k, false)?;
        let mu = c.mu_frequency();
        let xs: Vec<f64> = (0..n).map(|i| 10f64.powf(1.0 - decades * (1.0 - i as f64 / (n - 1) as f64))).collect();
        let norm = c.spectral_density(mu).map_err(|e| e.to_string())?;
        let mut out = xs.clone();
        for b in [&c, &f] {
            for x in &xs {
                out.push(b.spectral_density(x * mu).map_err(|e| e.to_string())? / norm);
            }
        }
        Ok(out)
    }
}

fn knobs(a_ab_bohr: f64, n0_e20: f64, temperature_nk: f64) -> demo::Knobs {
    demo::Knobs { a_ab_bohr, n0_e20, temperature_nk }
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn gamma0(a_ab_bohr: f64, n0_e20: f64, temperature_nk: f64, t_max_us: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(demo::gamma0(knobs(a_ab_bohr, n0_e20, temperature_nk), t_max_us, n))
}

#[wasm_bindgen]
pub fn pair(a_ab_bohr: f64, n0_e20: f64, temperature_nk: f64, condensate: bool, sep_l: f64, t_max_us: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(demo::pair(knobs(a_ab_bohr, n0_e20, temperature_nk), condensate, sep_l, t_max_us, n))
}

#[wasm_bindgen]
pub fn spectral(a_ab_bohr: f64, n0_e20: f64, temperature_nk: f64, decades: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(demo::spectral(knobs(a_ab_bohr, n0_e20, temperature_nk), decades, n))
}
