//! Continuum decoherence exponents, phase integrals and spectral densities.
//!
//! All integrals run over |k| in reduced units (k in units of k_L, energies
//! in E_R, ħ = 1). For N pseudospins the exponent of the `{n},{m}` element is
//!
//! ```text
//! Γ(t) = g²n0 ∫ d^dk/(2π)^d  uv2(k) e^{-k²σ²/2} F(k) · 2 sin²(E t/2)/E² · coth(βE/2)
//! ```
//!
//! where `F` is the direction average of `|Σ_i (m_i - n_i)(e^{ik·x_iR} - e^{ik·x_iL})|²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bogoliubov::Dispersion;
use crate::coupling::{AngularKernel, Charges, Geometry, PseudospinConfig};
use crate::error::{Error, Result};
use crate::params::{derive_scales, to_reduced_units, Dimension, PhysicalParams, ReducedParams};
use crate::quadrature::{integrate_with_floor, oscillation_breaks, Integral, QuadratureSpec};

/// Absolute error floor for phase integrals, relative to the magnitude bound.
const PHASE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BathKind {
    /// Weakly interacting condensate with Bogoliubov excitations.
    Condensate,
    /// Ideal Bose gas: `g_B = 0`, `E_k = ε_k`.
    FreeBosons,
}

impl BathKind {
    pub fn label(self) -> &'static str {
        match self {
            BathKind::Condensate => "condensate",
            BathKind::FreeBosons => "free",
        }
    }
}

/// A value with its absolute quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, abs_error: 0.0 };
}

/// Two-site exponents sharing one set of quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Collective {
    pub gamma0: Estimate,
    /// Same-side coherences, `|00⟩⟨11|`.
    pub gamma1: Estimate,
    /// Opposite-side coherences, `|01⟩⟨10|`.
    pub gamma2: Estimate,
    /// `Γ₁ = 2Γ₀ - δ`, `Γ₂ = 2Γ₀ + δ`.
    pub delta: Estimate,
}

impl Collective {
    pub fn get(&self, kind: CurveKind) -> Option<Estimate> {
        match kind {
            CurveKind::Gamma0 => Some(self.gamma0),
            CurveKind::Gamma1 => Some(self.gamma1),
            CurveKind::Gamma2 => Some(self.gamma2),
            CurveKind::Delta => Some(self.delta),
            CurveKind::General => None,
        }
    }
}

/// Bath and impurity parameters in reduced units, ready for integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bath {
    pub kind: BathKind,
    pub dim: Dimension,
    pub units: ReducedParams,
    pub dispersion: Dispersion,
    /// `g_AB² n0` in reduced units.
    pub strength: f64,
    /// Inverse temperature in units of `1/E_R`.
    pub beta: Option<f64>,
}

#[derive(Clone, Copy)]
enum Weight {
    /// `2 sin²(Et/2)/E² · coth(βE/2)`.
    Decay,
    /// `(Et - sin Et)/E²`.
    Phase,
}

impl Bath {
    pub fn new(p: &PhysicalParams, kind: BathKind) -> Result<Self> {
        let s = derive_scales(p)?;
        let units = to_reduced_units(p, &s);
        let mu = match kind {
            BathKind::Condensate => units.mu,
            BathKind::FreeBosons => 0.0,
        };
        Ok(Bath {
            kind,
            dim: p.dim,
            dispersion: Dispersion { kinetic: units.bath_kinetic_coeff(), mu, hbar: 1.0 },
            strength: units.coupling_strength(),
            beta: units.beta,
            units,
        })
    }

    /// Default single-row geometry from the parameters, in metres.
    pub fn geometry(&self, n_sites: usize) -> Geometry {
        let si = self.units.length_unit;
        Geometry::chain(n_sites, self.units.l * si, self.units.d * si, self.units.sigma * si)
    }

    pub fn to_reduced_time(&self, t: f64) -> f64 {
        t / self.units.time_unit
    }

    pub(crate) fn kernel(&self) -> AngularKernel {
        AngularKernel::for_dim(self.dim)
    }

    /// Radial measure of `d^dk/(2π)^d` after the angular integral, with the
    /// 1D line folded onto k ≥ 0.
    #[inline]
    pub(crate) fn measure(&self, k: f64) -> f64 {
        match self.dim {
            Dimension::Three => k * k / (2.0 * PI * PI),
            Dimension::One => 1.0 / PI,
        }
    }

    /// `coth(βE/2)`, exactly 1 at zero temperature.
    #[inline]
    pub fn coth(&self, e: f64) -> f64 {
        match self.beta {
            None => 1.0,
            Some(b) => 1.0 + 2.0 / (b * e).exp_m1(),
        }
    }

    pub(crate) fn reduced_geometry(&self, g: &Geometry) -> Geometry {
        g.scaled(1.0 / self.units.length_unit)
    }

    fn integrate_forms<const N: usize, F>(&self, t: f64, sigma: f64, spatial: f64, weight: Weight, spec: &QuadratureSpec, forms: F) -> Result<Integral<N>>
    where
        F: Fn(f64) -> [f64; N],
    {
        spec.validate()?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::param("t", "time must be finite and >= 0"));
        }
        let zero = Integral { value: [0.0; N], abs_error: [0.0; N], l1: [0.0; N], panels: 0 };
        if t == 0.0 {
            return Ok(zero);
        }
        let disp = self.dispersion;
        let k_max = spec.k_max(sigma);
        let total_phase = disp.energy(k_max) * t;
        let breaks = oscillation_breaks(k_max, |ph| disp.k_from_energy(ph / t), total_phase, spec.max_phase, spatial);
        let strength = self.strength;
        let integrand = |k: f64| {
            let e = disp.energy(k);
            let uv2 = disp.uv_suppression(k);
            let common = self.measure(k) * strength * uv2 * (-k * k * sigma * sigma / 2.0).exp();
            let w = match weight {
                Weight::Decay => {
                    let x = 0.5 * e * t;
                    let sc = if x == 0.0 { 1.0 } else { x.sin() / x };
                    0.5 * t * t * sc * sc * self.coth(e)
                }
                Weight::Phase => phase_weight(e, t),
            };
            let f = forms(k);
            std::array::from_fn(|i| common * w * f[i])
        };
        let floor = match weight {
            Weight::Decay => 0.0,
            Weight::Phase => PHASE_FLOOR,
        };
        integrate_with_floor(integrand, &breaks, spec.rel_tol, floor, spec.max_subdivisions)
    }

    /// Decay exponent of the `{n},{m}` element for arbitrary configurations.
    pub fn gamma_general(&self, geometry: &Geometry, n: &PseudospinConfig, m: &PseudospinConfig, t: f64, spec: &QuadratureSpec) -> Result<Estimate> {
        let g = self.reduced_geometry(geometry);
        let c = Charges::difference(&g, n, m)?;
        if c.is_empty() {
            return Ok(Estimate::ZERO);
        }
        let kernel = self.kernel();
        let r = self.integrate_forms(self.to_reduced_time(t), g.sigma, c.max_separation(&c), Weight::Decay, spec, |k| [c.averaged_overlap(&c, k, kernel)])?;
        Ok(Estimate { value: r.value[0], abs_error: r.abs_error[0] })
    }

    /// Single-impurity exponent Γ₀ in three dimensions, using the
    /// parameters' L and σ.
    pub fn gamma0_3d(&self, t: f64, spec: &QuadratureSpec) -> Result<Estimate> {
        if self.dim != Dimension::Three {
            return Err(Error::param("d", "gamma0_3d needs a three-dimensional bath"));
        }
        let l = self.units.l;
        let r = self
            .integrate_forms(self.to_reduced_time(t), self.units.sigma, 2.0 * l, Weight::Decay, spec, |k| [2.0 * AngularKernel::Sinc.one_minus(2.0 * k * l)])?;
        Ok(Estimate { value: r.value[0], abs_error: r.abs_error[0] })
    }

    /// Γ₀, Γ₁, Γ₂ and δ (or their 1D counterparts γ) for two sites at
    /// half-separation `d_half` metres, each from its own integrand.
    pub fn collective(&self, d_half: f64, t: f64, spec: &QuadratureSpec) -> Result<Collective> {
        let l = self.units.l;
        let d = d_half / self.units.length_unit;
        if !(d >= l) {
            return Err(Error::param("D", "must be >= L"));
        }
        let kernel = self.kernel();
        let r = self.integrate_forms(self.to_reduced_time(t), self.units.sigma, 2.0 * (l + d), Weight::Decay, spec, |k| {
            let a = kernel.one_minus(2.0 * k * l);
            let b = kernel.one_minus(2.0 * k * d);
            let c = kernel.one_minus(2.0 * k * (d + l));
            let e = kernel.one_minus(2.0 * k * (d - l));
            [2.0 * a, 2.0 * (2.0 * a - 2.0 * b + c + e), 2.0 * (2.0 * a + 2.0 * b - c - e), 2.0 * (2.0 * b - c - e)]
        })?;
        let est = |i: usize| Estimate { value: r.value[i], abs_error: r.abs_error[i] };
        Ok(Collective { gamma0: est(0), gamma1: est(1), gamma2: est(2), delta: est(3) })
    }

    /// Three-dimensional Γ₁, Γ₂, δ at half-separation `d_half`.
    pub fn gamma12_3d(&self, d_half: f64, t: f64, spec: &QuadratureSpec) -> Result<Collective> {
        if self.dim != Dimension::Three {
            return Err(Error::param("d", "gamma12_3d needs a three-dimensional bath"));
        }
        self.collective(d_half, t, spec)
    }

    /// One-dimensional γ₀, γ₁ or γ₂ at half-separation `d_half`.
    pub fn gamma_1d(&self, kind: CurveKind, d_half: f64, t: f64, spec: &QuadratureSpec) -> Result<Estimate> {
        if self.dim != Dimension::One {
            return Err(Error::param("d", "gamma_1d needs a one-dimensional bath"));
        }
        if kind == CurveKind::Gamma0 {
            let l = self.units.l;
            let r = self.integrate_forms(self.to_reduced_time(t), self.units.sigma, 2.0 * l, Weight::Decay, spec, |k| {
                [2.0 * AngularKernel::Cos.one_minus(2.0 * k * l)]
            })?;
            return Ok(Estimate { value: r.value[0], abs_error: r.abs_error[0] });
        }
        self.collective(d_half, t, spec)?.get(kind).ok_or_else(|| Error::param("kind", "gamma_1d takes gamma0, gamma1, gamma2 or delta"))
    }

    /// Phases `(Θ, Ξ)` of the `{n},{m}` element. Δ vanishes in the
    /// continuum because its integrand is odd in k.
    pub fn phase_integrals(
        &self,
        geometry: &Geometry,
        n: &PseudospinConfig,
        m: &PseudospinConfig,
        t: f64,
        spec: &QuadratureSpec,
    ) -> Result<(Estimate, Estimate)> {
        let g = self.reduced_geometry(geometry);
        crate::coupling::check_pair(&g, n, m)?;
        if n == m {
            return Ok((Estimate::ZERO, Estimate::ZERO));
        }
        let sn = Charges::spin_weighted(&g, n);
        let sm = Charges::spin_weighted(&g, m);
        // A(sn)² - A(sm)² as A(sn - sm)·A(sn + sm), exactly zero when sm = ±sn
        let minus = sn.combine(1.0, &sm, -1.0);
        let plus = sn.combine(1.0, &sm, 1.0);
        let all = Charges::all_wells(&g);
        let occ = Charges::occupation_difference(&g, n, m)?;
        let kernel = self.kernel();
        let spatial = all.max_separation(&all);
        // Third component: a bound on the integrand magnitude, so that phases
        // which cancel by symmetry stop at rounding level.
        let bound = 0.25 * minus.abs_weight() * plus.abs_weight() + all.abs_weight() * occ.abs_weight();
        let r = self.integrate_forms(self.to_reduced_time(t), g.sigma, spatial, Weight::Phase, spec, |k| {
            [0.25 * minus.averaged_overlap(&plus, k, kernel), all.averaged_overlap(&occ, k, kernel), bound]
        })?;
        Ok((Estimate { value: r.value[0], abs_error: r.abs_error[0] }, Estimate { value: r.value[1], abs_error: r.abs_error[1] }))
    }

    /// Spectral density `J(ω)` in s⁻¹ for a single double well, such that
    /// `Γ₀(t) = ∫ dω J(ω) (1 - cos ωt)/ω² coth(βħω/2)`. `omega` is an
    /// angular frequency in s⁻¹.
    pub fn spectral_density(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::param("omega", "frequency must be finite and > 0"));
        }
        let tu = self.units.time_unit;
        let e = omega * tu;
        let disp = self.dispersion;
        let k = disp.k_from_energy(e);
        let l = self.units.l;
        let sigma = self.units.sigma;
        let f0 = 2.0 * self.kernel().one_minus(2.0 * k * l);
        let j = self.measure(k) * self.strength * disp.uv_suppression(k) * (-k * k * sigma * sigma / 2.0).exp() * f0 / disp.slope(k);
        Ok(j / tu)
    }

    /// Chemical potential as an angular frequency, `n0 g_B/ħ` in s⁻¹.
    pub fn mu_frequency(&self) -> f64 {
        self.dispersion.mu / self.units.time_unit
    }
}

/// `(x - sin x)/E²` with `x = E t`, by series for small x.
#[inline]
pub(crate) fn phase_weight(e: f64, t: f64) -> f64 {
    let x = e * t;
    if x.abs() < 0.1 {
        let x2 = x * x;
        t * t * x / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))))
    } else {
        (x - x.sin()) / (e * e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    Gamma0,
    Gamma1,
    Gamma2,
    Delta,
    General,
}

impl CurveKind {
    /// Short name, `gamma0` in 3D and `gamma0_1d` in 1D.
    pub fn label(self, dim: Dimension) -> String {
        let base = match self {
            CurveKind::Gamma0 => "gamma0",
            CurveKind::Gamma1 => "gamma1",
            CurveKind::Gamma2 => "gamma2",
            CurveKind::Delta => "delta",
            CurveKind::General => "gamma",
        };
        match dim {
            Dimension::Three => base.to_string(),
            Dimension::One => format!("{base}_1d"),
        }
    }

    /// Only δ may be negative.
    pub fn is_signed(self) -> bool {
        self == CurveKind::Delta
    }
}

/// Sampled exponent with enough metadata to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceCurve {
    pub name: String,
    pub kind: CurveKind,
    pub bath: BathKind,
    pub dim: Dimension,
    pub geometry: Geometry,
    pub rel_tol: f64,
    /// Seconds.
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub abs_errors: Vec<f64>,
}

impl DecoherenceCurve {
    pub fn max_abs_error(&self) -> f64 {
        self.abs_errors.iter().cloned().fold(0.0, f64::max)
    }

    /// Linear interpolation in t.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&x| x < t);
        if i < self.times.len() && self.times[i] == t {
            return Some(self.values[i]);
        }
        if i == 0 || i >= self.times.len() {
            return None;
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        Some(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }
}

/// `0`, then `n_log` log-spaced points from 1 ns to 1 μs, then linear
/// spacing up to `t_max` with `n_lin` further points.
pub fn time_grid(t_max: f64, n_log: usize, n_lin: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    let t_split = 1e-6_f64.min(t_max);
    if n_log > 0 {
        let lo: f64 = 1e-9_f64.min(t_split);
        for i in 0..n_log {
            let f = if n_log == 1 { 1.0 } else { i as f64 / (n_log - 1) as f64 };
            out.push(lo * (t_split / lo).powf(f));
        }
    }
    if t_max > t_split {
        for j in 1..=n_lin {
            out.push(t_split + (t_max - t_split) * j as f64 / n_lin as f64);
        }
    }
    out.dedup();
    out
}

/// Uniform grid `[0, t_max]` with `n` intervals.
pub fn linear_grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t_max * i as f64 / n as f64).collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::param("times", "time grid is empty"));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("times", "time grid must be non-negative and strictly increasing"));
    }
    Ok(())
}

impl Bath {
    /// Γ₀ (3D) or γ₀ (1D) over `times`.
    pub fn gamma0_curve(&self, times: &[f64], spec: &QuadratureSpec) -> Result<DecoherenceCurve> {
        check_times(times)?;
        let pts = crate::parallel::map(times, |&t| match self.dim {
            Dimension::Three => self.gamma0_3d(t, spec),
            Dimension::One => self.gamma_1d(CurveKind::Gamma0, self.units.d * self.units.length_unit, t, spec),
        });
        let pts: Result<Vec<Estimate>> = pts.into_iter().collect();
        Ok(self.make_curve(CurveKind::Gamma0, self.geometry(1), times, spec, pts?))
    }

    /// The four two-site curves Γ₀, Γ₁, Γ₂, δ at half-separation `d_half`.
    pub fn collective_curves(&self, d_half: f64, times: &[f64], spec: &QuadratureSpec) -> Result<[DecoherenceCurve; 4]> {
        check_times(times)?;
        let pts = crate::parallel::map(times, |&t| self.collective(d_half, t, spec));
        let pts: Vec<Collective> = pts.into_iter().collect::<Result<_>>()?;
        let mut geometry = self.geometry(2);
        geometry = Geometry::chain(2, geometry.l, d_half, geometry.sigma);
        let kinds = [CurveKind::Gamma0, CurveKind::Gamma1, CurveKind::Gamma2, CurveKind::Delta];
        Ok(kinds.map(|kind| {
            let est = pts.iter().map(|c| c.get(kind).unwrap()).collect();
            self.make_curve(kind, geometry.clone(), times, spec, est)
        }))
    }

    /// Exponent of an arbitrary `{n},{m}` element over `times`.
    pub fn general_curve(
        &self,
        geometry: &Geometry,
        n: &PseudospinConfig,
        m: &PseudospinConfig,
        times: &[f64],
        spec: &QuadratureSpec,
    ) -> Result<DecoherenceCurve> {
        check_times(times)?;
        let pts = crate::parallel::map(times, |&t| self.gamma_general(geometry, n, m, t, spec));
        let pts: Vec<Estimate> = pts.into_iter().collect::<Result<_>>()?;
        Ok(self.make_curve(CurveKind::General, geometry.clone(), times, spec, pts))
    }

    fn make_curve(&self, kind: CurveKind, geometry: Geometry, times: &[f64], spec: &QuadratureSpec, pts: Vec<Estimate>) -> DecoherenceCurve {
        DecoherenceCurve {
            name: format!("{}_{}", kind.label(self.dim), self.kind.label()),
            kind,
            bath: self.kind,
            dim: self.dim,
            geometry,
            rel_tol: spec.rel_tol,
            times: times.to_vec(),
            values: pts.iter().map(|e| e.value).collect(),
            abs_errors: pts.iter().map(|e| e.abs_error).collect(),
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}
