//! Bogoliubov spectrum of a homogeneous condensate.
//!
//! [`Dispersion`] works in any unit system: it only needs the kinetic
//! coefficient `ħ²/(2m_B)`, the chemical potential `μ = n0 g_B` and ħ in
//! those units. The free Bose gas is the `μ = 0` case.

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    /// `ħ²/(2 m_B)`, so that `ε_k = kinetic · k²`.
    pub kinetic: f64,
    /// Chemical potential `n0 g_B`.
    pub mu: f64,
    pub hbar: f64,
}

/// Per-mode quantities at a single wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeQuantities {
    pub k: f64,
    pub eps: f64,
    pub energy: f64,
    /// `(|u_k| - |v_k|)²` in units of `1/V`.
    pub uv2: f64,
}

impl Dispersion {
    /// SI dispersion for bath mass `m_b` (kg), coupling `g_b` and density `n0`.
    pub fn si(m_b: f64, g_b: f64, n0: f64) -> Self {
        Dispersion { kinetic: HBAR * HBAR / (2.0 * m_b), mu: n0 * g_b, hbar: HBAR }
    }

    pub fn free(self) -> Self {
        Dispersion { mu: 0.0, ..self }
    }

    #[inline]
    pub fn epsilon(&self, k: f64) -> f64 {
        self.kinetic * k * k
    }

    #[inline]
    pub fn energy(&self, k: f64) -> f64 {
        let eps = self.epsilon(k);
        (eps * (eps + 2.0 * self.mu)).sqrt()
    }

    /// `(|u_k| - |v_k|)² = ε_k / E_k`, evaluated as `sqrt(ε/(ε + 2μ))`.
    /// At `k = 0` this is 0 for an interacting bath and 1 for free bosons.
    #[inline]
    pub fn uv_suppression(&self, k: f64) -> f64 {
        if self.mu == 0.0 {
            return 1.0;
        }
        let eps = self.epsilon(k);
        (eps / (eps + 2.0 * self.mu)).sqrt()
    }

    /// `|u_k|` and `|v_k|` times `√V`, straight from the mode functions.
    pub fn amplitudes(&self, k: f64) -> (f64, f64) {
        let eps = self.epsilon(k);
        let e = self.energy(k);
        if e == 0.0 {
            return (1.0, 0.0);
        }
        let (u2, v2) = self.amplitudes_sq(eps, e);
        (u2.sqrt(), v2.sqrt())
    }

    /// `V|u_k|²` and `V|v_k|²`, with `(ε+μ)/E - 1` written as
    /// `μ²/(E(ε+μ+E))` so that it keeps full precision when ε ≫ μ.
    fn amplitudes_sq(&self, eps: f64, e: f64) -> (f64, f64) {
        let r = (eps + self.mu) / e;
        let r_minus_1 = self.mu * self.mu / (e * (eps + self.mu + e));
        (0.5 * (r + 1.0), 0.5 * r_minus_1)
    }

    /// `(|u_k| - |v_k|)²` evaluated from the mode amplitudes. The
    /// difference is formed as `(|u|² - |v|²)/(|u| + |v|)`, which avoids
    /// cancellation in the phonon regime where `|u| ≈ |v|`.
    pub fn uv_suppression_from_modes(&self, k: f64) -> f64 {
        let eps = self.epsilon(k);
        let e = self.energy(k);
        if e == 0.0 {
            return if self.mu == 0.0 { 1.0 } else { 0.0 };
        }
        let (u2, v2) = self.amplitudes_sq(eps, e);
        let diff = (u2 - v2) / (u2.sqrt() + v2.sqrt());
        diff * diff
    }

    pub fn mode(&self, k: f64) -> ModeQuantities {
        ModeQuantities { k, eps: self.epsilon(k), energy: self.energy(k), uv2: self.uv_suppression(k) }
    }

    /// Free-particle energy that gives quasiparticle energy `e`, from the
    /// positive root of `ε² + 2με - E² = 0`.
    #[inline]
    pub fn epsilon_from_energy(&self, e: f64) -> f64 {
        e * e / (self.mu + (self.mu * self.mu + e * e).sqrt())
    }

    #[inline]
    pub fn k_from_energy(&self, e: f64) -> f64 {
        (self.epsilon_from_energy(e) / self.kinetic).sqrt()
    }

    /// `dE/dk`.
    pub fn slope(&self, k: f64) -> f64 {
        let eps = self.epsilon(k);
        let e = self.energy(k);
        let deps = 2.0 * self.kinetic * k;
        if e == 0.0 {
            // phonon limit: E ≈ sqrt(2 μ kinetic) k
            return (2.0 * self.mu * self.kinetic).sqrt();
        }
        (eps + self.mu) / e * deps
    }

    /// Sound speed `lim E_k/(ħk)`.
    pub fn sound_speed(&self) -> f64 {
        (2.0 * self.mu * self.kinetic).sqrt() / self.hbar
    }

    /// Wavenumber `2 m_B c_s/ħ` at which `ε_k = 2μ`.
    pub fn crossover_k(&self) -> f64 {
        (2.0 * self.mu / self.kinetic).sqrt()
    }

    /// Healing length `ħ/(√2 m_B c_s)`.
    pub fn healing_length(&self) -> f64 {
        (self.kinetic / self.mu).sqrt()
    }
}

fn check_k(k: f64) -> Result<()> {
    if k >= 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::param("k", "wavenumber must be finite and >= 0"))
    }
}

/// `ħ²k²/(2m_B)` in joules.
pub fn epsilon(k: f64, m_b: f64) -> Result<f64> {
    check_k(k)?;
    Ok(Dispersion::si(m_b, 0.0, 0.0).epsilon(k))
}

/// Quasiparticle energy in joules.
pub fn bogo_energy(k: f64, m_b: f64, g_b: f64, n0: f64) -> Result<f64> {
    check_k(k)?;
    Ok(Dispersion::si(m_b, g_b, n0).energy(k))
}

pub fn uv_suppression(k: f64, m_b: f64, g_b: f64, n0: f64) -> Result<f64> {
    check_k(k)?;
    Ok(Dispersion::si(m_b, g_b, n0).uv_suppression(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{BOHR_RADIUS, MASS_RB87};
    use crate::params::{derive_scales, PhysicalParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn preset() -> Dispersion {
        let p = PhysicalParams::paper_sec4();
        let s = derive_scales(&p).unwrap();
        Dispersion::si(p.m_b, s.g_b, p.n0)
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
    }

    #[test]
    fn epsilon_basics() {
        assert_eq!(epsilon(0.0, MASS_RB87).unwrap(), 0.0);
        let a = epsilon(3e6, MASS_RB87).unwrap();
        let b = epsilon(6e6, MASS_RB87).unwrap();
        assert_relative_eq!(b, 4.0 * a, max_relative = 1e-15);
        assert!(epsilon(-1.0, MASS_RB87).is_err());
        // ħ²k_L²/(2 m_Rb) at λ = 600 nm, evaluated by hand with CODATA 2018
        let k_l = 2.0 * std::f64::consts::PI / 600e-9;
        assert_relative_eq!(epsilon(k_l, MASS_RB87).unwrap(), 4.225_370_631_998e-30, max_relative = 1e-12);
    }

    #[test]
    fn free_gas_limit() {
        let d = Dispersion::si(MASS_RB87, 0.0, 1e20);
        for k in log_grid(1e3, 1e9, 50) {
            assert_eq!(d.energy(k), d.epsilon(k));
            assert_eq!(d.uv_suppression(k), 1.0);
            assert_eq!(d.amplitudes(k), (1.0, 0.0));
        }
    }

    #[test]
    fn phonon_limit_and_crossover() {
        let d = preset();
        let c = d.sound_speed();
        let xi = d.healing_length();
        for k in log_grid(1e-6 / xi, 1e-3 / xi, 20) {
            assert_relative_eq!(d.energy(k) / (HBAR * k), c, max_relative = 1e-3);
            assert_relative_eq!(d.uv_suppression(k), HBAR * k / (2.0 * MASS_RB87 * c), max_relative = 2e-3);
        }
        let ks = 2.0 * MASS_RB87 * c / HBAR;
        assert_relative_eq!(ks, d.crossover_k(), max_relative = 1e-13);
        assert_relative_eq!(d.epsilon(ks), 2.0 * d.mu, max_relative = 1e-13);
        assert_eq!(d.uv_suppression(0.0), 0.0);
    }

    #[test]
    fn preset_sound_speed() {
        // c_s = sqrt(4πħ² a_B n0)/m_B with a_B = 99 a0, n0 = 1e20 m^-3
        let d = preset();
        let a_b = 99.0 * BOHR_RADIUS;
        let expected = (4.0 * std::f64::consts::PI * a_b * 1e20).sqrt() * HBAR / MASS_RB87;
        assert_relative_eq!(d.sound_speed(), expected, max_relative = 1e-13);
        assert_relative_eq!(d.sound_speed(), 1.87e-3, max_relative = 1e-2);
    }

    #[test]
    fn amplitudes_reproduce_closed_form() {
        let d = preset();
        let k0 = d.crossover_k();
        for k in log_grid(1e-4 * k0, 1e3 * k0, 1000) {
            let (u, v) = d.amplitudes(k);
            let from_modes = d.uv_suppression_from_modes(k);
            let closed = d.epsilon(k) / d.energy(k);
            assert_relative_eq!(from_modes, closed, max_relative = 1e-12);
            assert_relative_eq!(d.uv_suppression(k), closed, max_relative = 1e-13);
            assert_relative_eq!(u * u - v * v, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn particle_regime() {
        let d = preset();
        let k = (100.0 * d.mu / d.kinetic).sqrt();
        assert!((d.energy(k) / d.epsilon(k) - 1.0).abs() < 0.01);
    }

    #[test]
    fn inverse_and_slope() {
        let d = preset();
        let k0 = d.crossover_k();
        for k in log_grid(1e-3 * k0, 1e2 * k0, 200) {
            let e = d.energy(k);
            assert_relative_eq!(d.k_from_energy(e), k, max_relative = 1e-12);
            let h = k * 1e-6;
            let fd = (d.energy(k + h) - d.energy(k - h)) / (2.0 * h);
            assert_relative_eq!(d.slope(k), fd, max_relative = 1e-7);
        }
    }

    proptest! {
        #[test]
        fn spectrum_orderings(k1 in 1e2f64..1e9, k2 in 1e2f64..1e9) {
            let d = preset();
            let (lo, hi) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
            prop_assert!(d.energy(lo) <= d.energy(hi));
            prop_assert!(d.uv_suppression(lo) <= d.uv_suppression(hi));
            prop_assert!(d.energy(lo) >= d.epsilon(lo));
            prop_assert!(d.energy(lo) >= HBAR * d.sound_speed() * lo * (1.0 - 1e-14));
            let uv = d.uv_suppression(lo);
            prop_assert!(uv > 0.0 && uv <= 1.0);
        }
    }
}
