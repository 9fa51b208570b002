//! Physical inputs, derived coupling constants and the reduced unit system.
//!
//! Everything enters in SI. [`derive_scales`] turns a validated
//! [`PhysicalParams`] into the coupling constants, lattice scales and
//! thermal factor used downstream, and [`to_reduced_units`] rescales all of
//! it to lengths in units of `1/k_L` and energies in units of the impurity
//! recoil energy `E_R` (so that ħ = 1 and times are measured in `ħ/E_R`).

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constants::{BOHR_RADIUS, HBAR, K_B, MASS_NA23, MASS_RB87};
use crate::error::{Error, Result};

/// Default bath-bath scattering length for ⁸⁷Rb, in Bohr radii.
pub const DEFAULT_RB_SCATTERING_BOHR: f64 = 99.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimension {
    One,
    Three,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Three => 3,
        }
    }

    pub fn from_usize(d: usize) -> Option<Self> {
        match d {
            1 => Some(Dimension::One),
            3 => Some(Dimension::Three),
            _ => None,
        }
    }
}

/// SI inputs describing impurities, bath and lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Impurity mass, kg.
    pub m_a: f64,
    /// Bath-atom mass, kg.
    pub m_b: f64,
    /// Bath-bath scattering length, m.
    pub a_b: f64,
    /// Impurity-bath scattering length, m.
    pub a_ab: f64,
    /// Condensate density, m^-d.
    pub n0: f64,
    /// Lattice wavelength, m.
    pub lambda: f64,
    /// Lattice depth in units of the impurity recoil energy.
    pub alpha_depth: f64,
    /// Half the separation of the two wells of a site, m.
    pub l: f64,
    /// Half the separation of neighbouring sites, m.
    pub d: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    pub dim: Dimension,
    /// Gaussian width of the well ground state; replaces the harmonic estimate.
    pub sigma_override: Option<f64>,
    /// Bath coupling constant in J m^d; required in one dimension.
    pub g_b_override: Option<f64>,
    /// Impurity-bath coupling constant in J m^d; required in one dimension.
    pub g_ab_override: Option<f64>,
}

/// Keys accepted by [`PhysicalParams::set`] and the configuration file.
pub const PARAM_KEYS: &[&str] =
    &["m_A", "m_B", "a_B", "a_AB", "n0", "lambda", "alpha_depth", "L", "D", "T", "d", "sigma_override", "g_B_override", "g_AB_override"];

impl PhysicalParams {
    /// ²³Na impurities in a 600 nm lattice of depth 20 E_R, immersed in a
    /// ⁸⁷Rb condensate of density 10²⁰ m⁻³, with 2L = λ/2 and D = 2L.
    pub fn paper_sec4() -> Self {
        let lambda = 600e-9;
        let l = lambda / 4.0;
        PhysicalParams {
            m_a: MASS_NA23,
            m_b: MASS_RB87,
            a_b: DEFAULT_RB_SCATTERING_BOHR * BOHR_RADIUS,
            a_ab: 55.0 * BOHR_RADIUS,
            n0: 1e20,
            lambda,
            alpha_depth: 20.0,
            l,
            d: 2.0 * l,
            temperature: 0.0,
            dim: Dimension::Three,
            sigma_override: None,
            g_b_override: None,
            g_ab_override: None,
        }
    }

    /// One-dimensional variant of [`paper_sec4`](Self::paper_sec4).
    ///
    /// The bath is a tube of 10 atoms/μm with 20 kHz transverse confinement;
    /// the effective couplings are the 3D ones divided by the transverse
    /// overlap areas (`2π a_⊥²` for bath-bath, `π(σ² + a_⊥²)` for
    /// impurity-bath).
    pub fn one_dimensional() -> Self {
        let base = Self::paper_sec4();
        let omega_perp = 2.0 * PI * 20e3;
        let a_perp_sq = HBAR / (base.m_b * omega_perp);
        let sigma = harmonic_sigma(base.m_a, base.lambda, base.alpha_depth);
        let g_b3 = 4.0 * PI * HBAR * HBAR * base.a_b / base.m_b;
        let m_ab = base.m_a * base.m_b / (base.m_a + base.m_b);
        let g_ab3 = 2.0 * PI * HBAR * HBAR * base.a_ab / m_ab;
        PhysicalParams {
            n0: 1e7,
            dim: Dimension::One,
            g_b_override: Some(g_b3 / (2.0 * PI * a_perp_sq)),
            g_ab_override: Some(g_ab3 / (PI * (sigma * sigma + a_perp_sq))),
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("m_A", self.m_a)?;
        positive("m_B", self.m_b)?;
        positive("n0", self.n0)?;
        positive("lambda", self.lambda)?;
        positive("alpha_depth", self.alpha_depth)?;
        positive("L", self.l)?;
        finite("a_AB", self.a_ab)?;
        if !(self.a_b >= 0.0 && self.a_b.is_finite()) {
            return Err(Error::param("a_B", "must be finite and >= 0"));
        }
        if !(self.d.is_finite() && self.d >= self.l) {
            return Err(Error::param("D", "must be finite and >= L"));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::param("T", "must be finite and >= 0"));
        }
        if let Some(s) = self.sigma_override {
            positive("sigma_override", s)?;
        }
        if let Some(g) = self.g_b_override {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::param("g_B_override", "must be finite and >= 0"));
            }
        }
        if let Some(g) = self.g_ab_override {
            finite("g_AB_override", g)?;
        }
        if self.dim == Dimension::One && (self.g_b_override.is_none() || self.g_ab_override.is_none()) {
            let field = if self.g_b_override.is_none() { "g_B_override" } else { "g_AB_override" };
            return Err(Error::param(field, "one-dimensional runs need the effective 1D coupling supplied directly"));
        }
        Ok(())
    }

    /// Set one field from its configuration key. Lengths, masses, densities
    /// and temperatures are SI; `d` is the dimension (1 or 3).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "m_A" => self.m_a = value,
            "m_B" => self.m_b = value,
            "a_B" => self.a_b = value,
            "a_AB" => self.a_ab = value,
            "n0" => self.n0 = value,
            "lambda" => self.lambda = value,
            "alpha_depth" => self.alpha_depth = value,
            "L" => self.l = value,
            "D" => self.d = value,
            "T" => self.temperature = value,
            "d" => {
                if value.fract() != 0.0 {
                    return Err(Error::param("d", "dimension must be 1 or 3"));
                }
                self.dim = Dimension::from_usize(value as usize).ok_or_else(|| Error::param("d", "dimension must be 1 or 3"))?;
            }
            "sigma_override" => self.sigma_override = Some(value),
            "g_B_override" => self.g_b_override = Some(value),
            "g_AB_override" => self.g_ab_override = Some(value),
            _ => return Err(Error::Config(format!("unknown parameter key `{key}`"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "m_A" => self.m_a,
            "m_B" => self.m_b,
            "a_B" => self.a_b,
            "a_AB" => self.a_ab,
            "n0" => self.n0,
            "lambda" => self.lambda,
            "alpha_depth" => self.alpha_depth,
            "L" => self.l,
            "D" => self.d,
            "T" => self.temperature,
            "d" => self.dim.as_usize() as f64,
            "sigma_override" => self.sigma_override?,
            "g_B_override" => self.g_b_override?,
            "g_AB_override" => self.g_ab_override?,
            _ => return None,
        })
    }

    /// Render as a flat `key = value` document readable by
    /// [`from_kv_str`](Self::from_kv_str).
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        for key in PARAM_KEYS {
            if let Some(v) = self.get(key) {
                if *key == "d" {
                    let _ = writeln!(out, "{key} = {}", v as usize);
                } else {
                    let _ = writeln!(out, "{key} = {v:e}");
                }
            }
        }
        out
    }

    /// Parse a flat key-value document. Keys not listed in [`PARAM_KEYS`]
    /// are returned untouched for the caller to interpret.
    pub fn from_kv_str(text: &str) -> Result<(Self, toml::Table)> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Self::from_table(Self::paper_sec4(), table)
    }

    /// Apply the parameter keys found in `table` on top of `base`.
    pub fn from_table(mut base: Self, table: toml::Table) -> Result<(Self, toml::Table)> {
        let mut rest = toml::Table::new();
        for (key, value) in table {
            if PARAM_KEYS.contains(&key.as_str()) {
                let v = match &value {
                    toml::Value::Float(f) => *f,
                    toml::Value::Integer(i) => *i as f64,
                    _ => {
                        return Err(Error::Config(format!("parameter `{key}` must be numeric")));
                    }
                };
                base.set(&key, v)?;
            } else {
                rest.insert(key, value);
            }
        }
        Ok((base, rest))
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, "must be finite and > 0"))
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, "must be finite"))
    }
}

/// Ground-state width of a lattice well in the harmonic approximation,
/// `ħω = 2√α E_R`.
pub fn harmonic_sigma(m_a: f64, lambda: f64, alpha_depth: f64) -> f64 {
    let k_l = 2.0 * PI / lambda;
    let e_r = HBAR * HBAR * k_l * k_l / (2.0 * m_a);
    let omega = 2.0 * alpha_depth.sqrt() * e_r / HBAR;
    (HBAR / (m_a * omega)).sqrt()
}

/// Quantities derived from [`PhysicalParams`], still in SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    /// Bath coupling constant, J m^d.
    pub g_b: f64,
    /// Impurity-bath coupling constant, J m^d.
    pub g_ab: f64,
    /// Reduced impurity-bath mass, kg.
    pub m_ab: f64,
    /// Impurity recoil energy, J.
    pub e_r: f64,
    /// Lattice wavenumber, 1/m.
    pub k_l: f64,
    /// Harmonic frequency of a well, 1/s.
    pub omega: f64,
    /// Gaussian ground-state width, m.
    pub sigma: f64,
    /// Speed of sound, m/s.
    pub c_s: f64,
    /// Chemical potential `n0 g_B`, J.
    pub mu: f64,
    /// Inverse temperature `1/(k_B T)` in 1/J; `None` at zero temperature.
    pub beta: Option<f64>,
}

impl DerivedScales {
    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_none()
    }
}

pub fn derive_scales(p: &PhysicalParams) -> Result<DerivedScales> {
    p.validate()?;
    let m_ab = p.m_a * p.m_b / (p.m_a + p.m_b);
    let g_b = p.g_b_override.unwrap_or(4.0 * PI * HBAR * HBAR * p.a_b / p.m_b);
    let g_ab = p.g_ab_override.unwrap_or(2.0 * PI * HBAR * HBAR * p.a_ab / m_ab);
    let k_l = 2.0 * PI / p.lambda;
    let e_r = HBAR * HBAR * k_l * k_l / (2.0 * p.m_a);
    let (omega, sigma) = match p.sigma_override {
        Some(s) => (HBAR / (p.m_a * s * s), s),
        None => {
            let omega = 2.0 * p.alpha_depth.sqrt() * e_r / HBAR;
            (omega, (HBAR / (p.m_a * omega)).sqrt())
        }
    };
    let mu = p.n0 * g_b;
    let c_s = (mu / p.m_b).sqrt();
    let beta = (p.temperature > 0.0).then(|| 1.0 / (K_B * p.temperature));
    Ok(DerivedScales { g_b, g_ab, m_ab, e_r, k_l, omega, sigma, c_s, mu, beta })
}

/// Parameters in the internal unit system: length `1/k_L`, energy `E_R`,
/// time `ħ/E_R`, mass `ħ²k_L²/E_R`, temperature `E_R/k_B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub dim: Dimension,
    /// SI value of the length unit, m.
    pub length_unit: f64,
    /// SI value of the energy unit, J.
    pub energy_unit: f64,
    /// SI value of the time unit, s.
    pub time_unit: f64,
    /// SI value of the mass unit, kg.
    pub mass_unit: f64,

    pub m_a: f64,
    pub m_b: f64,
    pub a_b: f64,
    pub a_ab: f64,
    pub n0: f64,
    pub lambda: f64,
    pub alpha_depth: f64,
    pub l: f64,
    pub d: f64,
    pub temperature: f64,
    pub sigma_override: Option<f64>,
    pub g_b_override: Option<f64>,
    pub g_ab_override: Option<f64>,

    pub g_b: f64,
    pub g_ab: f64,
    pub sigma: f64,
    pub omega: f64,
    pub mu: f64,
    /// Inverse temperature in units of `1/E_R`.
    pub beta: Option<f64>,
}

impl ReducedParams {
    /// Coefficient of `k²` in the bath free-particle energy, `ħ²/(2 m_B)`.
    pub fn bath_kinetic_coeff(&self) -> f64 {
        0.5 / self.m_b
    }

    /// `g_AB² n0`, the overall strength multiplying every decoherence integral.
    pub fn coupling_strength(&self) -> f64 {
        self.g_ab * self.g_ab * self.n0
    }

    /// Convert back to SI.
    pub fn to_si(&self) -> PhysicalParams {
        let d = self.dim.as_usize() as i32;
        let len = self.length_unit;
        let g_unit = self.energy_unit * len.powi(d);
        PhysicalParams {
            m_a: self.m_a * self.mass_unit,
            m_b: self.m_b * self.mass_unit,
            a_b: self.a_b * len,
            a_ab: self.a_ab * len,
            n0: self.n0 / len.powi(d),
            lambda: self.lambda * len,
            alpha_depth: self.alpha_depth,
            l: self.l * len,
            d: self.d * len,
            temperature: self.temperature * self.energy_unit / K_B,
            dim: self.dim,
            sigma_override: self.sigma_override.map(|s| s * len),
            g_b_override: self.g_b_override.map(|g| g * g_unit),
            g_ab_override: self.g_ab_override.map(|g| g * g_unit),
        }
    }
}

pub fn to_reduced_units(p: &PhysicalParams, s: &DerivedScales) -> ReducedParams {
    let len = 1.0 / s.k_l;
    let energy = s.e_r;
    let time = HBAR / energy;
    let mass = HBAR * HBAR * s.k_l * s.k_l / energy;
    let d = p.dim.as_usize() as i32;
    let g_unit = energy * len.powi(d);
    ReducedParams {
        dim: p.dim,
        length_unit: len,
        energy_unit: energy,
        time_unit: time,
        mass_unit: mass,
        m_a: p.m_a / mass,
        m_b: p.m_b / mass,
        a_b: p.a_b / len,
        a_ab: p.a_ab / len,
        n0: p.n0 * len.powi(d),
        lambda: p.lambda / len,
        alpha_depth: p.alpha_depth,
        l: p.l / len,
        d: p.d / len,
        temperature: p.temperature * K_B / energy,
        sigma_override: p.sigma_override.map(|v| v / len),
        g_b_override: p.g_b_override.map(|g| g / g_unit),
        g_ab_override: p.g_ab_override.map(|g| g / g_unit),
        g_b: s.g_b / g_unit,
        g_ab: s.g_ab / g_unit,
        sigma: s.sigma / len,
        omega: s.omega * time,
        mu: s.mu / energy,
        beta: s.beta.map(|b| b * energy),
    }
}
