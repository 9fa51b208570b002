//! Lattice geometry, pseudospin configurations and impurity-bath couplings.
//!
//! Sites sit on the lattice axis x at `x_i = 2D(i - (N-1)/2)`; the left and
//! right wells of site i are at `x_i ∓ L`. A well with Gaussian ground state
//! of width σ couples to mode k with
//! `Ω = (g_AB √n0/ħ)(|u_k| - |v_k|) e^{-k²σ²/4} e^{i k_x x_well}`.
//!
//! Sums over wells weighted by pseudospin occupations are handled as point
//! charges on the axis. After averaging over the directions of k, the
//! product of two charges at separation y contributes `sinc(ky)` in 3D and
//! `cos(ky)` in 1D.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::Dispersion;
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::params::{DerivedScales, Dimension, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Well {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Half the intra-site well separation.
    pub l: f64,
    /// Half the inter-site separation.
    pub d: f64,
    /// Gaussian width of each well's ground state.
    pub sigma: f64,
    /// Site centres along the lattice axis.
    pub sites: Vec<f64>,
}

impl Geometry {
    /// `n` sites spaced by `2d`, centred on the origin.
    pub fn chain(n: usize, l: f64, d: f64, sigma: f64) -> Self {
        let c = (n as f64 - 1.0) / 2.0;
        Geometry { l, d, sigma, sites: (0..n).map(|i| 2.0 * d * (i as f64 - c)).collect() }
    }

    pub fn single(l: f64, sigma: f64) -> Self {
        Self::chain(1, l, l, sigma)
    }

    pub fn from_params(p: &PhysicalParams, s: &DerivedScales, n: usize) -> Self {
        Self::chain(n, p.l, p.d, s.sigma)
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn well_position(&self, site: usize, well: Well) -> f64 {
        match well {
            Well::Left => self.sites[site] - self.l,
            Well::Right => self.sites[site] + self.l,
        }
    }

    /// All lengths multiplied by `factor` (e.g. `k_L` for reduced units).
    pub fn scaled(&self, factor: f64) -> Self {
        Geometry { l: self.l * factor, d: self.d * factor, sigma: self.sigma * factor, sites: self.sites.iter().map(|x| x * factor).collect() }
    }

    /// Largest distance between any two wells.
    pub fn span(&self) -> f64 {
        let lo = self.sites.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.sites.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if self.sites.is_empty() {
            0.0
        } else {
            hi - lo + 2.0 * self.l
        }
    }

    /// The model assumes wells do not overlap; flag geometries where the two
    /// wells of a site are closer than four widths.
    pub fn overlap_warning(&self) -> Option<String> {
        if 2.0 * self.l < 4.0 * self.sigma {
            Some(format!("well separation 2L = {:.4e} is below 4σ = {:.4e}; neighbouring wells overlap", 2.0 * self.l, 4.0 * self.sigma))
        } else {
            None
        }
    }
}

/// Occupation bits per site: 0 = left well, 1 = right well.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PseudospinConfig(pub Vec<u8>);

impl PseudospinConfig {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::param("config", "occupation bits must be 0 or 1"));
        }
        Ok(PseudospinConfig(bits))
    }

    /// Decode a basis index; site 0 is the least significant bit.
    pub fn from_index(index: usize, n_sites: usize) -> Self {
        PseudospinConfig((0..n_sites).map(|i| ((index >> i) & 1) as u8).collect())
    }

    pub fn index(&self) -> usize {
        self.0.iter().enumerate().fold(0, |acc, (i, &b)| acc | ((b as usize) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    /// σ_z eigenvalue of site i (+1 right, -1 left).
    pub fn sigma_z(&self, i: usize) -> f64 {
        2.0 * self.0[i] as f64 - 1.0
    }

    pub fn well(&self, i: usize) -> Well {
        if self.0[i] == 0 {
            Well::Left
        } else {
            Well::Right
        }
    }
}

pub(crate) fn check_pair(geometry: &Geometry, n: &PseudospinConfig, m: &PseudospinConfig) -> Result<()> {
    if n.len() != m.len() {
        return Err(Error::LengthMismatch { left: n.len(), right: m.len() });
    }
    if n.len() != geometry.n_sites() {
        return Err(Error::LengthMismatch { left: n.len(), right: geometry.n_sites() });
    }
    Ok(())
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `1 - sin(x)/x` without cancellation at small x.
pub fn one_minus_sinc(x: f64) -> f64 {
    let x2 = x * x;
    if x.abs() < 0.1 {
        x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))))
    } else {
        1.0 - x.sin() / x
    }
}

/// `1 - cos(x)` without cancellation at small x.
pub fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// Angular kernel left after averaging `e^{i k·y}` over directions of k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularKernel {
    /// `sin(ky)/(ky)`.
    Sinc,
    /// `cos(ky)`.
    Cos,
}

impl AngularKernel {
    pub fn for_dim(dim: Dimension) -> Self {
        match dim {
            Dimension::One => AngularKernel::Cos,
            Dimension::Three => AngularKernel::Sinc,
        }
    }

    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            AngularKernel::Sinc => sinc(x),
            AngularKernel::Cos => x.cos(),
        }
    }

    #[inline]
    pub fn one_minus(self, x: f64) -> f64 {
        match self {
            AngularKernel::Sinc => one_minus_sinc(x),
            AngularKernel::Cos => one_minus_cos(x),
        }
    }
}

/// Weighted set of points on the lattice axis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Charges(pub Vec<(f64, f64)>);

impl Charges {
    /// `Σ_i (m_i - n_i)(Ω_R^i - Ω_L^i)`, the combination whose modulus sets Γ.
    pub fn difference(geometry: &Geometry, n: &PseudospinConfig, m: &PseudospinConfig) -> Result<Self> {
        check_pair(geometry, n, m)?;
        let mut out = Vec::new();
        for i in 0..n.len() {
            let w = m.bit(i) as f64 - n.bit(i) as f64;
            if w != 0.0 {
                out.push((geometry.well_position(i, Well::Right), w));
                out.push((geometry.well_position(i, Well::Left), -w));
            }
        }
        Ok(Charges(out))
    }

    /// `Σ_i s_i (Ω_R^i - Ω_L^i)` for σ_z eigenvalues `s_i`.
    pub fn spin_weighted(geometry: &Geometry, config: &PseudospinConfig) -> Self {
        let mut out = Vec::with_capacity(2 * config.len());
        for i in 0..config.len() {
            let s = config.sigma_z(i);
            out.push((geometry.well_position(i, Well::Right), s));
            out.push((geometry.well_position(i, Well::Left), -s));
        }
        Charges(out)
    }

    /// `Σ_i (n_i - m_i)(Ω_R^i - Ω_L^i)`.
    pub fn occupation_difference(geometry: &Geometry, n: &PseudospinConfig, m: &PseudospinConfig) -> Result<Self> {
        let mut c = Self::difference(geometry, n, m)?;
        for q in &mut c.0 {
            q.1 = -q.1;
        }
        Ok(c)
    }

    /// `Σ_i (Ω_R^i + Ω_L^i)`.
    pub fn all_wells(geometry: &Geometry) -> Self {
        let mut out = Vec::with_capacity(2 * geometry.n_sites());
        for i in 0..geometry.n_sites() {
            out.push((geometry.well_position(i, Well::Right), 1.0));
            out.push((geometry.well_position(i, Well::Left), 1.0));
        }
        Charges(out)
    }

    /// `a·self + b·other` for two sets laid out on the same points.
    /// Points whose combined weight vanishes are dropped.
    pub fn combine(&self, a: f64, other: &Charges, b: f64) -> Self {
        debug_assert_eq!(self.0.len(), other.0.len());
        Charges(self.0.iter().zip(&other.0).map(|(&(x, p), &(_, q))| (x, a * p + b * q)).filter(|q| q.1 != 0.0).collect())
    }

    /// `Σ |q_i|`.
    pub fn abs_weight(&self) -> f64 {
        self.0.iter().map(|q| q.1.abs()).sum()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().map(|q| q.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ_i q_i e^{i k x_i}` for a wavevector with axis component `kx`.
    pub fn phase_sum(&self, kx: f64) -> Complex64 {
        self.0.iter().map(|&(x, w)| Complex64::from_polar(w, kx * x)).sum()
    }

    /// Direction-averaged `Re Σ_ab p_a q_b e^{ik(y_a - y_b)}` at |k| = k,
    /// written as `(Σp)(Σq) - Σ p_a q_b (1 - K)` so that neutral sets stay
    /// accurate as k → 0.
    pub fn averaged_overlap(&self, other: &Charges, k: f64, kernel: AngularKernel) -> f64 {
        let mut acc = 0.0;
        for &(ya, pa) in &self.0 {
            for &(yb, qb) in &other.0 {
                acc += pa * qb * kernel.one_minus(k * (ya - yb).abs());
            }
        }
        self.total() * other.total() - acc
    }

    /// Largest pairwise distance between this set and `other`.
    pub fn max_separation(&self, other: &Charges) -> f64 {
        let mut m: f64 = 0.0;
        for &(ya, _) in &self.0 {
            for &(yb, _) in &other.0 {
                m = m.max((ya - yb).abs());
            }
        }
        m
    }
}

/// Coupling frequencies in SI units for a given bath and geometry.
#[derive(Debug, Clone)]
pub struct Couplings {
    pub geometry: Geometry,
    pub dispersion: Dispersion,
    /// `g_AB √n0 / ħ`, s⁻¹ times `m^{d/2}`.
    pub prefactor: f64,
}

impl Couplings {
    pub fn new(geometry: Geometry, p: &PhysicalParams, s: &DerivedScales) -> Self {
        Couplings { geometry, dispersion: Dispersion::si(p.m_b, s.g_b, p.n0), prefactor: s.g_ab * p.n0.sqrt() / HBAR }
    }

    /// `√V Ω^i_{p,k}` for wavevector `k` (first component along the axis).
    pub fn omega(&self, site: usize, well: Well, k: &[f64]) -> Complex64 {
        let kk = k.iter().map(|c| c * c).sum::<f64>().sqrt();
        let sigma = self.geometry.sigma;
        let amp = self.prefactor * self.dispersion.uv_suppression(kk).sqrt() * (-kk * kk * sigma * sigma / 4.0).exp();
        Complex64::from_polar(amp, k[0] * self.geometry.well_position(site, well))
    }

    /// `V |Σ_i (m_i - n_i)(Ω_R^i - Ω_L^i)|²`.
    pub fn diff_coupling_sq(&self, k: &[f64], n: &PseudospinConfig, m: &PseudospinConfig) -> Result<f64> {
        check_pair(&self.geometry, n, m)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n.len() {
            let w = m.bit(i) as f64 - n.bit(i) as f64;
            if w != 0.0 {
                acc += (self.omega(i, Well::Right, k) - self.omega(i, Well::Left, k)) * w;
            }
        }
        Ok(acc.norm_sqr())
    }
}

/// Mean-field level shift `n0 g_AB` of every well, in joules. It is the
/// same for all wells and so drops out of the pseudospin dynamics.
pub fn mean_field_shift(p: &PhysicalParams, s: &DerivedScales) -> f64 {
    p.n0 * s.g_ab
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_scales;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn preset(n: usize) -> Couplings {
        let p = PhysicalParams::paper_sec4();
        let s = derive_scales(&p).unwrap();
        Couplings::new(Geometry::from_params(&p, &s, n), &p, &s)
    }

    fn cfg(bits: &[u8]) -> PseudospinConfig {
        PseudospinConfig::new(bits.to_vec()).unwrap()
    }

    #[test]
    fn zero_k_free_bath() {
        let p = PhysicalParams { a_b: 0.0, ..PhysicalParams::paper_sec4() };
        let s = derive_scales(&p).unwrap();
        let c = Couplings::new(Geometry::from_params(&p, &s, 3), &p, &s);
        let expected = s.g_ab * p.n0.sqrt() / HBAR;
        for site in 0..3 {
            for well in [Well::Left, Well::Right] {
                let o = c.omega(site, well, &[0.0, 0.0, 0.0]);
                assert_relative_eq!(o.re, expected, max_relative = 1e-15);
                assert_eq!(o.im, 0.0);
            }
        }
    }

    #[test]
    fn modulus_is_homogeneous() {
        let c = preset(3);
        let k = [4e6, -2e6, 1e6];
        let r = c.omega(0, Well::Left, &k).norm();
        for site in 0..3 {
            for well in [Well::Left, Well::Right] {
                assert_relative_eq!(c.omega(site, well, &k).norm(), r, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn single_site_difference() {
        let c = preset(1);
        let mut state = 12345u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..100 {
            let k = [2e7 * rnd(), 2e7 * rnd(), 2e7 * rnd()];
            let o = c.omega(0, Well::Left, &k).norm();
            let lhs = (c.omega(0, Well::Right, &k) - c.omega(0, Well::Left, &k)).norm_sqr();
            let rhs = 4.0 * o * o * (k[0] * c.geometry.l).sin().powi(2);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-10, epsilon = 1e-30 * o * o);
            assert_relative_eq!(c.diff_coupling_sq(&k, &cfg(&[0]), &cfg(&[1])).unwrap(), rhs, max_relative = 1e-10, epsilon = 1e-30 * o * o);
        }
    }

    #[test]
    fn two_site_products() {
        let c = preset(2);
        let (l, d) = (c.geometry.l, c.geometry.d);
        for &kx in &[1.3e6, 5.1e6, 9.7e6, 1.6e7] {
            let k = [kx, 0.0, 0.0];
            let o2 = c.omega(0, Well::Left, &k).norm_sqr();
            let g1 = c.diff_coupling_sq(&k, &cfg(&[0, 0]), &cfg(&[1, 1])).unwrap();
            let g2 = c.diff_coupling_sq(&k, &cfg(&[1, 0]), &cfg(&[0, 1])).unwrap();
            let s2l = (kx * l).sin().powi(2);
            assert_relative_eq!(g1, 16.0 * o2 * s2l * (kx * d).cos().powi(2), max_relative = 1e-10);
            assert_relative_eq!(g2, 16.0 * o2 * s2l * (kx * d).sin().powi(2), max_relative = 1e-10);
            assert_eq!(c.diff_coupling_sq(&k, &cfg(&[1, 0]), &cfg(&[1, 0])).unwrap(), 0.0);
        }
        assert!(matches!(c.diff_coupling_sq(&[1.0, 0.0, 0.0], &cfg(&[1, 0]), &cfg(&[1])), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn long_wavelength_is_quadratic() {
        let c = preset(2);
        let n = cfg(&[0, 1]);
        let m = cfg(&[1, 1]);
        let k1 = c.diff_coupling_sq(&[1e2, 0.0, 0.0], &n, &m).unwrap() / c.omega(0, Well::Left, &[1e2, 0.0, 0.0]).norm_sqr();
        let k2 = c.diff_coupling_sq(&[2e2, 0.0, 0.0], &n, &m).unwrap() / c.omega(0, Well::Left, &[2e2, 0.0, 0.0]).norm_sqr();
        assert_relative_eq!(k2 / k1, 4.0, max_relative = 1e-6);
    }

    #[test]
    fn mean_field_values() {
        let p = PhysicalParams::paper_sec4();
        let s = derive_scales(&p).unwrap();
        // n0 g_AB with a_AB = 55 a0 between Na-23 and Rb-87, by hand
        assert_relative_eq!(mean_field_shift(&p, &s), 6.736_591_135_808e-31, max_relative = 1e-11);
        assert_relative_eq!(mean_field_shift(&p, &s) / (2.0 * std::f64::consts::PI * HBAR), 1_016.679_719_265_566, max_relative = 1e-11);
        let p0 = PhysicalParams { a_ab: 0.0, ..p.clone() };
        assert_eq!(mean_field_shift(&p0, &derive_scales(&p0).unwrap()), 0.0);
    }

    #[test]
    fn overlap_warning_threshold() {
        let g = Geometry::single(80e-9, 45e-9);
        assert!(g.overlap_warning().is_some());
        let g = Geometry::single(150e-9, 45e-9);
        assert!(g.overlap_warning().is_none());
    }

    #[test]
    fn config_index_is_little_endian() {
        let c = PseudospinConfig::from_index(0b110, 3);
        assert_eq!(c.0, vec![0, 1, 1]);
        assert_eq!(c.index(), 6);
        assert!(PseudospinConfig::new(vec![0, 2]).is_err());
    }

    #[test]
    fn series_branches_are_continuous() {
        for x in [0.099_999_999, 0.1, 0.100_000_001] {
            assert_relative_eq!(one_minus_sinc(x), 1.0 - x.sin() / x, max_relative = 1e-12);
        }
        assert_relative_eq!(one_minus_sinc(1e-5), 1e-10 / 6.0, max_relative = 1e-10);
        assert_relative_eq!(one_minus_cos(1e-5), 0.5e-10, max_relative = 1e-10);
        assert_eq!(sinc(0.0), 1.0);
    }

    #[test]
    fn averaged_overlap_matches_direct_sum() {
        let g = Geometry::chain(3, 1.5, 3.0, 0.5);
        let n = cfg(&[0, 1, 1]);
        let m = cfg(&[1, 1, 0]);
        let c = Charges::difference(&g, &n, &m).unwrap();
        for &k in &[0.01, 0.3, 2.0, 7.5] {
            let mut direct = 0.0;
            for &(a, p) in &c.0 {
                for &(b, q) in &c.0 {
                    direct += p * q * (k * (a - b)).cos();
                }
            }
            assert_relative_eq!(c.averaged_overlap(&c, k, AngularKernel::Cos), direct, max_relative = 1e-10, epsilon = 1e-14);
            // in 1D the average over ±k is the modulus squared itself
            assert_relative_eq!(c.phase_sum(k).norm_sqr(), direct, max_relative = 1e-10, epsilon = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn flip_symmetry(kx in -3e7f64..3e7, ky in -3e7f64..3e7, a in 0usize..4, b in 0usize..4) {
            let c = preset(2);
            let n = PseudospinConfig::from_index(a, 2);
            let m = PseudospinConfig::from_index(b, 2);
            let flip = |p: &PseudospinConfig| PseudospinConfig(p.0.iter().map(|x| 1 - x).collect());
            let v = c.diff_coupling_sq(&[kx, ky, 0.0], &n, &m).unwrap();
            let w = c.diff_coupling_sq(&[-kx, -ky, 0.0], &flip(&n), &flip(&m)).unwrap();
            let scale = c.omega(0, Well::Left, &[kx, ky, 0.0]).norm_sqr();
            prop_assert!((v - w).abs() <= 1e-10 * scale.max(1e-300));
        }
    }
}
