//! Reduced density matrices of N pseudospins under exact pure dephasing.
//!
//! Basis states are indexed little-endian: bit i of the index is the
//! occupation of site i (0 = left well, 1 = right well). Off-diagonal
//! elements evolve as
//! `ρ_nm(t) = ρ_nm(0) exp(-Γ_nm(t)) exp(i(Θ_nm + Ξ_nm + Δ_nm))`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::{Geometry, PseudospinConfig};
use crate::error::{Error, Result};
use crate::kernels::Bath;
use crate::quadrature::QuadratureSpec;

/// Largest number of sites [`evolve`] accepts.
pub const MAX_SITES: usize = 10;

/// Phases of one element, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseSet {
    pub theta: f64,
    pub xi: f64,
    pub delta: f64,
}

impl PhaseSet {
    pub fn total(&self) -> f64 {
        self.theta + self.xi + self.delta
    }
}

/// Anything that can supply decay exponents and phases for pairs of
/// configurations: the continuum bath, or a finite mode set.
pub trait DephasingSource: Sync {
    fn n_sites(&self) -> usize;
    /// `Γ_nm(t)` for `t` in seconds.
    fn exponent(&self, n: &PseudospinConfig, m: &PseudospinConfig, t: f64) -> Result<f64>;
    fn phases(&self, n: &PseudospinConfig, m: &PseudospinConfig, t: f64) -> Result<PhaseSet>;
}

/// Continuum bath plus lattice geometry.
#[derive(Debug, Clone)]
pub struct ContinuumModel {
    pub bath: Bath,
    pub geometry: Geometry,
    pub spec: QuadratureSpec,
}

impl DephasingSource for ContinuumModel {
    fn n_sites(&self) -> usize {
        self.geometry.n_sites()
    }

    fn exponent(&self, n: &PseudospinConfig, m: &PseudospinConfig, t: f64) -> Result<f64> {
        Ok(self.bath.gamma_general(&self.geometry, n, m, t, &self.spec)?.value)
    }

    fn phases(&self, n: &PseudospinConfig, m: &PseudospinConfig, t: f64) -> Result<PhaseSet> {
        let (theta, xi) = self.bath.phase_integrals(&self.geometry, n, m, t, &self.spec)?;
        Ok(PhaseSet { theta: theta.value, xi: xi.value, delta: 0.0 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    n_sites: usize,
    /// Row-major, `dim × dim`.
    data: Vec<Complex64>,
}

impl ReducedDensityMatrix {
    /// Validate and wrap a row-major `2^N × 2^N` array.
    pub fn new(n_sites: usize, data: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n_sites;
        if data.len() != dim * dim {
            return Err(Error::InvalidDensityMatrix(format!("expected {} entries for {} sites, got {}", dim * dim, n_sites, data.len())));
        }
        let rho = ReducedDensityMatrix { n_sites, data };
        if rho.hermiticity_error() > 1e-10 {
            return Err(Error::InvalidDensityMatrix("matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}, expected 1")));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a normalised amplitude vector.
    pub fn from_pure(n_sites: usize, psi: &[Complex64]) -> Result<Self> {
        let dim = 1usize << n_sites;
        if psi.len() != dim {
            return Err(Error::InvalidDensityMatrix(format!("state has {} amplitudes, expected {dim}", psi.len())));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = psi[i] * psi[j].conj();
            }
        }
        Self::new(n_sites, data)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim() + j]
    }

    pub fn element(&self, n: &PseudospinConfig, m: &PseudospinConfig) -> Complex64 {
        self.get(n.index(), m.index())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.data)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = nalgebra::linalg::SymmetricEigen::new(h);
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn from_raw(n_sites: usize, data: Vec<Complex64>) -> Self {
        ReducedDensityMatrix { n_sites, data }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&DensityMatrixJson::from(self)).expect("plain data serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: DensityMatrixJson = serde_json::from_str(s).map_err(|e| Error::InvalidDensityMatrix(e.to_string()))?;
        let data = j.entries.into_iter().flatten().map(|[re, im]| Complex64::new(re, im)).collect();
        Self::new(j.n_sites, data)
    }
}

/// Serialised form: rows of `[re, im]` pairs.
#[derive(Debug, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub n_sites: usize,
    pub basis: String,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl From<&ReducedDensityMatrix> for DensityMatrixJson {
    fn from(rho: &ReducedDensityMatrix) -> Self {
        let d = rho.dim();
        DensityMatrixJson {
            n_sites: rho.n_sites,
            basis: "little-endian: bit i of the row/column index is site i (0 = left well, 1 = right well)".into(),
            entries: (0..d).map(|i| (0..d).map(|j| [rho.get(i, j).re, rho.get(i, j).im]).collect()).collect(),
        }
    }
}

/// Evolve `rho0` to time `t` (seconds), including the phases.
pub fn evolve(rho0: &ReducedDensityMatrix, t: f64, model: &dyn DephasingSource) -> Result<ReducedDensityMatrix> {
    evolve_with(rho0, t, model, true)
}

/// As [`evolve`]; with `with_phases = false` only the decay factors are
/// applied.
pub fn evolve_with(rho0: &ReducedDensityMatrix, t: f64, model: &dyn DephasingSource, with_phases: bool) -> Result<ReducedDensityMatrix> {
    let n = rho0.n_sites;
    if n > MAX_SITES {
        return Err(Error::DimensionCap { dim: rho0.dim(), cap: 1 << MAX_SITES });
    }
    if model.n_sites() != n {
        return Err(Error::LengthMismatch { left: n, right: model.n_sites() });
    }
    let d = rho0.dim();
    let pairs: Vec<(usize, usize)> =
        (0..d).flat_map(|i| ((i + 1)..d).map(move |j| (i, j))).filter(|&(i, j)| rho0.get(i, j) != Complex64::new(0.0, 0.0)).collect();
    let factors = crate::parallel::map(&pairs, |&(i, j)| element_factor(i, j, n, t, model, with_phases));
    let mut data = rho0.data.clone();
    for (&(i, j), f) in pairs.iter().zip(factors) {
        let v = rho0.get(i, j) * f?;
        data[i * d + j] = v;
        data[j * d + i] = v.conj();
    }
    Ok(ReducedDensityMatrix::from_raw(n, data))
}

fn element_factor(i: usize, j: usize, n_sites: usize, t: f64, model: &dyn DephasingSource, with_phases: bool) -> Result<Complex64> {
    let n = PseudospinConfig::from_index(i, n_sites);
    let m = PseudospinConfig::from_index(j, n_sites);
    let gamma = model.exponent(&n, &m, t)?;
    let phase = if with_phases { model.phases(&n, &m, t)?.total() } else { 0.0 };
    Ok(Complex64::from_polar((-gamma).exp(), phase))
}

/// Phases of the `{n},{m}` element.
pub fn phases(model: &dyn DephasingSource, n: &PseudospinConfig, m: &PseudospinConfig, t: f64) -> Result<PhaseSet> {
    model.phases(n, m, t)
}

/// `|ρ_nm|`.
pub fn coherence_magnitude(rho: &ReducedDensityMatrix, n: &PseudospinConfig, m: &PseudospinConfig) -> f64 {
    rho.element(n, m).norm()
}
