//! Brute-force validators for the continuum results.
//!
//! [`DiscreteSpinBoson`] is the independent-boson Hamiltonian with a finite
//! list of modes, in reduced units (ħ = 1):
//!
//! `H = Σ_j E_j b_j†b_j + Σ_j (λ_j b_j + λ_j* b_j†)`, with
//! `λ_j = Σ_i Ω_{i,n_i}(j)` for the configuration `{n}`.
//!
//! Its closed-form decay and phases are finite sums; [`exact_propagate`]
//! checks them against a truncated Fock space.
//!
//! [`exact_propagate`]: DiscreteSpinBoson::exact_propagate

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::coupling::{Geometry, PseudospinConfig, Well};
use crate::densmat::{DephasingSource, PhaseSet, ReducedDensityMatrix};
use crate::error::{Error, Result};
use crate::kernels::{phase_weight, Bath};
use crate::linalg::{expm, expm_multiply, operator_norm, CMatrix, Csr};
use crate::params::Dimension;

/// Largest Hilbert-space dimension the exact methods will build.
pub const DIMENSION_CAP: usize = 1 << 14;

/// Top-Fock population above which truncation is reported.
pub const LEAKAGE_THRESHOLD: f64 = 1e-8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// |k| in reduced units; informational.
    pub k: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct DiscreteSpinBoson {
    pub modes: Vec<Mode>,
    /// `Ω_{i,w}(j)` at `(j·n_spins + i)·2 + w`, with `w = 0` left, 1 right.
    pub couplings: Vec<Complex64>,
    pub n_spins: usize,
    /// Highest Fock number kept per mode.
    pub cutoff: usize,
    /// Inverse temperature in reduced units; `None` at T = 0.
    pub beta: Option<f64>,
    /// Seconds per reduced time unit.
    pub time_unit: f64,
    /// Box volume (reduced units) whose mode density matches the grid.
    pub volume: f64,
}

/// Result of [`DiscreteSpinBoson::exact_propagate`].
#[derive(Debug, Clone)]
pub struct Propagated {
    pub rho: ReducedDensityMatrix,
    /// Largest population found in the top Fock level of any mode.
    pub leakage: f64,
}

impl Propagated {
    pub fn leakage_warning(&self) -> Option<String> {
        (self.leakage > LEAKAGE_THRESHOLD).then(|| format!("Fock truncation leakage {:.3e} exceeds {LEAKAGE_THRESHOLD:e}", self.leakage))
    }
}

fn well_index(w: Well) -> usize {
    match w {
        Well::Left => 0,
        Well::Right => 1,
    }
}

impl DiscreteSpinBoson {
    pub fn new(modes: Vec<Mode>, couplings: Vec<Complex64>, n_spins: usize, cutoff: usize, beta: Option<f64>, time_unit: f64) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::InvalidModel("need at least one spin".into()));
        }
        if let Some(bad) = modes.iter().position(|m| !(m.energy > 0.0 && m.energy.is_finite())) {
            return Err(Error::InvalidModel(format!("mode {bad} has energy {} (must be > 0)", modes[bad].energy)));
        }
        if cutoff < 4 {
            return Err(Error::InvalidModel(format!("Fock cutoff {cutoff} is below 4")));
        }
        if couplings.len() != modes.len() * n_spins * 2 {
            return Err(Error::LengthMismatch { left: couplings.len(), right: modes.len() * n_spins * 2 });
        }
        if let Some(b) = beta {
            if !(b > 0.0) {
                return Err(Error::InvalidModel("beta must be > 0".into()));
            }
        }
        if !(time_unit > 0.0) {
            return Err(Error::InvalidModel("time unit must be > 0".into()));
        }
        Ok(DiscreteSpinBoson { modes, couplings, n_spins, cutoff, beta, time_unit, volume: f64::NAN })
    }

    /// Discretise the continuum bath on a k grid.
    ///
    /// 3D: `n_radial` midpoint shells on `[0, 8/σ]` times Gauss-Legendre
    /// nodes in `cos θ`, enough for the phase `k·span` across the lattice.
    /// 1D: `n_radial` midpoints on each half line. Each mode carries its
    /// cell weight so that `Σ_j → ∫ d^dk/(2π)^d`.
    pub fn from_grid(bath: &Bath, geometry: &Geometry, n_radial: usize, cutoff: usize) -> Result<Self> {
        if n_radial == 0 {
            return Err(Error::param("n_radial", "must be >= 1"));
        }
        let g = bath.reduced_geometry(geometry);
        let k_max = 8.0 / g.sigma;
        let h = k_max / n_radial as f64;
        let span = g.span();

        // (k, axial component of the unit vector, cell weight in k-space)
        let mut cells: Vec<(f64, f64, f64)> = Vec::new();
        match bath.dim {
            Dimension::Three => {
                let n_polar = ((0.75 * k_max * span).ceil() as usize + 16).max(16);
                let (nodes, weights) = gauss_legendre(n_polar);
                cells.reserve(n_radial * n_polar);
                for r in 0..n_radial {
                    let k = (r as f64 + 0.5) * h;
                    for (&u, &w) in nodes.iter().zip(&weights) {
                        cells.push((k, u, 2.0 * PI * k * k * h * w));
                    }
                }
            }
            Dimension::One => {
                cells.reserve(2 * n_radial);
                for r in 0..n_radial {
                    let k = (r as f64 + 0.5) * h;
                    cells.push((k, 1.0, h));
                    cells.push((k, -1.0, h));
                }
            }
        }

        Self::from_cells(bath, geometry, &cells, cutoff)
    }

    /// Modes at explicit k-space cells `(|k|, cos θ, weight)`, reduced units.
    /// The coupling of each mode is the continuum one times `√(weight/(2π)^d)`.
    pub fn from_cells(bath: &Bath, geometry: &Geometry, cells: &[(f64, f64, f64)], cutoff: usize) -> Result<Self> {
        if let Some(c) = cells.iter().find(|c| !(c.0 > 0.0 && c.1.abs() <= 1.0 && c.2 > 0.0)) {
            return Err(Error::InvalidModel(format!("bad cell {c:?}: need k > 0, |cos θ| <= 1, weight > 0")));
        }
        let g = bath.reduced_geometry(geometry);
        let n_spins = g.n_sites();
        let sigma = g.sigma;
        let d = bath.dim.as_usize() as i32;
        let norm = (2.0 * PI).powi(d);
        let total_weight: f64 = cells.iter().map(|c| c.2).sum();
        let disp = bath.dispersion;
        let mut modes = Vec::with_capacity(cells.len());
        let mut couplings = Vec::with_capacity(cells.len() * n_spins * 2);
        for &(k, u, w) in cells {
            modes.push(Mode { k, energy: disp.energy(k) });
            let amp = (w / norm * bath.strength * disp.uv_suppression(k)).sqrt() * (-k * k * sigma * sigma / 4.0).exp();
            for i in 0..n_spins {
                for well in [Well::Left, Well::Right] {
                    couplings.push(Complex64::from_polar(amp, k * u * g.well_position(i, well)));
                }
            }
        }
        let mut model = Self::new(modes, couplings, n_spins, cutoff, bath.beta, bath.units.time_unit)?;
        model.volume = norm * cells.len() as f64 / total_weight;
        Ok(model)
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    #[inline]
    pub fn coupling(&self, mode: usize, site: usize, well: Well) -> Complex64 {
        self.couplings[(mode * self.n_spins + site) * 2 + well_index(well)]
    }

    /// `λ_j` for configuration `n`.
    fn lambda(&self, j: usize, n: &PseudospinConfig) -> Complex64 {
        (0..self.n_spins).map(|i| self.coupling(j, i, n.well(i))).sum()
    }

    fn coth(&self, e: f64) -> f64 {
        match self.beta {
            None => 1.0,
            Some(b) => 1.0 + 2.0 / (b * e).exp_m1(),
        }
    }

    fn check(&self, n: &PseudospinConfig, m: &PseudospinConfig) -> Result<()> {
        for c in [n, m] {
            if c.len() != self.n_spins {
                return Err(Error::LengthMismatch { left: c.len(), right: self.n_spins });
            }
        }
        Ok(())
    }

    fn reduced_time(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::param("t", "time must be finite and >= 0"));
        }
        Ok(t / self.time_unit)
    }

    /// `Γ_nm(t) = Σ_j |λ_j^n - λ_j^m|² (1 - cos E_j t)/E_j² coth(βE_j/2)`,
    /// `t` in seconds.
    pub fn discrete_gamma(&self, n: &PseudospinConfig, m: &PseudospinConfig, t: f64) -> Result<f64> {
        self.check(n, m)?;
        let t = self.reduced_time(t)?;
        let mut acc = Neumaier::default();
        for (j, mode) in self.modes.iter().enumerate() {
            let dl = self.lambda(j, n) - self.lambda(j, m);
            let s = (0.5 * mode.energy * t).sin();
            acc.add(dl.norm_sqr() * 2.0 * s * s / (mode.energy * mode.energy) * self.coth(mode.energy));
        }
        Ok(acc.sum())
    }

    /// Closed-form phases Θ, Ξ, Δ of the `{n},{m}` element, `t` in seconds.
    pub fn discrete_phases(&self, n: &PseudospinConfig, m: &PseudospinConfig, t: f64) -> Result<PhaseSet> {
        self.check(n, m)?;
        let t = self.reduced_time(t)?;
        let mut out = PhaseSet::default();
        for (j, mode) in self.modes.iter().enumerate() {
            let e = mode.energy;
            let f_over_e2 = phase_weight(e, t);
            let s = (0.5 * e * t).sin();
            let one_minus_cos_over_e2 = 2.0 * s * s / (e * e);
            let mut a_n = ZERO;
            let mut a_m = ZERO;
            let mut s_all = ZERO;
            let mut occ = ZERO;
            for i in 0..self.n_spins {
                let left = self.coupling(j, i, Well::Left);
                let right = self.coupling(j, i, Well::Right);
                let dw = right - left;
                a_n += dw * n.sigma_z(i);
                a_m += dw * m.sigma_z(i);
                s_all += right + left;
                occ += dw * (n.bit(i) as f64 - m.bit(i) as f64);
            }
            out.theta += 0.25 * f_over_e2 * (a_n.norm_sqr() - a_m.norm_sqr());
            out.xi += f_over_e2 * (s_all.conj() * occ).re;
            let (ln, lm) = (self.lambda(j, n), self.lambda(j, m));
            out.delta += (ln.conj() * lm).im * 2.0 * one_minus_cos_over_e2;
        }
        Ok(out)
    }

    fn bath_dim(&self) -> Result<usize> {
        let levels = self.cutoff + 1;
        let mut dim: usize = 1;
        for _ in 0..self.n_modes() {
            dim = dim.checked_mul(levels).filter(|&d| d <= DIMENSION_CAP).ok_or(Error::DimensionCap { dim: usize::MAX, cap: DIMENSION_CAP })?;
        }
        let full = dim << self.n_spins;
        if full > DIMENSION_CAP {
            return Err(Error::DimensionCap { dim: full, cap: DIMENSION_CAP });
        }
        Ok(dim)
    }

    /// Fock digits of bath basis state `index` (mode 0 fastest).
    fn occupations(&self, mut index: usize) -> Vec<usize> {
        let levels = self.cutoff + 1;
        (0..self.n_modes())
            .map(|_| {
                let d = index % levels;
                index /= levels;
                d
            })
            .collect()
    }

    fn stride(&self, mode: usize) -> usize {
        (self.cutoff + 1).pow(mode as u32)
    }

    /// Truncated bath Hamiltonian for configuration `n`, as triplets.
    fn sector_triplets(&self, n: &PseudospinConfig, dim: usize) -> Vec<(usize, usize, Complex64)> {
        let lambdas: Vec<Complex64> = (0..self.n_modes()).map(|j| self.lambda(j, n)).collect();
        let mut out = Vec::new();
        for s in 0..dim {
            let occ = self.occupations(s);
            let diag: f64 = occ.iter().zip(&self.modes).map(|(&o, m)| o as f64 * m.energy).sum();
            out.push((s, s, Complex64::new(diag, 0.0)));
            for (j, &o) in occ.iter().enumerate() {
                if o < self.cutoff {
                    // <o+1| b† |o> = √(o+1), paired with λ*; the λ b term is its adjoint
                    let up = s + self.stride(j);
                    let v = lambdas[j].conj() * ((o + 1) as f64).sqrt();
                    out.push((up, s, v));
                    out.push((s, up, v.conj()));
                }
            }
        }
        out
    }

    /// Per-mode Gibbs weights truncated at the cutoff and renormalised.
    fn thermal_weights(&self, dim: usize) -> Vec<f64> {
        let Some(beta) = self.beta else {
            let mut w = vec![0.0; dim];
            w[0] = 1.0;
            return w;
        };
        let per_mode: Vec<Vec<f64>> = self
            .modes
            .iter()
            .map(|m| {
                let p: Vec<f64> = (0..=self.cutoff).map(|o| (-beta * m.energy * o as f64).exp()).collect();
                let z: f64 = p.iter().sum();
                p.into_iter().map(|x| x / z).collect()
            })
            .collect();
        (0..dim).map(|s| self.occupations(s).iter().enumerate().map(|(j, &o)| per_mode[j][o]).product()).collect()
    }

    fn top_population(&self, psi: &[Complex64]) -> f64 {
        psi.iter().enumerate().filter(|(s, _)| self.occupations(*s).contains(&self.cutoff)).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Exact evolution of `rho0` (spins) times the thermal bath over `t`
    /// seconds on the truncated Fock space, tracing out the bath.
    ///
    /// The Hamiltonian is block diagonal in the pseudospin configuration,
    /// so each block acts on the bath alone; the exact unitary is applied
    /// to each bath basis state with non-negligible Gibbs weight.
    pub fn exact_propagate(&self, rho0: &ReducedDensityMatrix, t: f64) -> Result<Propagated> {
        if rho0.n_sites() != self.n_spins {
            return Err(Error::LengthMismatch { left: rho0.n_sites(), right: self.n_spins });
        }
        let tr = self.reduced_time(t)?;
        let dim = self.bath_dim()?;
        let weights = self.thermal_weights(dim);
        let inputs: Vec<usize> = (0..dim).filter(|&s| weights[s] > 1e-14).collect();
        let n_cfg = 1usize << self.n_spins;

        // evolved[c][k] = U_c |input k>
        let mut evolved: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(n_cfg);
        let mut leakage: f64 = 0.0;
        for c in 0..n_cfg {
            let cfg = PseudospinConfig::from_index(c, self.n_spins);
            let h = Csr::from_triplets(dim, self.sector_triplets(&cfg, dim));
            let mut per_input = Vec::with_capacity(inputs.len());
            for &s in &inputs {
                let mut v = vec![ZERO; dim];
                v[s] = Complex64::new(1.0, 0.0);
                let out = expm_multiply(&h, tr, &v);
                leakage = leakage.max(self.top_population(&out));
                per_input.push(out);
            }
            evolved.push(per_input);
        }

        let mut data = rho0.data().to_vec();
        for a in 0..n_cfg {
            for b in 0..n_cfg {
                let r = rho0.get(a, b);
                if a == b || r == ZERO {
                    continue;
                }
                // Tr_B[U_a ρ_B U_b†] = Σ_k p_k <ψ_b^k|ψ_a^k>
                let mut overlap = ZERO;
                for (k, &s) in inputs.iter().enumerate() {
                    let dot: Complex64 = evolved[b][k].iter().zip(&evolved[a][k]).map(|(x, y)| x.conj() * y).sum();
                    overlap += dot * weights[s];
                }
                data[a * n_cfg + b] = r * overlap;
            }
        }
        Ok(Propagated { rho: ReducedDensityMatrix::from_raw(self.n_spins, data), leakage })
    }

    /// Bath annihilation operator for `mode` on the truncated space.
    fn annihilation(&self, mode: usize, dim: usize) -> CMatrix {
        let mut b = CMatrix::zeros(dim, dim);
        let stride = self.stride(mode);
        for s in 0..dim {
            let o = self.occupations(s)[mode];
            if o > 0 {
                b[(s - stride, s)] = Complex64::new((o as f64).sqrt(), 0.0);
            }
        }
        b
    }

    /// Largest deviation, over inputs `|spins⟩ ⊗ |vacuum⟩`, between
    /// `exp(-iHt)` and the disentangled product
    /// `exp(-iH_B t) D(Σ_i A_i σ_z^i + α) exp(iφ)`, with
    /// `A_i = (1 - e^{iEt})ΔΩ_i*/(2E)`, `α = (1 - e^{iEt})S*/(2E)` per mode
    /// and the scalar phase `φ` built from `f = Et - sin Et`.
    ///
    /// Both sides are built as full (spins ⊗ bath) matrices.
    pub fn factorization_residual(&self, t: f64) -> Result<f64> {
        let tr = self.reduced_time(t)?;
        let bath_dim = self.bath_dim()?;
        let n_cfg = 1usize << self.n_spins;
        let dim = n_cfg * bath_dim;
        let bs: Vec<CMatrix> = (0..self.n_modes()).map(|j| self.annihilation(j, bath_dim)).collect();

        let mut h = CMatrix::zeros(dim, dim);
        let mut generator = CMatrix::zeros(dim, dim);
        let mut free_phase = vec![ZERO; dim];
        let mut scalar_phase = vec![0.0; dim];
        for c in 0..n_cfg {
            let cfg = PseudospinConfig::from_index(c, self.n_spins);
            let off = c * bath_dim;
            let mut hb = CMatrix::zeros(bath_dim, bath_dim);
            let mut gen = CMatrix::zeros(bath_dim, bath_dim);
            for (j, mode) in self.modes.iter().enumerate() {
                let e = mode.energy;
                let b = &bs[j];
                let bd = b.adjoint();
                let lam = self.lambda(j, &cfg);
                hb += (&bd * b) * Complex64::new(e, 0.0) + b * lam + &bd * lam.conj();

                let w = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, e * tr)) / (2.0 * e);
                let mut disp = ZERO;
                let mut s_all = ZERO;
                let mut spin_part = 0.0;
                let mut cross = 0.0;
                for i in 0..self.n_spins {
                    let dw = self.coupling(j, i, Well::Right) - self.coupling(j, i, Well::Left);
                    let sw = self.coupling(j, i, Well::Right) + self.coupling(j, i, Well::Left);
                    disp += w * dw.conj() * cfg.sigma_z(i);
                    s_all += sw;
                    for k in 0..self.n_spins {
                        let dk = self.coupling(j, k, Well::Right) - self.coupling(j, k, Well::Left);
                        spin_part += (dw * dk.conj()).re * cfg.sigma_z(i) * cfg.sigma_z(k);
                    }
                }
                for i in 0..self.n_spins {
                    let dw = self.coupling(j, i, Well::Right) - self.coupling(j, i, Well::Left);
                    cross += (dw * s_all.conj()).re * cfg.sigma_z(i);
                }
                disp += w * s_all.conj();
                gen += &bd * disp - b * disp.conj();
                let f = phase_weight(e, tr);
                scalar_phase[off..off + bath_dim].iter_mut().for_each(|p| *p += f * (0.25 * spin_part + 0.5 * cross + 0.25 * s_all.norm_sqr()));
            }
            h.view_mut((off, off), (bath_dim, bath_dim)).copy_from(&hb);
            generator.view_mut((off, off), (bath_dim, bath_dim)).copy_from(&gen);
            for s in 0..bath_dim {
                let occ = self.occupations(s);
                let e0: f64 = occ.iter().zip(&self.modes).map(|(&o, m)| o as f64 * m.energy).sum();
                free_phase[off + s] = Complex64::from_polar(1.0, -e0 * tr);
            }
        }

        let exact = expm(&(h * Complex64::new(0.0, -tr)));
        let displaced = expm(&generator);
        let mut diff = CMatrix::zeros(dim, n_cfg);
        for c in 0..n_cfg {
            let col = c * bath_dim;
            let phase = Complex64::from_polar(1.0, scalar_phase[col]);
            for r in 0..dim {
                let product = free_phase[r] * displaced[(r, col)] * phase;
                diff[(r, c)] = exact[(r, col)] - product;
            }
        }
        Ok(operator_norm(&diff))
    }
}

impl DephasingSource for DiscreteSpinBoson {
    fn n_sites(&self) -> usize {
        self.n_spins
    }

    fn exponent(&self, n: &PseudospinConfig, m: &PseudospinConfig, t: f64) -> Result<f64> {
        self.discrete_gamma(n, m, t)
    }

    fn phases(&self, n: &PseudospinConfig, m: &PseudospinConfig, t: f64) -> Result<PhaseSet> {
        self.discrete_phases(n, m, t)
    }
}

/// `‖exp(g a†) exp(-g* a)|0⟩ - exp(g a† - g* a) e^{|g|²/2}|0⟩‖` on a Fock
/// space truncated at `cutoff` quanta per mode, one mode per entry of `g`.
pub fn glauber_residual(g: &[Complex64], cutoff: usize) -> Result<f64> {
    if cutoff == 0 {
        return Err(Error::param("cutoff", "must be >= 1"));
    }
    let levels = cutoff + 1;
    levels.checked_pow(g.len() as u32).filter(|&d| d <= DIMENSION_CAP).ok_or(Error::DimensionCap { dim: usize::MAX, cap: DIMENSION_CAP })?;
    let mut a = CMatrix::zeros(levels, levels);
    for o in 1..levels {
        a[(o - 1, o)] = Complex64::new((o as f64).sqrt(), 0.0);
    }
    let ad = a.adjoint();
    let mut lhs = vec![Complex64::new(1.0, 0.0)];
    let mut rhs = vec![Complex64::new(1.0, 0.0)];
    for &gj in g {
        let left = expm(&(&ad * gj)) * expm(&(&a * (-gj.conj())));
        let right = expm(&(&ad * gj - &a * gj.conj())) * Complex64::new((0.5 * gj.norm_sqr()).exp(), 0.0);
        let l: Vec<Complex64> = left.column(0).iter().cloned().collect();
        let r: Vec<Complex64> = right.column(0).iter().cloned().collect();
        lhs = kron(&lhs, &l);
        rhs = kron(&rhs, &r);
    }
    Ok(lhs.iter().zip(&rhs).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt())
}

/// Compensated summation; grid sums run over ~10⁶ terms.
#[derive(Default)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.carry
    }
}

fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    b.iter().flat_map(|&y| a.iter().map(move |&x| x * y)).collect()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::BathKind;
    use crate::params::PhysicalParams;
    use crate::quadrature::QuadratureSpec;
    use approx::assert_relative_eq;

    fn cfg(bits: &[u8]) -> PseudospinConfig {
        PseudospinConfig::new(bits.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Hand-built model with couplings of order `scale`.
    fn toy(n_spins: usize, energies: &[f64], scale: f64, cutoff: usize, beta: Option<f64>) -> DiscreteSpinBoson {
        let modes: Vec<Mode> = energies.iter().map(|&e| Mode { k: e, energy: e }).collect();
        let mut couplings = Vec::new();
        for j in 0..modes.len() {
            for i in 0..n_spins {
                for w in 0..2 {
                    let phase = 0.7 * (j + 1) as f64 * (2.0 * i as f64 + w as f64 - 1.3);
                    couplings.push(Complex64::from_polar(scale * (1.0 + 0.3 * w as f64 - 0.1 * i as f64), phase));
                }
            }
        }
        DiscreteSpinBoson::new(modes, couplings, n_spins, cutoff, beta, 1.0).unwrap()
    }

    fn plus_state(n: usize) -> ReducedDensityMatrix {
        let d = 1usize << n;
        let a = c(1.0 / (d as f64).sqrt(), 0.0);
        ReducedDensityMatrix::from_pure(n, &vec![a; d]).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert_relative_eq!(int, 2.0 / 13.0, max_relative = 1e-13);
        let (x, w) = gauss_legendre(60);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * (20.0 * x).cos()).sum();
        assert_relative_eq!(int, 2.0 * 20f64.sin() / 20.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_invalid_models() {
        let m = vec![Mode { k: 1.0, energy: 1.0 }];
        assert!(DiscreteSpinBoson::new(m.clone(), vec![ZERO; 2], 1, 3, None, 1.0).is_err());
        assert!(DiscreteSpinBoson::new(vec![Mode { k: 1.0, energy: 0.0 }], vec![ZERO; 2], 1, 4, None, 1.0).is_err());
        assert!(DiscreteSpinBoson::new(m.clone(), vec![ZERO; 3], 1, 4, None, 1.0).is_err());
        let big = toy(2, &[1.0, 2.0, 3.0, 4.0], 0.1, 10, None);
        assert!(matches!(big.exact_propagate(&plus_state(2), 1.0), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn single_mode_gamma_is_periodic() {
        let m = toy(1, &[1.7], 0.2, 4, None);
        let (n, mm) = (cfg(&[0]), cfg(&[1]));
        assert_eq!(m.discrete_gamma(&n, &mm, 0.0).unwrap(), 0.0);
        let period = 2.0 * PI / 1.7;
        for t in [0.3, 1.1, 2.9] {
            let a = m.discrete_gamma(&n, &mm, t).unwrap();
            assert_relative_eq!(m.discrete_gamma(&n, &mm, t + period).unwrap(), a, max_relative = 1e-12);
        }
        let dl = m.coupling(0, 0, Well::Right) - m.coupling(0, 0, Well::Left);
        let t = 0.8;
        let expected = dl.norm_sqr() * (1.0 - (1.7f64 * t).cos()) / (1.7 * 1.7);
        assert_relative_eq!(m.discrete_gamma(&n, &mm, t).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn decoupled_model_is_static() {
        let mut m = toy(2, &[1.0, 1.5], 0.1, 4, None);
        m.couplings.iter_mut().for_each(|g| *g = ZERO);
        let rho = plus_state(2);
        let out = m.exact_propagate(&rho, 3.0).unwrap();
        for (a, b) in out.rho.data().iter().zip(rho.data()) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!(m.factorization_residual(2.0).unwrap() < 1e-12);
    }

    #[test]
    fn one_spin_two_modes_matches_closed_form() {
        let m = toy(1, &[1.0, 1.6], 0.08, 8, None);
        let rho = plus_state(1);
        let (n, mm) = (cfg(&[0]), cfg(&[1]));
        for t in [0.5, 2.0, 7.3] {
            let out = m.exact_propagate(&rho, t).unwrap();
            assert!(out.leakage < 1e-8);
            let r = out.rho.get(0, 1) / rho.get(0, 1);
            let g = m.discrete_gamma(&n, &mm, t).unwrap();
            let p = m.discrete_phases(&n, &mm, t).unwrap();
            assert!((r.norm() - (-g).exp()).abs() < 1e-6);
            let dphi = (r.arg() - p.total() + PI).rem_euclid(2.0 * PI) - PI;
            assert!(dphi.abs() < 1e-6, "phase off by {dphi}");
            assert!(p.delta.abs() > 1e-6, "test needs a non-trivial Δ");
        }
    }

    #[test]
    fn thermal_bath_matches_closed_form() {
        let m = toy(1, &[1.0, 1.6], 0.05, 12, Some(2.0));
        let rho = plus_state(1);
        let (n, mm) = (cfg(&[0]), cfg(&[1]));
        let t = 1.7;
        let out = m.exact_propagate(&rho, t).unwrap();
        let r = out.rho.get(0, 1) / rho.get(0, 1);
        let g = m.discrete_gamma(&n, &mm, t).unwrap();
        let p = m.discrete_phases(&n, &mm, t).unwrap();
        assert!((r.norm() - (-g).exp()).abs() < 1e-6);
        assert!((r.arg() - p.total()).abs() < 1e-6);
    }

    #[test]
    fn two_spins_obey_collective_identity() {
        let m = toy(2, &[1.0, 1.4, 2.1], 0.06, 10, None);
        let rho = plus_state(2);
        let t = 2.5;
        let out = m.exact_propagate(&rho, t).unwrap();
        let g = |a: usize, b: usize| -(out.rho.get(a, b) / rho.get(a, b)).norm().ln();
        // Γ₁ from {00},{11}; Γ₂ from {01},{10}; Γ₀ from a single flipped site
        let g1 = g(0, 3);
        let g2 = g(1, 2);
        let g0a = g(0, 1);
        let g0b = g(0, 2);
        let g0c = g(1, 3);
        let g0d = g(2, 3);
        assert_relative_eq!(g1 + g2, g0a + g0b + g0c + g0d, max_relative = 1e-8);
        for a in 0..4 {
            assert!((out.rho.get(a, a) - rho.get(a, a)).norm() < 1e-14);
        }
        assert!(out.rho.min_eigenvalue() > -1e-10);
        assert!((out.rho.trace() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn factorization_holds_over_a_period() {
        let m = toy(2, &[1.0, 1.3], 0.01, 8, None);
        assert_eq!(m.factorization_residual(0.0).unwrap(), 0.0);
        let r = m.factorization_residual(2.0 * PI).unwrap();
        assert!(r < 1e-8, "residual {r}");
    }

    #[test]
    fn glauber_relation() {
        assert_eq!(glauber_residual(&[ZERO], 12).unwrap(), 0.0);
        let small = glauber_residual(&[c(0.3, 0.4)], 20).unwrap();
        assert!(small < 1e-12, "{small}");
        let r: Vec<f64> = (3..=8).map(|cut| glauber_residual(&[c(1.0, 0.0)], cut).unwrap()).collect();
        assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
    }

    #[test]
    fn grid_reproduces_continuum_gamma() {
        let bath = Bath::new(&PhysicalParams::paper_sec4(), BathKind::Condensate).unwrap();
        let geom = bath.geometry(1);
        let spec = QuadratureSpec::default();
        let t = 50e-6;
        let exact = bath.gamma0_3d(t, &spec).unwrap().value;
        let model = DiscreteSpinBoson::from_grid(&bath, &geom, 4000, 4).unwrap();
        let g = model.discrete_gamma(&cfg(&[0]), &cfg(&[1]), t).unwrap();
        assert_relative_eq!(g, exact, max_relative = 1e-4);
        assert!(model.volume > 0.0);
    }

    #[test]
    fn grid_phases_match_continuum() {
        let bath = Bath::new(&PhysicalParams::paper_sec4(), BathKind::Condensate).unwrap();
        let geom = bath.geometry(2);
        let spec = QuadratureSpec::default();
        let t = 20e-6;
        let model = DiscreteSpinBoson::from_grid(&bath, &geom, 3000, 4).unwrap();
        let (n, m) = (cfg(&[0, 0]), cfg(&[1, 0]));
        let (theta, xi) = bath.phase_integrals(&geom, &n, &m, t, &spec).unwrap();
        let p = model.discrete_phases(&n, &m, t).unwrap();
        assert_relative_eq!(p.theta, theta.value, max_relative = 1e-4, epsilon = 1e-9);
        assert_relative_eq!(p.xi, xi.value, max_relative = 1e-4, epsilon = 1e-9);
        assert!(p.delta.abs() < 1e-9 * (1.0 + p.xi.abs()), "Δ = {}", p.delta);
    }
}
