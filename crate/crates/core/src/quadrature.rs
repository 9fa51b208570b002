//! Globally adaptive Gauss-Kronrod (7/15) quadrature on a fixed set of
//! initial panels, for vector-valued integrands.
//!
//! Integrands return `[f64; N]` so that several related integrals share the
//! same nodes; identities that hold pointwise between the integrands then
//! hold between the results up to rounding. Each component converges to
//! `rel_tol` times its own L1 norm.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Controls for the radial integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Upper cutoff in units of `1/σ`. The Gaussian form factor
    /// `e^{-k²σ²/2}` is below 1.3e-14 at 8/σ.
    pub k_max_sigma: f64,
    pub rel_tol: f64,
    /// Largest advance of the phase `E(k)t/ħ` across one initial panel.
    pub max_phase: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { k_max_sigma: 8.0, rel_tol: 1e-9, max_phase: std::f64::consts::PI, max_subdivisions: 400_000 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_max_sigma > 0.0 && self.k_max_sigma.is_finite()) {
            return Err(Error::param("k_max", "must be finite and > 0"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(Error::param("rel_tol", "must lie in (0, 1e-3]"));
        }
        if !(self.max_phase > 0.0 && self.max_phase.is_finite()) {
            return Err(Error::param("max_phase", "must be finite and > 0"));
        }
        Ok(())
    }

    pub fn k_max(&self, sigma: f64) -> f64 {
        self.k_max_sigma / sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub abs_error: [f64; N],
    /// Integral of the absolute value, used as the tolerance scale.
    pub l1: [f64; N],
    pub panels: usize,
}

#[derive(Clone, Copy)]
struct Panel<const N: usize> {
    lo: f64,
    hi: f64,
    value: [f64; N],
    error: [f64; N],
    l1: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority.total_cmp(&other.priority) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn gk15<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, lo: f64, hi: f64) -> ([f64; N], [f64; N], [f64; N]) {
    let centr = 0.5 * (lo + hi);
    let hlgth = 0.5 * (hi - lo);
    let fc = f(centr);
    let mut resk = [0.0; N];
    let mut resg = [0.0; N];
    let mut resabs = [0.0; N];
    let mut fv1 = [[0.0; N]; 7];
    let mut fv2 = [[0.0; N]; 7];
    for i in 0..N {
        resk[i] = WGK[7] * fc[i];
        resg[i] = WG[3] * fc[i];
        resabs[i] = (WGK[7] * fc[i]).abs();
    }
    for j in 0..7 {
        let dx = hlgth * XGK[j];
        let f1 = f(centr - dx);
        let f2 = f(centr + dx);
        for i in 0..N {
            resk[i] += WGK[j] * (f1[i] + f2[i]);
            resabs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                resg[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }
    let mut err = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * resk[i];
        let mut resasc = WGK[7] * (fc[i] - mean).abs();
        for j in 0..7 {
            resasc += WGK[j] * ((fv1[j][i] - mean).abs() + (fv2[j][i] - mean).abs());
        }
        let h = hlgth.abs();
        resasc *= h;
        let mut e = ((resk[i] - resg[i]) * hlgth).abs();
        if resasc != 0.0 && e != 0.0 {
            e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
        }
        let ra = resabs[i] * h;
        if ra > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * ra);
        }
        resk[i] *= hlgth;
        resabs[i] = ra;
        err[i] = e;
    }
    (resk, err, resabs)
}

/// Integrate `f` over `[breaks[0], breaks.last()]`, starting from the
/// panels delimited by `breaks` and bisecting the worst panel until every
/// component satisfies `error ≤ rel_tol · ∫|f_i|`.
pub fn integrate<const N: usize, F>(f: F, breaks: &[f64], rel_tol: f64, max_subdivisions: usize) -> Result<Integral<N>>
where
    F: Fn(f64) -> [f64; N],
{
    integrate_with_floor(f, breaks, rel_tol, 0.0, max_subdivisions)
}

/// As [`integrate`], but a component also counts as converged once its
/// error is below `floor · max_j ∫|f_j|`. Components that cancel to
/// rounding noise then terminate against the scale of the others.
pub fn integrate_with_floor<const N: usize, F>(f: F, breaks: &[f64], rel_tol: f64, floor: f64, max_subdivisions: usize) -> Result<Integral<N>>
where
    F: Fn(f64) -> [f64; N],
{
    if breaks.len() < 2 {
        return Err(Error::param("breakpoints", "need at least two points"));
    }
    let mut raw = Vec::with_capacity(breaks.len() - 1);
    let mut l1 = [0.0; N];
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e, a) = gk15(&f, w[0], w[1]);
        for i in 0..N {
            l1[i] += a[i];
        }
        raw.push((w[0], w[1], v, e, a));
    }
    let tolerance = |l1: &[f64; N]| -> [f64; N] {
        let top = l1.iter().cloned().fold(0.0, f64::max);
        std::array::from_fn(|i| (rel_tol * l1[i]).max(floor * top))
    };
    let scale: [f64; N] = tolerance(&l1).map(|x| x.max(f64::MIN_POSITIVE));
    let priority = |e: &[f64; N]| (0..N).map(|i| e[i] / scale[i]).fold(0.0, f64::max);

    let mut heap = BinaryHeap::with_capacity(raw.len() * 2);
    let mut total = [0.0; N];
    let mut err = [0.0; N];
    let mut l1 = [0.0; N];
    for (lo, hi, v, e, a) in raw {
        for i in 0..N {
            total[i] += v[i];
            err[i] += e[i];
            l1[i] += a[i];
        }
        heap.push(Panel { lo, hi, value: v, error: e, l1: a, priority: priority(&e) });
    }

    let converged = |err: &[f64; N], l1: &[f64; N]| {
        let tol = tolerance(l1);
        (0..N).all(|i| err[i] <= tol[i])
    };
    let mut subdivisions = 0;
    while !converged(&err, &l1) {
        let worst = heap.pop().expect("heap holds every panel");
        if subdivisions >= max_subdivisions || worst.hi - worst.lo <= 4.0 * f64::EPSILON * worst.hi.abs().max(worst.lo.abs()) {
            let estimate = (0..N).map(|i| err[i]).fold(0.0, f64::max);
            return Err(Error::Quadrature { subdivisions, lo: worst.lo, hi: worst.hi, estimate });
        }
        subdivisions += 1;
        let mid = 0.5 * (worst.lo + worst.hi);
        let (v1, e1, a1) = gk15(&f, worst.lo, mid);
        let (v2, e2, a2) = gk15(&f, mid, worst.hi);
        for i in 0..N {
            total[i] += v1[i] + v2[i] - worst.value[i];
            err[i] += e1[i] + e2[i] - worst.error[i];
            l1[i] += a1[i] + a2[i] - worst.l1[i];
        }
        heap.push(Panel { lo: worst.lo, hi: mid, value: v1, error: e1, l1: a1, priority: priority(&e1) });
        heap.push(Panel { lo: mid, hi: worst.hi, value: v2, error: e2, l1: a2, priority: priority(&e2) });
    }

    // Re-sum from the final panels to shed accumulated update rounding.
    let mut value = [0.0; N];
    let mut abs_error = [0.0; N];
    let mut l1 = [0.0; N];
    let mut panels: Vec<_> = heap.into_vec();
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for p in &panels {
        for i in 0..N {
            value[i] += p.value[i];
            abs_error[i] += p.error[i];
            l1[i] += p.l1[i];
        }
    }
    Ok(Integral { value, abs_error, l1, panels: panels.len() })
}

/// Scalar integral of `f` over `[0, k_max]` with panel edges where the
/// phase `phase(k)` crosses multiples of `spec.max_phase`.
pub fn integrate_radial<F, P>(f: F, k_max: f64, phase_inverse: P, total_phase: f64, spec: &QuadratureSpec) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
{
    spec.validate()?;
    let breaks = oscillation_breaks(k_max, phase_inverse, total_phase, spec.max_phase, 0.0);
    let r = integrate(|k| [f(k)], &breaks, spec.rel_tol, spec.max_subdivisions)?;
    Ok((r.value[0], r.abs_error[0]))
}

/// Panel edges on `[0, k_max]`.
///
/// `phase_inverse(φ)` returns the k at which a monotone phase reaches φ and
/// `total_phase` is the phase at `k_max`; an edge is placed every
/// `max_phase`. Panels are then split so that none is wider than
/// `π/spatial`, which resolves factors like `sin(k y)` with `y ≤ spatial`.
pub fn oscillation_breaks<P: Fn(f64) -> f64>(k_max: f64, phase_inverse: P, total_phase: f64, max_phase: f64, spatial: f64) -> Vec<f64> {
    let mut coarse = vec![0.0];
    if total_phase.is_finite() && total_phase > max_phase {
        let n = (total_phase / max_phase).floor() as usize;
        for j in 1..=n {
            let k = phase_inverse(j as f64 * max_phase);
            if k > *coarse.last().unwrap() && k < k_max {
                coarse.push(k);
            }
        }
    }
    coarse.push(k_max);
    let max_width = if spatial > 0.0 { std::f64::consts::PI / spatial } else { f64::INFINITY };
    let mut out = Vec::with_capacity(coarse.len());
    out.push(0.0);
    for w in coarse.windows(2) {
        let width = w[1] - w[0];
        let pieces = ((width / max_width).ceil() as usize).max(1);
        for j in 1..pieces {
            out.push(w[0] + width * j as f64 / pieces as f64);
        }
        out.push(w[1]);
    }
    out
}
