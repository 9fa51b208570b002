//! Small complex linear-algebra helpers for the oracle: a CSR matrix for
//! truncated-Fock Hamiltonians and the action of `exp(-iHt)` on vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl Csr {
    /// Build from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, Complex64)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Csr { n, indptr, indices, values }
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[j] * x[self.indices[j]];
            }
            *out = acc;
        }
    }

    /// Largest absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut cols = vec![0.0; self.n];
        for (j, v) in self.indices.iter().zip(&self.values) {
            cols[*j] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for j in self.indptr[r]..self.indptr[r + 1] {
                m[(r, self.indices[j])] += self.values[j];
            }
        }
        m
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(-i H t) v` by Taylor series on substeps with `‖H‖₁ |Δt| ≤ 1`,
/// truncated once a term drops below 1e-18 of the running sum.
pub fn expm_multiply(h: &Csr, t: f64, v: &[Complex64]) -> Vec<Complex64> {
    let steps = (h.norm1() * t.abs()).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let factor = Complex64::new(0.0, -dt);
    let mut out = v.to_vec();
    let mut term = vec![Complex64::new(0.0, 0.0); v.len()];
    let mut next = vec![Complex64::new(0.0, 0.0); v.len()];
    for _ in 0..steps {
        term.copy_from_slice(&out);
        for j in 1..=60 {
            h.matvec(&term, &mut next);
            let scale = factor / j as f64;
            for (a, b) in term.iter_mut().zip(&next) {
                *a = b * scale;
            }
            for (o, a) in out.iter_mut().zip(&term) {
                *o += a;
            }
            if norm(&term) <= 1e-18 * norm(&out) {
                break;
            }
        }
    }
    out
}

/// Dense `exp(a)` (Padé with scaling and squaring).
pub fn expm(a: &CMatrix) -> CMatrix {
    a.exp()
}

/// Spectral norm via the largest eigenvalue of `a† a`.
pub fn operator_norm(a: &CMatrix) -> f64 {
    let g = a.adjoint() * a;
    let eig = nalgebra::linalg::SymmetricEigen::new(g);
    eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt()
}
