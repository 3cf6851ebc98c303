//! Dense and sparse operator plumbing for the small-system oracle: Pauli
//! builders, tensor embedding with qubit 0 as the leftmost factor, and a
//! minimal sparse-row operator for fast Liouvillian application.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

pub fn sigma_plus() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])
}

pub fn sigma_minus() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)])
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Embeds single-qubit operators on the listed qubits into the full
/// 2^n-dimensional space; qubit 0 is the leftmost (most significant) tensor
/// factor. Unlisted qubits carry the identity.
pub fn op_on_sites(n_qubits: usize, ops: &[(usize, &CMat)]) -> CMat {
    let mut full = CMat::identity(1, 1);
    for qubit in 0..n_qubits {
        let factor = ops
            .iter()
            .find(|(site, _)| *site == qubit)
            .map(|(_, m)| (*m).clone())
            .unwrap_or_else(|| identity(2));
        full = full.kronecker(&factor);
    }
    full
}

/// Hermitian part (ρ + ρ†)/2, applied in place.
pub fn hermitize(rho: &mut CMat) {
    let n = rho.nrows();
    for r in 0..n {
        for col in r..n {
            let avg = 0.5 * (rho[(r, col)] + rho[(col, r)].conj());
            rho[(r, col)] = avg;
            rho[(col, r)] = avg.conj();
        }
    }
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().sum()
}

/// Re Tr[op ρ].
pub fn expectation(op: &CMat, rho: &CMat) -> f64 {
    let n = rho.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..n {
        for k in 0..n {
            acc += op[(r, k)] * rho[(k, r)];
        }
    }
    acc.re
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

/// exp(M) of a Hermitian matrix via its eigendecomposition.
pub fn hermitian_exp(m: &CMat) -> CMat {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut d = CMat::zeros(n, n);
    for k in 0..n {
        d[(k, k)] = c(eig.eigenvalues[k].exp());
    }
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Row-compressed sparse operator on the full Hilbert space.
#[derive(Debug, Clone)]
pub struct SparseOp {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOp {
    pub fn from_dense(m: &CMat) -> Self {
        let dim = m.nrows();
        let rows = (0..dim)
            .map(|r| {
                (0..dim)
                    .filter_map(|k| {
                        let v = m[(r, k)];
                        (v.norm_sqr() > 0.0).then_some((k, v))
                    })
                    .collect()
            })
            .collect();
        Self { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// y += α A x, column by column (matrices are column-major).
    pub fn apply_left(&self, alpha: Complex64, x: &CMat, y: &mut CMat) {
        let n = self.dim;
        let xs = x.as_slice();
        let ys = y.as_mut_slice();
        for col in 0..n {
            let xcol = &xs[col * n..(col + 1) * n];
            let ycol = &mut ys[col * n..(col + 1) * n];
            for (r, row) in self.rows.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(k, v) in row {
                    acc += v * xcol[k];
                }
                ycol[r] += alpha * acc;
            }
        }
    }

    /// y += α x A: scatter columns of x scaled by the entries of A's rows.
    pub fn apply_right(&self, alpha: Complex64, x: &CMat, y: &mut CMat) {
        let n = self.dim;
        let xs = x.as_slice();
        let ys = y.as_mut_slice();
        for (k, row) in self.rows.iter().enumerate() {
            let xcol = &xs[k * n..(k + 1) * n];
            for &(col, v) in row {
                let w = alpha * v;
                let ycol = &mut ys[col * n..(col + 1) * n];
                for (yr, xr) in ycol.iter_mut().zip(xcol) {
                    *yr += w * xr;
                }
            }
        }
    }
}
