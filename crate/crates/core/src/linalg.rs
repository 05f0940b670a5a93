//! Small dense linear-algebra helpers shared by the other modules.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// `n × n` complex identity.
pub fn eye(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let s = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigenvalues of a general complex square matrix via the Schur form.
pub fn complex_eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Eigenvalues of a general real square matrix.
pub fn real_matrix_eigenvalues(m: &DMatrix<f64>) -> Vec<C64> {
    m.complex_eigenvalues().iter().copied().collect()
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Trace of a complex square matrix.
pub fn trace(m: &DMatrix<C64>) -> C64 {
    m.diagonal().iter().sum()
}

/// Row-major vectorization: `vec(ρ)[r * d + c] = ρ[r, c]`.
pub fn vec_row_major(m: &DMatrix<C64>) -> DVector<C64> {
    let (r, c) = m.shape();
    DVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

/// Inverse of [`vec_row_major`] for a `d × d` matrix.
pub fn unvec_row_major(v: &DVector<C64>, d: usize) -> DMatrix<C64> {
    assert_eq!(v.len(), d * d);
    DMatrix::from_fn(d, d, |r, c| v[r * d + c])
}
