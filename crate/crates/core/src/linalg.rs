//! Complex dense kernels shared by the quaternionic layer.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const C0: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub(crate) fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigen-decomposition of a hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first so that rounding noise in the lower
/// triangle cannot leak into the result.
pub(crate) fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Singular values, descending.
pub(crate) fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Count of singular values above `rel_tol * sigma_max`.
pub(crate) fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Rank of a hermitian matrix: eigenvalues with `|lambda| > rel_tol * max|lambda|`.
pub(crate) fn hermitian_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let values = eigvalsh(m);
    let top = values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if top == 0.0 {
        return 0;
    }
    values.iter().filter(|x| x.abs() > rel_tol * top).count()
}

pub(crate) fn default_rank_tol(dim: usize) -> f64 {
    dim.max(1) as f64 * f64::EPSILON
}

pub(crate) fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub(crate) fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}
