//! Dense quaternionic matrices.
//!
//! `M = alpha + j beta` is stored as the complex pair `(alpha, beta)`. The
//! product follows from `j Z = conj(Z) j`:
//!
//! ```text
//! (A_a + j A_b)(B_a + j B_b) = (A_a B_a - conj(A_b) B_b) + j (conj(A_a) B_b + A_b B_a)
//! ```
//!
//! and the adjoint is `(M_a + j M_b)^dagger = M_a^dagger - j M_b^T`, so `M` is
//! hermitian exactly when `M_a` is hermitian and `M_b` is skew-symmetric.
//!
//! All spectral questions go through the complex-adjoint representation
//!
//! ```text
//! chi(M) = [[ M_a, -conj(M_b) ],
//!           [ M_b,  conj(M_a) ]]
//! ```
//!
//! which is an injective `*`-homomorphism into `2n x 2n` complex matrices.

use std::ops::{Add, Mul, Neg, Sub};

use crate::linalg::{self, CMatrix};
use crate::quaternion::Quaternion;
use crate::{Error, Result};

/// Tolerance on the block structure accepted by [`ChiImage::to_qmatrix`].
pub const CHI_MEMBERSHIP_TOL: f64 = 1e-10;
/// Hermiticity tolerance required before a spectral computation.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative gap allowed between the two copies of each `chi` eigenvalue.
pub const PAIRING_TOL: f64 = 1e-8;
const EXPM_MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    alpha: CMatrix,
    beta: CMatrix,
}

impl QMatrix {
    pub fn new(alpha: CMatrix, beta: CMatrix) -> Result<Self> {
        if alpha.shape() != beta.shape() {
            return Err(Error::DimensionMismatch {
                op: "QMatrix::new",
                left: alpha.shape(),
                right: beta.shape(),
            });
        }
        Ok(Self { alpha, beta })
    }

    pub fn from_complex(alpha: CMatrix) -> Self {
        let beta = CMatrix::zeros(alpha.nrows(), alpha.ncols());
        Self { alpha, beta }
    }

    /// `j beta`, a purely quaternionic matrix.
    pub fn from_beta(beta: CMatrix) -> Self {
        let alpha = CMatrix::zeros(beta.nrows(), beta.ncols());
        Self { alpha, beta }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_complex(CMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_complex(CMatrix::identity(n, n))
    }

    /// `q I_n` for a quaternion scalar `q`.
    pub fn scalar_identity(q: Quaternion, n: usize) -> Self {
        Self {
            alpha: CMatrix::from_diagonal_element(n, n, q.alpha),
            beta: CMatrix::from_diagonal_element(n, n, q.beta),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn cols(&self) -> usize {
        self.alpha.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.alpha.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn alpha(&self) -> &CMatrix {
        &self.alpha
    }

    pub fn beta(&self) -> &CMatrix {
        &self.beta
    }

    pub fn into_parts(self) -> (CMatrix, CMatrix) {
        (self.alpha, self.beta)
    }

    pub fn get(&self, r: usize, c: usize) -> Quaternion {
        Quaternion::new(self.alpha[(r, c)], self.beta[(r, c)])
    }

    pub fn set(&mut self, r: usize, c: usize, q: Quaternion) {
        self.alpha[(r, c)] = q.alpha;
        self.beta[(r, c)] = q.beta;
    }

    pub fn matmul(&self, rhs: &QMatrix) -> Result<QMatrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let alpha = &self.alpha * &rhs.alpha - self.beta.conjugate() * &rhs.beta;
        let beta = self.alpha.conjugate() * &rhs.beta + &self.beta * &rhs.alpha;
        Ok(Self { alpha, beta })
    }

    pub fn try_add(&self, rhs: &QMatrix) -> Result<QMatrix> {
        self.check_same_shape("add", rhs)?;
        Ok(Self {
            alpha: &self.alpha + &rhs.alpha,
            beta: &self.beta + &rhs.beta,
        })
    }

    pub fn try_sub(&self, rhs: &QMatrix) -> Result<QMatrix> {
        self.check_same_shape("sub", rhs)?;
        Ok(Self {
            alpha: &self.alpha - &rhs.alpha,
            beta: &self.beta - &rhs.beta,
        })
    }

    fn check_same_shape(&self, op: &'static str, rhs: &QMatrix) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(())
    }

    /// Real scaling; real numbers are central in the quaternions.
    pub fn scale(&self, s: f64) -> QMatrix {
        Self {
            alpha: self.alpha.scale(s),
            beta: self.beta.scale(s),
        }
    }

    /// Right multiplication by a quaternion scalar, `M q`.
    pub fn mul_scalar_right(&self, q: Quaternion) -> QMatrix {
        self * &QMatrix::scalar_identity(q, self.cols())
    }

    pub fn adjoint(&self) -> QMatrix {
        Self {
            alpha: self.alpha.adjoint(),
            beta: -self.beta.transpose(),
        }
    }

    pub fn chi(&self) -> ChiImage {
        let (r, c) = self.shape();
        let mut mat = CMatrix::zeros(2 * r, 2 * c);
        mat.view_mut((0, 0), (r, c)).copy_from(&self.alpha);
        mat.view_mut((0, c), (r, c)).copy_from(&(-self.beta.conjugate()));
        mat.view_mut((r, 0), (r, c)).copy_from(&self.beta);
        mat.view_mut((r, c), (r, c)).copy_from(&self.alpha.conjugate());
        ChiImage { mat }
    }

    /// `Re Tr M = Re Tr M_alpha`.
    pub fn real_trace(&self) -> Result<f64> {
        self.require_square("real_trace")?;
        Ok(linalg::trace(&self.alpha).re)
    }

    pub fn frobenius_norm(&self) -> f64 {
        linalg::frobenius(&self.alpha).hypot(linalg::frobenius(&self.beta))
    }

    pub fn beta_norm(&self) -> f64 {
        linalg::frobenius(&self.beta)
    }

    /// Largest entrywise quaternion modulus of `M - M^dagger`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let d = self - &self.adjoint();
        d.max_entry_norm()
    }

    /// Largest entrywise quaternion modulus of `M + M^dagger`.
    pub fn anti_hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let d = self + &self.adjoint();
        d.max_entry_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn max_entry_norm(&self) -> f64 {
        self.alpha
            .iter()
            .zip(self.beta.iter())
            .fold(0.0, |acc, (a, b)| acc.max(a.norm().hypot(b.norm())))
    }

    pub fn max_abs_diff(&self, other: &QMatrix) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        (self - other).max_entry_norm()
    }

    fn require_square(&self, op: &'static str) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                op,
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        Ok(())
    }

    /// Real eigenvalues of a hermitian quaternionic matrix, ascending, each
    /// listed with its quaternionic multiplicity.
    ///
    /// `chi(M)` carries every eigenvalue twice; the copies are matched by
    /// sorted adjacency and a mismatch beyond [`PAIRING_TOL`] (relative to the
    /// spectral scale) is reported as [`Error::PairingFailure`].
    pub fn eigvals_hermitian(&self) -> Result<Vec<f64>> {
        self.require_square("eigvals_hermitian")?;
        let dev = self.hermitian_deviation();
        let scale = self.max_entry_norm().max(1.0);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let doubled = linalg::eigvalsh(&self.chi().mat);
        pair_eigenvalues(&doubled)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigvals_hermitian()?.first().copied().unwrap_or(0.0))
    }

    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        match self.min_eigenvalue() {
            Ok(min) => min >= -tol,
            Err(_) => false,
        }
    }

    /// Quaternionic rank: half the numerical rank of `chi(M)` with singular
    /// values counted above `rel_tol * sigma_max`.
    pub fn rank_q(&self, rel_tol: f64) -> usize {
        let chi_rank = linalg::numerical_rank(&self.chi().mat, rel_tol);
        chi_rank.div_ceil(2)
    }

    /// [`QMatrix::rank_q`] at the default threshold `dim(chi) * eps`.
    pub fn rank_q_default(&self) -> usize {
        self.rank_q(default_rank_tol(self))
    }

    /// `exp(M) = chi^{-1}(exp(chi(M)))`.
    pub fn expm(&self) -> Result<QMatrix> {
        self.require_square("expm")?;
        let image = ChiImage {
            mat: self.chi().mat.exp(),
        };
        let dev = image.membership_deviation();
        let scale = linalg::max_abs(&image.mat).max(1.0);
        if dev.is_nan() || dev > EXPM_MEMBERSHIP_TOL * scale {
            return Err(Error::NotInChiImage { deviation: dev });
        }
        Ok(image.project())
    }
}

/// Default relative rank threshold for a quaternionic matrix: the dimension
/// of its complex adjoint times machine epsilon.
pub fn default_rank_tol(m: &QMatrix) -> f64 {
    linalg::default_rank_tol(2 * m.rows().max(m.cols()))
}

fn pair_eigenvalues(doubled: &[f64]) -> Result<Vec<f64>> {
    let scale = doubled.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    doubled
        .chunks(2)
        .enumerate()
        .map(|(k, pair)| match pair {
            [a, b] => {
                let gap = (a - b).abs();
                if gap > PAIRING_TOL * scale {
                    Err(Error::PairingFailure { index: 2 * k, gap })
                } else {
                    Ok(0.5 * (a + b))
                }
            }
            _ => Err(Error::PairingFailure {
                index: 2 * k,
                gap: f64::INFINITY,
            }),
        })
        .collect()
}

/// A `2n x 2m` complex matrix in the image of the complex-adjoint map.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiImage {
    pub mat: CMatrix,
}

impl ChiImage {
    /// Max entry of `J conj(X) J^{-1} - X`, with `J = [[0, -I], [I, 0]]`.
    ///
    /// Evaluated blockwise: for `X = [[A, B], [C, D]]` the relation reads
    /// `D = conj(A)` and `B = -conj(C)`.
    pub fn membership_deviation(&self) -> f64 {
        let (r2, c2) = self.mat.shape();
        if r2 % 2 != 0 || c2 % 2 != 0 {
            return f64::INFINITY;
        }
        let (r, c) = (r2 / 2, c2 / 2);
        let a = self.mat.view((0, 0), (r, c));
        let b = self.mat.view((0, c), (r, c));
        let cc = self.mat.view((r, 0), (r, c));
        let d = self.mat.view((r, c), (r, c));
        let mut dev = 0.0f64;
        for i in 0..r {
            for k in 0..c {
                dev = dev.max((d[(i, k)] - a[(i, k)].conj()).norm());
                dev = dev.max((b[(i, k)] + cc[(i, k)].conj()).norm());
            }
        }
        dev
    }

    pub fn to_qmatrix(&self) -> Result<QMatrix> {
        let dev = self.membership_deviation();
        if dev.is_nan() || dev > CHI_MEMBERSHIP_TOL {
            return Err(Error::NotInChiImage { deviation: dev });
        }
        let (r, c) = (self.mat.nrows() / 2, self.mat.ncols() / 2);
        Ok(QMatrix {
            alpha: self.mat.view((0, 0), (r, c)).into_owned(),
            beta: self.mat.view((r, 0), (r, c)).into_owned(),
        })
    }

    /// Nearest quaternionic matrix: averages the redundant blocks.
    fn project(&self) -> QMatrix {
        let (r, c) = (self.mat.nrows() / 2, self.mat.ncols() / 2);
        let a = self.mat.view((0, 0), (r, c));
        let b = self.mat.view((0, c), (r, c));
        let cc = self.mat.view((r, 0), (r, c));
        let d = self.mat.view((r, c), (r, c));
        QMatrix {
            alpha: (a + d.conjugate()).scale(0.5),
            beta: (cc - b.conjugate()).scale(0.5),
        }
    }
}

impl Mul for &QMatrix {
    type Output = QMatrix;

    /// Panics on a dimension mismatch; use [`QMatrix::matmul`] to recover.
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        self.matmul(rhs).expect("quaternionic matmul dimension mismatch")
    }
}

impl Add for &QMatrix {
    type Output = QMatrix;

    fn add(self, rhs: &QMatrix) -> QMatrix {
        self.try_add(rhs).expect("quaternionic add dimension mismatch")
    }
}

impl Sub for &QMatrix {
    type Output = QMatrix;

    fn sub(self, rhs: &QMatrix) -> QMatrix {
        self.try_sub(rhs).expect("quaternionic sub dimension mismatch")
    }
}

impl Neg for &QMatrix {
    type Output = QMatrix;

    fn neg(self) -> QMatrix {
        QMatrix {
            alpha: -&self.alpha,
            beta: -&self.beta,
        }
    }
}

impl From<Quaternion> for QMatrix {
    fn from(q: Quaternion) -> Self {
        QMatrix::scalar_identity(q, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_qmatrix, seeded_rng};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// 1 x 1 quaternionic matrices multiply exactly like scalars.
    #[test]
    fn one_by_one_product_matches_scalar_rule() {
        let p = Quaternion::from_four_reals(0.5, -1.0, 2.0, 0.25);
        let q = Quaternion::from_four_reals(-1.5, 0.75, 0.5, 3.0);
        let pm = QMatrix::from(p);
        let qm = QMatrix::from(q);
        assert_eq!((&pm * &qm).get(0, 0), p * q);
    }

    #[test]
    fn identity_and_j_squared() {
        let mut rng = seeded_rng(1);
        let a = random_qmatrix(&mut rng, 3, 3);
        assert_eq!(&a * &QMatrix::identity(3), a);
        let j = QMatrix::scalar_identity(Quaternion::J, 3);
        assert_eq!(&j * &j, QMatrix::identity(3).scale(-1.0));
    }

    #[test]
    fn chi_examples() {
        assert_eq!(QMatrix::identity(3).chi().mat, CMatrix::identity(6, 6));
        let j = QMatrix::scalar_identity(Quaternion::J, 1).chi().mat;
        let want = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(j, want);
    }

    #[test]
    fn chi_round_trip_is_exact() {
        let mut rng = seeded_rng(2);
        for (r, cols) in [(1, 1), (2, 3), (4, 4), (5, 2)] {
            let m = random_qmatrix(&mut rng, r, cols);
            assert_eq!(m.chi().to_qmatrix().unwrap(), m);
        }
    }

    #[test]
    fn chi_inverse_rejects_non_members() {
        let mut mat = QMatrix::identity(2).chi().mat;
        mat[(0, 3)] = c(1e-6, 0.0);
        assert!(matches!(
            ChiImage { mat }.to_qmatrix(),
            Err(Error::NotInChiImage { .. })
        ));
        let odd = ChiImage {
            mat: CMatrix::identity(3, 3),
        };
        assert!(odd.to_qmatrix().is_err());
    }

    #[test]
    fn dimension_errors() {
        let a = QMatrix::zeros(2, 3);
        let b = QMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(a.real_trace(), Err(Error::NonSquare { .. })));
        assert!(matches!(a.eigvals_hermitian(), Err(Error::NonSquare { .. })));
        assert!(QMatrix::new(CMatrix::zeros(2, 2), CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn real_trace_examples() {
        assert_eq!(QMatrix::identity(4).real_trace().unwrap(), 4.0);
        assert_eq!(
            QMatrix::scalar_identity(Quaternion::J, 4).real_trace().unwrap(),
            0.0
        );
    }

    fn purified_half() -> QMatrix {
        let alpha = CMatrix::from_diagonal_element(2, 2, c(0.5, 0.0));
        let beta = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        QMatrix::new(alpha, beta).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(QMatrix::identity(3).eigvals_hermitian().unwrap(), vec![1.0; 3]);
        let d = QMatrix::from_complex(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(3.0, 0.0),
            c(2.0, 0.0),
        ])));
        let ev = d.eigvals_hermitian().unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);

        // chi of the purified state is [[P, B], [B', P]] with P = I/2 and
        // B = [[0, 1/2], [-1/2, 0]]; its characteristic polynomial factors as
        // ((1/2 - x)^2 - 1/4)^2, giving {0, 0, 1, 1}.
        let ev = purified_half().eigvals_hermitian().unwrap();
        assert!(ev[0].abs() < 1e-14, "{ev:?}");
        assert!((ev[1] - 1.0).abs() < 1e-14, "{ev:?}");
    }

    #[test]
    fn eigvals_reject_non_hermitian() {
        let m = QMatrix::from_beta(CMatrix::identity(2, 2));
        assert!(matches!(m.eigvals_hermitian(), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn hermiticity_of_skew_beta() {
        assert!(purified_half().is_hermitian(1e-15));
        let mut sym = purified_half();
        sym.set(0, 1, Quaternion::new(c(0.0, 0.0), c(0.5, 0.0)));
        assert!(!sym.is_hermitian(1e-3));
    }

    #[test]
    fn positivity() {
        assert!(!QMatrix::identity(2).scale(-1.0).is_positive_semidefinite(1e-12));
        assert!(QMatrix::identity(2).is_positive_semidefinite(0.0));
        assert!(purified_half().is_positive_semidefinite(1e-12));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(QMatrix::zeros(3, 3).rank_q_default(), 0);
        assert_eq!(purified_half().rank_q_default(), 1);
        assert_eq!(QMatrix::identity(4).rank_q_default(), 4);
    }

    #[test]
    fn expm_examples() {
        assert_eq!(QMatrix::zeros(3, 3).expm().unwrap(), QMatrix::identity(3));
        // exp(j theta) = cos theta + j sin theta
        let theta = std::f64::consts::PI;
        let u = QMatrix::scalar_identity(Quaternion::J.scale(theta), 1).expm().unwrap();
        let want = Quaternion::new(c(theta.cos(), 0.0), c(theta.sin(), 0.0));
        assert!((u.get(0, 0) - want).norm() < 1e-14);
        assert!((u.get(0, 0) + Quaternion::ONE).norm() < 1e-14);

        let theta = 0.7;
        let u = QMatrix::scalar_identity(Quaternion::J.scale(theta), 2).expm().unwrap();
        let want = QMatrix::scalar_identity(
            Quaternion::new(c(theta.cos(), 0.0), c(theta.sin(), 0.0)),
            2,
        );
        assert!(u.max_abs_diff(&want) < 1e-14);
    }
}
