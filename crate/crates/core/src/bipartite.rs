//! Complex bipartite states: tensor products, Schmidt data, partial traces
//! and the nonselective Lüders rule.
//!
//! Composite indices are row-major: basis state `(a, b)` of `C^n1 (x) C^n2`
//! sits at position `a * n2 + b`.

use nalgebra::SVD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{CDensity, DENSITY_TOL};
use crate::linalg::{self, CMatrix, CVector, C0};
use crate::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Schmidt weights below this are dropped from the decomposition.
const SCHMIDT_CUTOFF: f64 = 1e-12;

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(u: &CVector, v: &CVector) -> CVector {
    u.kronecker(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    First,
    Second,
}

/// One term `sqrt(p) |left> |right>` of a Schmidt decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtTerm {
    pub weight: f64,
    pub left: CVector,
    pub right: CVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dims: (usize, usize),
    vec: CVector,
    schmidt: Option<Vec<SchmidtTerm>>,
}

impl BipartiteState {
    pub fn new(dims: (usize, usize), vec: CVector) -> Result<Self> {
        if dims.0 * dims.1 != vec.len() {
            return Err(Error::DimensionMismatch {
                op: "BipartiteState::new",
                left: dims,
                right: (vec.len(), 1),
            });
        }
        let norm_sqr = vec.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self {
            dims,
            vec,
            schmidt: None,
        })
    }

    pub fn product(u: &CVector, v: &CVector) -> Result<Self> {
        Self::new((u.len(), v.len()), kron_vec(u, v))
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn vector(&self) -> &CVector {
        &self.vec
    }

    /// Cached Schmidt data, if [`BipartiteState::with_schmidt`] has run.
    pub fn schmidt(&self) -> Option<&[SchmidtTerm]> {
        self.schmidt.as_deref()
    }

    pub fn with_schmidt(mut self) -> Self {
        self.schmidt = Some(schmidt(&self));
        self
    }

    pub fn density(&self) -> CMatrix {
        linalg::outer(&self.vec, &self.vec)
    }

    /// Coefficient matrix `C[a, b]` with `psi = sum C[a, b] |a>|b>`.
    fn coefficients(&self) -> CMatrix {
        let (n1, n2) = self.dims;
        CMatrix::from_fn(n1, n2, |a, b| self.vec[a * n2 + b])
    }
}

/// Biorthogonal decomposition `psi = sum_i sqrt(p_i) |left_i> |right_i>`,
/// weights `sqrt(p_i)` descending. Only nonzero weights are kept, so the
/// number of terms is the Schmidt rank.
pub fn schmidt(state: &BipartiteState) -> Vec<SchmidtTerm> {
    // C = U S V^dagger  =>  psi = sum_i s_i u_i (x) conj(v_i), and conj(v_i)
    // is row i of V^dagger read as a column.
    let svd = SVD::new(state.coefficients(), true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut terms: Vec<SchmidtTerm> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > SCHMIDT_CUTOFF)
        .map(|(i, &s)| SchmidtTerm {
            weight: s,
            left: u.column(i).into_owned(),
            right: v_t.row(i).transpose(),
        })
        .collect();
    terms.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    terms
}

pub fn schmidt_rank(state: &BipartiteState) -> usize {
    state.schmidt().map_or_else(|| schmidt(state).len(), <[_]>::len)
}

/// Reduced density matrix after tracing out `over`.
pub fn partial_trace(rho: &CMatrix, dims: (usize, usize), over: Subsystem) -> Result<CDensity> {
    let (n1, n2) = dims;
    if rho.shape() != (n1 * n2, n1 * n2) {
        return Err(Error::DimensionMismatch {
            op: "partial_trace",
            left: rho.shape(),
            right: (n1 * n2, n1 * n2),
        });
    }
    let out = match over {
        Subsystem::Second => CMatrix::from_fn(n1, n1, |a, c| {
            (0..n2).map(|b| rho[(a * n2 + b, c * n2 + b)]).sum::<Complex64>()
        }),
        Subsystem::First => CMatrix::from_fn(n2, n2, |b, d| {
            (0..n1).map(|a| rho[(a * n2 + b, a * n2 + d)]).sum::<Complex64>()
        }),
    };
    CDensity::new(out, DENSITY_TOL)
}

/// Complete family of mutually orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFamily {
    projectors: Vec<CMatrix>,
}

impl ProjectorFamily {
    pub fn new(projectors: Vec<CMatrix>) -> Result<Self> {
        let n = projectors
            .first()
            .map(|p| p.nrows())
            .ok_or_else(|| Error::InvalidArgument("projector family is empty".into()))?;
        let mut sum = CMatrix::zeros(n, n);
        for (i, p) in projectors.iter().enumerate() {
            if p.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    op: "ProjectorFamily::new",
                    left: (n, n),
                    right: p.shape(),
                });
            }
            let herm = linalg::hermitian_deviation(p);
            if herm > PROJECTOR_TOL {
                return Err(Error::InvalidProjectorFamily {
                    reason: "projector is not hermitian",
                    deviation: herm,
                });
            }
            for (k, q) in projectors.iter().enumerate() {
                let want = if i == k { p.clone() } else { CMatrix::zeros(n, n) };
                let dev = linalg::max_abs_diff(&(p * q), &want);
                if dev > PROJECTOR_TOL {
                    return Err(Error::InvalidProjectorFamily {
                        reason: "P_i P_j != delta_ij P_i",
                        deviation: dev,
                    });
                }
            }
            sum += p;
        }
        let dev = linalg::max_abs_diff(&sum, &CMatrix::identity(n, n));
        if dev > PROJECTOR_TOL {
            return Err(Error::InvalidProjectorFamily {
                reason: "projectors do not sum to the identity",
                deviation: dev,
            });
        }
        Ok(Self { projectors })
    }

    /// Rank-one projectors onto the vectors of an orthonormal basis.
    pub fn from_basis(basis: &[CVector]) -> Result<Self> {
        Self::new(basis.iter().map(|v| linalg::outer(v, v)).collect())
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }
}

/// Nonselective Lüders update `rho -> sum_i P_i rho P_i`.
pub fn lueders_nonselective(rho: &CDensity, family: &ProjectorFamily) -> Result<CDensity> {
    if rho.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            op: "lueders_nonselective",
            left: rho.matrix().shape(),
            right: (family.dim(), family.dim()),
        });
    }
    let n = rho.dim();
    let out = family
        .projectors
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, p| acc + p * rho.matrix() * p);
    CDensity::new(out, DENSITY_TOL)
}

/// System/apparatus coupling and the entangled state it produces.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementInteraction {
    pub unitary: CMatrix,
    pub state: BipartiteState,
}

/// Orthonormal pair `(|+>, |->)` of the measured observable on `C^2`.
pub type SpinBasis = [CVector; 2];

pub fn computational_basis() -> SpinBasis {
    let one = Complex64::new(1.0, 0.0);
    [
        CVector::from_vec(vec![one, C0]),
        CVector::from_vec(vec![C0, one]),
    ]
}

/// Couples `phi0 = c+ |+> + c- |->` to a two-level apparatus prepared in
/// `|0> = |u>`:
///
/// ```text
/// |phi0>|0>  ->  c+ |+>|u> + c- |->|d>
/// ```
///
/// The coupling is the controlled shift `|+><+| (x) I + |-><-| (x) X`, which
/// fixes the two constrained columns and completes them to a unitary.
/// Apparatus states are `|u> = (1, 0)` and `|d> = (0, 1)`.
pub fn measurement_interaction(
    c_plus: Complex64,
    c_minus: Complex64,
    basis: &SpinBasis,
) -> Result<MeasurementInteraction> {
    let norm_sqr = c_plus.norm_sqr() + c_minus.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    ProjectorFamily::from_basis(basis)?;
    let one = Complex64::new(1.0, 0.0);
    let identity = CMatrix::identity(2, 2);
    let shift = CMatrix::from_row_slice(2, 2, &[C0, one, one, C0]);
    let [plus, minus] = basis;
    let unitary = kron(&linalg::outer(plus, plus), &identity) + kron(&linalg::outer(minus, minus), &shift);
    let phi0 = plus * c_plus + minus * c_minus;
    let ready = CVector::from_vec(vec![one, C0]);
    let psi = &unitary * kron_vec(&phi0, &ready);
    let state = BipartiteState::new((2, 2), psi)?.with_schmidt();
    Ok(MeasurementInteraction { unitary, state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_unit_vector, random_unitary, seeded_rng};
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&CMatrix::identity(2, 2), &CMatrix::identity(3, 3)), CMatrix::identity(6, 6));
        let sz = CMatrix::from_row_slice(2, 2, &[c(1.0), C0, C0, c(-1.0)]);
        let ev = linalg::eigvalsh(&kron(&sz, &CMatrix::identity(2, 2)));
        assert_eq!(ev, vec![-1.0, -1.0, 1.0, 1.0]);

        let mut rng = seeded_rng(1);
        let a = crate::random::random_cmatrix(&mut rng, 2, 3);
        let b = crate::random::random_cmatrix(&mut rng, 3, 2);
        let u = random_unit_vector(&mut rng, 3);
        let v = random_unit_vector(&mut rng, 2);
        let lhs = kron(&a, &b) * kron_vec(&u, &v);
        let rhs = kron_vec(&(&a * &u), &(&b * &v));
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn index_convention_is_row_major() {
        let e = |n: usize, k: usize| CVector::from_fn(n, |r, _| if r == k { c(1.0) } else { C0 });
        let s = BipartiteState::product(&e(2, 1), &e(3, 2)).unwrap();
        assert_eq!(s.vector()[3 + 2], c(1.0));
    }

    #[test]
    fn schmidt_of_product_state() {
        let mut rng = seeded_rng(2);
        let u = random_unit_vector(&mut rng, 3);
        let v = random_unit_vector(&mut rng, 4);
        let s = BipartiteState::product(&u, &v).unwrap().with_schmidt();
        let terms = s.schmidt().unwrap();
        assert_eq!(terms.len(), 1);
        assert_abs_diff_eq!(terms[0].weight, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn schmidt_reconstructs() {
        let mut rng = seeded_rng(3);
        let psi = random_unit_vector(&mut rng, 12);
        let s = BipartiteState::new((3, 4), psi.clone()).unwrap();
        let terms = schmidt(&s);
        let total: f64 = terms.iter().map(|t| t.weight * t.weight).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert!(terms.windows(2).all(|w| w[0].weight >= w[1].weight));
        let rebuilt = terms
            .iter()
            .fold(CVector::zeros(12), |acc, t| acc + kron_vec(&t.left, &t.right) * c(t.weight));
        assert!((rebuilt - psi).norm() < 1e-10);
        for (i, a) in terms.iter().enumerate() {
            for (k, b) in terms.iter().enumerate() {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((a.left.dotc(&b.left) - c(want)).norm() < 1e-10);
                assert!((a.right.dotc(&b.right) - c(want)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = seeded_rng(4);
        let u = random_unit_vector(&mut rng, 2);
        let v = random_unit_vector(&mut rng, 3);
        let s = BipartiteState::product(&u, &v).unwrap();
        let r1 = partial_trace(&s.density(), (2, 3), Subsystem::Second).unwrap();
        assert!(linalg::max_abs_diff(r1.matrix(), &linalg::outer(&u, &u)) < 1e-14);
        let r2 = partial_trace(&s.density(), (2, 3), Subsystem::First).unwrap();
        assert!(linalg::max_abs_diff(r2.matrix(), &linalg::outer(&v, &v)) < 1e-14);

        let mixed = CMatrix::identity(6, 6).unscale(6.0);
        let r = partial_trace(&mixed, (2, 3), Subsystem::Second).unwrap();
        assert!(linalg::max_abs_diff(r.matrix(), &CMatrix::identity(2, 2).unscale(2.0)) < 1e-15);
        let r = partial_trace(&mixed, (2, 3), Subsystem::First).unwrap();
        assert!(linalg::max_abs_diff(r.matrix(), &CMatrix::identity(3, 3).unscale(3.0)) < 1e-15);

        assert!(partial_trace(&mixed, (2, 2), Subsystem::First).is_err());
    }

    #[test]
    fn reduced_spectrum_is_squared_schmidt_weights() {
        let mut rng = seeded_rng(5);
        let s = BipartiteState::new((3, 3), random_unit_vector(&mut rng, 9)).unwrap();
        let mut want: Vec<f64> = schmidt(&s).iter().map(|t| t.weight * t.weight).collect();
        want.sort_by(f64::total_cmp);
        let got = partial_trace(&s.density(), (3, 3), Subsystem::Second).unwrap().eigenvalues();
        for (g, w) in got.iter().rev().zip(want.iter().rev()) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-10);
        }
    }

    #[test]
    fn lueders_examples() {
        let mut rng = seeded_rng(6);
        let psi = random_unit_vector(&mut rng, 2);
        let rho = CDensity::new(linalg::outer(&psi, &psi), 1e-10).unwrap();
        let trivial = ProjectorFamily::new(vec![CMatrix::identity(2, 2)]).unwrap();
        assert!(linalg::max_abs_diff(lueders_nonselective(&rho, &trivial).unwrap().matrix(), rho.matrix()) < 1e-15);

        let z = ProjectorFamily::from_basis(&computational_basis()).unwrap();
        let out = lueders_nonselective(&rho, &z).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[c(psi[0].norm_sqr()), C0, C0, c(psi[1].norm_sqr())]);
        assert!(linalg::max_abs_diff(out.matrix(), &want) < 1e-15);
        let twice = lueders_nonselective(&out, &z).unwrap();
        assert!(linalg::max_abs_diff(twice.matrix(), out.matrix()) < 1e-15);

        let diag = CDensity::new(want.clone(), 1e-10).unwrap();
        assert_eq!(lueders_nonselective(&diag, &z).unwrap().matrix(), &want);
    }

    #[test]
    fn projector_family_validation() {
        let half = CMatrix::identity(2, 2).scale(0.5);
        assert!(ProjectorFamily::new(vec![half.clone(), half]).is_err());
        let p = CMatrix::from_row_slice(2, 2, &[c(1.0), C0, C0, C0]);
        assert!(ProjectorFamily::new(vec![p]).is_err());
        assert!(ProjectorFamily::new(vec![]).is_err());
    }

    #[test]
    fn interaction_examples() {
        let basis = computational_basis();
        let m = measurement_interaction(c(1.0), C0, &basis).unwrap();
        assert_eq!(schmidt_rank(&m.state), 1);
        assert_eq!(m.unitary.adjoint() * &m.unitary, CMatrix::identity(4, 4));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = measurement_interaction(c(s), c(s), &basis).unwrap();
        let w: Vec<f64> = m.state.schmidt().unwrap().iter().map(|t| t.weight).collect();
        assert_abs_diff_eq!(w[0], s, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], s, epsilon = 1e-12);
        let reduced = partial_trace(&m.state.density(), (2, 2), Subsystem::Second).unwrap();
        assert!(linalg::max_abs_diff(reduced.matrix(), &CMatrix::identity(2, 2).scale(0.5)) < 1e-15);

        assert!(matches!(
            measurement_interaction(c(1.0), c(0.5), &basis),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn interaction_in_rotated_basis() {
        let mut rng = seeded_rng(7);
        let u = random_unitary(&mut rng, 2);
        let basis: SpinBasis = [u.column(0).into_owned(), u.column(1).into_owned()];
        let (cp, cm) = (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        let m = measurement_interaction(cp, cm, &basis).unwrap();
        let dev = linalg::max_abs_diff(&(m.unitary.adjoint() * &m.unitary), &CMatrix::identity(4, 4));
        assert!(dev < 1e-14);
        let w: Vec<f64> = m.state.schmidt().unwrap().iter().map(|t| t.weight).collect();
        assert_abs_diff_eq!(w[0], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 0.6, epsilon = 1e-12);
    }
}
