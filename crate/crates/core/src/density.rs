//! Density matrices on `H^Q`, the complex projection and the mixture split.
//!
//! Every complex density `rho_a` heads an equivalence class of quaternionic
//! densities `rho_a + j rho_b` sharing the same complex projection. Inside a
//! class the single member with `rho_b = 0` represents the proper mixture; all
//! members with `rho_b != 0` represent improper mixtures. Complex observables
//! cannot tell class members apart, quaternionic observables can.

use std::cmp::Ordering;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMatrix, CVector, C0};
use crate::qmatrix::QMatrix;
use crate::random::{self, seeded_rng};
use crate::{Error, Result};

/// Default tolerance for density validation.
pub const DENSITY_TOL: f64 = 1e-10;
/// Eigenvalues closer than this (relative) are treated as one cluster in `lift`.
const CLUSTER_TOL: f64 = 1e-10;
/// Maximum `|<u|v>|` accepted by [`block_purify`].
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Proper,
    Improper,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Proper => "proper",
            Classification::Improper => "improper",
        })
    }
}

/// Scale-aware zero test for the `beta` block: `n * 1e-12 * (1 + |alpha|_F)`.
pub fn proper_tol(n: usize, alpha_frobenius: f64) -> f64 {
    n as f64 * 1e-12 * (1.0 + alpha_frobenius)
}

/// A validated quaternionic density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QDensity {
    mat: QMatrix,
    classification: Classification,
    beta_norm: f64,
}

impl QDensity {
    pub fn matrix(&self) -> &QMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> QMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn beta_norm(&self) -> f64 {
        self.beta_norm
    }

    /// Proper member of the class headed by `rho`.
    pub fn from_complex(rho: &CDensity) -> Self {
        Self::classified(QMatrix::from_complex(rho.mat.clone()))
    }

    pub fn rank(&self) -> usize {
        self.mat.rank_q_default()
    }

    /// `P(rho) = P(rho')`, entrywise within `tol`.
    pub fn equivalent(&self, other: &QDensity, tol: f64) -> bool {
        self.dim() == other.dim()
            && linalg::max_abs_diff(self.mat.alpha(), other.mat.alpha()) <= tol
    }

    /// Wraps a matrix already known to be a density (hermitian, positive,
    /// unit trace) and computes its classification.
    pub(crate) fn classified(mat: QMatrix) -> Self {
        let beta_norm = mat.beta_norm();
        let cut = proper_tol(mat.rows(), linalg::frobenius(mat.alpha()));
        let classification = if beta_norm <= cut {
            Classification::Proper
        } else {
            Classification::Improper
        };
        Self {
            mat,
            classification,
            beta_norm,
        }
    }
}

/// A validated complex density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CDensity {
    mat: CMatrix,
    rank: usize,
}

impl CDensity {
    /// Validates hermiticity, unit trace and positivity within `tol`.
    pub fn new(mat: CMatrix, tol: f64) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NonSquare {
                op: "CDensity::new",
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        validate(&QMatrix::from_complex(mat.clone()), tol)?;
        Ok(Self::unchecked(mat))
    }

    pub(crate) fn unchecked(mat: CMatrix) -> Self {
        let rank = linalg::hermitian_rank(&mat, linalg::default_rank_tol(mat.nrows()));
        Self { mat, rank }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.mat)
    }
}

/// A hermitian quaternionic observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    mat: QMatrix,
    is_complex: bool,
}

impl Observable {
    pub fn new(mat: QMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NonSquare {
                op: "Observable::new",
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        let deviation = mat.hermitian_deviation();
        if deviation > DENSITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let cut = proper_tol(mat.rows(), linalg::frobenius(mat.alpha()));
        let is_complex = mat.beta_norm() <= cut;
        Ok(Self { mat, is_complex })
    }

    pub fn complex(mat: CMatrix) -> Result<Self> {
        Self::new(QMatrix::from_complex(mat))
    }

    /// `A = j rho_beta`, hermitian because `rho_beta` is skew-symmetric. Its
    /// expectation on `rho` is `|rho_beta|_F^2`; on any proper state it is 0.
    pub fn discriminator(rho: &QDensity) -> Self {
        let mat = QMatrix::from_beta(rho.matrix().beta().clone());
        let is_complex = rho.classification() == Classification::Proper;
        Self { mat, is_complex }
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.mat
    }

    pub fn is_complex(&self) -> bool {
        self.is_complex
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }
}

/// Checks that `m` is a quaternionic density within `tol` and classifies it.
pub fn validate(m: &QMatrix, tol: f64) -> Result<QDensity> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            op: "validate",
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let deviation = m.hermitian_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let trace = m.real_trace()?;
    if (trace - 1.0).abs() > tol {
        return Err(Error::TraceNotOne {
            trace,
            deviation: (trace - 1.0).abs(),
        });
    }
    let min_eigenvalue = m.min_eigenvalue()?;
    if min_eigenvalue < -tol {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(QDensity::classified(m.clone()))
}

/// Complex projection `P(rho) = (rho - i rho i) / 2 = rho_alpha`.
pub fn complex_projection(rho: &QDensity) -> CDensity {
    CDensity::unchecked(rho.mat.alpha().clone())
}

pub fn classify(rho: &QDensity) -> Classification {
    rho.classification
}

/// `<A>_rho = Re Tr(A rho) = Re Tr(A_a rho_a - conj(A_b) rho_b)`.
pub fn expectation(a: &Observable, rho: &QDensity) -> Result<f64> {
    if a.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            op: "expectation",
            left: a.mat.shape(),
            right: rho.mat.shape(),
        });
    }
    let n = a.dim();
    let (aa, ab) = (a.mat.alpha(), a.mat.beta());
    let (ra, rb) = (rho.mat.alpha(), rho.mat.beta());
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            acc += (aa[(r, c)] * ra[(c, r)]).re;
            if !a.is_complex {
                acc -= (ab[(r, c)].conj() * rb[(c, r)]).re;
            }
        }
    }
    Ok(acc)
}

/// Outcome of the `m <= rank(rho_alpha) <= 2m` check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankBounds {
    pub m: usize,
    pub rank_alpha: usize,
    pub pass: bool,
}

pub fn rank_bounds_check(rho: &QDensity) -> RankBounds {
    let m = rho.rank();
    let rank_alpha = complex_projection(rho).rank();
    RankBounds {
        m,
        rank_alpha,
        pass: m <= rank_alpha && rank_alpha <= 2 * m,
    }
}

/// Rank-one quaternionic operator on the right-module line spanned by
/// `u cu + v cv j`:
///
/// ```text
/// |cu|^2 u u^dagger + |cv|^2 v v^dagger + j conj(cu) conj(cv) (conj(v) u^dagger - conj(u) v^dagger)
/// ```
///
/// `u` and `v` must be orthonormal. Its complex projection is the ordinary
/// two-term mixture `|cu|^2 u u^dagger + |cv|^2 v v^dagger`.
pub fn block_purify(u: &CVector, v: &CVector, cu: Complex64, cv: Complex64) -> Result<QMatrix> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            op: "block_purify",
            left: (u.len(), 1),
            right: (v.len(), 1),
        });
    }
    for (name, w) in [("u", u), ("v", v)] {
        if (w.norm() - 1.0).abs() > ORTHOGONALITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "{name} must be a unit vector (norm {})",
                w.norm()
            )));
        }
    }
    let overlap = u.dotc(v).norm();
    if overlap > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal { overlap });
    }
    if cu.norm_sqr() + cv.norm_sqr() == 0.0 {
        return Err(Error::InvalidArgument(
            "block_purify needs |cu|^2 + |cv|^2 > 0".into(),
        ));
    }
    let alpha = linalg::outer(u, u).scale(cu.norm_sqr()) + linalg::outer(v, v).scale(cv.norm_sqr());
    let beta = pair_beta(u, v, cu.conj() * cv.conj());
    Ok(QMatrix::new(alpha, beta).expect("shapes agree"))
}

/// `z (conj(v) u^dagger - conj(u) v^dagger)`, skew-symmetric by construction.
fn pair_beta(u: &CVector, v: &CVector, z: Complex64) -> CMatrix {
    let n = u.len();
    CMatrix::from_fn(n, n, |r, c| z * (v[r].conj() * u[c].conj() - u[r].conj() * v[c].conj()))
}

/// Eigen-decomposition of a complex density, eigenvalues descending, with a
/// canonical basis inside each degenerate cluster.
///
/// Inside a cluster the basis is rebuilt from the cluster projector applied
/// to the standard basis (pivoted Gram-Schmidt), so the result does not
/// depend on which basis the eigensolver happened to return. Every vector is
/// then phase-normalized (largest-magnitude component real positive) and
/// cluster members are ordered lexicographically by component, descending.
pub(crate) fn canonical_eigensystem(mat: &CMatrix) -> Vec<(f64, CVector)> {
    let (values, vectors) = linalg::eigh(mat);
    let n = values.len();
    let scale = values.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    // descending
    let order: Vec<usize> = (0..n).rev().collect();
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[order[end - 1]] - values[order[end]]).abs() <= CLUSTER_TOL * scale {
            end += 1;
        }
        let idx = &order[start..end];
        let lambda = idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64;
        let mut cluster: Vec<CVector> = if idx.len() == 1 {
            vec![vectors.column(idx[0]).into_owned()]
        } else {
            let cols: Vec<CVector> = idx.iter().map(|&i| vectors.column(i).into_owned()).collect();
            canonical_cluster_basis(&cols)
        };
        for v in cluster.iter_mut() {
            normalize_phase(v);
        }
        cluster.sort_by(lexicographic_desc);
        out.extend(cluster.into_iter().map(|v| (lambda, v)));
        start = end;
    }
    out
}

fn canonical_cluster_basis(cols: &[CVector]) -> Vec<CVector> {
    let n = cols[0].len();
    let d = cols.len();
    let projector = cols.iter().fold(CMatrix::zeros(n, n), |acc, v| acc + linalg::outer(v, v));
    let mut basis: Vec<CVector> = Vec::with_capacity(d);
    let mut used = vec![false; n];
    while basis.len() < d {
        let mut best: Option<(usize, CVector, f64)> = None;
        for (i, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut w: CVector = projector.column(i).into_owned();
            for b in &basis {
                let c = b.dotc(&w);
                w -= b * c;
            }
            let norm = w.norm();
            // ties resolve to the lowest index
            if best.as_ref().is_none_or(|(_, _, bn)| norm > bn + 1e-12) {
                best = Some((i, w, norm));
            }
        }
        let (i, w, norm) = best.expect("cluster spans at least one standard direction");
        used[i] = true;
        let mut w = w.unscale(norm);
        // one re-orthogonalization pass
        for b in &basis {
            let c = b.dotc(&w);
            w -= b * c;
        }
        let norm = w.norm();
        basis.push(w.unscale(norm));
    }
    basis
}

fn normalize_phase(v: &mut CVector) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best_norm + 1e-12 {
            best = i;
            best_norm = z.norm();
        }
    }
    if best_norm > 0.0 {
        let phase = v[best].conj() / best_norm;
        *v *= phase;
        v[best] = Complex64::new(v[best].norm(), 0.0);
    }
}

fn lexicographic_desc(a: &CVector, b: &CVector) -> Ordering {
    const EPS: f64 = 1e-9;
    for (x, y) in a.iter().zip(b.iter()) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            if (p - q).abs() > EPS {
                return q.total_cmp(&p);
            }
        }
    }
    Ordering::Equal
}

/// Smallest admissible lift rank for a complex density of rank `m`.
pub fn min_lift_rank(m: usize) -> usize {
    m.div_ceil(2)
}

/// Quaternionic density of rank `target_rank` whose complex projection is
/// exactly `rho_alpha`.
///
/// The eigenvectors of `rho_alpha` are taken in descending eigenvalue order
/// and the leading `2k` of them, `k = m - target_rank`, are merged pairwise
/// `(e1, e2), (e3, e4), ...` into rank-one blocks via [`block_purify`]; the
/// remaining terms stay complex. The alpha block of the result is the input
/// matrix itself, so `P(lift(rho)) == rho` holds bit for bit.
pub fn lift(rho_alpha: &CDensity, target_rank: usize) -> Result<QDensity> {
    let m = rho_alpha.rank();
    if m <= 1 {
        return Err(Error::RankOne);
    }
    let min = min_lift_rank(m);
    if target_rank < min || target_rank > m {
        return Err(Error::RankOutOfRange {
            m,
            requested: target_rank,
            min,
        });
    }
    let n = rho_alpha.dim();
    let pairs = m - target_rank;
    let mut beta = CMatrix::from_element(n, n, C0);
    if pairs > 0 {
        let eig = canonical_eigensystem(rho_alpha.matrix());
        for k in 0..pairs {
            let (pa, ea) = &eig[2 * k];
            let (pb, eb) = &eig[2 * k + 1];
            let z = Complex64::new(pa.max(0.0).sqrt() * pb.max(0.0).sqrt(), 0.0);
            beta += pair_beta(ea, eb, z);
        }
    }
    let mat = QMatrix::new(rho_alpha.matrix().clone(), beta).expect("shapes agree");
    validate(&mat, DENSITY_TOL)
}

/// Pure quaternionic state projecting onto `rho_alpha`; exists iff the rank
/// of `rho_alpha` is at most two.
pub fn purify(rho_alpha: &CDensity) -> Result<QDensity> {
    match rho_alpha.rank() {
        1 => Ok(QDensity::from_complex(rho_alpha)),
        2 => lift(rho_alpha, 1),
        rank => Err(Error::NotPurifiable { rank }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    /// `beta = 0`.
    Proper,
    /// Mixed quaternionic state with `beta != 0`.
    Improper,
    /// Rank-one quaternionic state with `beta != 0`.
    PureQ,
}

/// Deterministic random density of the requested kind.
pub fn random_density(n: usize, kind: DensityKind, seed: u64) -> QDensity {
    let mut rng = seeded_rng(seed);
    let rank = match kind {
        DensityKind::PureQ => 1,
        DensityKind::Proper => rng.random_range(1..=n),
        DensityKind::Improper => rng.random_range(1..=n),
    };
    random_density_with_rank(&mut rng, n, rank, kind)
}

/// Random density of quaternionic rank `rank` with weights in a bounded
/// range so that the rank is numerically unambiguous.
pub fn random_density_with_rank<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    rank: usize,
    kind: DensityKind,
) -> QDensity {
    assert!(n >= 1 && (1..=n).contains(&rank), "rank {rank} invalid for dimension {n}");
    let weights = random::random_weights(rng, rank);
    let mat = match kind {
        DensityKind::Proper => {
            let u = random::random_unitary(rng, n);
            let mut alpha = CMatrix::zeros(n, n);
            for (k, w) in weights.iter().enumerate() {
                let col: CVector = u.column(k).into_owned();
                alpha += linalg::outer(&col, &col).scale(*w);
            }
            QMatrix::from_complex(alpha)
        }
        DensityKind::Improper | DensityKind::PureQ => {
            let basis = random::random_orthonormal_q(rng, n, rank);
            let mut acc = QMatrix::zeros(n, n);
            for (psi, w) in basis.iter().zip(&weights) {
                acc = &acc + &(psi * &psi.adjoint()).scale(*w);
            }
            acc
        }
    };
    let mat = hermitize_and_normalize(mat);
    QDensity::classified(mat)
}

/// Random complex density of exact rank `rank`.
pub fn random_cdensity<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CDensity {
    let rho = random_density_with_rank(rng, n, rank, DensityKind::Proper);
    CDensity::unchecked(rho.into_matrix().into_parts().0)
}

pub(crate) fn hermitize_and_normalize(m: QMatrix) -> QMatrix {
    let h = (&m + &m.adjoint()).scale(0.5);
    let t = h.real_trace().expect("square");
    h.scale(1.0 / t)
}
