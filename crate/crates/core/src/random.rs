//! Seeded generators for test data: Gaussian matrices, unitaries, generators.

use nalgebra::QR;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, CVector};
use crate::qmatrix::QMatrix;

pub type QRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> QRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for the `index`-th independent stream derived from `seed`
/// (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn random_cmatrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

pub fn random_qmatrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> QMatrix {
    let alpha = random_cmatrix(rng, rows, cols);
    let beta = random_cmatrix(rng, rows, cols);
    QMatrix::new(alpha, beta).expect("shapes agree")
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    let v = CVector::from_fn(n, |_, _| gaussian_complex(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-distributed complex unitary (QR of a Ginibre matrix with the phases
/// of `R`'s diagonal folded back into `Q`).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = QR::new(random_cmatrix(rng, n, n));
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = random_cmatrix(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}

/// Random hermitian quaternionic matrix: hermitian alpha, skew-symmetric beta.
pub fn random_hermitian_q<R: Rng + ?Sized>(rng: &mut R, n: usize) -> QMatrix {
    let g = random_qmatrix(rng, n, n);
    (&g + &g.adjoint()).scale(0.5)
}

/// Random anti-hermitian quaternionic matrix scaled to unit Frobenius norm.
/// With `quaternionic = false` the beta block is zero.
pub fn random_generator_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, quaternionic: bool) -> QMatrix {
    let g = if quaternionic {
        random_qmatrix(rng, n, n)
    } else {
        QMatrix::from_complex(random_cmatrix(rng, n, n))
    };
    let h = (&g - &g.adjoint()).scale(0.5);
    let norm = h.frobenius_norm();
    h.scale(1.0 / norm)
}

/// `count` mutually orthonormal quaternionic column vectors in `H^Q` of
/// dimension `n`, by Gram-Schmidt with right scalar projections.
pub fn random_orthonormal_q<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> Vec<QMatrix> {
    assert!(count <= n, "cannot draw {count} orthonormal vectors in dimension {n}");
    let mut basis: Vec<QMatrix> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v = random_qmatrix(rng, n, 1);
        for _ in 0..2 {
            for b in &basis {
                // v <- v - b <b|v>
                let overlap = &b.adjoint() * &v;
                v = &v - &(b * &overlap);
            }
        }
        let norm = v.frobenius_norm();
        if norm > 1e-6 {
            basis.push(v.scale(1.0 / norm));
        }
    }
    basis
}

/// Probability weights bounded away from zero, summing to one.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded_rng(3);
        let u = random_unitary(&mut rng, 5);
        let d = u.adjoint() * &u - CMatrix::identity(5, 5);
        assert!(d.iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn quaternionic_basis_is_orthonormal() {
        let mut rng = seeded_rng(4);
        let basis = random_orthonormal_q(&mut rng, 4, 4);
        for (a, u) in basis.iter().enumerate() {
            for (b, v) in basis.iter().enumerate() {
                let ip = (&u.adjoint() * v).get(0, 0);
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip.alpha.re - want).abs() < 1e-12);
                assert!(ip.alpha.im.abs() < 1e-12 && ip.beta.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
