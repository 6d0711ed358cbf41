//! Density-matrix invariants under random inputs.

use proptest::prelude::*;
use qmix::density::{
    self, complex_projection, expectation, lift, purify, random_cdensity, random_density_with_rank, validate,
    Classification, DensityKind, Observable, QDensity, DENSITY_TOL,
};
use qmix::random::{random_hermitian, random_unit_vector, seeded_rng};
use qmix::{CMatrix, Complex64, Error, QMatrix};

const C0: Complex64 = Complex64::new(0.0, 0.0);

fn kind_strategy() -> impl Strategy<Value = DensityKind> {
    prop_oneof![Just(DensityKind::Proper), Just(DensityKind::Improper), Just(DensityKind::PureQ)]
}

fn random_rho(seed: u64, n: usize, rank: usize, kind: DensityKind) -> QDensity {
    let rank = if kind == DensityKind::PureQ { 1 } else { rank.min(n) };
    random_density_with_rank(&mut seeded_rng(seed), n, rank, kind)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_a_complex_density(seed in any::<u64>(), n in 2usize..=6, rank in 1usize..=6, kind in kind_strategy()) {
        let rho = random_rho(seed, n, rank, kind);
        let alpha = complex_projection(&rho);
        let m = alpha.matrix();
        prop_assert!((m - m.adjoint()).camax() <= 1e-10);
        prop_assert!(alpha.eigenvalues()[0] >= -1e-10);
        prop_assert!((m.trace().re - 1.0).abs() <= 1e-12);
        prop_assert!(m.trace().im.abs() <= 1e-12);
    }

    #[test]
    fn projection_rank_is_between_m_and_2m(seed in any::<u64>(), n in 2usize..=6, rank in 1usize..=6, kind in kind_strategy()) {
        let rho = random_rho(seed, n, rank, kind);
        let m = rho.rank();
        let r = complex_projection(&rho).rank();
        prop_assert!(m <= r && r <= 2 * m, "m = {m}, rank alpha = {r}");
    }

    #[test]
    fn lift_round_trips_for_every_reachable_rank(seed in any::<u64>(), n in 2usize..=6, m in 2usize..=6, pick in 0usize..6) {
        let m = m.min(n);
        let lo = density::min_lift_rank(m);
        let target = lo + pick % (m - lo + 1);
        let rho_alpha = random_cdensity(&mut seeded_rng(seed), n, m);
        let lifted = lift(&rho_alpha, target).unwrap();
        prop_assert_eq!(lifted.rank(), target);
        prop_assert!((complex_projection(&lifted).matrix() - rho_alpha.matrix()).camax() <= 1e-12);
        prop_assert_eq!(lifted.classification() == Classification::Proper, target == m);
    }

    #[test]
    fn lift_outside_range_is_rejected(seed in any::<u64>(), n in 2usize..=6, m in 2usize..=6) {
        let m = m.min(n);
        let rho_alpha = random_cdensity(&mut seeded_rng(seed), n, m);
        let lo = density::min_lift_rank(m);
        let below = lift(&rho_alpha, lo - 1);
        let above = lift(&rho_alpha, m + 1);
        prop_assert!(matches!(below, Err(Error::RankOutOfRange { .. })), "{below:?}");
        prop_assert!(matches!(above, Err(Error::RankOutOfRange { .. })), "{above:?}");
    }

    #[test]
    fn purified_states_are_rank_one_projectors(seed in any::<u64>(), n in 2usize..=6) {
        let rho_alpha = random_cdensity(&mut seeded_rng(seed), n, 2);
        let pure = purify(&rho_alpha).unwrap();
        let m = pure.matrix();
        prop_assert_eq!(pure.rank(), 1);
        prop_assert!((m * m).max_abs_diff(m) <= 1e-10);
        prop_assert!((complex_projection(&pure).matrix() - rho_alpha.matrix()).camax() <= 1e-12);
    }

    #[test]
    fn complex_observables_cannot_tell_class_members_apart(seed in any::<u64>(), n in 2usize..=6, kind in kind_strategy()) {
        let mut rng = seeded_rng(seed);
        let rho = random_rho(seed ^ 0x5eed, n, n, kind);
        let proper = QDensity::from_complex(&complex_projection(&rho));
        let a = Observable::complex(random_hermitian(&mut rng, n)).unwrap();
        let x = expectation(&a, &rho).unwrap();
        let y = expectation(&a, &proper).unwrap();
        prop_assert!((x - y).abs() <= 1e-11);
    }
}

#[test]
fn rank_three_and_up_cannot_be_purified() {
    let mut rng = seeded_rng(21);
    for n in 3..=6 {
        for rank in 3..=n {
            let rho_alpha = random_cdensity(&mut rng, n, rank);
            assert!(matches!(purify(&rho_alpha), Err(Error::NotPurifiable { rank: r }) if r == rank));
        }
    }
}

#[test]
fn rank_one_purify_is_the_state_itself() {
    let mut rng = seeded_rng(22);
    let rho_alpha = random_cdensity(&mut rng, 3, 1);
    let pure = purify(&rho_alpha).unwrap();
    assert_eq!(pure.classification(), Classification::Proper);
    assert_eq!(pure.matrix().alpha(), rho_alpha.matrix());
}

#[test]
fn discriminator_separates_class_members() {
    let mut rng = seeded_rng(23);
    for n in 2..=5 {
        let rho_alpha = random_cdensity(&mut rng, n, 2);
        let pure = purify(&rho_alpha).unwrap();
        let proper = QDensity::from_complex(&rho_alpha);
        let disc = Observable::discriminator(&pure);
        assert!(!disc.is_complex());
        let on_pure = expectation(&disc, &pure).unwrap();
        assert!((on_pure - pure.beta_norm().powi(2)).abs() <= 1e-12);
        assert!(on_pure > 1e-3);
        assert_eq!(expectation(&disc, &proper).unwrap(), 0.0);
    }
}

#[test]
fn validation_reports_the_first_broken_condition() {
    let c = |x: f64| Complex64::new(x, 0.0);
    let rect = QMatrix::zeros(2, 3);
    assert!(matches!(validate(&rect, DENSITY_TOL), Err(Error::NonSquare { .. })));

    let mut rng = seeded_rng(24);
    let v = random_unit_vector(&mut rng, 3);
    let not_herm = QMatrix::from_complex(&v * v.transpose());
    assert!(matches!(validate(&not_herm, DENSITY_TOL), Err(Error::NotHermitian { .. })));

    let sym_beta = QMatrix::new(
        CMatrix::from_diagonal_element(2, 2, c(0.5)),
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.1), c(0.1), c(0.0)]),
    )
    .unwrap();
    assert!(matches!(validate(&sym_beta, DENSITY_TOL), Err(Error::NotHermitian { .. })));

    let trace2 = QMatrix::from_complex(CMatrix::identity(2, 2));
    assert!(matches!(validate(&trace2, DENSITY_TOL), Err(Error::TraceNotOne { .. })));

    let negative = QMatrix::from_complex(CMatrix::from_row_slice(2, 2, &[c(1.5), C0, C0, c(-0.5)]));
    match validate(&negative, DENSITY_TOL) {
        Err(Error::NotPositive { min_eigenvalue }) => assert!((min_eigenvalue + 0.5).abs() < 1e-14),
        other => panic!("{other:?}"),
    }
}

#[test]
fn lift_is_deterministic_under_degenerate_spectra() {
    let rho_alpha = density::CDensity::new(CMatrix::identity(4, 4).scale(0.25), DENSITY_TOL).unwrap();
    let a = lift(&rho_alpha, 2).unwrap();
    let b = lift(&rho_alpha, 2).unwrap();
    assert_eq!(a.matrix(), b.matrix());
    assert_eq!(a.rank(), 2);
    assert_eq!(a.matrix().alpha(), rho_alpha.matrix());
}
