use qmix::density::{random_density_with_rank, DensityKind};
use qmix::dynamics::{self, Generator, Propagator};
use qmix::random::{random_generator_matrix, seeded_rng};
use qmix::{Error, QMatrix};

#[test]
fn time_dependent_rk4_tracks_time_ordered_product() {
    let mut rng = seeded_rng(31);
    let (a, b) = (random_generator_matrix(&mut rng, 3, true), random_generator_matrix(&mut rng, 3, false));
    let gen = Generator::from_schedule(201, 0.01, |t| &a.scale((3.0 * t).cos()) + &b.scale(t)).unwrap();
    let rho = random_density_with_rank(&mut rng, 3, 3, DensityKind::Improper);
    let rk4 = dynamics::integrate(&rho, &gen, 2.0, 800).unwrap();
    let product = dynamics::time_ordered(&gen, 2.0, 4000).unwrap();
    let via_u = dynamics::evolve(&rho, &product).unwrap();
    let d = (rk4.state.matrix() - via_u.matrix()).frobenius_norm();
    assert!(d < 1e-6, "{d:e}");
}

#[test]
fn constant_time_ordered_matches_exact() {
    let mut rng = seeded_rng(32);
    let h = random_generator_matrix(&mut rng, 4, true);
    let gen = Generator::constant(h.clone()).unwrap();
    let sliced = dynamics::time_ordered(&gen, 1.3, 7).unwrap();
    let exact = Propagator::exact(&h, 1.3).unwrap();
    assert!(sliced.matrix().max_abs_diff(exact.matrix()) < 1e-12);
    assert!(dynamics::unitarity_deviation(exact.matrix()) < 1e-12);
}

#[test]
fn trace_and_spectrum_are_conserved_along_the_path() {
    let mut rng = seeded_rng(33);
    let h = random_generator_matrix(&mut rng, 3, true);
    let rho = random_density_with_rank(&mut rng, 3, 2, DensityKind::Improper);
    let before = rho.matrix().eigvals_hermitian().unwrap();
    let mut worst_trace = 0.0f64;
    let run = dynamics::integrate_observed(&rho, &Generator::constant(h).unwrap(), 1.0, 500, |_, m| {
        worst_trace = worst_trace.max((m.real_trace().unwrap() - 1.0).abs());
    })
    .unwrap();
    assert!(worst_trace < 1e-13);
    assert!(run.max_correction() < 1e-12);
    let after = run.state.matrix().eigvals_hermitian().unwrap();
    for (x, y) in before.iter().zip(&after) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn malformed_generators_and_propagators_are_rejected() {
    let hermitian = QMatrix::identity(2);
    assert!(matches!(Generator::constant(hermitian.clone()), Err(Error::NotAntiHermitian { .. })));
    assert!(matches!(Propagator::new(hermitian.scale(2.0), 0.0, 1.0), Err(Error::NotUnitary { .. })));
    let rho = random_density_with_rank(&mut seeded_rng(34), 3, 1, DensityKind::Proper);
    let u = Propagator::new(QMatrix::identity(2), 0.0, 1.0).unwrap();
    assert!(matches!(dynamics::evolve(&rho, &u), Err(Error::DimensionMismatch { .. })));
}
