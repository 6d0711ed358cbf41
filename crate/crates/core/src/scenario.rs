//! The system/apparatus measurement pipeline and the proposition checker.
//!
//! A spin-1/2 system in `c+ |+n> + c- |-n>` couples to a two-level apparatus.
//! Tracing out the apparatus gives an improper mixture; a nonselective Lüders
//! measurement on the isolated system gives a proper mixture with the same
//! complex density. The improper one is represented by its quaternionic
//! purification, the proper one by the bare complex matrix. Complex
//! observables agree on both; the quaternionic observable `j rho_beta` does not.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bipartite::{self, ProjectorFamily, SpinBasis, Subsystem};
use crate::density::{
    self, block_purify, complex_projection, expectation, CDensity, Classification, DensityKind, Observable,
    QDensity, DENSITY_TOL,
};
use crate::dynamics::{self, Propagator};
use crate::io::MatrixFile;
use crate::linalg::{self, CMatrix, CVector, C0};
use crate::qmatrix::QMatrix;
use crate::random::{derive_seed, seeded_rng};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Partial-trace and Lüders mixtures must agree entrywise to this.
pub const MIXTURE_AGREEMENT_TOL: f64 = 1e-12;
pub const COMPLEX_OBSERVABLE_TOL: f64 = 1e-11;
pub const DISCRIMINATOR_TOL: f64 = 1e-10;
pub const PROPER_DISCRIMINATOR_TOL: f64 = 1e-12;
pub const IDEMPOTENCY_TOL: f64 = 1e-10;

/// Unit vector `(sin t cos p, sin t sin p, cos t)` for polar `t`, azimuth `p`.
pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Eigenvectors of `sigma . n`:
/// `|+n> = (cos t/2, e^{ip} sin t/2)`, `|-n> = (-e^{-ip} sin t/2, cos t/2)`.
pub fn spin_basis(theta: f64, phi: f64) -> SpinBasis {
    let (s, c) = ((0.5 * theta).sin(), (0.5 * theta).cos());
    let e = Complex64::from_polar(1.0, phi);
    [
        CVector::from_vec(vec![Complex64::new(c, 0.0), e * s]),
        CVector::from_vec(vec![-e.conj() * s, Complex64::new(c, 0.0)]),
    ]
}

pub fn pauli() -> [CMatrix; 3] {
    let (o, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    [
        CMatrix::from_row_slice(2, 2, &[C0, o, o, C0]),
        CMatrix::from_row_slice(2, 2, &[C0, -i, i, C0]),
        CMatrix::from_row_slice(2, 2, &[o, C0, C0, -o]),
    ]
}

pub fn sigma_dot(n: [f64; 3]) -> CMatrix {
    let [x, y, z] = pauli();
    x.scale(n[0]) + y.scale(n[1]) + z.scale(n[2])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioInputs {
    pub c_plus: [f64; 2],
    pub c_minus: [f64; 2],
    pub theta: f64,
    pub phi: f64,
    pub n_hat: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationRow {
    pub observable: String,
    pub proper: f64,
    pub improper: f64,
    pub abs_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discriminator {
    pub observable: String,
    pub matrix: MatrixFile,
    pub proper: f64,
    pub improper: f64,
    /// `|rho_beta|_F^2` of the improper state.
    pub beta_norm_sqr: f64,
    /// `2 |c+ c-|^2`.
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    fn at_most(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_owned(),
            pass: residual <= tolerance,
            residual,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub inputs: ScenarioInputs,
    /// Which member of the improper class is reported.
    pub improper_representative: String,
    pub rho_improper: MatrixFile,
    pub rho_proper: MatrixFile,
    pub classification_improper: Classification,
    pub classification_proper: Classification,
    pub complex_expectation_table: Vec<ExpectationRow>,
    pub quaternionic_discriminator: Discriminator,
    pub checks: Vec<Check>,
}

impl ScenarioReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Intermediate states of the pipeline, kept for callers that want to probe
/// them further.
#[derive(Debug, Clone)]
pub struct ScenarioStates {
    pub basis: SpinBasis,
    /// Reduced system state from the partial trace.
    pub partial_trace: CDensity,
    /// Lüders post-measurement state.
    pub lueders: CDensity,
    pub rho_improper: QDensity,
    pub rho_proper: QDensity,
}

pub fn scenario_states(c_plus: Complex64, c_minus: Complex64, theta: f64, phi: f64) -> Result<ScenarioStates> {
    let basis = spin_basis(theta, phi);
    let interaction = bipartite::measurement_interaction(c_plus, c_minus, &basis)?;
    let partial_trace = bipartite::partial_trace(&interaction.state.density(), (2, 2), Subsystem::Second)?;

    let [plus, minus] = &basis;
    let phi0: CVector = plus * c_plus + minus * c_minus;
    let initial = CDensity::new(linalg::outer(&phi0, &phi0), DENSITY_TOL)?;
    let lueders = bipartite::lueders_nonselective(&initial, &ProjectorFamily::from_basis(&basis)?)?;

    let rho_improper = density::validate(&block_purify(plus, minus, c_plus, c_minus)?, DENSITY_TOL)?;
    let rho_proper = QDensity::from_complex(&lueders);
    Ok(ScenarioStates {
        basis,
        partial_trace,
        lueders,
        rho_improper,
        rho_proper,
    })
}

pub fn run_scenario(c_plus: Complex64, c_minus: Complex64, theta: f64, phi: f64) -> Result<ScenarioReport> {
    let states = scenario_states(c_plus, c_minus, theta, phi)?;
    let n_hat = direction(theta, phi);
    let improper = &states.rho_improper;
    let proper = &states.rho_proper;
    let mut checks = Vec::new();

    checks.push(Check::at_most(
        "partial_trace_equals_lueders",
        linalg::max_abs_diff(states.partial_trace.matrix(), states.lueders.matrix()),
        MIXTURE_AGREEMENT_TOL,
    ));
    checks.push(Check::at_most(
        "projection_of_improper_equals_proper",
        linalg::max_abs_diff(complex_projection(improper).matrix(), proper.matrix().alpha()),
        MIXTURE_AGREEMENT_TOL,
    ));
    checks.push(Check::at_most(
        "projection_of_improper_equals_partial_trace",
        linalg::max_abs_diff(complex_projection(improper).matrix(), states.partial_trace.matrix()),
        MIXTURE_AGREEMENT_TOL,
    ));
    let rank = improper.rank();
    checks.push(Check {
        name: "improper_rank_q_is_one".into(),
        pass: rank == 1,
        residual: rank as f64 - 1.0,
        tolerance: 0.0,
    });
    let m = improper.matrix();
    checks.push(Check::at_most(
        "improper_idempotency",
        (m * m).max_abs_diff(m),
        IDEMPOTENCY_TOL,
    ));

    let [sx, sy, sz] = pauli();
    let observables = [
        ("I", CMatrix::identity(2, 2)),
        ("sigma.n", sigma_dot(n_hat)),
        ("sigma_x", sx),
        ("sigma_y", sy),
        ("sigma_z", sz),
    ];
    let mut table = Vec::with_capacity(observables.len());
    let mut worst = 0.0f64;
    for (label, mat) in observables {
        let a = Observable::complex(mat)?;
        let vp = expectation(&a, proper)?;
        let vi = expectation(&a, improper)?;
        worst = worst.max((vp - vi).abs());
        table.push(ExpectationRow {
            observable: label.to_owned(),
            proper: vp,
            improper: vi,
            abs_difference: (vp - vi).abs(),
        });
    }
    checks.push(Check::at_most("complex_observables_agree", worst, COMPLEX_OBSERVABLE_TOL));

    let disc = Observable::discriminator(improper);
    let on_improper = expectation(&disc, improper)?;
    let on_proper = expectation(&disc, proper)?;
    let expected = 2.0 * (c_plus * c_minus).norm_sqr();
    checks.push(Check::at_most(
        "discriminator_on_improper",
        (on_improper - expected).abs(),
        DISCRIMINATOR_TOL,
    ));
    checks.push(Check::at_most(
        "discriminator_on_proper",
        on_proper.abs(),
        PROPER_DISCRIMINATOR_TOL,
    ));

    // Complex post-processing U = exp(-0.73 i sigma.m) on both mixtures.
    let axis = direction(1.1, 0.4);
    let generator = QMatrix::from_complex(sigma_dot(axis) * Complex64::new(0.0, 0.73));
    let u = Propagator::exact(&generator, 1.0)?;
    let moved_improper = dynamics::evolve(improper, &u)?;
    let moved_proper = dynamics::evolve(proper, &u)?;
    let preserved = moved_improper.classification() == improper.classification()
        && moved_proper.classification() == proper.classification();
    checks.push(Check {
        name: "complex_unitary_preserves_partition".into(),
        pass: preserved,
        residual: (moved_improper.beta_norm() - improper.beta_norm()).abs() + moved_proper.beta_norm(),
        tolerance: 0.0,
    });

    Ok(ScenarioReport {
        schema_version: SCHEMA_VERSION,
        inputs: ScenarioInputs {
            c_plus: [c_plus.re, c_plus.im],
            c_minus: [c_minus.re, c_minus.im],
            theta,
            phi,
            n_hat,
        },
        improper_representative: "purified".into(),
        rho_improper: MatrixFile::from(improper.matrix()),
        rho_proper: MatrixFile::from(proper.matrix()),
        classification_improper: improper.classification(),
        classification_proper: proper.classification(),
        complex_expectation_table: table,
        quaternionic_discriminator: Discriminator {
            observable: "j*rho_beta".into(),
            matrix: MatrixFile::from(disc.matrix()),
            proper: on_proper,
            improper: on_improper,
            beta_norm_sqr: improper.beta_norm().powi(2),
            expected,
        },
        checks,
    })
}

/// Negative controls for [`check_propositions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfTest {
    #[default]
    Off,
    /// Replace the skew-symmetric beta block of every lift/purify output by
    /// a symmetric one before checking it.
    CorruptBeta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropositionStats {
    pub proposition: u8,
    pub statement: &'static str,
    pub trials: usize,
    pub passed: usize,
    pub worst_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropositionSummary {
    pub schema_version: u32,
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub propositions: Vec<PropositionStats>,
}

const STATEMENTS: [&str; 4] = [
    "complex projection of a quaternionic density is a complex density",
    "m <= rank(rho_alpha) <= 2m for rank(rho) = m",
    "lift reaches every rank in ceil(m/2)..=m with P(lift) = rho_alpha",
    "rank-2 complex densities purify to rank 1; rank > 2 cannot",
];

#[derive(Debug, Clone)]
struct Outcome {
    residual: f64,
    failure: Option<String>,
}

impl Outcome {
    fn pass(residual: f64) -> Self {
        Self { residual, failure: None }
    }

    fn fail(residual: f64, detail: String) -> Self {
        Self {
            residual,
            failure: Some(detail),
        }
    }
}

fn corrupt(rho: &QDensity) -> QMatrix {
    let beta = rho.matrix().beta();
    let n = beta.nrows();
    let sym = CMatrix::from_fn(n, n, |r, c| if r > c { -beta[(r, c)] } else { beta[(r, c)] });
    QMatrix::new(rho.matrix().alpha().clone(), sym).expect("shapes agree")
}

fn prop1(rho: &QDensity) -> Outcome {
    let alpha = complex_projection(rho);
    let herm = linalg::hermitian_deviation(alpha.matrix());
    let min = alpha.eigenvalues().first().copied().unwrap_or(0.0);
    let trace_dev = (linalg::trace(alpha.matrix()).re - 1.0).abs();
    let residual = herm.max(-min).max(trace_dev).max(0.0);
    if herm > 1e-10 || min < -1e-10 || trace_dev > 1e-12 {
        Outcome::fail(residual, format!("hermitian dev {herm:e}, min eigenvalue {min:e}, trace dev {trace_dev:e}"))
    } else {
        Outcome::pass(residual)
    }
}

fn prop2(rho: &QDensity) -> Outcome {
    let b = density::rank_bounds_check(rho);
    if b.pass {
        Outcome::pass(0.0)
    } else {
        Outcome::fail(1.0, format!("m = {}, rank(rho_alpha) = {}", b.m, b.rank_alpha))
    }
}

fn checked_output(out: QDensity, mode: SelfTest) -> Result<QDensity> {
    match mode {
        SelfTest::Off => Ok(out),
        SelfTest::CorruptBeta => density::validate(&corrupt(&out), DENSITY_TOL),
    }
}

fn prop3<R: Rng + ?Sized>(rng: &mut R, n: usize, mode: SelfTest) -> Outcome {
    let m = rng.random_range(2..=n);
    let target = match mode {
        SelfTest::Off => rng.random_range(density::min_lift_rank(m)..=m),
        SelfTest::CorruptBeta => density::min_lift_rank(m),
    };
    let rho_alpha = density::random_cdensity(rng, n, m);
    let lifted = match density::lift(&rho_alpha, target).and_then(|o| checked_output(o, mode)) {
        Ok(l) => l,
        Err(e) => return Outcome::fail(f64::INFINITY, format!("lift(rank {m} -> {target}) failed: {e}")),
    };
    let residual = linalg::max_abs_diff(complex_projection(&lifted).matrix(), rho_alpha.matrix());
    let rank = lifted.rank();
    if rank != target || residual > 1e-12 {
        Outcome::fail(residual, format!("lift(rank {m} -> {target}) has rank {rank}, round trip {residual:e}"))
    } else {
        Outcome::pass(residual)
    }
}

fn prop4<R: Rng + ?Sized>(rng: &mut R, n: usize, mode: SelfTest) -> Outcome {
    let rank2 = density::random_cdensity(rng, n, 2);
    let pure = match density::purify(&rank2).and_then(|o| checked_output(o, mode)) {
        Ok(p) => p,
        Err(e) => return Outcome::fail(f64::INFINITY, format!("purify(rank 2) failed: {e}")),
    };
    let m = pure.matrix();
    let residual = (m * m).max_abs_diff(m);
    if pure.rank() != 1 || residual > IDEMPOTENCY_TOL {
        return Outcome::fail(residual, format!("purify(rank 2) has rank {}, idempotency {residual:e}", pure.rank()));
    }
    if n >= 3 {
        let rank3 = density::random_cdensity(rng, n, 3);
        match density::purify(&rank3) {
            Err(Error::NotPurifiable { .. }) => {}
            other => return Outcome::fail(residual, format!("purify(rank 3) returned {other:?}")),
        }
    }
    Outcome::pass(residual)
}

fn run_trial(n_max: usize, trial_seed: u64, mode: SelfTest) -> [Outcome; 4] {
    let mut rng = seeded_rng(trial_seed);
    let n = rng.random_range(2..=n_max);
    let kind = match rng.random_range(0..3) {
        0 => DensityKind::Proper,
        1 => DensityKind::Improper,
        _ => DensityKind::PureQ,
    };
    let rank = if kind == DensityKind::PureQ { 1 } else { rng.random_range(1..=n) };
    let rho = density::random_density_with_rank(&mut rng, n, rank, kind);
    [prop1(&rho), prop2(&rho), prop3(&mut rng, n, mode), prop4(&mut rng, n, mode)]
}

/// Randomized check of the four projection/lift propositions. Trials run in
/// parallel, each on its own seed derived from `(seed, trial)`; results are
/// merged in trial order, and the first failure becomes
/// [`Error::PropositionViolated`].
pub fn check_propositions(n_max: usize, trials: usize, seed: u64, mode: SelfTest) -> Result<PropositionSummary> {
    if n_max < 2 {
        return Err(Error::InvalidArgument(format!("n_max must be at least 2, got {n_max}")));
    }
    let outcomes: Vec<[Outcome; 4]> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(n_max, derive_seed(seed, t as u64), mode))
        .collect();

    let mut stats: Vec<PropositionStats> = if trials == 0 {
        Vec::new()
    } else {
        (0..4)
            .map(|k| PropositionStats {
                proposition: k as u8 + 1,
                statement: STATEMENTS[k],
                trials: 0,
                passed: 0,
                worst_residual: 0.0,
            })
            .collect()
    };
    for (t, row) in outcomes.iter().enumerate() {
        for (k, outcome) in row.iter().enumerate() {
            if let Some(detail) = &outcome.failure {
                return Err(Error::PropositionViolated {
                    proposition: k as u8 + 1,
                    trial: t,
                    seed: derive_seed(seed, t as u64),
                    detail: detail.clone(),
                });
            }
            let s = &mut stats[k];
            s.trials += 1;
            s.passed += 1;
            s.worst_residual = s.worst_residual.max(outcome.residual);
        }
    }
    Ok(PropositionSummary {
        schema_version: SCHEMA_VERSION,
        n_max,
        trials,
        seed,
        propositions: stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn spin_basis_diagonalizes_sigma_n() {
        for (theta, phi) in [(0.0, 0.0), (0.4, 1.3), (2.0, -0.7), (std::f64::consts::PI, 0.2)] {
            let s = sigma_dot(direction(theta, phi));
            let [plus, minus] = spin_basis(theta, phi);
            assert!((&s * &plus - &plus).norm() < 1e-14);
            assert!((&s * &minus + &minus).norm() < 1e-14);
            assert!(plus.dotc(&minus).norm() < 1e-15);
        }
    }

    #[test]
    fn no_entanglement_collapses_both_mixtures() {
        let r = run_scenario(c(1.0), C0, 0.0, 0.0).unwrap();
        assert!(r.all_pass(), "{:#?}", r.checks);
        assert_eq!(r.rho_improper, r.rho_proper);
        assert_eq!(r.quaternionic_discriminator.improper, 0.0);
        assert_eq!(r.classification_improper, Classification::Proper);
    }

    #[test]
    fn balanced_superposition() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = run_scenario(c(s), c(s), 0.0, 0.0).unwrap();
        assert!(r.all_pass(), "{:#?}", r.checks);
        let sz = r.complex_expectation_table.iter().find(|row| row.observable == "sigma_z").unwrap();
        assert_abs_diff_eq!(sz.proper, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sz.improper, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.quaternionic_discriminator.improper, 0.5, epsilon = 1e-15);
        assert_eq!(r.quaternionic_discriminator.proper, 0.0);
        assert_eq!(r.classification_improper, Classification::Improper);
        assert_eq!(r.classification_proper, Classification::Proper);
    }

    #[test]
    fn seventy_thirty_split() {
        let r = run_scenario(c(0.7f64.sqrt()), c(0.3f64.sqrt()), 0.0, 0.0).unwrap();
        assert!(r.all_pass(), "{:#?}", r.checks);
        let sz = r.complex_expectation_table.iter().find(|row| row.observable == "sigma_z").unwrap();
        assert_abs_diff_eq!(sz.proper, 0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(sz.improper, 0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(r.quaternionic_discriminator.improper, 0.42, epsilon = 1e-14);
    }

    #[test]
    fn tilted_axis_and_complex_amplitudes() {
        let r = run_scenario(Complex64::new(0.3, 0.4), Complex64::new(0.0, -(0.75f64.sqrt())), 1.2, 2.5).unwrap();
        assert!(r.all_pass(), "{:#?}", r.checks);
        let sn = r.complex_expectation_table.iter().find(|row| row.observable == "sigma.n").unwrap();
        assert_abs_diff_eq!(sn.proper, 0.25 - 0.75, epsilon = 1e-12);
    }

    #[test]
    fn rejects_unnormalized_amplitudes() {
        assert!(matches!(run_scenario(c(1.0), c(1.0), 0.0, 0.0), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn zero_trials_is_empty() {
        let s = check_propositions(4, 0, 1, SelfTest::Off).unwrap();
        assert!(s.propositions.is_empty());
    }

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let a = check_propositions(5, 60, 9, SelfTest::Off).unwrap();
        let b = check_propositions(5, 60, 9, SelfTest::Off).unwrap();
        assert_eq!(a, b);
        assert!(a.propositions.iter().all(|p| p.passed == 60));
    }

    #[test]
    fn corrupted_beta_is_caught() {
        match check_propositions(4, 10, 3, SelfTest::CorruptBeta) {
            Err(Error::PropositionViolated { proposition, trial: 0, .. }) => assert_eq!(proposition, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn n_max_must_be_at_least_two() {
        assert!(check_propositions(1, 5, 0, SelfTest::Off).is_err());
    }
}
