//! Quaternionic unitary dynamics and its complex projection.
//!
//! A generator is anti-hermitian, `H = -(dU/dt) U^dagger`, so no preferred
//! imaginary unit is singled out. States evolve as `rho(t) = U rho(0) U^dagger`
//! with the time-ordered propagator `U(t) = T exp(-int_0^t H)`, equivalently
//! `d rho / dt = -[H, rho]`.
//!
//! Complex generators (`H_beta = 0`) map proper states to proper states and
//! improper to improper. A generic quaternionic generator leaks a proper state
//! into the improper part of its class; [`partition_witness`] finds such a leak.

use crate::density::{self, CDensity, QDensity};
use crate::linalg::{self, CMatrix};
use crate::qmatrix::QMatrix;
use crate::random::{self, derive_seed, seeded_rng};
use crate::{Error, Result};

/// Anti-hermiticity tolerance for every generator sample.
pub const GENERATOR_TOL: f64 = 1e-10;
/// Unitarity tolerance for propagators.
pub const UNITARY_TOL: f64 = 1e-9;
/// Largest per-step correction tolerated by [`integrate`].
pub const DRIFT_LIMIT: f64 = 1e-6;
/// Leak threshold separating a genuine witness from rounding noise.
pub const WITNESS_THRESHOLD: f64 = 1e-6;
pub const WITNESS_ATTEMPTS: usize = 100;

const EVOLVED_TOL: f64 = 1e-9;

/// Anti-hermitian generator, either constant or sampled on a uniform grid
/// `t_k = k * dt` and linearly interpolated between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    samples: Vec<QMatrix>,
    dt: f64,
}

impl Generator {
    pub fn constant(h: QMatrix) -> Result<Self> {
        Self::sampled(vec![h], 0.0)
    }

    pub fn sampled(samples: Vec<QMatrix>, dt: f64) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidArgument("generator needs at least one sample".into()))?;
        if samples.len() > 1 && !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample spacing must be positive, got {dt}")));
        }
        for h in &samples {
            if h.shape() != first.shape() {
                return Err(Error::DimensionMismatch {
                    op: "Generator::sampled",
                    left: first.shape(),
                    right: h.shape(),
                });
            }
            if !h.is_square() {
                return Err(Error::NonSquare {
                    op: "Generator",
                    rows: h.rows(),
                    cols: h.cols(),
                });
            }
            let deviation = h.anti_hermitian_deviation();
            if deviation > GENERATOR_TOL {
                return Err(Error::NotAntiHermitian { deviation });
            }
        }
        Ok(Self { samples, dt })
    }

    /// Samples `f(t_k)` for `k = 0..count`.
    pub fn from_schedule(count: usize, dt: f64, mut f: impl FnMut(f64) -> QMatrix) -> Result<Self> {
        Self::sampled((0..count).map(|k| f(k as f64 * dt)).collect(), dt)
    }

    pub fn dim(&self) -> usize {
        self.samples[0].rows()
    }

    pub fn is_constant(&self) -> bool {
        self.samples.len() == 1
    }

    pub fn is_complex(&self) -> bool {
        self.samples.iter().all(|h| h.beta_norm() == 0.0)
    }

    /// `H(t)`, clamped to the first/last sample outside the grid.
    pub fn at(&self, t: f64) -> QMatrix {
        if self.is_constant() {
            return self.samples[0].clone();
        }
        let last = self.samples.len() - 1;
        let x = (t / self.dt).clamp(0.0, last as f64);
        let k = (x.floor() as usize).min(last - 1);
        let w = x - k as f64;
        &self.samples[k].scale(1.0 - w) + &self.samples[k + 1].scale(w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    u: QMatrix,
    t0: f64,
    t1: f64,
}

impl Propagator {
    pub fn new(u: QMatrix, t0: f64, t1: f64) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NonSquare {
                op: "Propagator",
                rows: u.rows(),
                cols: u.cols(),
            });
        }
        let deviation = unitarity_deviation(&u);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { u, t0, t1 })
    }

    /// `exp(-t H)` for a constant generator.
    pub fn exact(h: &QMatrix, t: f64) -> Result<Self> {
        Self::new(h.scale(-t).expm()?, 0.0, t)
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.u
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn is_complex(&self) -> bool {
        self.u.beta_norm() == 0.0
    }
}

pub fn unitarity_deviation(u: &QMatrix) -> f64 {
    (&u.adjoint() * u).max_abs_diff(&QMatrix::identity(u.cols()))
}

fn check_dims(op: &'static str, rho: &QDensity, u: &QMatrix) -> Result<()> {
    if rho.dim() != u.rows() {
        return Err(Error::DimensionMismatch {
            op,
            left: rho.matrix().shape(),
            right: u.shape(),
        });
    }
    Ok(())
}

/// `rho -> U rho U^dagger`.
pub fn evolve(rho: &QDensity, u: &Propagator) -> Result<QDensity> {
    check_dims("evolve", rho, &u.u)?;
    let out = &(&u.u * rho.matrix()) * &u.u.adjoint();
    let out = (&out + &out.adjoint()).scale(0.5);
    density::validate(&out, EVOLVED_TOL)
}

/// Complex part of `U rho U^dagger`, assembled directly from the blocks:
///
/// ```text
/// U_a rho_a U_a^dagger + conj(U_b) conj(rho_a) U_b^T
///     + U_a conj(rho_b) U_b^T - conj(U_b) rho_b U_a^dagger
/// ```
pub fn projected_evolution(rho0: &QDensity, u: &Propagator) -> Result<CDensity> {
    check_dims("projected_evolution", rho0, &u.u)?;
    let (ua, ub) = (u.u.alpha(), u.u.beta());
    let (ra, rb) = (rho0.matrix().alpha(), rho0.matrix().beta());
    let ub_conj = ub.conjugate();
    let ua_dag = ua.adjoint();
    let ub_t = ub.transpose();
    let out = ua * ra * &ua_dag + &ub_conj * ra.conjugate() * &ub_t + ua * rb.conjugate() * &ub_t
        - &ub_conj * rb * &ua_dag;
    CDensity::new(out, EVOLVED_TOL)
}

/// Right-hand side of the projected flow,
/// `d rho_a / dt = -[H_a, rho_a] + conj(H_b) rho_b - conj(rho_b) H_b`.
pub fn projected_rate(rho: &QMatrix, h: &QMatrix) -> CMatrix {
    let (ha, hb) = (h.alpha(), h.beta());
    let (ra, rb) = (rho.alpha(), rho.beta());
    -(ha * ra - ra * ha) + hb.conjugate() * rb - rb.conjugate() * hb
}

fn commutator_rate(h: &QMatrix, rho: &QMatrix) -> QMatrix {
    &(rho * h) - &(h * rho)
}

/// Output of [`integrate`]: the final state plus the Frobenius norm of the
/// hermiticity/trace correction applied after every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    pub state: QDensity,
    pub corrections: Vec<f64>,
}

impl Integration {
    pub fn max_correction(&self) -> f64 {
        self.corrections.iter().copied().fold(0.0, f64::max)
    }
}

/// Classical fourth-order Runge-Kutta on `d rho / dt = -[H(t), rho]`.
pub fn integrate(rho0: &QDensity, gen: &Generator, t: f64, steps: usize) -> Result<Integration> {
    integrate_observed(rho0, gen, t, steps, |_, _| {})
}

/// [`integrate`] with `observe(t_k, rho_k)` called after each step (and at
/// `t = 0`).
pub fn integrate_observed(
    rho0: &QDensity,
    gen: &Generator,
    t: f64,
    steps: usize,
    mut observe: impl FnMut(f64, &QMatrix),
) -> Result<Integration> {
    if steps == 0 {
        return Err(Error::InvalidArgument("integrate needs steps >= 1".into()));
    }
    if rho0.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            op: "integrate",
            left: rho0.matrix().shape(),
            right: (gen.dim(), gen.dim()),
        });
    }
    let h = t / steps as f64;
    let mut rho = rho0.matrix().clone();
    let mut corrections = Vec::with_capacity(steps);
    observe(0.0, &rho);
    for step in 0..steps {
        let t0 = step as f64 * h;
        let h0 = gen.at(t0);
        let hm = gen.at(t0 + 0.5 * h);
        let h1 = gen.at(t0 + h);
        let k1 = commutator_rate(&h0, &rho);
        let k2 = commutator_rate(&hm, &(&rho + &k1.scale(0.5 * h)));
        let k3 = commutator_rate(&hm, &(&rho + &k2.scale(0.5 * h)));
        let k4 = commutator_rate(&h1, &(&rho + &k3.scale(h)));
        let incr = &(&k1 + &k2.scale(2.0)) + &(&k3.scale(2.0) + &k4);
        let raw = &rho + &incr.scale(h / 6.0);
        let fixed = density::hermitize_and_normalize(raw.clone());
        let correction = (&fixed - &raw).frobenius_norm();
        if correction > DRIFT_LIMIT {
            return Err(Error::DriftExceeded {
                step,
                correction,
                limit: DRIFT_LIMIT,
            });
        }
        corrections.push(correction);
        rho = fixed;
        observe(t0 + h, &rho);
    }
    Ok(Integration {
        state: density::validate(&rho, EVOLVED_TOL)?,
        corrections,
    })
}

/// Ordered product of `exp(-h H(t_mid))` over `steps` midpoint slices, later
/// times multiplying from the left.
pub fn time_ordered(gen: &Generator, t: f64, steps: usize) -> Result<Propagator> {
    if steps == 0 {
        return Err(Error::InvalidArgument("time_ordered needs steps >= 1".into()));
    }
    let h = t / steps as f64;
    let mut u = QMatrix::identity(gen.dim());
    if gen.is_constant() {
        let slice = gen.at(0.0).scale(-h).expm()?;
        for _ in 0..steps {
            u = &slice * &u;
        }
    } else {
        for k in 0..steps {
            let mid = (k as f64 + 0.5) * h;
            u = &gen.at(mid).scale(-h).expm()? * &u;
        }
    }
    Propagator::new(u, 0.0, t)
}

/// Frobenius residual between a central finite difference of `P(rho(t))` at
/// `t = 0` (step `h`, evolution frozen at `H(0)`) and the projected rate.
/// Shrinks as `O(h^2)`.
pub fn projected_rate_check(rho: &QDensity, gen: &Generator, h: f64) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let h0 = gen.at(0.0);
    let forward = evolve_unchecked(rho.matrix(), &h0.scale(-h).expm()?);
    let backward = evolve_unchecked(rho.matrix(), &h0.scale(h).expm()?);
    let fd = (forward.alpha() - backward.alpha()).unscale(2.0 * h);
    let rhs = projected_rate(rho.matrix(), &h0);
    Ok(linalg::frobenius(&(fd - rhs)))
}

fn evolve_unchecked(rho: &QMatrix, u: &QMatrix) -> QMatrix {
    &(u * rho) * &u.adjoint()
}

/// A proper state and a quaternionic generator whose unit-time evolution
/// leaves the proper part of the state's class.
#[derive(Debug, Clone)]
pub struct Witness {
    pub generator: Generator,
    pub rho: QDensity,
    /// `|rho_beta(1)|_F` after evolving for unit time.
    pub leak: f64,
    pub attempts: usize,
}

/// `|beta|_F` of `exp(-H) rho exp(-H)^dagger`.
pub fn partition_leak(rho: &QDensity, gen: &Generator) -> Result<f64> {
    let u = Propagator::exact(&gen.at(0.0), 1.0)?;
    Ok(evolve(rho, &u)?.beta_norm())
}

pub fn partition_witness(n: usize, seed: u64) -> Result<Witness> {
    if n < 2 {
        return Err(Error::InvalidArgument("partition witness needs n >= 2".into()));
    }
    for attempt in 0..WITNESS_ATTEMPTS {
        let mut rng = seeded_rng(derive_seed(seed, attempt as u64));
        let h = random::random_generator_matrix(&mut rng, n, true);
        let generator = Generator::constant(h)?;
        let rank = rand::Rng::random_range(&mut rng, 1..=n);
        let rho = density::random_density_with_rank(&mut rng, n, rank, density::DensityKind::Proper);
        let leak = partition_leak(&rho, &generator)?;
        if leak > WITNESS_THRESHOLD {
            return Ok(Witness {
                generator,
                rho,
                leak,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::WitnessNotFound {
        attempts: WITNESS_ATTEMPTS,
    })
}
