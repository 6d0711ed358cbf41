//! Quaternion scalars in complex-pair form.
//!
//! A quaternion is written `q = alpha + j beta` with complex `alpha` (the
//! `1, i` part) and complex `beta` (the `j, k` part). The imaginary unit `j`
//! anticommutes with `i`, which in pair form reads `j z = conj(z) j` for every
//! complex `z`. The third unit is derived, `k = i j`, and never stored.
//!
//! Vector spaces in this crate are *right* modules: scalars multiply kets from
//! the right, so `|psi> q` is the scalar multiple of `|psi>` by `q`. All other
//! modules inherit the sign conventions fixed here.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(C0, C0);
    pub const ONE: Self = Self::new(C1, C0);
    pub const I: Self = Self::new(Complex64::new(0.0, 1.0), C0);
    pub const J: Self = Self::new(C0, C1);

    pub const fn new(alpha: Complex64, beta: Complex64) -> Self {
        Self { alpha, beta }
    }

    /// Embeds a complex number (`beta = 0`).
    pub const fn from_complex(z: Complex64) -> Self {
        Self::new(z, C0)
    }

    /// `k = i j`, which in pair form is `0 + j (-i)`.
    pub fn k() -> Self {
        Self::I * Self::J
    }

    /// Builds `a + b i + c j + d k`. The pair is `(a + b i) + j (c - d i)`.
    pub fn from_four_reals(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(Complex64::new(a, b), Complex64::new(c, -d))
    }

    /// Inverse of [`Quaternion::from_four_reals`].
    pub fn to_four_reals(self) -> (f64, f64, f64, f64) {
        (self.alpha.re, self.alpha.im, self.beta.re, -self.beta.im)
    }

    pub fn conj(self) -> Self {
        Self::new(self.alpha.conj(), -self.beta)
    }

    pub fn norm_sqr(self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.alpha.norm().hypot(self.beta.norm())
    }

    /// Real part, `Re q = Re alpha`.
    pub fn re(self) -> f64 {
        self.alpha.re
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.alpha * s, self.beta * s)
    }

    pub fn is_complex(self) -> bool {
        self.beta == C0
    }
}

impl From<Complex64> for Quaternion {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl From<f64> for Quaternion {
    fn from(x: f64) -> Self {
        Self::from_complex(Complex64::new(x, 0.0))
    }
}

impl Mul for Quaternion {
    type Output = Self;

    // (a + j b)(c + j d) = (a c - conj(b) d) + j (conj(a) d + b c)
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.alpha * rhs.alpha - self.beta.conj() * rhs.beta,
            self.alpha.conj() * rhs.beta + self.beta * rhs.alpha,
        )
    }
}

impl Add for Quaternion {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::new(self.alpha + rhs.alpha, self.beta + rhs.beta)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, rhs: Self) {
        self.alpha += rhs.alpha;
        self.beta += rhs.beta;
    }
}

impl Sub for Quaternion {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self::new(self.alpha - rhs.alpha, self.beta - rhs.beta)
    }
}

impl Neg for Quaternion {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.alpha, -self.beta)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c, d) = self.to_four_reals();
        write!(f, "{a} + {b}i + {c}j + {d}k")
    }
}
