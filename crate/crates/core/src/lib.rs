//! Quaternionic density matrices and the proper/improper mixture split.
//!
//! A state lives on a right quaternionic Hilbert space `H^Q` of finite
//! dimension. Every quaternionic matrix is stored as a pair of complex
//! matrices `M = M_alpha + j M_beta`. Complex density matrices embed with
//! `beta = 0` and represent proper mixtures; density matrices with a nonzero
//! `beta` block represent improper mixtures. The complex projection
//! `P(M) = M_alpha` maps every class back to ordinary complex quantum theory.
//!
//! Module map:
//!
//! * [`quaternion`]: the scalar field and its sign conventions.
//! * [`qmatrix`]: dense quaternionic matrices and the complex-adjoint map.
//! * [`density`]: validation, projection, classification, lift and purify.
//! * [`dynamics`]: unitary evolution, propagators and the projected flow.
//! * [`bipartite`]: tensor products, Schmidt data, partial trace, Lüders rule.
//! * [`scenario`]: the system/apparatus measurement pipeline end to end.
//! * [`io`] and [`cli`]: matrix files, reports and the `qmix` command.

pub mod bipartite;
pub mod cli;
pub mod density;
pub mod dynamics;
mod error;
pub mod io;
mod linalg;
pub mod qmatrix;
pub mod quaternion;
pub mod random;
pub mod scenario;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use qmatrix::{ChiImage, QMatrix};
pub use quaternion::Quaternion;

pub use num_complex::Complex64;
