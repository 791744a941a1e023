//! Numerical laboratory for the variance of random real algebraic zero sets.
//!
//! * [`geometry`]: sphere volumes, Gamma, multinomials.
//! * [`gaussian`]: covariance algebra, reproducible sampling, `|det⊥|`.
//! * [`limit_model`]: Bargmann–Fock limit covariances and their diagonalizers.
//! * [`jacobian_moments`]: `E[|det⊥X| |det⊥Y|]` and the integrand `D_{n,r}`.
//! * [`universal_constants`]: `I_{n,r}`, leading constants, the positivity table.
//! * [`kostlan_model`]: KSS polynomials, jets, second chaos, Kac–Rice variance.
//! * [`zero_set_mc`]: root counting, empirical root statistics, Crofton length.
//!
//! Support: [`quadrature`], [`stats`], [`parallel`] (deterministic batched Monte Carlo).

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaussian;
pub mod geometry;
pub mod jacobian_moments;
pub mod kostlan_model;
pub mod limit_model;
pub mod parallel;
pub mod quadrature;
pub mod stats;
pub mod universal_constants;
pub mod zero_set_mc;

pub use error::{NodalError, Result};
pub use gaussian::{RngStream, SymmetricMatrix};
pub use geometry::DimPair;
