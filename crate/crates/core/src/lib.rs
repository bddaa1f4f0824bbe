//! Exact infinitesimal arithmetic and a piecewise-smooth transformation of
//! the Schwarzschild line element that stays regular across `R = 2GM/c²`.
//!
//! * [`infinitesimal`]: truncated Levi-Civita series with standard parts.
//! * [`transition`]: the C¹ transition family `H_a` and its checks.
//! * [`lineelement`]: coefficient expressions, the `dU = dt + f_M dR`
//!   substitution and regime-wise standardization.
//! * [`geodesics`]: radial null rays in the `t` and `U` charts.

pub mod geodesics;
pub mod infinitesimal;
pub mod lineelement;
pub mod rational;
pub mod scalar;
pub mod transition;

pub use infinitesimal::{Lc, LcError, LcF64, LcNumber, TruncationPolicy};
pub use rational::Rational;
pub use scalar::{ArithmeticError, Coefficient, Scalar};
