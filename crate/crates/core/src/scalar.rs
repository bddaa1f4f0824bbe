//! Ordered-field abstraction shared by every numeric path in the crate.
//!
//! [`Coefficient`] is the real field a series is built over (exact
//! [`Rational`] or `f64`); [`Scalar`] is anything the transition family and
//! the line-element expressions can be evaluated over, which adds the
//! truncated series [`crate::infinitesimal::LcNumber`] to those two.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithmeticError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not supported over this scalar field")]
    Unsupported(&'static str),
}

/// A real field usable as series coefficients.
pub trait Coefficient:
    Clone
    + Debug
    + Display
    + FromStr
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Whether arithmetic is exact (junction checks compare with `==` when it is).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn sign(&self) -> Ordering;
    fn recip(&self) -> Option<Self>;
    fn from_rational(q: &Rational) -> Self;
    /// `None` for non-finite input.
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    fn sin(&self) -> Option<Self>;
}

impl Coefficient for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn sign(&self) -> Ordering {
        self.signum()
    }
    fn recip(&self) -> Option<Self> {
        Rational::recip(self)
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn from_f64(x: f64) -> Option<Self> {
        Rational::from_f64(x).ok()
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn sin(&self) -> Option<Self> {
        // sin is rational at rational points only at 0
        self.is_zero().then(Rational::zero)
    }
}

impl Coefficient for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn sign(&self) -> Ordering {
        self.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }
    fn recip(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
    fn from_rational(q: &Rational) -> Self {
        q.to_f64()
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Option<Self> {
        Some(f64::sin(*self))
    }
}

/// An ordered field the transition family and coefficient expressions are generic over.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_rational(q: &Rational) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(n))
    }

    fn zero() -> Self {
        Self::from_i64(0)
    }

    fn one() -> Self {
        Self::from_i64(1)
    }

    fn is_zero(&self) -> bool;

    /// Total order; no tolerance.
    fn cmp_scalar(&self, other: &Self) -> Ordering;

    fn recip(&self) -> Result<Self, ArithmeticError>;

    fn sin(&self) -> Result<Self, ArithmeticError>;

    fn checked_div(&self, rhs: &Self) -> Result<Self, ArithmeticError> {
        Ok(self.clone() * rhs.recip()?)
    }

    fn powi(&self, exp: i32) -> Result<Self, ArithmeticError> {
        let base = if exp < 0 { self.recip()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..exp.unsigned_abs() {
            acc = acc * base.clone();
        }
        Ok(acc)
    }

    fn abs(&self) -> Self {
        if self.cmp_scalar(&Self::zero()) == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_positive(&self) -> bool {
        self.cmp_scalar(&Self::zero()) == Ordering::Greater
    }
}

impl Scalar for f64 {
    fn from_rational(q: &Rational) -> Self {
        q.to_f64()
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn cmp_scalar(&self, other: &Self) -> Ordering {
        // +0.0 folds -0.0 into 0.0 so the two zeros compare equal
        (self + 0.0).total_cmp(&(other + 0.0))
    }

    fn recip(&self) -> Result<Self, ArithmeticError> {
        Coefficient::recip(self).ok_or(ArithmeticError::DivisionByZero)
    }

    fn sin(&self) -> Result<Self, ArithmeticError> {
        Ok(f64::sin(*self))
    }

    fn powi(&self, exp: i32) -> Result<Self, ArithmeticError> {
        if exp < 0 && *self == 0.0 {
            return Err(ArithmeticError::DivisionByZero);
        }
        Ok(f64::powi(*self, exp))
    }
}

impl Scalar for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }

    fn cmp_scalar(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn recip(&self) -> Result<Self, ArithmeticError> {
        Rational::recip(self).ok_or(ArithmeticError::DivisionByZero)
    }

    fn sin(&self) -> Result<Self, ArithmeticError> {
        Coefficient::sin(self).ok_or(ArithmeticError::Unsupported("sin of a nonzero rational"))
    }

    fn powi(&self, exp: i32) -> Result<Self, ArithmeticError> {
        self.pow(exp).ok_or(ArithmeticError::DivisionByZero)
    }
}
