//! The piecewise transition family `H_a`.
//!
//! ```text
//!          ⎧ 1/(x - a)                              x ≤ 0
//! H_a(x) = ⎨ -x³/(2a⁴) + 7x²/(4a³) - x/a² - 1/a     0 < x ≤ 2a
//!          ⎩ 0                                      x > 2a
//! ```
//!
//! `H_a` and `H'_a` are continuous for every `a > 0`, and `|H_a| ≤ 2/a`.
//! Everything here is generic over [`Scalar`], so the same code runs with a
//! real `a` (float or exact rational) or with `a = ε` over
//! [`LcNumber`](crate::infinitesimal::LcNumber).
//!
//! The middle branch is pluggable through [`Bridge`]; [`CubicBridge`] is the
//! default.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infinitesimal::LcNumber;
use crate::rational::Rational;
use crate::scalar::{ArithmeticError, Coefficient, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransitionError {
    #[error("transition parameter must be > 0, got {0}")]
    NonPositiveParameter(String),
    #[error("sample count must be >= 1")]
    NoSamples,
    #[error("invalid sample range [{0}, {1}]")]
    InvalidRange(f64, f64),
}

/// Which piece of `H_a` applies at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `x ≤ 0`
    F,
    /// `0 < x ≤ 2a`
    G,
    /// `x > 2a`
    H,
}

/// The piece joining `f_a` at 0 to the zero branch at `2a`.
///
/// Implementations must agree with `1/(x - a)` in value and slope at `x = 0`
/// and vanish with zero slope at `x = 2a`.
pub trait Bridge: Clone + Debug + Send + Sync {
    fn value<S: Scalar>(&self, a: &S, x: &S) -> S;
    fn derivative<S: Scalar>(&self, a: &S, x: &S) -> S;
    /// Zeros of the derivative inside `(0, 2a]` for a real parameter.
    fn critical_points(&self, a: f64) -> Vec<f64>;
}

/// `g_a(x) = -x³/(2a⁴) + 7x²/(4a³) - x/a² - 1/a`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CubicBridge;

fn rat<S: Scalar>(n: i64, d: i64) -> S {
    S::from_rational(&Rational::new(n, d).expect("nonzero literal denominator"))
}

fn inverse_parameter<S: Scalar>(a: &S) -> S {
    a.recip().expect("transition parameter is positive")
}

impl Bridge for CubicBridge {
    fn value<S: Scalar>(&self, a: &S, x: &S) -> S {
        let ia = inverse_parameter(a);
        let ia2 = ia.clone() * ia.clone();
        let ia3 = ia2.clone() * ia.clone();
        let ia4 = ia3.clone() * ia.clone();
        let x2 = x.clone() * x.clone();
        let x3 = x2.clone() * x.clone();
        -(rat::<S>(1, 2) * x3 * ia4) + rat::<S>(7, 4) * x2 * ia3 - x.clone() * ia2 - ia
    }

    fn derivative<S: Scalar>(&self, a: &S, x: &S) -> S {
        let ia = inverse_parameter(a);
        let ia2 = ia.clone() * ia.clone();
        let ia3 = ia2.clone() * ia.clone();
        let ia4 = ia3.clone() * ia;
        let x2 = x.clone() * x.clone();
        -(rat::<S>(3, 2) * x2 * ia4) + rat::<S>(7, 2) * x.clone() * ia3 - ia2
    }

    fn critical_points(&self, a: f64) -> Vec<f64> {
        // g'(x) = qa·x² + qb·x + qc
        let qa = -1.5 / a.powi(4);
        let qb = 3.5 / a.powi(3);
        let qc = -1.0 / a.powi(2);
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return Vec::new();
        }
        let s = qb.signum() * disc.sqrt();
        let r1 = -(qb + s) / (2.0 * qa);
        let r2 = qc / (qa * r1);
        let mut roots: Vec<f64> = [r1, r2]
            .into_iter()
            .filter(|r| *r > 0.0 && *r <= 2.0 * a * (1.0 + 1e-12))
            .map(|r| r.min(2.0 * a))
            .collect();
        roots.sort_by(f64::total_cmp);
        roots
    }
}

/// A validated transition parameter `a > 0` together with its middle branch.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSpec<S: Scalar, B: Bridge = CubicBridge> {
    a: S,
    bridge: B,
}

impl<S: Scalar> TransitionSpec<S, CubicBridge> {
    pub fn new(a: S) -> Result<Self, TransitionError> {
        Self::with_bridge(a, CubicBridge)
    }
}

impl<S: Scalar, B: Bridge> TransitionSpec<S, B> {
    pub fn with_bridge(a: S, bridge: B) -> Result<Self, TransitionError> {
        // a − a is NaN for NaN and ±inf
        let finite = (a.clone() - a.clone()).is_zero();
        if !(a.is_positive() && finite) {
            return Err(TransitionError::NonPositiveParameter(format!("{a:?}")));
        }
        Ok(Self { a, bridge })
    }

    pub fn a(&self) -> &S {
        &self.a
    }

    pub fn bridge(&self) -> &B {
        &self.bridge
    }

    pub fn branch(&self, x: &S) -> Branch {
        if x.cmp_scalar(&S::zero()) != Ordering::Greater {
            return Branch::F;
        }
        let two_a = self.a.clone() + self.a.clone();
        if x.cmp_scalar(&two_a) != Ordering::Greater {
            Branch::G
        } else {
            Branch::H
        }
    }

    /// `H_a(x)`.
    pub fn h_eval(&self, x: &S) -> S {
        match self.branch(x) {
            Branch::F => (x.clone() - self.a.clone())
                .recip()
                .expect("x - a < 0 on the F branch"),
            Branch::G => self.bridge.value(&self.a, x),
            Branch::H => S::zero(),
        }
    }

    /// `H'_a(x)`, branchwise.
    pub fn h_derivative(&self, x: &S) -> S {
        match self.branch(x) {
            Branch::F => {
                let d = x.clone() - self.a.clone();
                -(d.clone() * d).recip().expect("x - a < 0 on the F branch")
            }
            Branch::G => self.bridge.derivative(&self.a, x),
            Branch::H => S::zero(),
        }
    }

    /// `f_M = H_a(λ)/c`.
    pub fn f_m_eval(&self, lambda: &S, c: &S) -> Result<S, ArithmeticError> {
        self.h_eval(lambda).checked_div(c)
    }
}

/// Left and right limits at one junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneSided {
    pub left: String,
    pub right: String,
    pub left_value: f64,
    pub right_value: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionReport {
    pub a: String,
    pub exact: bool,
    pub value_at_zero: OneSided,
    pub value_at_two_a: OneSided,
    pub derivative_at_zero: OneSided,
    pub derivative_at_two_a: OneSided,
    pub pass: bool,
}

/// Relative tolerance for junction matching in float mode.
pub const JUNCTION_FLOAT_TOLERANCE: f64 = 1e-12;

impl<C, B> TransitionSpec<C, B>
where
    C: Coefficient + Scalar,
    B: Bridge,
{
    /// One-sided limits of `H_a` and `H'_a` at `0` and `2a`.
    ///
    /// Each limit is computed as the standard part of the branch evaluated a
    /// positive infinitesimal away from the junction. Exact coefficients must
    /// match exactly; float coefficients within [`JUNCTION_FLOAT_TOLERANCE`]
    /// relative to `max(|left|, |right|, 1/a)`.
    pub fn junction_report(&self) -> JunctionReport {
        let a = LcNumber::<C>::constant(self.a.clone());
        let lifted = TransitionSpec {
            a: a.clone(),
            bridge: self.bridge.clone(),
        };
        let eps = LcNumber::<C>::epsilon(Rational::one());
        let zero = LcNumber::<C>::zero();
        let two_a = a.clone() + a;
        let scale = 1.0 / Coefficient::to_f64(&self.a);

        let limits = |point: &LcNumber<C>, f: &dyn Fn(&LcNumber<C>) -> LcNumber<C>| {
            let st = |x: LcNumber<C>| {
                f(&x)
                    .standard_part()
                    .expect("branches are limited near their junctions")
            };
            let left = st(point.clone() - eps.clone());
            let right = st(point.clone() + eps.clone());
            one_sided(left, right, scale)
        };
        let value = |x: &LcNumber<C>| lifted.h_eval(x);
        let slope = |x: &LcNumber<C>| lifted.h_derivative(x);

        let value_at_zero = limits(&zero, &value);
        let value_at_two_a = limits(&two_a, &value);
        let derivative_at_zero = limits(&zero, &slope);
        let derivative_at_two_a = limits(&two_a, &slope);
        let pass = value_at_zero.matches
            && value_at_two_a.matches
            && derivative_at_zero.matches
            && derivative_at_two_a.matches;
        JunctionReport {
            a: self.a.to_string(),
            exact: C::EXACT,
            value_at_zero,
            value_at_two_a,
            derivative_at_zero,
            derivative_at_two_a,
            pass,
        }
    }
}

fn one_sided<C: Coefficient>(left: C, right: C, scale: f64) -> OneSided {
    let (lv, rv) = (left.to_f64(), right.to_f64());
    let matches = if C::EXACT {
        left == right
    } else {
        (lv - rv).abs() <= JUNCTION_FLOAT_TOLERANCE * lv.abs().max(rv.abs()).max(scale)
    };
    OneSided {
        left: left.to_string(),
        right: right.to_string(),
        left_value: lv,
        right_value: rv,
        matches,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupBoundReport {
    pub a: f64,
    pub bound: f64,
    pub samples: usize,
    pub range: (f64, f64),
    pub sampled_max_abs: f64,
    pub sampled_argmax: f64,
    /// `|H_a(0)|`; `|f_a|` increases monotonically towards 0 on its branch.
    pub f_branch_sup: f64,
    pub extremum_x: Option<f64>,
    pub extremum_abs: Option<f64>,
    pub max_abs: f64,
    pub pass: bool,
}

impl<B: Bridge> TransitionSpec<f64, B> {
    /// Default sampling window, `[-2a, 4a]`: covers every branch and both junctions.
    pub fn default_range(&self) -> (f64, f64) {
        (-2.0 * self.a, 4.0 * self.a)
    }

    /// Checks `|H_a| ≤ 2/a` over a uniform grid, the F-branch supremum, and
    /// the bridge's interior critical points.
    pub fn sup_bound_check(&self, samples: usize) -> Result<SupBoundReport, TransitionError> {
        if samples == 0 {
            return Err(TransitionError::NoSamples);
        }
        let range = self.default_range();
        let (mut sampled_max_abs, mut sampled_argmax) = (0.0f64, 0.0f64);
        for x in linspace(range.0, range.1, samples) {
            let v = self.h_eval(&x).abs();
            if v > sampled_max_abs {
                sampled_max_abs = v;
                sampled_argmax = x;
            }
        }
        let f_branch_sup = self.h_eval(&0.0).abs();
        let extremum = self
            .bridge
            .critical_points(self.a)
            .into_iter()
            .map(|x| (x, self.h_eval(&x).abs()))
            .max_by(|l, r| l.1.total_cmp(&r.1));
        let max_abs = [
            sampled_max_abs,
            f_branch_sup,
            extremum.map_or(0.0, |(_, v)| v),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        let bound = 2.0 / self.a;
        Ok(SupBoundReport {
            a: self.a,
            bound,
            samples,
            range,
            sampled_max_abs,
            sampled_argmax,
            f_branch_sup,
            extremum_x: extremum.map(|e| e.0),
            extremum_abs: extremum.map(|e| e.1),
            max_abs,
            pass: max_abs <= bound,
        })
    }

    pub fn sample_table(
        &self,
        lo: f64,
        hi: f64,
        samples: usize,
    ) -> Result<Vec<SampleRow>, TransitionError> {
        if samples == 0 {
            return Err(TransitionError::NoSamples);
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(TransitionError::InvalidRange(lo, hi));
        }
        Ok(linspace(lo, hi, samples)
            .map(|x| SampleRow {
                x,
                h: self.h_eval(&x),
                dh: self.h_derivative(&x),
            })
            .collect())
    }
}

/// `n` evenly spaced points including both ends; a single point sits at the midpoint.
pub fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let start = if n > 1 { lo } else { 0.5 * (lo + hi) };
    (0..n).map(move |i| if n > 1 && i == n - 1 { hi } else { start + step * i as f64 })
}

/// One row of the `(x, H_a(x), H'_a(x))` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub x: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "dH")]
    pub dh: f64,
}

/// Writes a sample table as CSV with header `x,H,dH`.
pub fn write_samples_csv<W: Write>(rows: &[SampleRow], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
