//! Line elements and the `dU = dt + f_M(R) dR` substitution.
//!
//! A [`LineElement`] is the quadratic form
//!
//! ```text
//! dS² = tt·dT² + tr·dT·dR + rr·dR² + thth·dθ² + phph·dφ²
//! ```
//!
//! with each coefficient a [`CoefficientExpr`]. The exterior Schwarzschild
//! element is `λc²dt² − (1/λ)dR² − R²(sin²θ dφ² + dθ²)`, with
//! `λ = 1 − 2GM/(Rc²)`.
//!
//! [`transform_u_substitution`] shifts `λ → λ − a` and substitutes
//! `dt = dU − f_M dR`, where `f_M = H_a(λ)/c`. With `a = ε` the transformed
//! coefficients are series; standardizing them at a point gives
//!
//! * Interior (`λ < 0`) and Horizon (`λ = 0`): `λc²dU² − 2c dU dR − R²(…)`
//! * Exterior (`λ > 0`): the original element.

pub mod expr;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infinitesimal::LcNumber;
use crate::rational::Rational;
use crate::scalar::{ArithmeticError, Coefficient, Scalar};
use crate::transition::{Bridge, TransitionSpec};

pub use expr::{CoefficientExpr, Constant, EvalContext, EvalError, Variable};

/// Version tag written into JSON documents.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineElementError {
    #[error("physical constant {0} must be > 0")]
    NonPositiveConstant(&'static str),
    #[error("radius must be > 0")]
    NonPositiveRadius,
    #[error("expected a t-chart element")]
    NotTChart,
    #[error("expected a diagonal (tr = 0) element")]
    NonDiagonal,
    #[error("coefficient `{0}` is unlimited and has no standard part")]
    Unlimited(&'static str),
    #[error("regime {claimed} does not match λ with standard part {lambda}")]
    RegimeMismatch { claimed: Regime, lambda: String },
    #[error("expected a U-chart evaluation carrying f_M")]
    MissingTransition,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error("invalid JSON document: {0}")]
    Json(String),
}

/// `G`, `M`, `c`, all strictly positive. Geometric units (`G = c = 1`) by default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    #[serde(rename = "G")]
    g: Rational,
    #[serde(rename = "M")]
    m: Rational,
    c: Rational,
}

impl PhysicalConstants {
    pub fn new(g: Rational, m: Rational, c: Rational) -> Result<Self, LineElementError> {
        for (name, v) in [("G", &g), ("M", &m), ("c", &c)] {
            if !v.is_positive() {
                return Err(LineElementError::NonPositiveConstant(name));
            }
        }
        Ok(Self { g, m, c })
    }

    pub fn geometric(m: Rational) -> Result<Self, LineElementError> {
        Self::new(Rational::one(), m, Rational::one())
    }

    /// SI values of `G` (CODATA 2018) and `c`, with `M` in kilograms.
    pub fn si(m_kg: Rational) -> Result<Self, LineElementError> {
        let g = "6.67430e-11".parse().expect("valid literal");
        Self::new(g, m_kg, Rational::from_integer(299_792_458))
    }

    pub fn g(&self) -> &Rational {
        &self.g
    }

    pub fn m(&self) -> &Rational {
        &self.m
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    /// `2GM/c²`.
    pub fn schwarzschild_radius(&self) -> Rational {
        Rational::from_integer(2) * self.g.clone() * self.m.clone()
            / (self.c.clone() * self.c.clone())
    }

    pub fn context<S: Scalar>(&self) -> EvalContext<S> {
        EvalContext::new(
            S::from_rational(&self.g),
            S::from_rational(&self.m),
            S::from_rational(&self.c),
        )
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::geometric(Rational::one()).expect("unit mass is positive")
    }
}

/// `λ(R) = 1 − 2GM/(Rc²)`.
pub fn lambda_of_r<S: Scalar>(consts: &PhysicalConstants, r: &S) -> Result<S, LineElementError> {
    if !r.is_positive() {
        return Err(LineElementError::NonPositiveRadius);
    }
    Ok(CoefficientExpr::var(Variable::Lambda).eval(&consts.context().with_r(r.clone()))?)
}

/// `λ` as an expression in `R`.
pub fn lambda_expr() -> CoefficientExpr {
    use CoefficientExpr as E;
    E::int(1)
        - (E::int(2) * E::constant(Constant::G) * E::constant(Constant::M))
            / (E::var(Variable::R) * E::constant(Constant::C).pow(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Interior,
    Horizon,
    Exterior,
}

impl Regime {
    pub fn of_lambda_sign(sign: Ordering) -> Self {
        match sign {
            Ordering::Less => Regime::Interior,
            Ordering::Equal => Regime::Horizon,
            Ordering::Greater => Regime::Exterior,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Classifies a radius by the exact sign of `λ(R)`.
pub fn regime_classify(consts: &PhysicalConstants, r: &Rational) -> Result<Regime, LineElementError> {
    let lambda = lambda_of_r(consts, r)?;
    Ok(Regime::of_lambda_sign(lambda.signum()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    #[serde(rename = "t")]
    T,
    #[serde(rename = "U")]
    U,
}

/// The five coefficients of a line element, in `dT², dT·dR, dR², dθ², dφ²` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coefficients<T> {
    pub tt: T,
    pub tr: T,
    pub rr: T,
    pub thth: T,
    pub phph: T,
}

impl<T> Coefficients<T> {
    pub fn named(&self) -> [(&'static str, &T); 5] {
        [
            ("tt", &self.tt),
            ("tr", &self.tr),
            ("rr", &self.rr),
            ("thth", &self.thth),
            ("phph", &self.phph),
        ]
    }

    pub fn try_map<U, E>(&self, mut f: impl FnMut(&'static str, &T) -> Result<U, E>) -> Result<Coefficients<U>, E> {
        Ok(Coefficients {
            tt: f("tt", &self.tt)?,
            tr: f("tr", &self.tr)?,
            rr: f("rr", &self.rr)?,
            thth: f("thth", &self.thth)?,
            phph: f("phph", &self.phph)?,
        })
    }
}

impl<S: Scalar> Coefficients<S> {
    /// Determinant of the time–radial block `[[tt, tr/2], [tr/2, rr]]`.
    pub fn time_radial_determinant(&self) -> S {
        let half = S::from_rational(&Rational::new(1, 2).expect("literal"));
        let off = self.tr.clone() * half;
        self.tt.clone() * self.rr.clone() - off.clone() * off
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineElement {
    pub chart: Chart,
    pub coefficients: Coefficients<CoefficientExpr>,
}

fn angular_sector() -> (CoefficientExpr, CoefficientExpr) {
    use CoefficientExpr as E;
    let r2 = E::var(Variable::R).pow(2);
    let thth = -r2.clone();
    let phph = -(r2 * E::var(Variable::Theta).sin().pow(2));
    (thth, phph)
}

/// `λc²dt² − (1/λ)dR² − R²(sin²θ dφ² + dθ²)`, with `λ` left symbolic.
pub fn schwarzschild_element() -> LineElement {
    use CoefficientExpr as E;
    let lambda = E::var(Variable::Lambda);
    let (thth, phph) = angular_sector();
    LineElement {
        chart: Chart::T,
        coefficients: Coefficients {
            tt: lambda.clone() * E::constant(Constant::C).pow(2),
            tr: E::int(0),
            rr: -(E::int(1) / lambda),
            thth,
            phph,
        },
    }
}

/// `λc²dU² − 2c dU dR − R²(sin²θ dφ² + dθ²)`, the standardized interior form.
pub fn interior_element() -> LineElement {
    use CoefficientExpr as E;
    let (thth, phph) = angular_sector();
    LineElement {
        chart: Chart::U,
        coefficients: Coefficients {
            tt: E::var(Variable::Lambda) * E::constant(Constant::C).pow(2),
            tr: -(E::int(2) * E::constant(Constant::C)),
            rr: E::int(0),
            thth,
            phph,
        },
    }
}

/// `f_M = H_a(λ)/c`.
pub fn f_m_expr() -> CoefficientExpr {
    CoefficientExpr::var(Variable::Lambda).transition() / CoefficientExpr::constant(Constant::C)
}

/// Shifts `λ → λ − a` and substitutes `dt = dU − f_M dR` into a diagonal t-chart element.
///
/// ```text
/// UU = tt'        UR = −2·tt'·f_M        RR = tt'·f_M² + rr'
/// ```
///
/// where primes denote the shifted coefficients. The angular coefficients
/// are carried over unchanged.
pub fn transform_u_substitution(elem: &LineElement) -> Result<LineElement, LineElementError> {
    use CoefficientExpr as E;
    if elem.chart != Chart::T {
        return Err(LineElementError::NotTChart);
    }
    let c = &elem.coefficients;
    if !c.tr.is_literal_zero() {
        return Err(LineElementError::NonDiagonal);
    }
    let shifted = E::var(Variable::Lambda) - E::constant(Constant::A);
    let tt = c.tt.substitute(Variable::Lambda, &shifted);
    let rr = c.rr.substitute(Variable::Lambda, &shifted);
    let f_m = f_m_expr();
    Ok(LineElement {
        chart: Chart::U,
        coefficients: Coefficients {
            tt: tt.clone(),
            tr: -(E::int(2) * tt.clone() * f_m.clone()),
            rr: tt * f_m.pow(2) + rr,
            thth: c.thth.clone(),
            phph: c.phph.clone(),
        },
    })
}

/// The `dR²` coefficient after substitution, `(λ−a)c²f_M² − 1/(λ−a)`.
pub fn b_coefficient<S: Scalar, B: Bridge>(
    spec: &TransitionSpec<S, B>,
    lambda: &S,
    consts: &PhysicalConstants,
) -> Result<S, LineElementError> {
    let c = S::from_rational(consts.c());
    let shifted = lambda.clone() - spec.a().clone();
    let f_m = spec.f_m_eval(lambda, &c)?;
    Ok(shifted.clone() * c.clone() * c * f_m.clone() * f_m - shifted.recip()?)
}

/// The coefficients of an element at one point, together with `λ` and (for
/// U-chart elements) `f_M` at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEvaluation<S> {
    pub chart: Chart,
    pub lambda: S,
    pub f_m: Option<S>,
    pub coefficients: Coefficients<S>,
}

impl LineElement {
    pub fn evaluate<S: Scalar>(&self, ctx: &EvalContext<S>) -> Result<Coefficients<S>, LineElementError> {
        Ok(self.coefficients.try_map(|_, e| e.eval(ctx))?)
    }

    pub fn evaluate_point<S: Scalar>(&self, ctx: &EvalContext<S>) -> Result<PointEvaluation<S>, LineElementError> {
        let lambda = ctx.variable(Variable::Lambda)?;
        let f_m = match self.chart {
            Chart::U => Some(f_m_expr().eval(ctx)?),
            Chart::T => None,
        };
        Ok(PointEvaluation {
            chart: self.chart,
            lambda,
            f_m,
            coefficients: self.evaluate(ctx)?,
        })
    }

    pub fn to_json(&self, consts: &PhysicalConstants) -> String {
        let doc = LineElementDocument {
            schema_version: SCHEMA_VERSION,
            chart: self.chart,
            coefficients: self.coefficients.clone(),
            constants: consts.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<(LineElement, PhysicalConstants), LineElementError> {
        let doc: LineElementDocument =
            serde_json::from_str(text).map_err(|e| LineElementError::Json(e.to_string()))?;
        let consts = PhysicalConstants::new(doc.constants.g, doc.constants.m, doc.constants.c)?;
        Ok((
            LineElement {
                chart: doc.chart,
                coefficients: doc.coefficients,
            },
            consts,
        ))
    }
}

/// On-disk JSON form of a line element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineElementDocument {
    pub schema_version: u32,
    pub chart: Chart,
    pub coefficients: Coefficients<CoefficientExpr>,
    pub constants: PhysicalConstants,
}

/// A standard part that may fail to exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardValue<C> {
    Limited(C),
    Unlimited,
}

impl<C: Coefficient> StandardValue<C> {
    pub fn of(x: &LcNumber<C>) -> Self {
        match x.standard_part() {
            Ok(v) => StandardValue::Limited(v),
            Err(_) => StandardValue::Unlimited,
        }
    }
}

/// The model infinitesimal radial increment `dR = ε^order`.
pub fn model_dr<C: Coefficient>(order: &Rational) -> LcNumber<C> {
    LcNumber::epsilon(order.clone())
}

/// Exponent of `ε` in the model `dR` (so that `ε = dR^{1/3}`).
pub fn default_dr_order() -> Rational {
    Rational::from_integer(3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardElement<C> {
    pub regime: Regime,
    /// `U` for Interior/Horizon; Exterior reduces to the `t` chart since `f_M = 0` there.
    pub chart: Chart,
    pub lambda: C,
    pub coefficients: Coefficients<C>,
    pub f_m: Option<StandardValue<C>>,
    /// `st(f_M·dR)` with `dR = ε³`.
    pub f_m_dr: Option<C>,
}

/// Standard parts of the coefficients of an element evaluated over series.
///
/// Fails with [`LineElementError::Unlimited`] when a coefficient has no
/// standard part. An unlimited `f_M` alone is recorded, not an error: at the
/// horizon `f_M` is unlimited while `f_M·dR` is infinitesimal.
pub fn standardize_element<C: Coefficient>(
    point: &PointEvaluation<LcNumber<C>>,
    regime: Regime,
) -> Result<StandardElement<C>, LineElementError> {
    let lambda = point
        .lambda
        .standard_part()
        .map_err(|_| LineElementError::Unlimited("lambda"))?;
    if Regime::of_lambda_sign(lambda.sign()) != regime {
        return Err(LineElementError::RegimeMismatch {
            claimed: regime,
            lambda: lambda.to_string(),
        });
    }
    let coefficients = point
        .coefficients
        .try_map(|name, x| x.standard_part().map_err(|_| LineElementError::Unlimited(name)))?;
    let chart = match (point.chart, regime) {
        (Chart::U, Regime::Exterior) if coefficients.tr.is_zero() => Chart::T,
        (chart, _) => chart,
    };
    let dr = model_dr::<C>(&default_dr_order());
    let f_m = point.f_m.as_ref().map(StandardValue::of);
    let f_m_dr = match &point.f_m {
        Some(f) => Some(
            (f.clone() * dr)
                .standard_part()
                .map_err(|_| LineElementError::Unlimited("f_m_dr"))?,
        ),
        None => None,
    };
    Ok(StandardElement {
        regime,
        chart,
        lambda,
        coefficients,
        f_m,
        f_m_dr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub lambda: String,
    pub f_m: String,
    pub product: String,
    pub leading_exponent: Option<Rational>,
    pub infinitesimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductReport {
    pub dr_order: Rational,
    pub entries: Vec<ProductEntry>,
    /// Smallest leading exponent among nonzero products.
    pub worst_leading_exponent: Option<Rational>,
    pub pass: bool,
}

/// Checks that `f_M(λ)·dR` is infinitesimal at each `λ`, with `dR = ε^dr_order`.
pub fn infinitesimal_product_check<C: Coefficient, B: Bridge>(
    spec: &TransitionSpec<LcNumber<C>, B>,
    lambdas: &[LcNumber<C>],
    dr_order: &Rational,
    consts: &PhysicalConstants,
) -> Result<ProductReport, LineElementError> {
    let c = LcNumber::<C>::from_rational(consts.c());
    let dr = model_dr::<C>(dr_order);
    let mut entries = Vec::with_capacity(lambdas.len());
    for lambda in lambdas {
        let f_m = spec.f_m_eval(lambda, &c)?;
        let product = f_m.clone() * dr.clone();
        entries.push(ProductEntry {
            lambda: lambda.to_string(),
            f_m: f_m.to_string(),
            leading_exponent: product.leading_exponent().cloned(),
            infinitesimal: product.is_infinitesimal(),
            product: product.to_string(),
        });
    }
    let worst_leading_exponent = entries
        .iter()
        .filter_map(|e| e.leading_exponent.clone())
        .min();
    let pass = entries.iter().all(|e| e.infinitesimal);
    Ok(ProductReport {
        dr_order: dr_order.clone(),
        entries,
        worst_leading_exponent,
        pass,
    })
}
