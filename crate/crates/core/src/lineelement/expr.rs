//! Coefficient expressions for line elements.
//!
//! Expressions are small immutable trees over the variables `R`, `theta`,
//! `lambda` and the constants `G`, `M`, `c`, `a` (the transition parameter,
//! which is `ε` in the ideal model). They evaluate over any [`Scalar`] and
//! serialize to a prefix S-expression form, e.g.
//! `(neg (/ 1 lambda))` or `(* (- lambda a) (^ c 2))`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::Rational;
use crate::scalar::{ArithmeticError, Scalar};
use crate::transition::{TransitionError, TransitionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    R,
    Theta,
    Lambda,
}

impl Variable {
    pub fn symbol(self) -> &'static str {
        match self {
            Variable::R => "R",
            Variable::Theta => "theta",
            Variable::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    G,
    M,
    C,
    /// Transition parameter (`ε` in the ideal model).
    A,
}

impl Constant {
    pub fn symbol(self) -> &'static str {
        match self {
            Constant::G => "G",
            Constant::M => "M",
            Constant::C => "c",
            Constant::A => "a",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CoefficientExpr {
    Num(Rational),
    Var(Variable),
    Const(Constant),
    Neg(Box<CoefficientExpr>),
    Add(Box<CoefficientExpr>, Box<CoefficientExpr>),
    Sub(Box<CoefficientExpr>, Box<CoefficientExpr>),
    Mul(Box<CoefficientExpr>, Box<CoefficientExpr>),
    /// Guarded: a zero divisor is an evaluation error.
    Div(Box<CoefficientExpr>, Box<CoefficientExpr>),
    Pow(Box<CoefficientExpr>, i32),
    Sin(Box<CoefficientExpr>),
    /// `H_a(arg)` with `a` taken from [`Constant::A`].
    Transition(Box<CoefficientExpr>),
}

pub use CoefficientExpr as Expr;

impl CoefficientExpr {
    pub fn int(n: i64) -> Self {
        Expr::Num(Rational::from_integer(n))
    }

    pub fn num(q: Rational) -> Self {
        Expr::Num(q)
    }

    pub fn var(v: Variable) -> Self {
        Expr::Var(v)
    }

    pub fn constant(c: Constant) -> Self {
        Expr::Const(c)
    }

    pub fn pow(self, exp: i32) -> Self {
        Expr::Pow(Box::new(self), exp)
    }

    pub fn sin(self) -> Self {
        Expr::Sin(Box::new(self))
    }

    pub fn transition(self) -> Self {
        Expr::Transition(Box::new(self))
    }

    /// Structurally the literal zero.
    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expr::Num(q) if q.is_zero())
    }

    pub fn contains_var(&self, v: Variable) -> bool {
        match self {
            Expr::Var(w) => *w == v,
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Neg(x) | Expr::Pow(x, _) | Expr::Sin(x) | Expr::Transition(x) => {
                x.contains_var(v)
            }
            Expr::Add(x, y) | Expr::Sub(x, y) | Expr::Mul(x, y) | Expr::Div(x, y) => {
                x.contains_var(v) || y.contains_var(v)
            }
        }
    }

    /// Replaces every occurrence of `v` with `replacement`.
    pub fn substitute(&self, v: Variable, replacement: &Expr) -> Expr {
        let sub = |x: &Expr| Box::new(x.substitute(v, replacement));
        match self {
            Expr::Var(w) if *w == v => replacement.clone(),
            Expr::Num(_) | Expr::Var(_) | Expr::Const(_) => self.clone(),
            Expr::Neg(x) => Expr::Neg(sub(x)),
            Expr::Pow(x, n) => Expr::Pow(sub(x), *n),
            Expr::Sin(x) => Expr::Sin(sub(x)),
            Expr::Transition(x) => Expr::Transition(sub(x)),
            Expr::Add(x, y) => Expr::Add(sub(x), sub(y)),
            Expr::Sub(x, y) => Expr::Sub(sub(x), sub(y)),
            Expr::Mul(x, y) => Expr::Mul(sub(x), sub(y)),
            Expr::Div(x, y) => Expr::Div(sub(x), sub(y)),
        }
    }

    pub fn eval<S: Scalar>(&self, ctx: &EvalContext<S>) -> Result<S, EvalError> {
        Ok(match self {
            Expr::Num(q) => S::from_rational(q),
            Expr::Var(v) => ctx.variable(*v)?,
            Expr::Const(c) => ctx.constant(*c)?,
            Expr::Neg(x) => -x.eval(ctx)?,
            Expr::Add(x, y) => x.eval(ctx)? + y.eval(ctx)?,
            Expr::Sub(x, y) => x.eval(ctx)? - y.eval(ctx)?,
            Expr::Mul(x, y) => x.eval(ctx)? * y.eval(ctx)?,
            Expr::Div(x, y) => x.eval(ctx)?.checked_div(&y.eval(ctx)?)?,
            Expr::Pow(x, n) => x.eval(ctx)?.powi(*n)?,
            Expr::Sin(x) => match (x.as_ref(), &ctx.sin_theta) {
                (Expr::Var(Variable::Theta), Some(s)) => s.clone(),
                _ => x.eval(ctx)?.sin()?,
            },
            Expr::Transition(x) => {
                let a = ctx.constant(Constant::A)?;
                TransitionSpec::new(a)?.h_eval(&x.eval(ctx)?)
            }
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no value bound for `{0}`")]
    Unbound(&'static str),
    #[error("radius must be > 0")]
    NonPositiveRadius,
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
}

/// Values for the symbols of an expression.
///
/// `lambda` defaults to `1 - 2GM/(R c²)` when unbound. `sin_theta`, when
/// present, supplies `sin(theta)` directly, which lets exact fields evaluate
/// the angular sector at angles with rational sine.
#[derive(Debug, Clone)]
pub struct EvalContext<S> {
    pub r: Option<S>,
    pub theta: Option<S>,
    pub sin_theta: Option<S>,
    pub lambda: Option<S>,
    pub g: S,
    pub m: S,
    pub c: S,
    pub a: Option<S>,
}

impl<S: Scalar> EvalContext<S> {
    pub fn new(g: S, m: S, c: S) -> Self {
        Self {
            r: None,
            theta: None,
            sin_theta: None,
            lambda: None,
            g,
            m,
            c,
            a: None,
        }
    }

    pub fn with_r(mut self, r: S) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_theta(mut self, theta: S) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_sin_theta(mut self, s: S) -> Self {
        self.sin_theta = Some(s);
        self
    }

    pub fn with_lambda(mut self, lambda: S) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_a(mut self, a: S) -> Self {
        self.a = Some(a);
        self
    }

    pub fn variable(&self, v: Variable) -> Result<S, EvalError> {
        match v {
            Variable::R => self.r.clone().ok_or(EvalError::Unbound("R")),
            Variable::Theta => self.theta.clone().ok_or(EvalError::Unbound("theta")),
            Variable::Lambda => match &self.lambda {
                Some(l) => Ok(l.clone()),
                None => self.lambda_from_radius(),
            },
        }
    }

    fn constant(&self, c: Constant) -> Result<S, EvalError> {
        match c {
            Constant::G => Ok(self.g.clone()),
            Constant::M => Ok(self.m.clone()),
            Constant::C => Ok(self.c.clone()),
            Constant::A => self.a.clone().ok_or(EvalError::Unbound("a")),
        }
    }

    fn lambda_from_radius(&self) -> Result<S, EvalError> {
        let r = self.variable(Variable::R)?;
        if !r.is_positive() {
            return Err(EvalError::NonPositiveRadius);
        }
        let two = S::from_i64(2);
        let num = two * self.g.clone() * self.m.clone();
        let den = r * self.c.clone() * self.c.clone();
        Ok(S::one() - num.checked_div(&den)?)
    }
}

fn bin(op: fn(Box<Expr>, Box<Expr>) -> Expr, x: Expr, y: Expr) -> Expr {
    op(Box::new(x), Box::new(y))
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        bin(Expr::Add, self, rhs)
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        bin(Expr::Sub, self, rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        bin(Expr::Mul, self, rhs)
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        bin(Expr::Div, self, rhs)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => write!(f, "{q}"),
            Expr::Var(v) => f.write_str(v.symbol()),
            Expr::Const(c) => f.write_str(c.symbol()),
            Expr::Neg(x) => write!(f, "(neg {x})"),
            Expr::Add(x, y) => write!(f, "(+ {x} {y})"),
            Expr::Sub(x, y) => write!(f, "(- {x} {y})"),
            Expr::Mul(x, y) => write!(f, "(* {x} {y})"),
            Expr::Div(x, y) => write!(f, "(/ {x} {y})"),
            Expr::Pow(x, n) => write!(f, "(^ {x} {n})"),
            Expr::Sin(x) => write!(f, "(sin {x})"),
            Expr::Transition(x) => write!(f, "(H {x})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse expression at token {position}: {message}")]
pub struct ParseExprError {
    pub position: usize,
    pub message: String,
}

impl FromStr for Expr {
    type Err = ParseExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens = tokenize(s);
        let mut parser = Parser { tokens, pos: 0 };
        let expr = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(parser.error("trailing input"));
        }
        Ok(expr)
    }
}

fn tokenize(s: &str) -> Vec<String> {
    s.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

struct Parser {
    tokens: Vec<String>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: &str) -> ParseExprError {
        ParseExprError {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn next(&mut self) -> Result<String, ParseExprError> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect_close(&mut self) -> Result<(), ParseExprError> {
        match self.next()?.as_str() {
            ")" => Ok(()),
            _ => Err(self.error("expected `)`")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseExprError> {
        let tok = self.next()?;
        if tok == "(" {
            let op = self.next()?;
            let node = match op.as_str() {
                "neg" => -self.expr()?,
                "sin" => self.expr()?.sin(),
                "H" => self.expr()?.transition(),
                "^" => {
                    let base = self.expr()?;
                    let n = self.next()?;
                    let n: i32 = n.parse().map_err(|_| self.error("expected integer exponent"))?;
                    base.pow(n)
                }
                "+" | "-" | "*" | "/" => {
                    let x = self.expr()?;
                    let y = self.expr()?;
                    match op.as_str() {
                        "+" => x + y,
                        "-" => x - y,
                        "*" => x * y,
                        _ => x / y,
                    }
                }
                _ => return Err(self.error(&format!("unknown operator `{op}`"))),
            };
            self.expect_close()?;
            return Ok(node);
        }
        Ok(match tok.as_str() {
            "R" => Expr::Var(Variable::R),
            "theta" => Expr::Var(Variable::Theta),
            "lambda" => Expr::Var(Variable::Lambda),
            "G" => Expr::Const(Constant::G),
            "M" => Expr::Const(Constant::M),
            "c" => Expr::Const(Constant::C),
            "a" => Expr::Const(Constant::A),
            ")" => return Err(self.error("unexpected `)`")),
            other => Expr::Num(
                other
                    .parse()
                    .map_err(|_| self.error(&format!("unknown atom `{other}`")))?,
            ),
        })
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> EvalContext<Rational> {
        EvalContext::new(Rational::one(), Rational::one(), Rational::one())
    }

    #[test]
    fn lambda_defaults_to_radius_formula() {
        let l = Expr::var(Variable::Lambda)
            .eval(&ctx().with_r(Rational::from_integer(4)))
            .unwrap();
        assert_eq!(l, Rational::new(1, 2).unwrap());
        assert_eq!(
            Expr::var(Variable::Lambda).eval(&ctx()),
            Err(EvalError::Unbound("R"))
        );
        assert_eq!(
            Expr::var(Variable::Lambda).eval(&ctx().with_r(Rational::zero())),
            Err(EvalError::NonPositiveRadius)
        );
    }

    #[test]
    fn guarded_division() {
        let e = Expr::int(1) / Expr::var(Variable::Lambda);
        let at_horizon = ctx().with_r(Rational::from_integer(2));
        assert_eq!(
            e.eval(&at_horizon),
            Err(EvalError::Arithmetic(ArithmeticError::DivisionByZero))
        );
    }

    #[test]
    fn sin_override_for_exact_fields() {
        let e = Expr::var(Variable::Theta).sin().pow(2);
        let c = ctx().with_theta(Rational::one());
        assert!(e.eval(&c).is_err());
        let c = c.with_sin_theta(Rational::new(3, 5).unwrap());
        assert_eq!(e.eval(&c).unwrap(), Rational::new(9, 25).unwrap());
        let f = EvalContext::new(1.0, 1.0, 1.0).with_theta(std::f64::consts::FRAC_PI_2);
        assert_eq!(e.eval(&f).unwrap(), 1.0);
    }

    #[test]
    fn transition_node_needs_parameter() {
        let e = Expr::var(Variable::Lambda).transition();
        let c = ctx().with_lambda(Rational::from_integer(-1));
        assert_eq!(e.eval(&c), Err(EvalError::Unbound("a")));
        assert_eq!(
            e.eval(&c.with_a(Rational::one())).unwrap(),
            Rational::new(-1, 2).unwrap()
        );
    }

    #[test]
    fn substitution_replaces_every_occurrence() {
        let e: Expr = "(+ lambda (* lambda c))".parse().unwrap();
        let shifted = e.substitute(Variable::Lambda, &"(- lambda a)".parse().unwrap());
        assert_eq!(
            shifted.to_string(),
            "(+ (- lambda a) (* (- lambda a) c))"
        );
        assert!(!e.contains_var(Variable::R));
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "(", "(+ 1)", "(foo 1 2)", "(^ R x)", "1 2", ")", "(+ 1 2"] {
            assert!(bad.parse::<Expr>().is_err(), "{bad:?}");
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-50i64..50, 1i64..20).prop_map(|(n, d)| Expr::num(Rational::new(n, d).unwrap())),
            prop_oneof![
                Just(Variable::R),
                Just(Variable::Theta),
                Just(Variable::Lambda)
            ]
            .prop_map(Expr::var),
            prop_oneof![
                Just(Constant::G),
                Just(Constant::M),
                Just(Constant::C),
                Just(Constant::A)
            ]
            .prop_map(Expr::constant),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|x| -x),
                inner.clone().prop_map(Expr::sin),
                inner.clone().prop_map(Expr::transition),
                (inner.clone(), -4i32..5).prop_map(|(x, n)| x.pow(n)),
                (inner.clone(), inner.clone()).prop_map(|(x, y)| x + y),
                (inner.clone(), inner.clone()).prop_map(|(x, y)| x - y),
                (inner.clone(), inner.clone()).prop_map(|(x, y)| x * y),
                (inner.clone(), inner).prop_map(|(x, y)| x / y),
            ]
        })
    }

    proptest! {
        #[test]
        fn prefix_form_round_trips(e in arb_expr()) {
            let text = e.to_string();
            let back: Expr = text.parse().unwrap();
            prop_assert_eq!(&back, &e);
            let json = serde_json::to_string(&e).unwrap();
            let from_json: Expr = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(from_json, e);
        }
    }
}
