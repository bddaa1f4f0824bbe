//! Truncated Levi-Civita series in a single positive infinitesimal `ε`.
//!
//! An [`LcNumber`] is a finite sum `Σ c_q ε^q` with rational exponents `q`,
//! kept in canonical form: exponents strictly increasing, no zero
//! coefficients, and nothing beyond `leading exponent + window`. The empty
//! sum is exactly zero. A number with negative leading exponent is
//! unlimited (infinite), one with positive leading exponent is
//! infinitesimal, and the standard part of a limited number is its
//! `ε^0` coefficient.
//!
//! Ordering is exact: `x < y` iff the leading coefficient of `y - x` is
//! positive.
//!
//! The textual form is `coeff*e^(exp)` terms joined by ` + `, e.g.
//! `-1*e^(-1) + 2*e^(1/3)`; zero prints as `0`.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::Rational;
use crate::scalar::{ArithmeticError, Coefficient, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LcError {
    #[error("non-finite real {0} cannot be embedded")]
    NonFinite(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("value is unlimited; its standard part does not exist")]
    Unlimited,
    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),
    #[error("cannot parse series {0:?}")]
    Parse(String),
}

/// How much of a series is retained after each operation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationPolicy {
    window: Rational,
    max_terms: usize,
}

impl TruncationPolicy {
    pub const DEFAULT_WINDOW: i64 = 4;
    pub const DEFAULT_MAX_TERMS: usize = 32;

    pub fn new(window: Rational, max_terms: usize) -> Result<Self, LcError> {
        if !window.is_positive() {
            return Err(LcError::InvalidPolicy(format!("window must be > 0, got {window}")));
        }
        if max_terms < 2 {
            return Err(LcError::InvalidPolicy(format!(
                "max_terms must be >= 2, got {max_terms}"
            )));
        }
        Ok(Self { window, max_terms })
    }

    pub fn window(&self) -> &Rational {
        &self.window
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// The more permissive of two policies; used when combining operands.
    fn wider(&self, other: &Self) -> Self {
        Self {
            window: self.window.clone().max(other.window.clone()),
            max_terms: self.max_terms.max(other.max_terms),
        }
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            window: Rational::from_integer(Self::DEFAULT_WINDOW),
            max_terms: Self::DEFAULT_MAX_TERMS,
        }
    }
}

/// A truncated Levi-Civita series with coefficients in `C`.
#[derive(Clone)]
pub struct LcNumber<C: Coefficient = Rational> {
    terms: BTreeMap<Rational, C>,
    policy: TruncationPolicy,
}

/// Exact-coefficient series.
pub type Lc = LcNumber<Rational>;
/// Float-coefficient series, for plotting and other approximate paths.
pub type LcF64 = LcNumber<f64>;

impl<C: Coefficient> LcNumber<C> {
    pub fn zero_with(policy: TruncationPolicy) -> Self {
        Self {
            terms: BTreeMap::new(),
            policy,
        }
    }

    pub fn zero() -> Self {
        Self::zero_with(TruncationPolicy::default())
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    /// `c·ε^0`.
    pub fn constant(c: C) -> Self {
        Self::monomial(c, Rational::zero())
    }

    /// `c·ε^q`.
    pub fn monomial(c: C, q: Rational) -> Self {
        Self::from_terms([(q, c)], TruncationPolicy::default())
    }

    /// `ε^q`.
    pub fn epsilon(q: Rational) -> Self {
        Self::monomial(C::one(), q)
    }

    /// Embeds a standard real.
    pub fn from_real(x: f64) -> Result<Self, LcError> {
        C::from_f64(x)
            .map(Self::constant)
            .ok_or(LcError::NonFinite(x))
    }

    /// Builds a canonical series; repeated exponents are summed.
    pub fn from_terms<I>(terms: I, policy: TruncationPolicy) -> Self
    where
        I: IntoIterator<Item = (Rational, C)>,
    {
        let mut map: BTreeMap<Rational, C> = BTreeMap::new();
        for (q, c) in terms {
            accumulate(&mut map, q, c);
        }
        Self::canonical(map, policy)
    }

    fn canonical(mut map: BTreeMap<Rational, C>, policy: TruncationPolicy) -> Self {
        map.retain(|_, c| !c.is_zero());
        if let Some(lead) = map.keys().next().cloned() {
            let cap = lead + policy.window.clone();
            map.retain(|q, _| *q <= cap);
            if map.len() > policy.max_terms {
                let cut = map.keys().nth(policy.max_terms).cloned().expect("len > max_terms");
                map.split_off(&cut);
            }
        }
        Self { terms: map, policy }
    }

    pub fn with_policy(self, policy: TruncationPolicy) -> Self {
        Self::canonical(self.terms, policy)
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&Rational, &C)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, q: &Rational) -> C {
        self.terms.get(q).cloned().unwrap_or_else(C::zero)
    }

    pub fn leading(&self) -> Option<(&Rational, &C)> {
        self.terms.iter().next()
    }

    pub fn leading_exponent(&self) -> Option<&Rational> {
        self.terms.keys().next()
    }

    pub fn is_infinitesimal(&self) -> bool {
        self.leading_exponent().is_none_or(|q| q.is_positive())
    }

    pub fn is_limited(&self) -> bool {
        self.leading_exponent().is_none_or(|q| !q.is_negative())
    }

    /// True when the series is a plain real (no term off `ε^0`).
    pub fn is_standard(&self) -> bool {
        self.terms.keys().all(Rational::is_zero)
    }

    /// `st(x)`: the `ε^0` coefficient of a limited number.
    pub fn standard_part(&self) -> Result<C, LcError> {
        if !self.is_limited() {
            return Err(LcError::Unlimited);
        }
        Ok(self.coefficient(&Rational::zero()))
    }

    /// Sign of the leading coefficient; `Equal` for zero.
    pub fn signum(&self) -> Ordering {
        self.leading().map_or(Ordering::Equal, |(_, c)| c.sign())
    }

    pub fn lc_cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).signum()
    }

    /// Multiplicative inverse. The leading term is inverted exactly and the
    /// remainder expanded as a geometric series out to the truncation window.
    pub fn inv(&self) -> Result<Self, LcError> {
        let (lead_q, lead_c) = self.leading().ok_or(LcError::DivisionByZero)?;
        let lead_inv = lead_c.recip().ok_or(LcError::DivisionByZero)?;

        // x = c0·ε^l·(1 + δ) with every exponent of δ strictly positive
        let delta: Vec<(Rational, C)> = self
            .terms
            .iter()
            .skip(1)
            .map(|(q, c)| (q - lead_q, c.clone() * lead_inv.clone()))
            .collect();

        // 1/(1 + δ) = Σ y_e ε^e, supported on the additive monoid generated by δ's exponents
        let support = monoid_support(
            delta.iter().map(|(q, _)| q),
            &self.policy.window,
            self.policy.max_terms,
        );
        let mut series: BTreeMap<Rational, C> = BTreeMap::new();
        for e in support {
            let value = if e.is_zero() {
                C::one()
            } else {
                let mut acc = C::zero();
                for (d, dc) in &delta {
                    if let Some(prev) = series.get(&(&e - d)) {
                        acc = acc + dc.clone() * prev.clone();
                    }
                }
                -acc
            };
            series.insert(e, value);
        }

        let shift = -lead_q;
        let terms = series
            .into_iter()
            .map(|(e, c)| (e + shift.clone(), c * lead_inv.clone()));
        Ok(Self::from_terms(terms, self.policy.clone()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, LcError> {
        Ok(self.clone() * rhs.inv()?)
    }

    /// Coefficientwise equality over exponents `<= bound`.
    pub fn agrees_through(&self, other: &Self, bound: &Rational) -> bool {
        self.agrees_where(other, |q| q <= bound)
    }

    /// Coefficientwise equality over exponents `< bound`.
    pub fn agrees_below(&self, other: &Self, bound: &Rational) -> bool {
        self.agrees_where(other, |q| q < bound)
    }

    fn agrees_where(&self, other: &Self, keep: impl Fn(&Rational) -> bool) -> bool {
        let exponents: BTreeSet<&Rational> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .filter(|q| keep(q))
            .collect();
        exponents
            .into_iter()
            .all(|q| self.coefficient(q) == other.coefficient(q))
    }
}

fn accumulate<C: Coefficient>(map: &mut BTreeMap<Rational, C>, q: Rational, c: C) {
    match map.get_mut(&q) {
        Some(existing) => *existing = existing.clone() + c,
        None => {
            map.insert(q, c);
        }
    }
}

/// The smallest `limit` elements of `{0} ∪ (generators)* ∩ [0, window]`, ascending.
fn monoid_support<'a>(
    generators: impl Iterator<Item = &'a Rational>,
    window: &Rational,
    limit: usize,
) -> Vec<Rational> {
    let generators: Vec<&Rational> = generators.collect();
    let mut heap = BinaryHeap::from([Reverse(Rational::zero())]);
    let mut seen: BTreeSet<Rational> = BTreeSet::from([Rational::zero()]);
    let mut out = Vec::new();
    while let Some(Reverse(e)) = heap.pop() {
        out.push(e.clone());
        if out.len() == limit {
            break;
        }
        for g in &generators {
            let next = &e + g;
            if next <= *window && seen.insert(next.clone()) {
                heap.push(Reverse(next));
            }
        }
    }
    out
}

impl<C: Coefficient> Default for LcNumber<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> PartialEq for LcNumber<C> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for LcNumber<Rational> {}

impl<C: Coefficient> PartialOrd for LcNumber<C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.lc_cmp(other))
    }
}

impl Ord for LcNumber<Rational> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lc_cmp(other)
    }
}

impl<C: Coefficient> Add for LcNumber<C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let policy = self.policy.wider(&rhs.policy);
        let mut map = self.terms;
        for (q, c) in rhs.terms {
            accumulate(&mut map, q, c);
        }
        Self::canonical(map, policy)
    }
}

impl<C: Coefficient> Neg for LcNumber<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            terms: self.terms.into_iter().map(|(q, c)| (q, -c)).collect(),
            policy: self.policy,
        }
    }
}

impl<C: Coefficient> Sub for LcNumber<C> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<C: Coefficient> Mul for LcNumber<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let policy = self.policy.wider(&rhs.policy);
        let (Some(lx), Some(ly)) = (self.leading_exponent(), rhs.leading_exponent()) else {
            return Self::zero_with(policy);
        };
        let cap = lx + ly + policy.window.clone();
        let mut map = BTreeMap::new();
        for (qx, cx) in &self.terms {
            for (qy, cy) in &rhs.terms {
                let q = qx + qy;
                if q > cap {
                    // exponents of rhs are increasing
                    break;
                }
                accumulate(&mut map, q, cx.clone() * cy.clone());
            }
        }
        Self::canonical(map, policy)
    }
}

impl<C: Coefficient> Scalar for LcNumber<C> {
    fn from_rational(q: &Rational) -> Self {
        Self::constant(C::from_rational(q))
    }

    fn is_zero(&self) -> bool {
        LcNumber::is_zero(self)
    }

    fn cmp_scalar(&self, other: &Self) -> Ordering {
        self.lc_cmp(other)
    }

    fn recip(&self) -> Result<Self, ArithmeticError> {
        self.inv().map_err(|_| ArithmeticError::DivisionByZero)
    }

    fn sin(&self) -> Result<Self, ArithmeticError> {
        if !self.is_standard() {
            return Err(ArithmeticError::Unsupported("sin of a nonstandard series"));
        }
        let x = self.coefficient(&Rational::zero());
        let s = x
            .sin()
            .ok_or(ArithmeticError::Unsupported("sin over these coefficients"))?;
        Ok(Self::constant(s).with_policy(self.policy.clone()))
    }
}

impl<C: Coefficient> fmt::Display for LcNumber<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (q, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*e^({q})")?;
        }
        Ok(())
    }
}

impl<C: Coefficient> fmt::Debug for LcNumber<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LcNumber({self})")
    }
}

impl<C: Coefficient> FromStr for LcNumber<C> {
    type Err = LcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LcError::Parse(s.to_string());
        let mut terms = Vec::new();
        for raw in split_top_level(s, '+') {
            let term = raw.trim();
            if term.is_empty() {
                return Err(err());
            }
            let (coeff, exponent) = match term.split_once("*e^") {
                Some((c, e)) => {
                    let inner = e
                        .trim()
                        .strip_prefix('(')
                        .and_then(|e| e.strip_suffix(')'))
                        .ok_or_else(err)?;
                    (c.trim(), inner.parse::<Rational>().map_err(|_| err())?)
                }
                None => (term, Rational::zero()),
            };
            let coeff = coeff.parse::<C>().map_err(|_| err())?;
            terms.push((exponent, coeff));
        }
        Ok(Self::from_terms(terms, TruncationPolicy::default()))
    }
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

impl<C: Coefficient> Serialize for LcNumber<C> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de, C: Coefficient> Deserialize<'de> for LcNumber<C> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn lc(s: &str) -> Lc {
        s.parse().unwrap()
    }

    fn eps() -> Lc {
        Lc::epsilon(Rational::one())
    }

    fn int(n: i64) -> Lc {
        Lc::from_rational(&Rational::from_integer(n))
    }

    #[test]
    fn embeds_reals() {
        assert!(Lc::from_real(0.0).unwrap().is_zero());
        assert_eq!(Lc::from_real(1.0).unwrap().to_string(), "1*e^(0)");
        assert_eq!(
            Lc::from_real(-3.5).unwrap().standard_part().unwrap(),
            q("-7/2")
        );
        assert!(matches!(Lc::from_real(f64::NAN), Err(LcError::NonFinite(_))));
        assert!(matches!(Lc::from_real(f64::INFINITY), Err(LcError::NonFinite(_))));
    }

    #[test]
    fn epsilon_powers() {
        let e = eps();
        assert_eq!(e.to_string(), "1*e^(1)");
        assert!(e.is_infinitesimal());
        assert_eq!(Lc::epsilon(Rational::zero()), Lc::one());
        let cube_root = Lc::epsilon(q("1/3"));
        assert_eq!(cube_root.clone() * cube_root.clone() * cube_root, e);
        assert!(!Lc::epsilon(q("-1")).is_limited());
    }

    #[test]
    fn like_terms_and_inverse_law() {
        assert_eq!((eps() + eps()).to_string(), "2*e^(1)");
        let x = lc("3*e^(-1/2) + -2*e^(1)");
        assert!((x.clone() + -x).is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let one = Lc::one();
        let product = (one.clone() + eps()) * (one - eps());
        assert_eq!(product, lc("1*e^(0) + -1*e^(2)"));
    }

    #[test]
    fn inverse_of_monomial_and_binomial() {
        assert_eq!(eps().inv().unwrap(), Lc::epsilon(q("-1")));

        // 1/(-1 - ε) = -(1 - ε + ε² - ε³ + ε⁴), window 4
        let x = int(-1) - eps();
        let inv = x.inv().unwrap();
        assert_eq!(
            inv,
            lc("-1*e^(0) + 1*e^(1) + -1*e^(2) + 1*e^(3) + -1*e^(4)")
        );
        assert_eq!(
            (int(-2) - eps()).inv().unwrap().standard_part().unwrap(),
            q("-1/2")
        );
        assert_eq!(Lc::zero().inv(), Err(LcError::DivisionByZero));
    }

    #[test]
    fn ordering_by_leading_term() {
        assert!(eps() > Lc::zero());
        assert!(eps() > eps() * eps());
        let thousandth = Lc::from_rational(&q("1/1000"));
        assert!(int(2) * eps() < thousandth);
        assert_eq!(lc("1*e^(0) + 1*e^(2)").cmp(&lc("1*e^(0) + 1*e^(2)")), Ordering::Equal);
        assert!(-Lc::epsilon(q("-1")) < int(-1_000_000));
    }

    #[test]
    fn standard_parts() {
        assert_eq!(lc("3*e^(0) + 5*e^(1)").standard_part().unwrap(), q("3"));
        assert_eq!(lc("-1*e^(-1)").standard_part(), Err(LcError::Unlimited));
        assert_eq!(lc("2*e^(2/3)").standard_part().unwrap(), q("0"));
    }

    #[test]
    fn infinitesimal_and_limited_predicates() {
        let cases = [
            ("1*e^(1)", true, true),
            ("1*e^(0) + 1*e^(1)", false, true),
            ("2*e^(-1)", false, false),
            ("0", true, true),
        ];
        for (s, infinitesimal, limited) in cases {
            let x = lc(s);
            assert_eq!(x.is_infinitesimal(), infinitesimal, "{s}");
            assert_eq!(x.is_limited(), limited, "{s}");
        }
    }

    #[test]
    fn truncation_drops_terms_beyond_window() {
        let policy = TruncationPolicy::new(q("2"), 32).unwrap();
        let x = Lc::from_terms(
            [(q("0"), q("1")), (q("2"), q("1")), (q("5/2"), q("1"))],
            policy.clone(),
        );
        assert_eq!(x.len(), 2);
        let tight = TruncationPolicy::new(q("10"), 2).unwrap();
        let y = Lc::from_terms((0..5).map(|k| (Rational::from_integer(k), q("1"))), tight);
        assert_eq!(y.to_string(), "1*e^(0) + 1*e^(1)");
    }

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::new(q("0"), 32).is_err());
        assert!(TruncationPolicy::new(q("4"), 1).is_err());
        assert_eq!(TruncationPolicy::default().window(), &q("4"));
        assert_eq!(TruncationPolicy::default().max_terms(), 32);
    }

    #[test]
    fn text_format_round_trips() {
        let s = "-1*e^(-1) + 2*e^(1/3)";
        assert_eq!(lc(s).to_string(), s);
        assert_eq!(lc("0"), Lc::zero());
        assert_eq!(lc("5").to_string(), "5*e^(0)");
        assert_eq!(lc("1/2*e^(1) + 1/2*e^(1)").to_string(), "1*e^(1)");
        assert!("1*e^1".parse::<Lc>().is_err());
        assert!("1 + + 2".parse::<Lc>().is_err());
        let f: LcF64 = "-0.25*e^(-2/3) + 1.5*e^(0)".parse().unwrap();
        assert_eq!(f.to_string(), "-0.25*e^(-2/3) + 1.5*e^(0)");
    }

    #[test]
    fn sin_of_standard_values_only() {
        let x: LcF64 = LcF64::constant(0.5);
        assert_eq!(Scalar::sin(&x).unwrap().standard_part().unwrap(), 0.5f64.sin());
        assert!(Scalar::sin(&LcF64::epsilon(Rational::one())).is_err());
    }

    #[test]
    fn monoid_support_is_sorted_and_bounded() {
        let gens = [q("1/2"), q("1/3")];
        let s = monoid_support(gens.iter(), &q("1"), 100);
        let expected: Vec<Rational> = ["0", "1/3", "1/2", "2/3", "5/6", "1"]
            .iter()
            .map(|t| q(t))
            .collect();
        assert_eq!(s, expected);
        assert_eq!(monoid_support(gens.iter(), &q("1"), 3).len(), 3);
    }
}
