#![allow(dead_code)]

use hypersmooth::{Lc, Rational, TruncationPolicy};
use proptest::prelude::*;
use rand::Rng;

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d).unwrap()
}

pub fn eps() -> Lc {
    Lc::epsilon(Rational::one())
}

pub fn lc_const(r: &Rational) -> Lc {
    Lc::constant(r.clone())
}

/// Exponents on the 1/6 lattice keep every product and inverse in the
/// tests inside the default 32-term budget.
pub fn arb_exponent() -> impl Strategy<Value = Rational> {
    (-6i64..=9, prop_oneof![Just(1i64), Just(2), Just(3)]).prop_map(|(p, d)| rat(p, d))
}

pub fn arb_coeff() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=5)
        .prop_filter("nonzero", |(n, _)| *n != 0)
        .prop_map(|(n, d)| rat(n, d))
}

pub fn arb_lc() -> impl Strategy<Value = Lc> {
    proptest::collection::vec((arb_exponent(), arb_coeff()), 0..=4)
        .prop_map(|terms| Lc::from_terms(terms, TruncationPolicy::default()))
}

pub fn arb_nonzero_lc() -> impl Strategy<Value = Lc> {
    arb_lc().prop_filter("nonzero", |x| !x.is_zero())
}

pub fn random_rational<R: Rng>(rng: &mut R, lo: i64, hi: i64, max_den: i64) -> Rational {
    let d = rng.random_range(1..=max_den);
    let n = rng.random_range(lo * d..=hi * d);
    rat(n, d)
}

pub fn random_lc<R: Rng>(rng: &mut R) -> Lc {
    let n = rng.random_range(1..=4);
    let terms = (0..n).map(|_| {
        let den = [1, 2, 3][rng.random_range(0..3)];
        let exponent = rat(rng.random_range(-6..=9), den);
        let mut c = rng.random_range(-9..=9);
        if c == 0 {
            c = 1;
        }
        (exponent, rat(c, rng.random_range(1..=5)))
    });
    Lc::from_terms(terms, TruncationPolicy::default())
}

/// Leading exponent of a nonzero number (for exactness bounds).
pub fn lead(x: &Lc) -> Rational {
    x.leading_exponent().cloned().expect("nonzero")
}

/// Brute-force Cauchy product with no truncation at all.
pub fn naive_product(x: &Lc, y: &Lc) -> Vec<(Rational, Rational)> {
    let mut out: Vec<(Rational, Rational)> = Vec::new();
    for (qx, cx) in x.terms() {
        for (qy, cy) in y.terms() {
            let e = qx + qy;
            let c = cx * cy;
            match out.iter_mut().find(|(f, _)| *f == e) {
                Some(slot) => slot.1 = slot.1.clone() + c,
                None => out.push((e, c)),
            }
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out.sort();
    out
}

/// Bridge value written out independently of the library.
pub fn g_ref(a: f64, x: f64) -> f64 {
    -x.powi(3) / (2.0 * a.powi(4)) + 7.0 * x * x / (4.0 * a.powi(3)) - x / (a * a) - 1.0 / a
}

pub fn dg_ref(a: f64, x: f64) -> f64 {
    -1.5 * x * x / a.powi(4) + 3.5 * x / a.powi(3) - 1.0 / (a * a)
}

/// Most negative value of the bridge on `(0, 2a)`: grid scan, then bisection on g'.
pub fn bridge_extremum_oracle(a: f64) -> (f64, f64) {
    let n = 20_000;
    let step = 2.0 * a / n as f64;
    let (mut best, mut best_i) = (f64::INFINITY, 0);
    for i in 1..n {
        let v = g_ref(a, i as f64 * step);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let (mut lo, mut hi) = ((best_i - 1) as f64 * step, (best_i + 1) as f64 * step);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (dg_ref(a, lo) < 0.0) == (dg_ref(a, mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, g_ref(a, x).abs())
}
