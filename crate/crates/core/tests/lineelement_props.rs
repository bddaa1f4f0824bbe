mod common;

use common::*;
use hypersmooth::lineelement::{
    b_coefficient, interior_element, lambda_of_r, regime_classify, schwarzschild_element,
    standardize_element, transform_u_substitution, Chart, PhysicalConstants, Regime,
    StandardValue,
};
use hypersmooth::transition::TransitionSpec;
use hypersmooth::{Lc, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rational `sin θ = 2mn/(m² + n²)` from a Pythagorean triple.
fn pythagorean_sine(m: i64, n: i64) -> Rational {
    rat(2 * m * n, m * m + n * n)
}

fn arb_constants() -> impl Strategy<Value = PhysicalConstants> {
    (1i64..=20, 1i64..=10, 1i64..=20, 1i64..=10, 1i64..=20, 1i64..=10).prop_map(
        |(gn, gd, mn, md, cn, cd)| {
            PhysicalConstants::new(rat(gn, gd), rat(mn, md), rat(cn, cd)).unwrap()
        },
    )
}

fn transformed_standard(
    consts: &PhysicalConstants,
    r: &Rational,
    sin_theta: &Rational,
    regime: Regime,
) -> hypersmooth::lineelement::StandardElement<Rational> {
    let u = transform_u_substitution(&schwarzschild_element()).unwrap();
    let ctx = consts
        .context::<Lc>()
        .with_r(lc_const(r))
        .with_sin_theta(lc_const(sin_theta))
        .with_a(eps());
    let point = u.evaluate_point(&ctx).unwrap();
    standardize_element(&point, regime).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn b_term_vanishes_below_zero(n in 0i64..=10_000, d in 1i64..=100, shift in -3i64..=3) {
        // λ = x + kε·(1/7): standard negative x, or 0, with an infinitesimal offset
        let x = rat(-n, d);
        let offset = if x.is_zero() { 0 } else { shift };
        let lambda = lc_const(&x) + Lc::constant(rat(offset, 7)) * eps();
        let spec = TransitionSpec::new(eps()).unwrap();
        let b = b_coefficient(&spec, &lambda, &PhysicalConstants::default()).unwrap();
        prop_assert!(b.is_zero(), "λ = {lambda}: b = {b}");
    }

    #[test]
    fn b_term_vanishes_for_any_constants(consts in arb_constants(), n in 0i64..=500, d in 1i64..=20) {
        let spec = TransitionSpec::new(eps()).unwrap();
        let lambda = lc_const(&rat(-n, d));
        prop_assert!(b_coefficient(&spec, &lambda, &consts).unwrap().is_zero());
    }

    #[test]
    fn interior_reduces_to_cross_term_form(
        consts in arb_constants(), t in 1i64..=999, m in 1i64..=9, n in 1i64..=9
    ) {
        let rs = consts.schwarzschild_radius();
        let r = rs * rat(t, 1000);
        let s = pythagorean_sine(m, n);
        let st = transformed_standard(&consts, &r, &s, Regime::Interior);
        let ctx = consts.context::<Rational>().with_r(r.clone()).with_sin_theta(s);
        let expected = interior_element().evaluate(&ctx).unwrap();
        prop_assert_eq!(st.chart, Chart::U);
        prop_assert_eq!(&st.coefficients, &expected);
        prop_assert_eq!(st.lambda, lambda_of_r(&consts, &r).unwrap());
        // det of the (U, R) block is −c²
        let c = consts.c().clone();
        prop_assert_eq!(st.coefficients.time_radial_determinant(), -(c.clone() * c));
    }

    #[test]
    fn exterior_reduces_to_original_form(
        consts in arb_constants(), t in 1001i64..=20_000, m in 1i64..=9, n in 1i64..=9
    ) {
        let rs = consts.schwarzschild_radius();
        let r = rs * rat(t, 1000);
        let s = pythagorean_sine(m, n);
        let st = transformed_standard(&consts, &r, &s, Regime::Exterior);
        let ctx = consts.context::<Rational>().with_r(r).with_sin_theta(s);
        let expected = schwarzschild_element().evaluate(&ctx).unwrap();
        prop_assert_eq!(st.chart, Chart::T);
        prop_assert_eq!(&st.coefficients, &expected);
        prop_assert_eq!(st.f_m, Some(StandardValue::Limited(Rational::zero())));
    }

    #[test]
    fn angular_sector_is_untouched(consts in arb_constants(), r in 1i64..=400, m in 1i64..=9, n in 1i64..=9) {
        let r = rat(r, 7);
        let s = pythagorean_sine(m, n);
        let ctx = consts.context::<Rational>().with_r(r).with_sin_theta(s).with_a(rat(1, 1000));
        let t = transform_u_substitution(&schwarzschild_element()).unwrap();
        prop_assert_eq!(&t.coefficients.thth, &schwarzschild_element().coefficients.thth);
        prop_assert_eq!(&t.coefficients.phph, &schwarzschild_element().coefficients.phph);
        let orig = interior_element().evaluate(&ctx).unwrap();
        if let Ok(c) = t.evaluate(&ctx) {
            prop_assert_eq!(c.thth, orig.thth);
            prop_assert_eq!(c.phph, orig.phph);
        }
    }
}

#[test]
fn regime_dichotomy_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let consts = PhysicalConstants::new(
            random_rational(&mut rng, 1, 5, 9),
            random_rational(&mut rng, 1, 5, 9),
            random_rational(&mut rng, 1, 5, 9),
        );
        let Ok(consts) = consts else { continue };
        let rs = consts.schwarzschild_radius();
        let inside = rs.clone() * rat(rng.random_range(1..1000), 1000);
        let outside = rs.clone() * rat(rng.random_range(1001..100_000), 1000);
        assert_eq!(regime_classify(&consts, &inside).unwrap(), Regime::Interior);
        assert_eq!(regime_classify(&consts, &outside).unwrap(), Regime::Exterior);
        assert_eq!(regime_classify(&consts, &rs).unwrap(), Regime::Horizon);
    }
}

#[test]
fn horizon_keeps_cross_term_and_infinitesimal_step() {
    for (g, m, c) in [("1", "1", "1"), ("2/3", "5", "7"), ("1", "1/2", "3")] {
        let consts = PhysicalConstants::new(q(g), q(m), q(c)).unwrap();
        let rs = consts.schwarzschild_radius();
        let st = transformed_standard(&consts, &rs, &q("1"), Regime::Horizon);
        assert_eq!(st.chart, Chart::U);
        assert_eq!(st.coefficients.tt, Rational::zero());
        assert_eq!(st.coefficients.tr, -(q(c) * q("2")));
        assert_eq!(st.coefficients.rr, Rational::zero());
        assert_eq!(st.f_m, Some(StandardValue::Unlimited));
        assert_eq!(st.f_m_dr, Some(Rational::zero()));
    }
}

#[test]
fn exterior_b_term_is_the_original_radial_coefficient() {
    let spec = TransitionSpec::new(eps()).unwrap();
    let consts = PhysicalConstants::default();
    for lambda in [q("1/3"), q("1/2"), q("9/10")] {
        let b = b_coefficient(&spec, &lc_const(&lambda), &consts).unwrap();
        assert_eq!(b.standard_part().unwrap(), -lambda.recip().unwrap());
    }
}

#[test]
fn float_evaluation_tracks_exact() {
    let consts = PhysicalConstants::new(q("1"), q("3/2"), q("2")).unwrap();
    let t = transform_u_substitution(&schwarzschild_element()).unwrap();
    for r in [q("1/2"), q("7/5"), q("5"), q("11")] {
        let exact = t
            .evaluate(&consts.context::<Rational>().with_r(r.clone()).with_theta(q("0")).with_a(q("1/1000")))
            .unwrap();
        let float = t
            .evaluate(&consts.context::<f64>().with_r(r.to_f64()).with_theta(0.0).with_a(1e-3))
            .unwrap();
        for ((name, e), (_, f)) in exact.named().into_iter().zip(float.named()) {
            let ev = e.to_f64();
            assert!((ev - f).abs() <= 1e-12 * ev.abs().max(1.0), "{name} at R={r}: {ev} vs {f}");
        }
    }
}
