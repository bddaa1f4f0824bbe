use clap::Args;
use hypersmooth::lineelement::{
    b_coefficient, interior_element, regime_classify, schwarzschild_element, standardize_element,
    transform_u_substitution, Coefficients, LineElementDocument, PhysicalConstants, Regime,
    StandardElement, StandardValue, SCHEMA_VERSION,
};
use hypersmooth::transition::TransitionSpec;
use hypersmooth::{Lc, Rational, TruncationPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Format, Parameter, RunConfig};
use crate::report::{self, Check, REPORT_SCHEMA_VERSION};
use crate::{UsageError, Verdict};

#[derive(Args, Debug)]
pub struct TransformArgs {
    /// Radius R > 0 (rational)
    #[arg(long = "R", value_name = "R")]
    pub r: String,
    /// Polar angle in radians; sin θ is taken as the nearest double
    #[arg(long, conflicts_with = "sin_theta", allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Exact sin θ (rational in [-1, 1]); defaults to 1
    #[arg(long = "sin-theta", allow_hyphen_values = true)]
    pub sin_theta: Option<String>,
    /// Transition parameter: `eps` (default), a rational, or a series such as `2*e^(1)`
    #[arg(long)]
    pub a: Option<String>,
    /// Seeded points in the monad of λ for the b-term check
    #[arg(long = "monad-points", default_value_t = 32)]
    pub monad_points: usize,
}

#[derive(Debug, Serialize)]
struct Truncation {
    window: Rational,
    max_terms: usize,
}

#[derive(Debug, Serialize)]
struct BTerm {
    value: String,
    /// Cancellation is claimed for `λ ≤ 0` only.
    applies: bool,
    zero: bool,
}

#[derive(Debug, Serialize)]
struct MonadSamples {
    seed: u64,
    points: Vec<String>,
    all_zero: bool,
}

#[derive(Debug, Serialize)]
struct HorizonNotes {
    f_m: &'static str,
    f_m_dr: Rational,
}

#[derive(Debug, Serialize)]
struct TransformReport {
    schema_version: u32,
    command: &'static str,
    constants: PhysicalConstants,
    #[serde(rename = "R")]
    r: Rational,
    sin_theta: Rational,
    a: String,
    truncation: Truncation,
    seed: u64,
    seed_source: &'static str,
    regime: Regime,
    lambda: String,
    raw_coefficients: Coefficients<Lc>,
    f_m: String,
    b_term: BTerm,
    monad_samples: Option<MonadSamples>,
    standardized: Option<StandardElement<Rational>>,
    standardize_error: Option<String>,
    horizon: Option<HorizonNotes>,
    element: LineElementDocument,
    checks: Vec<Check>,
    pass: bool,
}

fn sine(args: &TransformArgs) -> Result<Rational, UsageError> {
    let s: Rational = match (&args.sin_theta, args.theta) {
        (Some(s), _) => s.parse().map_err(|e| UsageError(format!("--sin-theta: {e}")))?,
        (None, Some(t)) => Rational::from_f64(t.sin())
            .map_err(|_| UsageError(format!("--theta must be finite, got {t}")))?,
        (None, None) => Rational::one(),
    };
    if s.abs() > Rational::one() {
        return Err(UsageError(format!("sin θ must lie in [-1, 1], got {s}")));
    }
    Ok(s)
}

/// `λ + δ` for seeded infinitesimal `δ`, kept `≤ 0` when `λ` is exactly 0.
fn monad_points(lambda: &Lc, seed: u64, n: usize, policy: &TruncationPolicy) -> Vec<Lc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exponents = [(1, 2), (1, 1), (3, 2), (2, 1), (3, 1)];
    (0..n)
        .map(|_| {
            let (p, q) = exponents[rng.random_range(0..exponents.len())];
            let mut k = rng.random_range(1..=9i64);
            if lambda.is_zero() || rng.random_bool(0.5) {
                k = -k;
            }
            let c = Rational::new(k, rng.random_range(1..=7)).expect("nonzero denominator");
            let delta = Lc::monomial(c, Rational::new(p, q).expect("literal"));
            (lambda.clone() + delta).with_policy(policy.clone())
        })
        .collect()
}

pub fn run(args: &TransformArgs, cfg: &RunConfig) -> anyhow::Result<Verdict> {
    let consts = &cfg.constants;
    let policy = cfg.policy.clone();
    let lift = |q: &Rational| Lc::constant(q.clone()).with_policy(policy.clone());

    let r: Rational = args.r.parse().map_err(|e| UsageError(format!("--R: {e}")))?;
    if !r.is_positive() {
        return Err(UsageError(format!("R must be > 0, got {r}")).into());
    }
    let s = sine(args)?;
    let a = cfg.a.clone().unwrap_or_else(Parameter::epsilon);
    let a_series = a.as_series().with_policy(policy.clone());
    let infinitesimal_a = a_series.is_infinitesimal();

    let element = transform_u_substitution(&schwarzschild_element())?;
    let ctx = consts
        .context::<Lc>()
        .with_r(lift(&r))
        .with_sin_theta(lift(&s))
        .with_a(a_series.clone());
    let point = element
        .evaluate_point(&ctx)
        .map_err(|e| UsageError(format!("transformed element is undefined at R = {r}: {e}")))?;
    let trunc = |x: &Lc| x.clone().with_policy(policy.clone());
    let raw = point.coefficients.try_map(|_, x| Ok::<_, ()>(trunc(x))).expect("infallible");
    let f_m = trunc(point.f_m.as_ref().expect("U-chart evaluation carries f_M"));
    let regime = regime_classify(consts, &r)?;
    let mut checks = Vec::new();

    let spec = TransitionSpec::new(a_series.clone())?;
    let lambda = point.lambda.clone();
    let b = trunc(&b_coefficient(&spec, &lambda, consts)?);
    let applies = lambda.signum().is_le();
    if applies {
        checks.push(Check::new("b_term_zero", b.is_zero(), format!("b = {b} at λ = {lambda}")));
    }
    let monad_samples = if applies && args.monad_points > 0 {
        let points = monad_points(&lambda, cfg.seed, args.monad_points, &policy);
        let mut all_zero = true;
        for p in &points {
            all_zero &= b_coefficient(&spec, p, consts).map(|b| b.is_zero()).unwrap_or(false);
        }
        checks.push(Check::new(
            "b_term_monad",
            all_zero,
            format!("{} seeded points in the monad of λ", points.len()),
        ));
        Some(MonadSamples {
            seed: cfg.seed,
            points: points.iter().map(ToString::to_string).collect(),
            all_zero,
        })
    } else {
        None
    };

    let (standardized, standardize_error) = match standardize_element(&point, regime) {
        Ok(st) => (Some(st), None),
        Err(e) => (None, Some(e.to_string())),
    };
    checks.push(Check::new(
        "standardize",
        standardized.is_some(),
        standardize_error.clone().unwrap_or_else(|| format!("regime {regime}")),
    ));

    let mut horizon = None;
    if let (Some(st), true) = (&standardized, infinitesimal_a) {
        // With an infinitesimal a the standard parts must reproduce the
        // cross-term form inside and the original element outside.
        let (reference, form) = match regime {
            Regime::Exterior => (schwarzschild_element(), "original t-chart form"),
            _ => (interior_element(), "cross-term U form"),
        };
        let exact_ctx = consts.context::<Rational>().with_r(r.clone()).with_sin_theta(s.clone());
        let expected = reference.evaluate(&exact_ctx)?;
        checks.push(Check::new(
            "matches_reference",
            st.chart == reference.chart && st.coefficients == expected,
            format!("standardized coefficients vs the {form}"),
        ));
        if regime == Regime::Horizon {
            let unlimited = st.f_m == Some(StandardValue::Unlimited);
            let dr_zero = st.f_m_dr == Some(Rational::zero());
            checks.push(Check::new("horizon_f_m_unlimited", unlimited, "st(f_M) does not exist"));
            checks.push(Check::new("horizon_f_m_dr_zero", dr_zero, "st(f_M·dR) = 0 with dR = ε³"));
            horizon = Some(HorizonNotes {
                f_m: "unlimited",
                f_m_dr: st.f_m_dr.clone().unwrap_or_else(Rational::zero),
            });
        }
    }

    let pass = report::all_pass(&checks);
    let doc = TransformReport {
        schema_version: REPORT_SCHEMA_VERSION,
        command: "transform",
        constants: consts.clone(),
        r,
        sin_theta: s,
        a: a_series.to_string(),
        truncation: Truncation {
            window: policy.window().clone(),
            max_terms: policy.max_terms(),
        },
        seed: cfg.seed,
        seed_source: cfg.seed_source,
        regime,
        lambda: trunc(&lambda).to_string(),
        raw_coefficients: raw,
        f_m: f_m.to_string(),
        b_term: BTerm {
            value: b.to_string(),
            applies,
            zero: b.is_zero(),
        },
        monad_samples,
        standardized,
        standardize_error,
        horizon,
        element: LineElementDocument {
            schema_version: SCHEMA_VERSION,
            chart: element.chart,
            coefficients: element.coefficients.clone(),
            constants: consts.clone(),
        },
        checks,
        pass,
    };

    let mut files = Vec::new();
    if cfg.format == Format::Csv {
        files.push(report::write_with(&cfg.out, "transform_coefficients.csv", |w| {
            coefficient_csv(&doc, w)
        })?);
    }
    files.push(report::write_json(&cfg.out, "transform_report.json", &doc)?);
    report::print_summary("transform", &doc.checks, &files);
    Ok(Verdict { pass })
}

/// `name,raw,standard` rows, one per coefficient.
fn coefficient_csv<W: std::io::Write>(doc: &TransformReport, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["name", "raw", "standard"])?;
    let standard = doc.standardized.as_ref().map(|s| &s.coefficients);
    for (name, raw) in doc.raw_coefficients.named() {
        let st = standard
            .map(|c| {
                c.named()
                    .into_iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, v)| v.to_string())
                    .unwrap_or_default()
            })
            .unwrap_or_default();
        out.write_record([name, &raw.to_string(), &st])?;
    }
    out.flush()?;
    Ok(())
}
