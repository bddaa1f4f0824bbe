use clap::Args;
use hypersmooth::transition::{write_samples_csv, JunctionReport, SupBoundReport, TransitionSpec};
use hypersmooth::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Format, Parameter, RunConfig};
use crate::report::{self, Check, REPORT_SCHEMA_VERSION};
use crate::{UsageError, Verdict};

#[derive(Args, Debug)]
pub struct TransitionArgs {
    /// Transition parameter a > 0 (rational, e.g. 1, 0.5 or 2/3)
    #[arg(long)]
    pub a: Option<String>,
    /// Sampling interval `lo:hi`; defaults to [-2a, 4a]
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Also check |H_a| <= 2/a on a fine grid, at the bridge extremum and at seeded random points
    #[arg(long = "check-bound")]
    pub check_bound: bool,
    /// Grid size for the bound check
    #[arg(long = "bound-samples", default_value_t = 100_000)]
    pub bound_samples: usize,
    /// Seeded random points for the bound check
    #[arg(long = "random-points", default_value_t = 10_000)]
    pub random_points: usize,
}

#[derive(Debug, Serialize)]
struct Junctions {
    exact: JunctionReport,
    float: JunctionReport,
}

#[derive(Debug, Serialize)]
struct RandomBound {
    seed: u64,
    points: usize,
    range: (f64, f64),
    max_abs: f64,
    argmax: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct BoundReport {
    bound: f64,
    grid: SupBoundReport,
    /// `125/(108a)`, the magnitude of the bridge minimum at `x = a/3`.
    extremum_closed_form: f64,
    extremum_deviation: Option<f64>,
    random: RandomBound,
}

#[derive(Debug, Serialize)]
struct TransitionReport {
    schema_version: u32,
    command: &'static str,
    a: String,
    range: (f64, f64),
    samples: usize,
    samples_file: String,
    seed: u64,
    seed_source: &'static str,
    junctions: Junctions,
    sup_bound: Option<BoundReport>,
    checks: Vec<Check>,
    pass: bool,
}

fn parse_range(s: &str) -> Result<(f64, f64), UsageError> {
    let bad = || UsageError(format!("--range expects lo:hi with lo <= hi, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn random_bound(spec: &TransitionSpec<f64>, seed: u64, points: usize) -> RandomBound {
    let a = *spec.a();
    // wide enough to reach deep into both tails
    let range = (-100.0 * a, 100.0 * a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max_abs, mut argmax) = (0.0f64, 0.0f64);
    for _ in 0..points {
        let x = rng.random_range(range.0..=range.1);
        let v = spec.h_eval(&x).abs();
        if v > max_abs {
            max_abs = v;
            argmax = x;
        }
    }
    RandomBound {
        seed,
        points,
        range,
        max_abs,
        argmax,
        pass: max_abs <= 2.0 / a,
    }
}

pub fn run(args: &TransitionArgs, cfg: &RunConfig) -> anyhow::Result<Verdict> {
    let a: Rational = match &cfg.a {
        Some(Parameter::Standard(q)) => q.clone(),
        Some(Parameter::Series(x)) => {
            return Err(UsageError(format!("transition needs a standard a > 0, got the series {x}")).into());
        }
        None => return Err(UsageError("transition needs --a".into()).into()),
    };
    let af = a.to_f64();
    if !(af.is_finite() && af > 0.0) {
        return Err(UsageError(format!("a = {a} is outside the floating-point range")).into());
    }
    if args.samples == 0 || (args.check_bound && args.bound_samples == 0) {
        return Err(UsageError("sample counts must be > 0".into()).into());
    }
    let exact = TransitionSpec::new(a.clone())?;
    let float = TransitionSpec::new(af)?;
    let range = match &args.range {
        Some(s) => parse_range(s)?,
        None => float.default_range(),
    };

    let junctions = Junctions {
        exact: exact.junction_report(),
        float: float.junction_report(),
    };
    let mut checks = vec![
        Check::new(
            "junctions_exact",
            junctions.exact.pass,
            format!("one-sided limits of H and H' at 0 and 2a, a = {a}"),
        ),
        Check::new(
            "junctions_float",
            junctions.float.pass,
            "one-sided limits within 1e-12 relative",
        ),
    ];

    let sup_bound = if args.check_bound {
        let grid = float.sup_bound_check(args.bound_samples)?;
        let closed = 125.0 / (108.0 * af);
        let deviation = grid.extremum_abs.map(|v| (v - closed).abs());
        let random = random_bound(&float, cfg.seed, args.random_points);
        checks.push(Check::new(
            "sup_bound",
            grid.pass,
            format!("max |H_a| = {:.6} <= 2/a = {:.6}", grid.max_abs, grid.bound),
        ));
        checks.push(Check::new(
            "extremum",
            deviation.is_some_and(|d| d <= 1e-10 * closed.max(1.0)),
            format!(
                "bridge extremum {:.12} vs 125/(108a) = {closed:.12}",
                grid.extremum_abs.unwrap_or(f64::NAN)
            ),
        ));
        checks.push(Check::new(
            "random_bound",
            random.pass,
            format!("{} seeded points, max |H_a| = {:.6}", random.points, random.max_abs),
        ));
        Some(BoundReport {
            bound: grid.bound,
            extremum_closed_form: closed,
            extremum_deviation: deviation,
            grid,
            random,
        })
    } else {
        None
    };

    let rows = float.sample_table(range.0, range.1, args.samples)?;
    let samples_file = match cfg.format {
        Format::Csv => report::write_with(&cfg.out, "transition_samples.csv", |w| write_samples_csv(&rows, w))?,
        Format::Json => report::write_json(&cfg.out, "transition_samples.json", &rows)?,
    };

    let pass = report::all_pass(&checks);
    let doc = TransitionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        command: "transition",
        a: a.to_string(),
        range,
        samples: rows.len(),
        samples_file: report::file_name(&samples_file),
        seed: cfg.seed,
        seed_source: cfg.seed_source,
        junctions,
        sup_bound,
        checks,
        pass,
    };
    let report_file = report::write_json(&cfg.out, "transition_report.json", &doc)?;
    report::print_summary("transition", &doc.checks, &[samples_file, report_file]);
    Ok(Verdict { pass })
}
