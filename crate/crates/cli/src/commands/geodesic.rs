use clap::Args;
use hypersmooth::geodesics::{
    integrate_radial_null, slope_pole, Direction, IntegratorConfig, Outcome, RayState, Trajectory,
};
use hypersmooth::lineelement::{Chart, PhysicalConstants};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::report::{self, Check, REPORT_SCHEMA_VERSION};
use crate::{UsageError, Verdict};

/// Closed-form comparison skips this relative neighbourhood of the horizon.
const HORIZON_MARGIN: f64 = 1e-3;
const CLOSED_FORM_TOLERANCE: f64 = 1e-6;
const FLAT_RAY_TOLERANCE: f64 = 1e-9;

#[derive(Args, Debug)]
pub struct GeodesicArgs {
    /// `u` (horizon-regular chart) or `t`
    #[arg(long)]
    pub chart: String,
    /// `in` or `out`
    #[arg(long = "dir", default_value = "in")]
    pub direction: String,
    /// Starting radius R > 0
    #[arg(long, allow_hyphen_values = true)]
    pub from: f64,
    /// Stopping radius; defaults to GM/c² inward or 20GM/c² outward
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    /// Starting value of the time coordinate
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    /// Relative tolerance of the adaptive step
    #[arg(long = "rel-tol", default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Smallest step before a blow-up is declared; defaults to 1e-9·GM/c²
    #[arg(long = "min-step")]
    pub min_step: Option<f64>,
}

fn parse_chart(s: &str) -> Result<Chart, UsageError> {
    match s.trim() {
        "u" | "U" => Ok(Chart::U),
        "t" | "T" => Ok(Chart::T),
        other => Err(UsageError(format!("--chart expects u or t, got {other:?}"))),
    }
}

fn parse_direction(s: &str) -> Result<Direction, UsageError> {
    match s.trim() {
        "in" | "ingoing" => Ok(Direction::Ingoing),
        "out" | "outgoing" => Ok(Direction::Outgoing),
        other => Err(UsageError(format!("--dir expects in or out, got {other:?}"))),
    }
}

#[derive(Debug, Serialize)]
struct EndPoint {
    r: f64,
    t: f64,
}

#[derive(Debug, Serialize)]
struct GeodesicReport {
    schema_version: u32,
    command: &'static str,
    constants: PhysicalConstants,
    chart: Chart,
    direction: Direction,
    from: f64,
    to: f64,
    t0: f64,
    horizon_radius: f64,
    integrator: IntegratorConfig,
    expected_blow_up: bool,
    outcome: Outcome,
    steps: usize,
    rejected_steps: usize,
    error_estimate: f64,
    end: EndPoint,
    delta_t: f64,
    crossed_horizon: bool,
    closed_form_max_relative_error: Option<f64>,
    trajectory_file: String,
    checks: Vec<Check>,
    pass: bool,
}

/// `R + r_s ln|R − r_s|`, the antiderivative of `1/λ`.
fn tortoise(r: f64, rs: f64) -> f64 {
    r + rs * (r - rs).abs().ln()
}

/// Largest relative deviation from `T0 + k(tortoise(R) − tortoise(R0))/c`,
/// measured on the elapsed coordinate time, away from the horizon.
fn closed_form_error(tr: &Trajectory, k: f64, rs: f64, c: f64) -> f64 {
    let (r0, t0) = (tr.start().r, tr.start().t);
    tr.points
        .iter()
        .skip(1)
        .filter(|p| (p.r - rs).abs() >= HORIZON_MARGIN * rs)
        .filter_map(|p| {
            let elapsed = k * (tortoise(p.r, rs) - tortoise(r0, rs)) / c;
            (elapsed != 0.0).then(|| ((p.t - t0) - elapsed).abs() / elapsed.abs())
        })
        .fold(0.0, f64::max)
}

pub fn run(args: &GeodesicArgs, cfg: &RunConfig) -> anyhow::Result<Verdict> {
    let chart = parse_chart(&args.chart)?;
    let direction = parse_direction(&args.direction)?;
    let consts = &cfg.constants;
    let rs = consts.schwarzschild_radius().to_f64();
    let c = consts.c().to_f64();
    let unit = 0.5 * rs;
    if !(args.from.is_finite() && args.from > 0.0) {
        return Err(UsageError(format!("--from must be > 0, got {}", args.from)).into());
    }
    if !args.t0.is_finite() {
        return Err(UsageError("--t0 must be finite".into()).into());
    }
    let to = args.to.unwrap_or(match direction {
        Direction::Ingoing => unit.min(args.from),
        Direction::Outgoing => (10.0 * rs).max(args.from),
    });
    let wrong_way = match direction {
        Direction::Ingoing => to > args.from,
        Direction::Outgoing => to < args.from,
    };
    if !(to.is_finite() && to > 0.0) || wrong_way {
        return Err(UsageError(format!("--to = {to} is not reachable {:?} from {}", direction, args.from)).into());
    }

    let integrator = IntegratorConfig {
        initial_step: 1e-2 * unit,
        min_step: args.min_step.unwrap_or(1e-9 * unit),
        max_step: 0.25 * unit,
        rel_tol: args.rel_tol,
        r_floor: to.min(args.from),
        r_ceiling: to.max(args.from),
        ..IntegratorConfig::default()
    };
    integrator.validate().map_err(|e| UsageError(e.to_string()))?;
    let start = RayState {
        r: args.from,
        t: args.t0,
        chart,
        direction,
    };
    let tr = integrate_radial_null(start, &integrator, consts).map_err(|e| match e {
        hypersmooth::geodesics::GeodesicError::Pole { .. } | hypersmooth::geodesics::GeodesicError::NonPositiveRadius(_) => {
            anyhow::Error::new(UsageError(e.to_string()))
        }
        other => other.into(),
    })?;

    let expected_blow_up = slope_pole(chart, consts, direction).is_some_and(|p| {
        let (lo, hi) = (to.min(args.from), to.max(args.from));
        lo < p && p < hi
    });
    let blew_up = matches!(tr.outcome, Outcome::BlowUp { .. });
    let mut checks = vec![Check::new(
        "outcome",
        blew_up == expected_blow_up && !matches!(tr.outcome, Outcome::CoordinateCeiling { .. }),
        format!(
            "{} (expected {})",
            outcome_name(&tr.outcome),
            if expected_blow_up { "blow-up" } else { "reached" }
        ),
    )];
    let delta_t = tr.end().t - tr.start().t;
    let closed_form = match (chart, direction) {
        (Chart::U, Direction::Ingoing) => {
            checks.push(Check::new(
                "flat_ray",
                delta_t.abs() <= FLAT_RAY_TOLERANCE,
                format!("|ΔU| = {:e} (slope 0)", delta_t.abs()),
            ));
            None
        }
        (Chart::T, d) => Some(closed_form_error(&tr, if d == Direction::Ingoing { -1.0 } else { 1.0 }, rs, c)),
        (Chart::U, Direction::Outgoing) => Some(closed_form_error(&tr, 2.0, rs, c)),
    };
    if let Some(err) = closed_form {
        checks.push(Check::new(
            "closed_form",
            err <= CLOSED_FORM_TOLERANCE,
            format!("max relative error {err:e} for |R - 2GM/c²| >= 1e-3·2GM/c²"),
        ));
    }

    let trajectory_file = match cfg.format {
        Format::Csv => report::write_with(&cfg.out, "geodesic_trajectory.csv", |w| tr.write_csv(w))?,
        Format::Json => report::write_json(&cfg.out, "geodesic_trajectory.json", &tr)?,
    };
    let pass = report::all_pass(&checks);
    let doc = GeodesicReport {
        schema_version: REPORT_SCHEMA_VERSION,
        command: "geodesic",
        constants: consts.clone(),
        chart,
        direction,
        from: args.from,
        to,
        t0: args.t0,
        horizon_radius: rs,
        integrator,
        expected_blow_up,
        outcome: tr.outcome,
        steps: tr.points.len() - 1,
        rejected_steps: tr.rejected_steps,
        error_estimate: tr.error_estimate,
        end: EndPoint {
            r: tr.end().r,
            t: tr.end().t,
        },
        delta_t,
        crossed_horizon: tr.crossed(rs),
        closed_form_max_relative_error: closed_form,
        trajectory_file: report::file_name(&trajectory_file),
        checks,
        pass,
    };
    let report_file = report::write_json(&cfg.out, "geodesic_report.json", &doc)?;
    report::print_summary("geodesic", &doc.checks, &[trajectory_file, report_file]);
    Ok(Verdict { pass })
}

fn outcome_name(o: &Outcome) -> String {
    match o {
        Outcome::Reached => "reached".into(),
        Outcome::BlowUp { r, .. } => format!("blow-up at R = {r}"),
        Outcome::CoordinateCeiling { r, .. } => format!("coordinate ceiling at R = {r}"),
    }
}
