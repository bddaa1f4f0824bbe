//! Radial null rays in the `t` chart and the standardized `U` chart.
//!
//! Setting `dS² = 0` with `dθ = dφ = 0` gives the slope fields
//!
//! ```text
//! t chart:  c·dt/dR = ∓ 1/λ                  (− ingoing, + outgoing)
//! U chart:  dU/dR = 0 (ingoing),  c·dU/dR = 2/λ (outgoing)
//! ```
//!
//! The ingoing `U` field is regular at `λ = 0`, the `t` field is not. Rays
//! are integrated in `R` with an embedded Runge–Kutta–Fehlberg 4(5) pair,
//! advancing the 4th-order solution. A step that would need to fall below
//! `min_step` ends the ray with [`Outcome::BlowUp`].

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lineelement::{Chart, PhysicalConstants};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("radius must be > 0, got {0}")]
    NonPositiveRadius(f64),
    #[error("slope field of the {chart:?} chart has a pole at R = {r}")]
    Pole { chart: Chart, r: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("step limit of {0} exceeded")]
    StepLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ingoing,
    Outgoing,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Ingoing => -1.0,
            Direction::Outgoing => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayState {
    pub r: f64,
    /// `t` or `U`, according to `chart`.
    pub t: f64,
    pub chart: Chart,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub rel_tol: f64,
    /// Ingoing rays stop here.
    pub r_floor: f64,
    /// Outgoing rays stop here.
    pub r_ceiling: f64,
    /// Stop once `|T|` exceeds this.
    pub coordinate_ceiling: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            min_step: 1e-9,
            max_step: 0.25,
            rel_tol: 1e-10,
            r_floor: 1.0,
            r_ceiling: 100.0,
            coordinate_ceiling: 1e12,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), GeodesicError> {
        let bad = |m: &str| Err(GeodesicError::InvalidConfig(m.to_string()));
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.rel_tol) {
            return bad("rel_tol must be > 0");
        }
        if !positive(self.min_step) {
            return bad("min_step must be > 0");
        }
        if !(positive(self.initial_step) && positive(self.max_step)) {
            return bad("initial_step and max_step must be > 0");
        }
        if self.max_step < self.min_step {
            return bad("max_step must be >= min_step");
        }
        if !(positive(self.r_floor) && self.r_ceiling.is_finite() && self.r_ceiling >= self.r_floor) {
            return bad("need 0 < r_floor <= r_ceiling");
        }
        if !(self.coordinate_ceiling > 0.0) {
            return bad("coordinate_ceiling must be > 0");
        }
        Ok(())
    }
}

/// `(2GM/c², c)` as floats.
fn radius_and_c(consts: &PhysicalConstants) -> (f64, f64) {
    (consts.schwarzschild_radius().to_f64(), consts.c().to_f64())
}

/// `dT/dR` along a radial null ray.
pub fn radial_null_slope(
    chart: Chart,
    consts: &PhysicalConstants,
    r: f64,
    direction: Direction,
) -> Result<f64, GeodesicError> {
    if !(r > 0.0) {
        return Err(GeodesicError::NonPositiveRadius(r));
    }
    let (rs, c) = radius_and_c(consts);
    let lambda = 1.0 - rs / r;
    let pole = || GeodesicError::Pole { chart, r };
    match (chart, direction) {
        (Chart::U, Direction::Ingoing) => Ok(0.0),
        (Chart::U, Direction::Outgoing) if lambda == 0.0 => Err(pole()),
        (Chart::U, Direction::Outgoing) => Ok(2.0 / (c * lambda)),
        (Chart::T, _) if lambda == 0.0 => Err(pole()),
        (Chart::T, d) => Ok(d.sign() / (c * lambda)),
    }
}

/// Radius at which the slope field is singular, if any.
pub fn slope_pole(chart: Chart, consts: &PhysicalConstants, direction: Direction) -> Option<f64> {
    match (chart, direction) {
        (Chart::U, Direction::Ingoing) => None,
        _ => Some(radius_and_c(consts).0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub r: f64,
    pub t: f64,
    pub local_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// Reached `r_floor` (ingoing) or `r_ceiling` (outgoing).
    Reached,
    /// Step control fell below `min_step`.
    BlowUp { r: f64, t: f64 },
    CoordinateCeiling { r: f64, t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub chart: Chart,
    pub direction: Direction,
    pub points: Vec<TrajectoryPoint>,
    pub outcome: Outcome,
    /// Sum of accepted local error estimates.
    pub error_estimate: f64,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn start(&self) -> &TrajectoryPoint {
        &self.points[0]
    }

    pub fn end(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectory has a start point")
    }

    /// Whether the ray passed from one side of `radius` to the other.
    pub fn crossed(&self, radius: f64) -> bool {
        let (a, b) = (self.start().r - radius, self.end().r - radius);
        a * b < 0.0
    }

    /// CSV with header `R,T,chart,direction,local_error_estimate`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        #[derive(Serialize)]
        struct Row {
            #[serde(rename = "R")]
            r: f64,
            #[serde(rename = "T")]
            t: f64,
            chart: Chart,
            direction: Direction,
            local_error_estimate: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(Row {
                r: p.r,
                t: p.t,
                chart: self.chart,
                direction: self.direction,
                local_error_estimate: p.local_error,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

// Fehlberg 4(5)
const C: [f64; 6] = [0.0, 1.0 / 4.0, 3.0 / 8.0, 12.0 / 13.0, 1.0, 1.0 / 2.0];
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];

/// One RKF45 step of `y' = f(x, y)`; returns the 4th-order value and the error estimate.
fn rkf45_step<F>(f: &F, x: f64, y: f64, h: f64) -> Result<(f64, f64, f64), GeodesicError>
where
    F: Fn(f64, f64) -> Result<f64, GeodesicError>,
{
    let mut k = [0.0; 6];
    for i in 0..6 {
        let yi = y + h * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
        k[i] = f(x + C[i] * h, yi)?;
    }
    let y4 = y + h * (0..6).map(|i| B4[i] * k[i]).sum::<f64>();
    let y5 = y + h * (0..6).map(|i| B5[i] * k[i]).sum::<f64>();
    Ok((y4, (y5 - y4).abs(), k[0]))
}

/// Integrates a radial null ray from `start` until the configured stop radius,
/// a coordinate blow-up, or the coordinate ceiling.
pub fn integrate_radial_null(
    start: RayState,
    cfg: &IntegratorConfig,
    consts: &PhysicalConstants,
) -> Result<Trajectory, GeodesicError> {
    cfg.validate()?;
    if !(start.r > 0.0) {
        return Err(GeodesicError::NonPositiveRadius(start.r));
    }
    let (chart, direction) = (start.chart, start.direction);
    radial_null_slope(chart, consts, start.r, direction)?;

    let target = match direction {
        Direction::Ingoing => cfg.r_floor.min(start.r),
        Direction::Outgoing => cfg.r_ceiling.max(start.r),
    };
    let sign = direction.sign();
    let pole = slope_pole(chart, consts, direction)
        .filter(|p| (p - start.r) * sign > 0.0 && (target - p) * sign >= 0.0);
    let slope = |r: f64, _t: f64| radial_null_slope(chart, consts, r, direction).map(|s| sign * s);

    let mut points = vec![TrajectoryPoint {
        r: start.r,
        t: start.t,
        local_error: 0.0,
    }];
    let (mut r, mut t) = (start.r, start.t);
    let mut h = cfg.initial_step;
    let mut error_estimate = 0.0;
    let mut rejected_steps = 0;
    let mut outcome = Outcome::Reached;

    for _ in 0..cfg.max_steps {
        let remaining = (target - r).abs();
        if remaining == 0.0 {
            return Ok(Trajectory {
                chart,
                direction,
                points,
                outcome,
                error_estimate,
                rejected_steps,
            });
        }
        h = h.min(cfg.max_step).min(remaining);
        if let Some(p) = pole {
            h = h.min(0.5 * (p - r).abs());
        }
        if h < cfg.min_step {
            outcome = Outcome::BlowUp { r, t };
            break;
        }

        // the independent variable runs along |R − R0|
        let s = (r - start.r).abs();
        let field = |s_: f64, t_: f64| slope(start.r + sign * s_, t_);
        let (t_new, err, k1) = match rkf45_step(&field, s, t, h) {
            Ok(v) => v,
            Err(_) => {
                rejected_steps += 1;
                h *= 0.25;
                continue;
            }
        };
        let tol = cfg.rel_tol * (t.abs() + (h * k1).abs());
        if err <= tol {
            r = if h == remaining { target } else { r + sign * h };
            t = t_new;
            error_estimate += err;
            points.push(TrajectoryPoint { r, t, local_error: err });
            let factor = if err == 0.0 { 4.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.1, 4.0) };
            h *= factor;
            if t.abs() > cfg.coordinate_ceiling {
                outcome = Outcome::CoordinateCeiling { r, t };
                break;
            }
        } else {
            rejected_steps += 1;
            h *= (0.9 * (tol / err).powf(0.25)).clamp(0.1, 0.9);
        }
    }
    if outcome == Outcome::Reached && (target - r).abs() > 0.0 {
        return Err(GeodesicError::StepLimit(cfg.max_steps));
    }
    Ok(Trajectory {
        chart,
        direction,
        points,
        outcome,
        error_estimate,
        rejected_steps,
    })
}
