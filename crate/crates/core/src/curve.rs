//! Step-curve primitives shared by every discard-characteristic curve.
//!
//! A curve is a list of `(discard_fraction, value)` points with strictly
//! increasing discard fractions starting at 0. Under stepwise semantics the
//! value holds from one point up to (excluding) the next and the last value
//! extends to the right.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One data point. Serialised as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct CurvePoint {
    pub discard_fraction: f64,
    pub value: f64,
}

impl CurvePoint {
    pub fn new(discard_fraction: f64, value: f64) -> Self {
        Self {
            discard_fraction,
            value,
        }
    }
}

impl From<(f64, f64)> for CurvePoint {
    fn from((x, y): (f64, f64)) -> Self {
        Self::new(x, y)
    }
}

impl From<CurvePoint> for (f64, f64) {
    fn from(p: CurvePoint) -> Self {
        (p.discard_fraction, p.value)
    }
}

/// Check the structural curve invariants.
pub fn validate_points(points: &[CurvePoint]) -> Result<()> {
    let first = points.first().ok_or(Error::EmptyInput("curve points"))?;
    if first.discard_fraction != 0.0 {
        return Err(Error::Domain(format!(
            "curve must start at discard fraction 0, starts at {}",
            first.discard_fraction
        )));
    }
    for w in points.windows(2) {
        if !(w[1].discard_fraction > w[0].discard_fraction) {
            return Err(Error::Domain(format!(
                "discard fractions not strictly increasing at {}",
                w[1].discard_fraction
            )));
        }
    }
    if points
        .iter()
        .any(|p| !p.value.is_finite() || !p.discard_fraction.is_finite())
    {
        return Err(Error::Domain("curve contains non-finite values".into()));
    }
    Ok(())
}

/// Stepwise value at `x`: the value of the last point with discard fraction
/// `<= x`. `None` when `x` precedes the first point.
pub fn step_value_at(points: &[CurvePoint], x: f64) -> Option<f64> {
    let idx = points.partition_point(|p| p.discard_fraction <= x);
    idx.checked_sub(1).map(|i| points[i].value)
}

/// Exact integral of the stepwise curve over `[lo, hi]`.
pub fn integrate_stepwise(points: &[CurvePoint], lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut area = 0.0;
    for (i, p) in points.iter().enumerate() {
        let start = p.discard_fraction.max(lo);
        let end = points.get(i + 1).map_or(hi, |next| next.discard_fraction.min(hi));
        if end > start {
            area += (end - start) * p.value;
        }
        if end >= hi {
            break;
        }
    }
    area
}

fn linear_value_at(points: &[CurvePoint], x: f64) -> f64 {
    let idx = points.partition_point(|p| p.discard_fraction <= x);
    if idx == 0 {
        return points[0].value;
    }
    let left = points[idx - 1];
    match points.get(idx) {
        None => left.value,
        Some(right) => {
            let t = (x - left.discard_fraction) / (right.discard_fraction - left.discard_fraction);
            left.value + t * (right.value - left.value)
        }
    }
}

/// Exact integral over `[lo, hi]` of the piecewise-linear interpolation
/// through the points, held constant after the last point.
pub fn integrate_linear(points: &[CurvePoint], lo: f64, hi: f64) -> f64 {
    if hi <= lo || points.is_empty() {
        return 0.0;
    }
    let mut knots: Vec<f64> = vec![lo];
    knots.extend(points.iter().map(|p| p.discard_fraction).filter(|&x| x > lo && x < hi));
    knots.push(hi);
    knots
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (linear_value_at(points, w[0]) + linear_value_at(points, w[1])))
        .sum()
}

/// Integral over `[lo, hi]` of `|a(x) - b(x)|` for two stepwise curves.
pub fn integrate_abs_difference(a: &[CurvePoint], b: &[CurvePoint], lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut knots: Vec<f64> = a
        .iter()
        .chain(b.iter())
        .map(|p| p.discard_fraction)
        .filter(|&x| x > lo && x < hi)
        .collect();
    knots.push(lo);
    knots.push(hi);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots
        .windows(2)
        .map(|w| {
            let va = step_value_at(a, w[0]).unwrap_or(0.0);
            let vb = step_value_at(b, w[0]).unwrap_or(0.0);
            (w[1] - w[0]) * (va - vb).abs()
        })
        .sum()
}
