//! Normalisation of raw quality scores to the `[0, 100]` integer range.
//!
//! A calibration derives 100 non-decreasing boundaries from a set of raw
//! calibration scores. A score maps to the number of boundaries `<=` it, so
//! bins are left-closed and out-of-range scores clamp to 0 or 100.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve;
use crate::edc::EdcCurve;
use crate::error::{Error, Result};
use crate::pauc::{pauc, PaucConfig};
use crate::score_data::QualityScoreTable;

pub const BOUNDARY_COUNT: usize = 100;
pub const BIN_COUNT: usize = BOUNDARY_COUNT + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationFunction {
    /// Equal-width subdivision of `[min, max]` into 101 intervals.
    MinMax,
    /// Empirical quantiles at `i / 101` (linear interpolation between order
    /// statistics).
    Proportional,
}

impl fmt::Display for CalibrationFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CalibrationFunction::MinMax => "minmax",
            CalibrationFunction::Proportional => "proportional",
        })
    }
}

/// Source of the calibration scores relative to the evaluated data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationVariant {
    Same,
    Other,
    Combined,
}

impl CalibrationVariant {
    /// The calibration multiset for this variant.
    pub fn calibration_scores(self, same: &[f64], other: &[f64]) -> Vec<f64> {
        match self {
            CalibrationVariant::Same => same.to_vec(),
            CalibrationVariant::Other => other.to_vec(),
            CalibrationVariant::Combined => same.iter().chain(other).copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinBoundaries {
    pub calibration_function: CalibrationFunction,
    pub boundaries: Vec<f64>,
}

impl BinBoundaries {
    pub fn apply(&self, q: f64) -> u8 {
        apply_normalisation(q, self)
    }
}

fn finite_values(calibration_qs: &[f64]) -> Result<()> {
    if calibration_qs.is_empty() {
        return Err(Error::EmptyInput("calibration scores"));
    }
    if calibration_qs.iter().any(|q| !q.is_finite()) {
        return Err(Error::Domain("calibration scores must be finite".into()));
    }
    Ok(())
}

pub fn calibrate_minmax(calibration_qs: &[f64]) -> Result<BinBoundaries> {
    finite_values(calibration_qs)?;
    let min = calibration_qs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = calibration_qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Err(Error::DegenerateCalibration(min));
    }
    let range = max - min;
    let boundaries = (1..=BOUNDARY_COUNT)
        .map(|i| (min + (i as f64) * range / BIN_COUNT as f64).max(min.next_up()))
        .collect();
    Ok(BinBoundaries {
        calibration_function: CalibrationFunction::MinMax,
        boundaries,
    })
}

/// Quantile of sorted data at probability `p`, interpolating linearly between
/// order statistics at position `p * (n - 1)`.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    match sorted.get(lo + 1) {
        Some(&next) if frac > 0.0 => sorted[lo] + frac * (next - sorted[lo]),
        _ => sorted[lo],
    }
}

pub fn calibrate_proportional(calibration_qs: &[f64]) -> Result<BinBoundaries> {
    finite_values(calibration_qs)?;
    let mut sorted = calibration_qs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let boundaries = (1..=BOUNDARY_COUNT)
        .map(|i| quantile_sorted(&sorted, i as f64 / BIN_COUNT as f64))
        .collect();
    Ok(BinBoundaries {
        calibration_function: CalibrationFunction::Proportional,
        boundaries,
    })
}

pub fn calibrate(function: CalibrationFunction, calibration_qs: &[f64]) -> Result<BinBoundaries> {
    match function {
        CalibrationFunction::MinMax => calibrate_minmax(calibration_qs),
        CalibrationFunction::Proportional => calibrate_proportional(calibration_qs),
    }
}

/// Number of boundaries `<= q`, clamped to `[0, 100]`. Degenerate
/// boundaries (all equal, from a constant calibration set) carry no ordering
/// information and map every score to 0.
pub fn apply_normalisation(q: f64, b: &BinBoundaries) -> u8 {
    match (b.boundaries.first(), b.boundaries.last()) {
        (Some(first), Some(last)) if first == last => return 0,
        _ => {}
    }
    let n = b.boundaries.partition_point(|&x| x <= q);
    n.min(BOUNDARY_COUNT) as u8
}

/// Normalise every score of `algorithm` in `table` with `boundaries`.
pub fn normalise_algorithm(
    table: &QualityScoreTable,
    algorithm: &str,
    boundaries: &BinBoundaries,
    out: &mut QualityScoreTable,
) -> Result<()> {
    let scores = table
        .algorithm_scores(algorithm)
        .ok_or_else(|| Error::UnknownAlgorithm(algorithm.to_owned()))?;
    for (sample, &q) in scores {
        out.insert(sample.clone(), algorithm, f64::from(apply_normalisation(q, boundaries)))?;
    }
    Ok(())
}

/// Area between the raw and normalised step curves over the pAUC range,
/// relative to the raw curve's pAUC, in percent.
pub fn curve_divergence(raw: &EdcCurve, normalised: &EdcCurve, config: &PaucConfig) -> Result<f64> {
    let raw_area = pauc(raw, config);
    if raw_area == 0.0 {
        return Err(Error::UndefinedDivergence);
    }
    let between = curve::integrate_abs_difference(
        &raw.points,
        &normalised.points,
        config.discard_lower,
        config.discard_limit,
    );
    Ok(100.0 * between / raw_area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurvePoint;
    use crate::edc::ErrorMode;
    use crate::pauc::Interpolation;
    use crate::score_data::ComparisonKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn minmax_closed_form() {
        let b = calibrate_minmax(&[0.0, 101.0]).unwrap();
        assert_eq!(b.boundaries.len(), 100);
        assert_eq!(b.boundaries[0], 1.0);
        assert_eq!(b.boundaries[99], 100.0);
        for (i, &x) in b.boundaries.iter().enumerate() {
            assert_eq!(x, (i + 1) as f64);
        }
    }

    #[test]
    fn minmax_ignores_interior_values() {
        assert_eq!(
            calibrate_minmax(&[0.0, 101.0, 50.0]).unwrap(),
            calibrate_minmax(&[0.0, 101.0]).unwrap()
        );
    }

    #[test]
    fn minmax_degenerate() {
        assert!(matches!(
            calibrate_minmax(&[5.0, 5.0]),
            Err(Error::DegenerateCalibration(_))
        ));
        assert!(calibrate_minmax(&[]).is_err());
    }

    #[test]
    fn minmax_endpoints_map_to_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let v: Vec<f64> = (0..rng.random_range(2..50))
                .map(|_| rng.random_range(-10.0..10.0))
                .collect();
            let b = calibrate_minmax(&v).unwrap();
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(apply_normalisation(min, &b), 0);
            assert_eq!(apply_normalisation(max, &b), 100);
        }
    }

    #[test]
    fn apply_examples() {
        let b = calibrate_minmax(&[0.0, 101.0]).unwrap();
        assert_eq!(apply_normalisation(0.5, &b), 0);
        assert_eq!(apply_normalisation(-7.0, &b), 0);
        assert_eq!(apply_normalisation(1000.0, &b), 100);
        assert_eq!(apply_normalisation(50.5, &b), 50);
        assert_eq!(apply_normalisation(50.0, &b), 50);
    }

    #[test]
    fn proportional_one_value_per_bin() {
        let cal: Vec<f64> = (0..=100).map(f64::from).collect();
        let b = calibrate_proportional(&cal).unwrap();
        for k in 0..=100 {
            assert_eq!(apply_normalisation(k as f64, &b), k as u8, "value {k}");
        }
    }

    #[test]
    fn proportional_constant_calibration() {
        let b = calibrate_proportional(&[7.0; 101]).unwrap();
        assert!(b.boundaries.iter().all(|&x| x == 7.0));
        assert_eq!(apply_normalisation(7.0, &b), 0);
        assert_eq!(apply_normalisation(6.9, &b), 0);
        assert_eq!(apply_normalisation(1e9, &b), 0);
    }

    #[test]
    fn proportional_dense_near_max() {
        // 90% of calibration mass in [0.9, 1.0], 10% spread over [0, 0.9]
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut cal: Vec<f64> = (0..9000).map(|_| rng.random_range(0.9..1.0)).collect();
        cal.extend((0..1000).map(|_| rng.random_range(0.0..0.9)));
        let b = calibrate_proportional(&cal).unwrap();
        let below = b.boundaries.iter().filter(|&&x| x < 0.9).count();
        assert!(below <= 12, "{below} boundaries below 0.9");
        let m = calibrate_minmax(&cal).unwrap();
        let below_mm = m.boundaries.iter().filter(|&&x| x < 0.9).count();
        assert!(below_mm >= 85, "{below_mm}");
    }

    #[test]
    fn proportional_bins_are_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 101 * 200;
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let b = calibrate_proportional(&v).unwrap();
        let mut counts = [0usize; BIN_COUNT];
        for &q in &v {
            counts[apply_normalisation(q, &b) as usize] += 1;
        }
        let expected = n as f64 / 101.0;
        let tol = 2.0 * (n as f64).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() <= tol, "{c} vs {expected}");
        }
    }

    #[test]
    fn variants_build_calibration_sets() {
        let same = [1.0, 2.0];
        let other = [3.0];
        assert_eq!(
            CalibrationVariant::Same.calibration_scores(&same, &other),
            vec![1.0, 2.0]
        );
        assert_eq!(CalibrationVariant::Other.calibration_scores(&same, &other), vec![3.0]);
        assert_eq!(
            CalibrationVariant::Combined.calibration_scores(&same, &other),
            vec![1.0, 2.0, 3.0]
        );
    }

    fn constant(v: f64) -> EdcCurve {
        EdcCurve {
            kind: ComparisonKind::Mated,
            error_mode: ErrorMode::WithoutDiscarded,
            threshold: 0.0,
            starting_error: v,
            total_comparisons: 10,
            points: vec![CurvePoint::new(0.0, v), CurvePoint::new(0.5, v)],
        }
    }

    #[test]
    fn divergence_examples() {
        let cfg = PaucConfig::new(0.2, Interpolation::Stepwise).unwrap();
        assert_eq!(curve_divergence(&constant(0.05), &constant(0.05), &cfg).unwrap(), 0.0);
        let d = curve_divergence(&constant(0.05), &constant(0.06), &cfg).unwrap();
        assert!((d - 20.0).abs() < 1e-9, "{d}");
        // symmetric magnitude when the normalised curve lies below
        let d = curve_divergence(&constant(0.05), &constant(0.04), &cfg).unwrap();
        assert!((d - 20.0).abs() < 1e-9, "{d}");
        assert!(matches!(
            curve_divergence(&constant(0.0), &constant(0.06), &cfg),
            Err(Error::UndefinedDivergence)
        ));
    }
}
