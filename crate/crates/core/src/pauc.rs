//! Partial area under discard curves and algorithm rankings.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve::{self, CurvePoint};
use crate::edc::EdcCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Stepwise,
    Linear,
}

impl fmt::Display for Interpolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interpolation::Stepwise => "stepwise",
            Interpolation::Linear => "linear",
        })
    }
}

/// Discard fraction range and interpolation used for a pAUC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaucConfig {
    pub discard_lower: f64,
    pub discard_limit: f64,
    pub interpolation: Interpolation,
}

impl PaucConfig {
    /// Range `[0, limit]`.
    pub fn new(discard_limit: f64, interpolation: Interpolation) -> Result<Self> {
        Self::with_range(0.0, discard_limit, interpolation)
    }

    pub fn with_range(discard_lower: f64, discard_limit: f64, interpolation: Interpolation) -> Result<Self> {
        let cfg = Self {
            discard_lower,
            discard_limit,
            interpolation,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.discard_limit > 0.0 && self.discard_limit <= 1.0) {
            return Err(Error::Config(format!(
                "pAUC discard limit {} outside (0, 1]",
                self.discard_limit
            )));
        }
        if !(self.discard_lower >= 0.0 && self.discard_lower < self.discard_limit) {
            return Err(Error::Config(format!(
                "pAUC lower bound {} must lie in [0, {})",
                self.discard_lower, self.discard_limit
            )));
        }
        Ok(())
    }
}

/// Area under a discard curve's points over the configured range.
pub fn pauc_points(points: &[CurvePoint], config: &PaucConfig) -> f64 {
    match config.interpolation {
        Interpolation::Stepwise => curve::integrate_stepwise(points, config.discard_lower, config.discard_limit),
        Interpolation::Linear => curve::integrate_linear(points, config.discard_lower, config.discard_limit),
    }
}

/// Raw pAUC of an EDC curve.
pub fn pauc(curve: &EdcCurve, config: &PaucConfig) -> f64 {
    pauc_points(&curve.points, config)
}

/// Area under `max(0, starting_error - x)` on `[0, limit]`.
pub fn area_under_theoretical_best(starting_error: f64, limit: f64) -> f64 {
    if limit >= starting_error {
        starting_error * starting_error / 2.0
    } else {
        starting_error * limit - limit * limit / 2.0
    }
}

/// Area under the constant starting-error line on `[0, limit]`, which
/// approximates the mean curve of random quality scores.
pub fn upper_bound_pauc(starting_error: f64, limit: f64) -> f64 {
    starting_error * limit
}

/// How `adjusted_pauc` is derived from the raw pAUC. Rankings never depend on
/// the adjustment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adjustment {
    None,
    /// `raw - best`
    #[default]
    Best,
    /// `(raw - best) / (upper - best)`: 0 at the theoretical best, 1 at the
    /// random-score level.
    BestUpper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub algorithm: String,
    pub raw_pauc: f64,
    pub adjusted_pauc: f64,
    pub relative_rank: f64,
    pub discrete_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub starting_error: f64,
    pub discard_lower: f64,
    pub discard_limit: f64,
    pub interpolation: Interpolation,
    pub adjustment: Adjustment,
    pub area_under_theoretical_best: f64,
    pub upper_bound_pauc: f64,
    /// Entries ordered by discrete rank, ties by algorithm name.
    pub entries: Vec<RankingEntry>,
}

impl RankingReport {
    pub fn entry(&self, algorithm: &str) -> Option<&RankingEntry> {
        self.entries.iter().find(|e| e.algorithm == algorithm)
    }
}

/// Min-max normalised values: 0 for the minimum, 1 for the maximum; all 0
/// when every value is equal.
pub fn relative_ranks(values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    values
        .iter()
        .map(|&v| if span > 0.0 { (v - min) / span } else { 0.0 })
        .collect()
}

/// Competition ranks (1 = lowest value, ties share the smaller rank).
pub fn discrete_ranks(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|&v| 1 + values.iter().filter(|&&w| w < v).count())
        .collect()
}

/// Rank algorithms by raw pAUC (lower is better).
pub fn rank(
    paucs: &[(String, f64)],
    starting_error: f64,
    config: &PaucConfig,
    adjustment: Adjustment,
) -> Result<RankingReport> {
    if paucs.is_empty() {
        return Err(Error::EmptyInput("pAUC values"));
    }
    config.validate()?;
    if paucs.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::Domain("pAUC values must be finite".into()));
    }
    let width = config.discard_limit - config.discard_lower;
    let best = area_under_theoretical_best(starting_error, config.discard_limit)
        - area_under_theoretical_best(starting_error, config.discard_lower);
    let upper = upper_bound_pauc(starting_error, width);
    if adjustment == Adjustment::BestUpper && !(upper > best) {
        return Err(Error::Domain(format!(
            "upper-bound adjustment undefined for starting error {starting_error}"
        )));
    }

    let values: Vec<f64> = paucs.iter().map(|(_, v)| *v).collect();
    let relative = relative_ranks(&values);
    let discrete = discrete_ranks(&values);
    let mut entries: Vec<RankingEntry> = paucs
        .iter()
        .enumerate()
        .map(|(i, (name, raw))| RankingEntry {
            algorithm: name.clone(),
            raw_pauc: *raw,
            adjusted_pauc: match adjustment {
                Adjustment::None => *raw,
                Adjustment::Best => raw - best,
                Adjustment::BestUpper => (raw - best) / (upper - best),
            },
            relative_rank: relative[i],
            discrete_rank: discrete[i],
        })
        .collect();
    entries.sort_by(|a, b| {
        a.discrete_rank
            .cmp(&b.discrete_rank)
            .then_with(|| a.algorithm.cmp(&b.algorithm))
    });

    Ok(RankingReport {
        starting_error,
        discard_lower: config.discard_lower,
        discard_limit: config.discard_limit,
        interpolation: config.interpolation,
        adjustment,
        area_under_theoretical_best: best,
        upper_bound_pauc: upper,
        entries,
    })
}
