//! Error-versus-Discard Characteristic curves.
//!
//! Comparisons are discarded in increasing order of their pairwise quality
//! score, one tie group at a time, and the error of the remaining comparisons
//! is recorded after every step. Decision rules are fixed crate-wide:
//! a mated comparison is a false non-match iff `score < threshold`, a
//! non-mated comparison is a false match iff `score >= threshold`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{self, CurvePoint};
use crate::error::{Error, Result};
use crate::score_data::{ComparisonKind, ComparisonSet};

/// Denominator used for the error at each discard step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    /// Errors divided by the number of remaining comparisons.
    #[default]
    WithoutDiscarded,
    /// Errors divided by the total number of comparisons.
    WithDiscarded,
}

/// True when a comparison of `kind` with `score` is an error at `threshold`.
#[inline]
pub fn is_error(kind: ComparisonKind, score: f64, threshold: f64) -> bool {
    match kind {
        ComparisonKind::Mated => score < threshold,
        ComparisonKind::Nonmated => score >= threshold,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub threshold: f64,
    pub achieved_starting_error: f64,
}

fn sorted_finite(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("comparison scores"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Domain("comparison scores must be finite".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

fn check_rate(target: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Domain(format!("target rate {target} outside [0, 1]")));
    }
    Ok(())
}

/// Threshold realising the largest achievable FNMR not above `target`.
///
/// Achievable FNMRs are `k/n` where `k` counts mated scores strictly below a
/// distinct score value, plus 1 for a threshold above the maximum. The
/// returned threshold is the smallest score value realising the chosen FNMR.
pub fn threshold_for_starting_error(mated_scores: &[f64], target: f64) -> Result<ThresholdResult> {
    check_rate(target)?;
    let sorted = sorted_finite(mated_scores)?;
    let n = sorted.len() as f64;
    let max = *sorted.last().expect("non-empty");
    if target >= 1.0 {
        return Ok(ThresholdResult {
            threshold: max.next_up(),
            achieved_starting_error: 1.0,
        });
    }
    let mut best = ThresholdResult {
        threshold: sorted[0],
        achieved_starting_error: 0.0,
    };
    let mut i = 0;
    while i < sorted.len() {
        let fnmr = i as f64 / n;
        if fnmr > target {
            break;
        }
        best = ThresholdResult {
            threshold: sorted[i],
            achieved_starting_error: fnmr,
        };
        let v = sorted[i];
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
    }
    Ok(best)
}

/// Smallest threshold among the distinct non-mated score cut points whose FMR
/// (fraction of scores `>= threshold`) does not exceed `target`.
pub fn threshold_for_fmr(nonmated_scores: &[f64], target: f64) -> Result<ThresholdResult> {
    check_rate(target)?;
    let sorted = sorted_finite(nonmated_scores)?;
    Ok(fmr_cut_sorted(&sorted, target))
}

/// [`threshold_for_fmr`] on scores already sorted ascending and non-empty.
pub(crate) fn fmr_cut_sorted(sorted: &[f64], target: f64) -> ThresholdResult {
    let n = sorted.len();
    let fmr = |i: usize| (n - i) as f64 / n as f64;
    // smallest index whose upper tail is within target
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if fmr(mid) <= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut i = lo;
    if i > 0 && i < n && sorted[i - 1] == sorted[i] {
        let v = sorted[i];
        i += sorted[i..].partition_point(|&x| x <= v);
    }
    if i == n {
        return ThresholdResult {
            threshold: sorted[n - 1].next_up(),
            achieved_starting_error: 0.0,
        };
    }
    ThresholdResult {
        threshold: sorted[i],
        achieved_starting_error: fmr(i),
    }
}

/// Indices sorted by ascending pairwise quality score, partitioned into tie
/// groups. Reusable across thresholds for the same scores.
#[derive(Debug, Clone)]
pub struct DiscardOrder {
    order: Vec<usize>,
    /// Exclusive end offsets into `order` of each tie group.
    group_ends: Vec<usize>,
}

impl DiscardOrder {
    pub fn new(pairwise_qs: &[f64]) -> Result<Self> {
        if pairwise_qs.iter().any(|q| !q.is_finite()) {
            return Err(Error::Domain("pairwise quality scores must be finite".into()));
        }
        let mut order: Vec<usize> = (0..pairwise_qs.len()).collect();
        // stable sort keeps file order inside tie groups; groups are discarded whole anyway
        order.sort_by(|&a, &b| pairwise_qs[a].total_cmp(&pairwise_qs[b]));
        let mut group_ends = Vec::new();
        for k in 1..order.len() {
            if pairwise_qs[order[k]] != pairwise_qs[order[k - 1]] {
                group_ends.push(k);
            }
        }
        if !order.is_empty() {
            group_ends.push(order.len());
        }
        Ok(Self { order, group_ends })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Iterate tie groups from lowest to highest pairwise quality score.
    pub fn groups(&self) -> impl Iterator<Item = &[usize]> + '_ {
        let mut start = 0;
        self.group_ends.iter().map(move |&end| {
            let g = &self.order[start..end];
            start = end;
            g
        })
    }
}

/// Error-versus-discard step curve for one quality-assessment algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdcCurve {
    pub kind: ComparisonKind,
    pub error_mode: ErrorMode,
    pub threshold: f64,
    pub starting_error: f64,
    pub total_comparisons: usize,
    pub points: Vec<CurvePoint>,
}

impl EdcCurve {
    /// Stepwise error at discard fraction `x` in `[0, 1)`.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        curve_value_at(self, x)
    }
}

/// Compute an EDC from a single-kind comparison set.
pub fn compute_edc(
    comparisons: &ComparisonSet,
    pairwise_qs: &[f64],
    threshold: f64,
    mode: ErrorMode,
) -> Result<EdcCurve> {
    let kind = comparisons.uniform_kind()?;
    if comparisons.len() != pairwise_qs.len() {
        return Err(Error::LengthMismatch {
            what: "comparisons vs pairwise quality scores",
            left: comparisons.len(),
            right: pairwise_qs.len(),
        });
    }
    let scores = comparisons.scores();
    let order = DiscardOrder::new(pairwise_qs)?;
    edc_from_order(&scores, kind, &order, threshold, mode)
}

/// Compute an EDC from raw comparison scores and a precomputed discard order.
pub fn edc_from_order(
    scores: &[f64],
    kind: ComparisonKind,
    order: &DiscardOrder,
    threshold: f64,
    mode: ErrorMode,
) -> Result<EdcCurve> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("comparison set"));
    }
    if scores.len() != order.len() {
        return Err(Error::LengthMismatch {
            what: "comparison scores vs discard order",
            left: scores.len(),
            right: order.len(),
        });
    }
    let total = scores.len();
    let err = |i: usize| is_error(kind, scores[i], threshold);
    let mut errors = (0..total).filter(|&i| err(i)).count();
    let mut remaining = total;
    let ratio = |errors: usize, remaining: usize| match mode {
        ErrorMode::WithoutDiscarded => errors as f64 / remaining as f64,
        ErrorMode::WithDiscarded => errors as f64 / total as f64,
    };

    let starting_error = errors as f64 / total as f64;
    let mut points = vec![CurvePoint::new(0.0, starting_error)];
    for group in order.groups() {
        remaining -= group.len();
        if remaining == 0 {
            break;
        }
        errors -= group.iter().filter(|&&i| err(i)).count();
        let discarded = total - remaining;
        points.push(CurvePoint::new(
            discarded as f64 / total as f64,
            ratio(errors, remaining),
        ));
    }
    Ok(EdcCurve {
        kind,
        error_mode: mode,
        threshold,
        starting_error,
        total_comparisons: total,
        points,
    })
}

/// Stepwise curve value at `x`, which must lie in `[0, 1)`.
pub fn curve_value_at(curve: &EdcCurve, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("discard fraction {x} outside [0, 1)")));
    }
    curve::step_value_at(&curve.points, x).ok_or(Error::EmptyInput("curve points"))
}

/// The theoretical best error `max(0, starting_error - x)`.
pub fn theoretical_best_error(starting_error: f64, x: f64) -> f64 {
    (starting_error - x).max(0.0)
}

/// Pointwise mean of `n_trials` EDCs computed from i.i.d. uniform random
/// pairwise quality scores, evaluated on the union of all trial discard
/// fractions. Trial `t` draws from a ChaCha stream keyed by `(seed, t)`.
pub fn random_baseline(
    comparisons: &ComparisonSet,
    threshold: f64,
    n_trials: usize,
    seed: u64,
    mode: ErrorMode,
) -> Result<EdcCurve> {
    if n_trials == 0 {
        return Err(Error::Domain("n_trials must be at least 1".into()));
    }
    let kind = comparisons.uniform_kind()?;
    let scores = comparisons.scores();
    let n = scores.len();

    let curves: Vec<EdcCurve> = (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let qs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let order = DiscardOrder::new(&qs)?;
            edc_from_order(&scores, kind, &order, threshold, mode)
        })
        .collect::<Result<_>>()?;

    let mut xs: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.discard_fraction))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let points = xs
        .iter()
        .map(|&x| {
            let sum: f64 = curves
                .iter()
                .map(|c| curve::step_value_at(&c.points, x).expect("curves start at 0"))
                .sum();
            CurvePoint::new(x, sum / n_trials as f64)
        })
        .collect();
    Ok(EdcCurve {
        kind,
        error_mode: mode,
        threshold,
        starting_error: curves[0].starting_error,
        total_comparisons: n,
        points,
    })
}
