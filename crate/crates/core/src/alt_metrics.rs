//! Alternative discard-based evaluations: mean comparison score, d′ and
//! fixed-FMR curves, quality/score correlations, per-sample d′-style utility
//! and DET curves per quality threshold.
//!
//! All curves share the tie and step rules of [`crate::edc`]. Scores follow
//! the similarity convention, so d′ = (μ_mated − μ_nonmated) / sqrt(σ_m² + σ_n²)
//! with population standard deviations.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::CurvePoint;
use crate::edc::{fmr_cut_sorted, is_error, DiscardOrder};
use crate::error::{Error, Result};
use crate::score_data::{ComparisonKind, ComparisonSet, SampleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    MeanCs,
    DPrime,
    FnmrAtFixedFmr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarCurve {
    pub value_kind: ValueKind,
    pub total_comparisons: usize,
    pub points: Vec<CurvePoint>,
    /// Decision threshold per point, fixed-FMR curves only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    /// Achieved FMR per point, fixed-FMR curves only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved_fmr: Option<Vec<f64>>,
    /// Discard fraction of the first singular d′ step after the start, where
    /// the curve stops.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminated_at: Option<f64>,
}

impl ScalarCurve {
    fn new(value_kind: ValueKind, total_comparisons: usize, points: Vec<CurvePoint>) -> Self {
        Self {
            value_kind,
            total_comparisons,
            points,
            thresholds: None,
            achieved_fmr: None,
            terminated_at: None,
        }
    }
}

/// Running mean and second central moment.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        self.m2 / self.n as f64
    }
}

fn check_len(what: &'static str, left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { what, left, right });
    }
    Ok(())
}

/// Moments of the remaining comparisons after each discard step, computed by
/// adding groups from the highest quality down so that no value is ever
/// subtracted. Entry `g` describes the set left after discarding `g` groups.
fn suffix_moments(order: &DiscardOrder, scores: &[f64], is_mated: impl Fn(usize) -> bool) -> Vec<(Moments, Moments)> {
    let groups: Vec<&[usize]> = order.groups().collect();
    let mut out = vec![(Moments::default(), Moments::default()); groups.len() + 1];
    let mut acc = (Moments::default(), Moments::default());
    for (g, group) in groups.iter().enumerate().rev() {
        for &i in group.iter() {
            if is_mated(i) {
                acc.0.push(scores[i]);
            } else {
                acc.1.push(scores[i]);
            }
        }
        out[g] = acc;
    }
    out
}

fn group_sizes(order: &DiscardOrder) -> Vec<usize> {
    order.groups().map(<[usize]>::len).collect()
}

/// Mean comparison score of the remaining comparisons per discard step.
pub fn cs_dc(comparisons: &ComparisonSet, pairwise_qs: &[f64]) -> Result<ScalarCurve> {
    comparisons.uniform_kind()?;
    check_len(
        "comparisons vs pairwise quality scores",
        comparisons.len(),
        pairwise_qs.len(),
    )?;
    let scores = comparisons.scores();
    let order = DiscardOrder::new(pairwise_qs)?;
    let moments = suffix_moments(&order, &scores, |_| true);
    let total = scores.len();
    let mut discarded = 0;
    let mut points = Vec::new();
    for (g, size) in std::iter::once(0).chain(group_sizes(&order)).enumerate() {
        discarded += size;
        if discarded == total {
            break;
        }
        points.push(CurvePoint::new(discarded as f64 / total as f64, moments[g].0.mean));
    }
    Ok(ScalarCurve::new(ValueKind::MeanCs, total, points))
}

struct Joint {
    scores: Vec<f64>,
    n_mated: usize,
    order: DiscardOrder,
}

fn joint(mated: &ComparisonSet, nonmated: &ComparisonSet, mated_qs: &[f64], nonmated_qs: &[f64]) -> Result<Joint> {
    if mated.is_empty() {
        return Err(Error::EmptyInput("mated comparisons"));
    }
    if nonmated.is_empty() {
        return Err(Error::EmptyInput("non-mated comparisons"));
    }
    if mated.uniform_kind()? != ComparisonKind::Mated || nonmated.uniform_kind()? != ComparisonKind::Nonmated {
        return Err(Error::MixedKinds);
    }
    check_len(
        "mated comparisons vs pairwise quality scores",
        mated.len(),
        mated_qs.len(),
    )?;
    check_len(
        "non-mated comparisons vs pairwise quality scores",
        nonmated.len(),
        nonmated_qs.len(),
    )?;
    let mut scores = mated.scores();
    scores.extend(nonmated.scores());
    let qs: Vec<f64> = mated_qs.iter().chain(nonmated_qs).copied().collect();
    Ok(Joint {
        scores,
        n_mated: mated.len(),
        order: DiscardOrder::new(&qs)?,
    })
}

fn dprime(m: &Moments, n: &Moments) -> Option<f64> {
    let denom = (m.variance() + n.variance()).sqrt();
    (denom > 0.0).then(|| (m.mean - n.mean) / denom)
}

/// d′ of the remaining mated and non-mated comparisons, discarding jointly by
/// pairwise quality. The curve ends before either kind runs out, or at the
/// first singular step after the start (recorded in `terminated_at`).
pub fn dprime_dc(
    mated: &ComparisonSet,
    nonmated: &ComparisonSet,
    mated_qs: &[f64],
    nonmated_qs: &[f64],
) -> Result<ScalarCurve> {
    let j = joint(mated, nonmated, mated_qs, nonmated_qs)?;
    let moments = suffix_moments(&j.order, &j.scores, |i| i < j.n_mated);
    let total = j.scores.len();
    let mut curve = ScalarCurve::new(ValueKind::DPrime, total, Vec::new());
    let mut discarded = 0;
    for (g, size) in std::iter::once(0).chain(group_sizes(&j.order)).enumerate() {
        discarded += size;
        let (m, n) = &moments[g];
        if m.n == 0 || n.n == 0 {
            break;
        }
        let x = discarded as f64 / total as f64;
        match dprime(m, n) {
            Some(d) => curve.points.push(CurvePoint::new(x, d)),
            None if g == 0 => return Err(Error::SingularStep { discard_fraction: x }),
            None => {
                curve.terminated_at = Some(x);
                break;
            }
        }
    }
    Ok(curve)
}

fn remove_sorted(v: &mut Vec<f64>, x: f64) {
    let i = v.partition_point(|&y| y < x);
    debug_assert!(v[i] == x);
    v.remove(i);
}

/// FNMR of the remaining mated comparisons with the decision threshold
/// re-fixed after every joint discard step as the smallest non-mated cut
/// point whose FMR does not exceed `fmr_target`.
pub fn fc_edc(
    mated: &ComparisonSet,
    nonmated: &ComparisonSet,
    mated_qs: &[f64],
    nonmated_qs: &[f64],
    fmr_target: f64,
) -> Result<ScalarCurve> {
    if !(0.0..=1.0).contains(&fmr_target) {
        return Err(Error::Domain(format!("FMR target {fmr_target} outside [0, 1]")));
    }
    let j = joint(mated, nonmated, mated_qs, nonmated_qs)?;
    if j.scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Domain("comparison scores must be finite".into()));
    }
    let mut rem_m: Vec<f64> = j.scores[..j.n_mated].to_vec();
    let mut rem_n: Vec<f64> = j.scores[j.n_mated..].to_vec();
    rem_m.sort_by(f64::total_cmp);
    rem_n.sort_by(f64::total_cmp);

    let total = j.scores.len();
    let mut points = Vec::new();
    let mut thresholds = Vec::new();
    let mut achieved = Vec::new();
    let mut emit = |discarded: usize, rem_m: &[f64], rem_n: &[f64]| {
        let cut = fmr_cut_sorted(rem_n, fmr_target);
        let fnmr = rem_m.partition_point(|&s| s < cut.threshold) as f64 / rem_m.len() as f64;
        points.push(CurvePoint::new(discarded as f64 / total as f64, fnmr));
        thresholds.push(cut.threshold);
        achieved.push(cut.achieved_starting_error);
    };
    emit(0, &rem_m, &rem_n);
    let mut discarded = 0;
    for group in j.order.groups() {
        for &i in group {
            if i < j.n_mated {
                remove_sorted(&mut rem_m, j.scores[i]);
            } else {
                remove_sorted(&mut rem_n, j.scores[i]);
            }
        }
        discarded += group.len();
        if rem_m.is_empty() || rem_n.is_empty() {
            break;
        }
        emit(discarded, &rem_m, &rem_n);
    }
    let mut curve = ScalarCurve::new(ValueKind::FnmrAtFixedFmr, total, points);
    curve.thresholds = Some(thresholds);
    curve.achieved_fmr = Some(achieved);
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

/// Ranks starting at 1, ties sharing their mean rank.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, (&a, &b)) in x.iter().zip(y).enumerate() {
        let n = (i + 1) as f64;
        let dx = a - mx;
        let dy = b - my;
        mx += dx / n;
        my += dy / n;
        sxx += dx * (a - mx);
        syy += dy * (b - my);
        sxy += dx * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::UndefinedCorrelation("first input has zero variance"));
    }
    if syy == 0.0 {
        return Err(Error::UndefinedCorrelation("second input has zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson or Spearman correlation between two equally long inputs.
pub fn qs_cs_correlation(x: &[f64], y: &[f64], method: CorrelationMethod) -> Result<f64> {
    check_len("correlation inputs", x.len(), y.len())?;
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two values"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("correlation inputs must be finite".into()));
    }
    match method {
        CorrelationMethod::Pearson => pearson(x, y),
        CorrelationMethod::Spearman => pearson(&fractional_ranks(x), &fractional_ranks(y)),
    }
}

/// Pearson correlation between pairwise quality and a 0/1 proxy that is 1 for
/// comparisons that are not errors at `threshold`.
pub fn error_proxy_correlation(comparisons: &ComparisonSet, pairwise_qs: &[f64], threshold: f64) -> Result<f64> {
    let kind = comparisons.uniform_kind()?;
    check_len(
        "comparisons vs pairwise quality scores",
        comparisons.len(),
        pairwise_qs.len(),
    )?;
    let proxy: Vec<f64> = comparisons
        .iter()
        .map(|c| if is_error(kind, c.score, threshold) { 0.0 } else { 1.0 })
        .collect();
    if proxy.iter().all(|&p| p == proxy[0]) {
        return Err(Error::UndefinedCorrelation("error proxy is constant"));
    }
    qs_cs_correlation(pairwise_qs, &proxy, CorrelationMethod::Pearson)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmittedSample {
    pub sample: SampleId,
    pub reason: String,
}

/// Per-sample d′-style utility. A simple stand-in for richer utility
/// definitions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleUtilityReport {
    pub label: String,
    pub utilities: BTreeMap<SampleId, f64>,
    pub omitted: Vec<OmittedSample>,
}

/// d′ over the comparisons each sample takes part in.
pub fn sample_utility_scores(mated: &ComparisonSet, nonmated: &ComparisonSet) -> Result<SampleUtilityReport> {
    let mut acc: BTreeMap<SampleId, (Moments, Moments)> = BTreeMap::new();
    for (set, mated_kind) in [(mated, true), (nonmated, false)] {
        for c in set.iter() {
            if (c.kind == ComparisonKind::Mated) != mated_kind {
                return Err(Error::MixedKinds);
            }
            for s in [&c.sample_a, &c.sample_b] {
                let e = acc.entry(s.clone()).or_default();
                if mated_kind {
                    e.0.push(c.score);
                } else {
                    e.1.push(c.score);
                }
            }
        }
    }
    let mut report = SampleUtilityReport {
        label: "d′-style utility".into(),
        ..Default::default()
    };
    for (sample, (m, n)) in acc {
        let reason = if m.n == 0 {
            "no mated comparisons"
        } else if n.n == 0 {
            "no non-mated comparisons"
        } else if let Some(d) = dprime(&m, &n) {
            report.utilities.insert(sample, d);
            continue;
        } else {
            "zero combined variance"
        };
        report.omitted.push(OmittedSample {
            sample,
            reason: reason.into(),
        });
    }
    if !report.omitted.is_empty() {
        log::warn!("{} samples omitted from utility scores", report.omitted.len());
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetPoint {
    pub cs_threshold: f64,
    pub fmr: f64,
    pub fnmr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetCurve {
    pub qs_threshold: f64,
    pub mated_count: usize,
    pub nonmated_count: usize,
    pub points: Vec<DetPoint>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DetReport {
    pub curves: Vec<DetCurve>,
    pub skipped_qs_thresholds: Vec<f64>,
}

/// DET over every distinct comparison score of two sorted score lists.
pub fn det_points(mated_sorted: &[f64], nonmated_sorted: &[f64]) -> Vec<DetPoint> {
    let mut cuts: Vec<f64> = mated_sorted.iter().chain(nonmated_sorted).copied().collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (nm, nn) = (mated_sorted.len() as f64, nonmated_sorted.len() as f64);
    cuts.into_iter()
        .map(|t| DetPoint {
            cs_threshold: t,
            fmr: (nonmated_sorted.len() - nonmated_sorted.partition_point(|&s| s < t)) as f64 / nn,
            fnmr: mated_sorted.partition_point(|&s| s < t) as f64 / nm,
        })
        .collect()
}

/// For each quality threshold keep comparisons with pairwise quality at or
/// above it and emit the DET of what remains. Thresholds leaving either kind
/// empty are skipped and listed in the report.
pub fn det_vs_discard(
    mated: &ComparisonSet,
    nonmated: &ComparisonSet,
    mated_qs: &[f64],
    nonmated_qs: &[f64],
    qs_thresholds: &[f64],
) -> Result<DetReport> {
    check_len(
        "mated comparisons vs pairwise quality scores",
        mated.len(),
        mated_qs.len(),
    )?;
    check_len(
        "non-mated comparisons vs pairwise quality scores",
        nonmated.len(),
        nonmated_qs.len(),
    )?;
    if qs_thresholds.iter().any(|t| t.is_nan()) {
        return Err(Error::Domain("quality thresholds must not be NaN".into()));
    }
    let keep = |set: &ComparisonSet, qs: &[f64], t: f64| -> Vec<f64> {
        let mut v: Vec<f64> = set
            .iter()
            .zip(qs)
            .filter(|(_, &q)| q >= t)
            .map(|(c, _)| c.score)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let results: Vec<(f64, Option<DetCurve>)> = qs_thresholds
        .par_iter()
        .map(|&t| {
            let m = keep(mated, mated_qs, t);
            let n = keep(nonmated, nonmated_qs, t);
            if m.is_empty() || n.is_empty() {
                return (t, None);
            }
            let curve = DetCurve {
                qs_threshold: t,
                mated_count: m.len(),
                nonmated_count: n.len(),
                points: det_points(&m, &n),
            };
            (t, Some(curve))
        })
        .collect();
    let mut report = DetReport::default();
    for (t, c) in results {
        match c {
            Some(c) => report.curves.push(c),
            None => {
                log::warn!("quality threshold {t} leaves no mated or no non-mated comparisons, skipped");
                report.skipped_qs_thresholds.push(t);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edc::tests::comparisons;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn xy(c: &ScalarCurve) -> Vec<(f64, f64)> {
        c.points.iter().map(|p| (p.discard_fraction, p.value)).collect()
    }

    fn two_pass_pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        sxy / (sxx * syy).sqrt()
    }

    fn pop_dprime(m: &[f64], n: &[f64]) -> Option<f64> {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var = |v: &[f64]| {
            let mu = mean(v);
            v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / v.len() as f64
        };
        let d = (var(m) + var(n)).sqrt();
        (d > 0.0).then(|| (mean(m) - mean(n)) / d)
    }

    /// Remove the lowest-quality tie group, recompute from scratch, repeat.
    fn brute_force_joint<F>(scores: &[f64], mated: &[bool], qs: &[f64], mut eval: F) -> Vec<(f64, Option<f64>)>
    where
        F: FnMut(&[f64], &[f64]) -> Option<Option<f64>>,
    {
        let total = scores.len();
        let mut alive: Vec<usize> = (0..total).collect();
        let mut out = Vec::new();
        loop {
            let m: Vec<f64> = alive.iter().filter(|&&i| mated[i]).map(|&i| scores[i]).collect();
            let n: Vec<f64> = alive.iter().filter(|&&i| !mated[i]).map(|&i| scores[i]).collect();
            match eval(&m, &n) {
                None => break,
                Some(v) => out.push(((total - alive.len()) as f64 / total as f64, v)),
            }
            let low = alive.iter().map(|&i| qs[i]).fold(f64::INFINITY, f64::min);
            alive.retain(|&i| qs[i] != low);
        }
        out
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let nm = rng.random_range(1..=5);
        let nn = rng.random_range(1..=5);
        let mut draw = |n: usize, levels: u32| -> Vec<f64> {
            (0..n)
                .map(|_| rng.random_range(0..levels) as f64 / levels as f64)
                .collect()
        };
        (draw(nm, 6), draw(nn, 6), draw(nm, 4), draw(nn, 4))
    }

    #[test]
    fn cs_dc_examples() {
        let c = cs_dc(&comparisons(ComparisonKind::Mated, &[0.2, 0.4]), &[1.0, 2.0]).unwrap();
        assert_eq!(xy(&c), vec![(0.0, 0.30000000000000004), (0.5, 0.4)]);
        let c = cs_dc(&comparisons(ComparisonKind::Mated, &[0.7; 4]), &[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert!(c.points.iter().all(|p| p.value == 0.7));
        let c = cs_dc(&comparisons(ComparisonKind::Nonmated, &[0.3]), &[1.0]).unwrap();
        assert_eq!(xy(&c), vec![(0.0, 0.3)]);
    }

    #[test]
    fn dprime_examples() {
        let m = comparisons(ComparisonKind::Mated, &[0.8, 0.9]);
        let n = comparisons(ComparisonKind::Nonmated, &[0.1, 0.2]);
        let c = dprime_dc(&m, &n, &[1.0; 2], &[1.0; 2]).unwrap();
        assert_eq!(c.points.len(), 1);
        assert!((c.points[0].value - 9.899494936611665).abs() < 1e-9);

        let m = comparisons(ComparisonKind::Mated, &[0.4, 0.6]);
        let n = comparisons(ComparisonKind::Nonmated, &[0.3, 0.7]);
        let c = dprime_dc(&m, &n, &[1.0; 2], &[1.0; 2]).unwrap();
        assert!(c.points[0].value.abs() < 1e-12);

        let m = comparisons(ComparisonKind::Mated, &[1.0, 1.0]);
        let n = comparisons(ComparisonKind::Nonmated, &[0.0, 0.0]);
        assert!(matches!(
            dprime_dc(&m, &n, &[1.0; 2], &[1.0; 2]),
            Err(Error::SingularStep { discard_fraction }) if discard_fraction == 0.0
        ));
    }

    #[test]
    fn dprime_stops_at_later_singular_step() {
        let m = comparisons(ComparisonKind::Mated, &[0.5, 0.9]);
        let n = comparisons(ComparisonKind::Nonmated, &[0.1, 0.3]);
        // discarding 0.5 and 0.3 first leaves {0.9} vs {0.1}: zero variance
        let c = dprime_dc(&m, &n, &[1.0, 2.0], &[2.0, 1.0]).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.terminated_at, Some(0.5));
    }

    #[test]
    fn fc_edc_example() {
        let m = comparisons(ComparisonKind::Mated, &[0.35, 0.5]);
        let n = comparisons(ComparisonKind::Nonmated, &[0.1, 0.2, 0.3, 0.4]);
        let c = fc_edc(&m, &n, &[1.0; 2], &[1.0; 4], 0.25).unwrap();
        assert_eq!(c.thresholds.as_ref().unwrap()[0], 0.4);
        assert_eq!(c.points[0].value, 0.5);
        let c = fc_edc(&m, &n, &[1.0; 2], &[1.0; 4], 1.0).unwrap();
        assert_eq!(c.thresholds.as_ref().unwrap()[0], 0.1);
        assert_eq!(c.points[0].value, 0.0);
        let c = fc_edc(&m, &n, &[1.0; 2], &[1.0; 4], 0.0).unwrap();
        assert!(c.thresholds.as_ref().unwrap()[0] > 0.4);
        assert_eq!(c.points[0].value, 0.5);
        assert!(fc_edc(&m, &n, &[1.0; 2], &[1.0; 4], 1.5).is_err());
    }

    #[test]
    fn joint_curves_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..400 {
            let (ms, ns, mq, nq) = random_instance(&mut rng);
            let m = comparisons(ComparisonKind::Mated, &ms);
            let n = comparisons(ComparisonKind::Nonmated, &ns);
            let scores: Vec<f64> = ms.iter().chain(&ns).copied().collect();
            let kinds: Vec<bool> = (0..scores.len()).map(|i| i < ms.len()).collect();
            let qs: Vec<f64> = mq.iter().chain(&nq).copied().collect();

            // d′
            let oracle = brute_force_joint(&scores, &kinds, &qs, |m, n| {
                (!m.is_empty() && !n.is_empty()).then(|| pop_dprime(m, n))
            });
            match dprime_dc(&m, &n, &mq, &nq) {
                Err(Error::SingularStep { .. }) => assert_eq!(oracle[0].1, None),
                Ok(c) => {
                    let expect: Vec<_> = oracle.iter().take_while(|p| p.1.is_some()).collect();
                    assert_eq!(c.points.len(), expect.len());
                    for (p, e) in c.points.iter().zip(&expect) {
                        assert_eq!(p.discard_fraction, e.0);
                        assert!((p.value - e.1.unwrap()).abs() < 1e-9);
                    }
                    assert_eq!(c.terminated_at, oracle.get(expect.len()).map(|p| p.0));
                }
                Err(e) => panic!("{e}"),
            }

            // fixed FMR
            let target = rng.random_range(0..=4) as f64 / 4.0;
            let oracle = brute_force_joint(&scores, &kinds, &qs, |m, n| {
                if m.is_empty() || n.is_empty() {
                    return None;
                }
                let mut cuts: Vec<f64> = n.to_vec();
                cuts.sort_by(f64::total_cmp);
                cuts.push(cuts.last().unwrap().next_up());
                let fmr = |t: f64| n.iter().filter(|&&s| s >= t).count() as f64 / n.len() as f64;
                let t = cuts.into_iter().find(|&t| fmr(t) <= target).unwrap();
                Some(Some(m.iter().filter(|&&s| s < t).count() as f64 / m.len() as f64))
            });
            let c = fc_edc(&m, &n, &mq, &nq, target).unwrap();
            assert_eq!(c.points.len(), oracle.len());
            for (p, e) in c.points.iter().zip(&oracle) {
                assert_eq!((p.discard_fraction, p.value), (e.0, e.1.unwrap()));
            }
        }
    }

    #[test]
    fn cs_dc_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let n = rng.random_range(1..=10);
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let qs: Vec<f64> = (0..n).map(|_| rng.random_range(0..4) as f64).collect();
            let c = cs_dc(&comparisons(ComparisonKind::Mated, &scores), &qs).unwrap();
            let kinds = vec![true; n];
            let oracle = brute_force_joint(&scores, &kinds, &qs, |m, _| {
                (!m.is_empty()).then(|| Some(m.iter().sum::<f64>() / m.len() as f64))
            });
            assert_eq!(c.points.len(), oracle.len());
            for (p, e) in c.points.iter().zip(&oracle) {
                assert_eq!(p.discard_fraction, e.0);
                assert!((p.value - e.1.unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn correlation_examples() {
        use CorrelationMethod::*;
        assert!((qs_cs_correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], Pearson).unwrap() - 1.0).abs() < 1e-15);
        assert!((qs_cs_correlation(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0], Pearson).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            qs_cs_correlation(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0], Pearson),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(qs_cs_correlation(&[1.0], &[2.0], Spearman).is_err());
        assert_eq!(fractional_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn proxy_correlation_examples() {
        let set = comparisons(ComparisonKind::Mated, &[0.1, 0.2, 0.6, 0.7]);
        let r = error_proxy_correlation(&set, &[1.0, 2.0, 3.0, 4.0], 0.5).unwrap();
        assert!((r - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        let r = error_proxy_correlation(&set, &[4.0, 3.0, 2.0, 1.0], 0.5).unwrap();
        assert!(r < 0.0);
        assert!(error_proxy_correlation(&set, &[1.0, 2.0, 3.0, 4.0], 0.0).is_err());
    }

    #[test]
    fn sample_utility_examples() {
        use crate::score_data::Comparison;
        let c = |a: &str, b: &str, s: f64, k| {
            Comparison::new(SampleId::new(a).unwrap(), SampleId::new(b).unwrap(), s, k).unwrap()
        };
        let mated = ComparisonSet::new(vec![
            c("x", "m1", 0.8, ComparisonKind::Mated),
            c("x", "m2", 0.9, ComparisonKind::Mated),
        ]);
        let nonmated = ComparisonSet::new(vec![
            c("x", "n1", 0.1, ComparisonKind::Nonmated),
            c("x", "n2", 0.2, ComparisonKind::Nonmated),
        ]);
        let r = sample_utility_scores(&mated, &nonmated).unwrap();
        assert!((r.utilities["x"] - 9.899494936611665).abs() < 1e-9);
        // each partner has only one kind
        assert_eq!(r.omitted.len(), 4);

        let mated = ComparisonSet::new(vec![c("y", "a", 0.8, ComparisonKind::Mated)]);
        let nonmated = ComparisonSet::new(vec![c("y", "b", 0.1, ComparisonKind::Nonmated)]);
        let r = sample_utility_scores(&mated, &nonmated).unwrap();
        assert!(r.utilities.is_empty());
        assert!(r
            .omitted
            .iter()
            .any(|o| o.sample.as_str() == "y" && o.reason == "zero combined variance"));
    }

    #[test]
    fn det_examples() {
        let m = comparisons(ComparisonKind::Mated, &[0.2, 0.6]);
        let n = comparisons(ComparisonKind::Nonmated, &[0.4, 0.8]);
        let r = det_vs_discard(&m, &n, &[1.0, 2.0], &[1.0, 2.0], &[f64::NEG_INFINITY, 0.0, 5.0]).unwrap();
        assert_eq!(r.curves.len(), 2);
        assert_eq!(r.skipped_qs_thresholds, vec![5.0]);
        let full = &r.curves[0];
        assert_eq!(full.points, r.curves[1].points);
        let p = full.points.iter().find(|p| p.cs_threshold == 0.6).unwrap();
        assert_eq!((p.fmr, p.fnmr), (0.5, 0.5));
        assert_eq!(full.points, det_points(&[0.2, 0.6], &[0.4, 0.8]));
        for w in full.points.windows(2) {
            assert!(w[1].fmr <= w[0].fmr);
        }
    }

    proptest! {
        #[test]
        fn pearson_matches_two_pass(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..60)) {
            let (x, y): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            let r = qs_cs_correlation(&x, &y, CorrelationMethod::Pearson).unwrap();
            prop_assert!((r - two_pass_pearson(&x, &y)).abs() < 1e-12);
        }

        #[test]
        fn spearman_invariant_under_monotone_maps(v in prop::collection::vec((-5i32..5, -5i32..5), 3..40)) {
            let x: Vec<f64> = v.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = v.iter().map(|p| p.1 as f64).collect();
            let base = qs_cs_correlation(&x, &y, CorrelationMethod::Spearman);
            let xt: Vec<f64> = x.iter().map(|a| a.exp()).collect();
            let yt: Vec<f64> = y.iter().map(|b| 3.0 * b.powi(3) + 1.0).collect();
            let moved = qs_cs_correlation(&xt, &yt, CorrelationMethod::Spearman);
            match (base, moved) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false),
            }
        }
    }
}
