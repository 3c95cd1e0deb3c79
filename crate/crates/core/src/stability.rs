//! Ranking stability across grids of starting errors and pAUC discard limits.
//!
//! Every grid cell ranks the same algorithms by relative ranking (min-max
//! normalised pAUC). Divergence of a cell is `sum_i |p_i - r_i|` against either
//! the mean placement over all cells or a known expected placement; it is
//! reported unscaled, in `[0, n]`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edc::{
    edc_from_order, threshold_for_fmr, threshold_for_starting_error, DiscardOrder, ErrorMode, ThresholdResult,
};
use crate::error::{Error, Result};
use crate::pauc::{pauc, relative_ranks, Interpolation, PaucConfig};
use crate::score_data::ComparisonKind;

/// Decimal places grid values are snapped to after `lo + i * step`.
const GRID_DECIMALS: i32 = 12;

/// Inclusive range with a fixed step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl ValueRange {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        Self { lo, hi, step }
    }

    /// `round((hi - lo) / step) + 1` values generated from integer indices.
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::Config(format!("range step {} must be positive", self.step)));
        }
        if !(self.hi >= self.lo) {
            return Err(Error::Config(format!("range hi {} below lo {}", self.hi, self.lo)));
        }
        let count = ((self.hi - self.lo) / self.step).round() as usize + 1;
        let scale = 10f64.powi(GRID_DECIMALS);
        Ok((0..count)
            .map(|i| ((self.lo + i as f64 * self.step) * scale).round() / scale)
            .collect())
    }
}

/// One grid axis as written in a config file: an explicit list or a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridAxis {
    List(Vec<f64>),
    Range(ValueRange),
}

impl GridAxis {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            GridAxis::List(v) => Ok(v.clone()),
            GridAxis::Range(r) => r.values(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub starting_errors: Vec<f64>,
    pub pauc_limits: Vec<f64>,
}

impl GridConfig {
    pub fn new(starting_errors: Vec<f64>, pauc_limits: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            starting_errors,
            pauc_limits,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_axes(starting_errors: &GridAxis, pauc_limits: &GridAxis) -> Result<Self> {
        Self::new(starting_errors.values()?, pauc_limits.values()?)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, values) in [
            ("starting_errors", &self.starting_errors),
            ("pauc_limits", &self.pauc_limits),
        ] {
            if values.is_empty() {
                return Err(Error::Config(format!("{name} must not be empty")));
            }
            if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
                return Err(Error::Config(format!("{name} value {v} outside (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.starting_errors.len() * self.pauc_limits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub starting_error_target: f64,
    pub pauc_limit: f64,
}

/// Cartesian product, starting error outer and limit inner.
pub fn build_grid(config: &GridConfig) -> Result<Vec<GridCell>> {
    config.validate()?;
    Ok(config
        .starting_errors
        .iter()
        .flat_map(|&e| {
            config.pauc_limits.iter().map(move |&l| GridCell {
                starting_error_target: e,
                pauc_limit: l,
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub starting_error_target: f64,
    pub starting_error_achieved: f64,
    pub threshold: f64,
    pub pauc_limit: f64,
    /// Aligned with `RankingGrid::algorithms`.
    pub raw_paucs: Vec<f64>,
    /// Relative ranking placements, aligned with `RankingGrid::algorithms`.
    pub placements: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingGrid {
    pub algorithms: Vec<String>,
    pub cells: Vec<CellResult>,
}

impl RankingGrid {
    /// Build a grid from precomputed placements. Every row must have one
    /// placement per algorithm.
    pub fn from_placements(algorithms: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let cells = rows
            .into_iter()
            .map(|p| {
                if p.len() != algorithms.len() {
                    return Err(Error::LengthMismatch {
                        what: "placements vs algorithms",
                        left: p.len(),
                        right: algorithms.len(),
                    });
                }
                Ok(CellResult {
                    starting_error_target: f64::NAN,
                    starting_error_achieved: f64::NAN,
                    threshold: f64::NAN,
                    pauc_limit: f64::NAN,
                    raw_paucs: p.clone(),
                    placements: p,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { algorithms, cells })
    }
}

/// Inputs shared by every cell: the comparison scores of one kind and the
/// pairwise quality scores per algorithm.
pub struct GridData<'a> {
    pub scores: &'a [f64],
    pub kind: ComparisonKind,
    pub pairwise_qs: &'a [(String, Vec<f64>)],
    pub interpolation: Interpolation,
    pub error_mode: ErrorMode,
}

fn threshold_for(kind: ComparisonKind, scores: &[f64], target: f64) -> Result<ThresholdResult> {
    match kind {
        ComparisonKind::Mated => threshold_for_starting_error(scores, target),
        ComparisonKind::Nonmated => threshold_for_fmr(scores, target),
    }
}

/// Evaluate every cell. Curves are computed once per distinct starting error
/// target; results are ordered as `cells` regardless of scheduling.
pub fn evaluate_grid(data: &GridData<'_>, cells: &[GridCell]) -> Result<RankingGrid> {
    if data.pairwise_qs.is_empty() {
        return Err(Error::EmptyInput("algorithms"));
    }
    let orders: Vec<DiscardOrder> = data
        .pairwise_qs
        .par_iter()
        .map(|(_, qs)| {
            if qs.len() != data.scores.len() {
                return Err(Error::LengthMismatch {
                    what: "comparison scores vs pairwise quality scores",
                    left: data.scores.len(),
                    right: qs.len(),
                });
            }
            DiscardOrder::new(qs)
        })
        .collect::<Result<_>>()?;

    let mut targets: Vec<f64> = Vec::new();
    for c in cells {
        if !targets.contains(&c.starting_error_target) {
            targets.push(c.starting_error_target);
        }
    }

    // per target: threshold and raw pAUC per (limit, algorithm)
    type TargetResult = (ThresholdResult, HashMap<u64, Vec<f64>>);
    let per_target: Vec<TargetResult> = targets
        .par_iter()
        .map(|&target| {
            let th = threshold_for(data.kind, data.scores, target)?;
            let mut limits: Vec<f64> = cells
                .iter()
                .filter(|c| c.starting_error_target == target)
                .map(|c| c.pauc_limit)
                .collect();
            limits.dedup();
            let configs: Vec<PaucConfig> = limits
                .iter()
                .map(|&l| PaucConfig::new(l, data.interpolation))
                .collect::<Result<_>>()?;
            let mut paucs: HashMap<u64, Vec<f64>> = HashMap::new();
            for order in &orders {
                let curve = edc_from_order(data.scores, data.kind, order, th.threshold, data.error_mode)?;
                for cfg in &configs {
                    paucs
                        .entry(cfg.discard_limit.to_bits())
                        .or_default()
                        .push(pauc(&curve, cfg));
                }
            }
            Ok((th, paucs))
        })
        .collect::<Result<_>>()?;

    let cells = cells
        .iter()
        .map(|c| {
            let ti = targets
                .iter()
                .position(|&t| t == c.starting_error_target)
                .expect("target collected");
            let (th, paucs) = &per_target[ti];
            let raw = paucs[&c.pauc_limit.to_bits()].clone();
            CellResult {
                starting_error_target: c.starting_error_target,
                starting_error_achieved: th.achieved_starting_error,
                threshold: th.threshold,
                pauc_limit: c.pauc_limit,
                placements: relative_ranks(&raw),
                raw_paucs: raw,
            }
        })
        .collect();
    Ok(RankingGrid {
        algorithms: data.pairwise_qs.iter().map(|(n, _)| n.clone()).collect(),
        cells,
    })
}

/// Mean placement per algorithm over all cells.
pub fn mean_placements(grid: &RankingGrid) -> Vec<f64> {
    let n_cells = grid.cells.len() as f64;
    (0..grid.algorithms.len())
        .map(|i| grid.cells.iter().map(|c| c.placements[i]).sum::<f64>() / n_cells)
        .collect()
}

fn divergence_against(grid: &RankingGrid, reference: &[f64]) -> Vec<f64> {
    grid.cells
        .iter()
        .map(|c| c.placements.iter().zip(reference).map(|(p, r)| (p - r).abs()).sum())
        .collect()
}

/// Per-cell divergence from the mean ranking over all cells.
pub fn ranking_divergence_mean(grid: &RankingGrid) -> Vec<f64> {
    divergence_against(grid, &mean_placements(grid))
}

/// Per-cell divergence from known expected placements.
pub fn ranking_divergence_expected(grid: &RankingGrid, expected: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    let reference: Vec<f64> = grid
        .algorithms
        .iter()
        .map(|a| {
            let e = *expected
                .get(a)
                .ok_or_else(|| Error::Config(format!("no expected placement for algorithm `{a}`")))?;
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Domain(format!(
                    "expected placement {e} for `{a}` outside [0, 1]"
                )));
            }
            Ok(e)
        })
        .collect::<Result<_>>()?;
    Ok(divergence_against(grid, &reference))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementStat {
    pub algorithm: String,
    pub span: f64,
    pub best: f64,
    pub worst: f64,
    pub median: f64,
    pub mean: f64,
    pub std_dev: f64,
}

/// Statistics of scaled placements `1 + (n - 1) * p` per algorithm, where `n`
/// is the algorithm count. Standard deviation is the population form.
pub fn placement_stats(grid: &RankingGrid) -> Vec<PlacementStat> {
    let n = grid.algorithms.len() as f64;
    grid.algorithms
        .iter()
        .enumerate()
        .map(|(i, alg)| {
            let mut v: Vec<f64> = grid.cells.iter().map(|c| 1.0 + (n - 1.0) * c.placements[i]).collect();
            v.sort_by(f64::total_cmp);
            let m = v.len();
            let best = v[0];
            let worst = v[m - 1];
            let median = if m % 2 == 1 {
                v[m / 2]
            } else {
                (v[m / 2 - 1] + v[m / 2]) / 2.0
            };
            let mean = v.iter().sum::<f64>() / m as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64;
            PlacementStat {
                algorithm: alg.clone(),
                span: worst - best,
                best,
                worst,
                median,
                mean,
                std_dev: var.sqrt(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("A{i}")).collect()
    }

    #[test]
    fn ranges_have_exact_counts() {
        let e = ValueRange::new(0.01, 0.10, 0.01).values().unwrap();
        assert_eq!(e.len(), 10);
        assert_eq!(e[2], 0.03);
        assert_eq!(e[9], 0.1);
        let l = ValueRange::new(0.01, 0.20, 0.01).values().unwrap();
        assert_eq!(l.len(), 20);
        assert!(ValueRange::new(0.01, 0.2, 0.0).values().is_err());
        assert!(ValueRange::new(0.01, 0.2, -0.1).values().is_err());
    }

    #[test]
    fn grid_sizes() {
        let cfg = GridConfig::from_axes(
            &GridAxis::Range(ValueRange::new(0.01, 0.10, 0.01)),
            &GridAxis::Range(ValueRange::new(0.01, 0.20, 0.01)),
        )
        .unwrap();
        assert_eq!(build_grid(&cfg).unwrap().len(), 200);
        let cfg = GridConfig::from_axes(
            &GridAxis::List(vec![0.19, 0.31, 0.41, 0.50, 0.61, 0.70]),
            &GridAxis::Range(ValueRange::new(0.01, 0.30, 0.01)),
        )
        .unwrap();
        let grid = build_grid(&cfg).unwrap();
        assert_eq!(grid.len(), 180);
        assert_eq!(grid[0].starting_error_target, 0.19);
        assert_eq!(grid[1].starting_error_target, 0.19);
        assert_eq!(grid[1].pauc_limit, 0.02);
        assert_eq!(grid[30].starting_error_target, 0.31);
        let cfg = GridConfig::new(vec![0.05], vec![0.2]).unwrap();
        assert_eq!(build_grid(&cfg).unwrap().len(), 1);
        assert!(GridConfig::new(vec![], vec![0.2]).is_err());
        assert!(GridConfig::new(vec![1.0], vec![0.2]).is_err());
    }

    #[test]
    fn divergence_mean_examples() {
        let g = RankingGrid::from_placements(names(2), vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(ranking_divergence_mean(&g), vec![0.0, 0.0]);
        let g = RankingGrid::from_placements(names(2), vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(mean_placements(&g), vec![0.5, 0.5]);
        assert_eq!(ranking_divergence_mean(&g), vec![1.0, 1.0]);
        let g = RankingGrid::from_placements(names(3), vec![vec![0.0, 0.3, 1.0]]).unwrap();
        assert_eq!(ranking_divergence_mean(&g), vec![0.0]);
    }

    #[test]
    fn divergence_expected_examples() {
        let algs = names(5);
        let g = RankingGrid::from_placements(algs.clone(), vec![vec![0.0, 0.25, 0.5, 0.75, 1.0]]).unwrap();
        let same: BTreeMap<String, f64> = algs.iter().cloned().zip([0.0, 0.25, 0.5, 0.75, 1.0]).collect();
        assert_eq!(ranking_divergence_expected(&g, &same).unwrap(), vec![0.0]);
        let reversed: BTreeMap<String, f64> = algs.iter().cloned().zip([1.0, 0.75, 0.5, 0.25, 0.0]).collect();
        assert_eq!(ranking_divergence_expected(&g, &reversed).unwrap(), vec![3.0]);
        let mut missing = same.clone();
        missing.remove("A3");
        assert!(ranking_divergence_expected(&g, &missing).is_err());
    }

    #[test]
    fn stats_examples() {
        let g = RankingGrid::from_placements(names(5), vec![vec![0.0, 0.0, 0.0, 0.0, 0.0]; 4]).unwrap();
        let s = &placement_stats(&g)[0];
        assert_eq!((s.best, s.worst, s.mean, s.span, s.std_dev), (1.0, 1.0, 1.0, 0.0, 0.0));

        let rows = vec![
            vec![0.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0, 0.0],
        ];
        let g = RankingGrid::from_placements(names(5), rows).unwrap();
        let s = &placement_stats(&g)[0];
        assert_eq!(s.best, 1.0);
        assert_eq!(s.worst, 5.0);
        assert_eq!(s.span, 4.0);
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.std_dev, 2.0);
        assert_eq!(s.median, 3.0);
    }

    #[test]
    fn evaluate_small_grid() {
        // two algorithms: "good" orders errors first, "bad" orders them last
        let scores = [0.1, 0.2, 0.6, 0.7, 0.8, 0.9];
        let good = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let bad = vec![6.0, 5.0, 4.0, 3.0, 2.0, 1.0];
        let qs = vec![("good".to_string(), good), ("bad".to_string(), bad)];
        let data = GridData {
            scores: &scores,
            kind: ComparisonKind::Mated,
            pairwise_qs: &qs,
            interpolation: Interpolation::Stepwise,
            error_mode: ErrorMode::WithoutDiscarded,
        };
        let cfg = GridConfig::new(vec![0.2, 0.34], vec![0.2, 0.5]).unwrap();
        let grid = evaluate_grid(&data, &build_grid(&cfg).unwrap()).unwrap();
        assert_eq!(grid.cells.len(), 4);
        for c in &grid.cells {
            assert_eq!(c.placements, vec![0.0, 1.0]);
        }
        assert_eq!(grid.cells[0].starting_error_achieved, 1.0 / 6.0);
        assert_eq!(grid.cells[2].starting_error_achieved, 2.0 / 6.0);
        assert_eq!(ranking_divergence_mean(&grid), vec![0.0; 4]);
    }
}
