use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use edc_eval::edc::ErrorMode;
use edc_eval::pauc::Interpolation;
use edc_eval::report::RunManifest;
use edc_eval::score_data::ComparisonKind;
use edc_eval::stability::{
    build_grid, evaluate_grid, placement_stats, ranking_divergence_expected, ranking_divergence_mean, GridAxis,
    GridConfig, GridData, PlacementStat,
};
use edc_eval::Error;

use super::{
    load_comparisons, load_scores, of_kind, open, pairwise_all, select_algorithms, write_json, CmdResult, Failure,
    Global,
};

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// TOML grid configuration.
    #[arg(long)]
    grid_config: PathBuf,
    /// CSV `algorithm,expected_placement`; divergence is measured against it
    /// instead of the mean ranking.
    #[arg(long)]
    expected: Option<PathBuf>,
    /// Also write the placement statistics as CSV.
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

/// Grid configuration file. Relative data paths resolve against the file's
/// directory.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    scores: PathBuf,
    comparisons: PathBuf,
    #[serde(default = "mated")]
    kind: ComparisonKind,
    #[serde(default)]
    algorithms: Vec<String>,
    #[serde(default)]
    error_mode: ErrorMode,
    #[serde(default)]
    interpolation: Interpolation,
    starting_errors: GridAxis,
    pauc_limits: GridAxis,
}

fn mated() -> ComparisonKind {
    ComparisonKind::Mated
}

#[derive(Debug, Serialize)]
struct CellRecord {
    starting_error_target: f64,
    starting_error_achieved: f64,
    threshold: f64,
    pauc_limit: f64,
    placements: BTreeMap<String, f64>,
    raw_paucs: BTreeMap<String, f64>,
    divergence: f64,
}

#[derive(Debug, Serialize)]
struct StabilityFile {
    manifest: RunManifest,
    divergence_reference: &'static str,
    placement_scale: &'static str,
    algorithms: Vec<String>,
    cells: Vec<CellRecord>,
    placement_stats: Vec<PlacementStat>,
}

#[derive(Debug, Deserialize)]
struct ExpectedRow {
    algorithm: String,
    expected_placement: f64,
}

fn read_expected(path: &Path) -> CmdResult<BTreeMap<String, f64>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let mut out = BTreeMap::new();
    for (i, row) in reader.deserialize::<ExpectedRow>().enumerate() {
        let row = row.map_err(|e| {
            Failure::at(path)(Error::Parse {
                line: i as u64 + 2,
                message: e.to_string(),
            })
        })?;
        out.insert(row.algorithm, row.expected_placement);
    }
    Ok(out)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn write_stats_csv(path: &Path, stats: &[PlacementStat]) -> CmdResult {
    let io = |e: csv::Error| Failure::at(path)(Error::Io(e.into()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["algorithm", "best", "worst", "span", "median", "mean", "std_dev"])
        .map_err(io)?;
    for s in stats {
        let v = [s.best, s.worst, s.span, s.median, s.mean, s.std_dev].map(|x| x.to_string());
        w.write_record(std::iter::once(s.algorithm.as_str()).chain(v.iter().map(String::as_str)))
            .map_err(io)?;
    }
    w.flush().map_err(|e| Failure::at(path)(e.into()))
}

pub fn run(args: StabilityArgs, global: &Global) -> CmdResult {
    let out = global.out()?;
    let text = std::fs::read_to_string(&args.grid_config).map_err(|e| Failure::at(&args.grid_config)(e.into()))?;
    let file: GridFile =
        toml::from_str(&text).map_err(|e| Failure::at(&args.grid_config)(Error::Config(e.message().to_owned())))?;
    let config =
        GridConfig::from_axes(&file.starting_errors, &file.pauc_limits).map_err(Failure::at(&args.grid_config))?;
    let base = args.grid_config.parent().unwrap_or(Path::new("."));
    let scores_path = resolve(base, &file.scores);
    let comparisons_path = resolve(base, &file.comparisons);

    let table = load_scores(&scores_path)?;
    let all = load_comparisons(&comparisons_path)?;
    let set = of_kind(&all, file.kind, &comparisons_path)?;
    let algorithms = select_algorithms(&table, &file.algorithms)?;
    let expected = args.expected.as_deref().map(read_expected).transpose()?;
    if let Some(e) = &expected {
        if let Some(a) = algorithms.iter().find(|a| !e.contains_key(*a)) {
            return Err(Failure::validation(format!(
                "{}: no expected placement for algorithm `{a}`",
                args.expected.as_ref().expect("present").display()
            )));
        }
    }

    let pairwise = pairwise_all(&set, &table, &algorithms)?;
    let scores = set.scores();
    let data = GridData {
        scores: &scores,
        kind: file.kind,
        pairwise_qs: &pairwise,
        interpolation: file.interpolation,
        error_mode: file.error_mode,
    };
    let cells = build_grid(&config)?;
    log::info!(
        "evaluating {} grid cells for {} algorithms",
        cells.len(),
        algorithms.len()
    );
    let grid = evaluate_grid(&data, &cells)?;
    let (divergence, reference) = match &expected {
        Some(e) => (ranking_divergence_expected(&grid, e)?, "expected_placements"),
        None => (ranking_divergence_mean(&grid), "mean_ranking"),
    };
    let stats = placement_stats(&grid);

    let records = grid
        .cells
        .iter()
        .zip(&divergence)
        .map(|(c, &d)| CellRecord {
            starting_error_target: c.starting_error_target,
            starting_error_achieved: c.starting_error_achieved,
            threshold: c.threshold,
            pauc_limit: c.pauc_limit,
            placements: grid
                .algorithms
                .iter()
                .cloned()
                .zip(c.placements.iter().copied())
                .collect(),
            raw_paucs: grid
                .algorithms
                .iter()
                .cloned()
                .zip(c.raw_paucs.iter().copied())
                .collect(),
            divergence: d,
        })
        .collect();

    let mut manifest = RunManifest::new(
        "stability",
        None,
        json!({
            "kind": file.kind,
            "error_mode": file.error_mode,
            "interpolation": file.interpolation,
            "starting_errors": config.starting_errors,
            "pauc_limits": config.pauc_limits,
            "algorithms": algorithms,
            "divergence_scale": "unscaled sum over algorithms",
        }),
    )
    .with_input(&args.grid_config)?
    .with_input(&scores_path)?
    .with_input(&comparisons_path)?;
    if let Some(p) = &args.expected {
        manifest = manifest.with_input(p)?;
    }
    if let Some(p) = &args.stats_out {
        write_stats_csv(p, &stats)?;
    }
    write_json(
        out,
        &StabilityFile {
            manifest,
            divergence_reference: reference,
            placement_scale: "1 + (n - 1) * p",
            algorithms: grid.algorithms.clone(),
            cells: records,
            placement_stats: stats,
        },
    )
}
