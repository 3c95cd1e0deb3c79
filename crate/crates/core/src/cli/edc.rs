use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde_json::json;

use edc_eval::edc::{edc_from_order, random_baseline, DiscardOrder, ErrorMode};
use edc_eval::report::{CurveFile, CurveRecord, RunManifest};
use edc_eval::score_data::ComparisonKind;
use edc_eval::svg::{render_edc, PlotCurve};

use super::{
    load_comparisons, load_scores, of_kind, pairwise_all, select_algorithms, threshold_for, write_json, CmdResult,
    ErrorModeArg, Failure, Global, KindArg,
};

#[derive(Debug, Args)]
pub struct EdcArgs {
    /// Quality-score CSV (`sample_id,algorithm,quality_score`).
    #[arg(long)]
    scores: PathBuf,
    /// Comparison CSV (`sample_id_a,sample_id_b,comparison_score,kind`).
    #[arg(long)]
    comparisons: PathBuf,
    #[arg(long, value_enum, default_value = "mated")]
    kind: KindArg,
    /// Target starting error: FNMR for mated, FMR for non-mated curves.
    #[arg(long)]
    starting_error: f64,
    #[arg(long, value_enum, default_value = "without")]
    error_mode: ErrorModeArg,
    /// Comma-separated algorithm names; all algorithms when omitted.
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<String>,
    /// Also render the curves as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Right edge of the SVG plot.
    #[arg(long, default_value_t = 1.0)]
    plot_limit: f64,
}

fn y_label(kind: ComparisonKind) -> &'static str {
    match kind {
        ComparisonKind::Mated => "FNMR",
        ComparisonKind::Nonmated => "FMR",
    }
}

fn write_svg(
    path: &PathBuf,
    curves: &[CurveRecord],
    starting_error: f64,
    limit: f64,
    kind: ComparisonKind,
) -> CmdResult {
    let plots: Vec<PlotCurve<'_>> = curves
        .iter()
        .map(|c| PlotCurve {
            label: &c.algorithm,
            points: &c.points,
        })
        .collect();
    let text = render_edc(&plots, starting_error, limit, y_label(kind));
    std::fs::write(path, text).map_err(|e| Failure::at(path)(e.into()))
}

pub fn run_edc(args: EdcArgs, global: &Global) -> CmdResult {
    let out = global.out()?;
    let kind: ComparisonKind = args.kind.into();
    let mode: ErrorMode = args.error_mode.into();
    let table = load_scores(&args.scores)?;
    let all = load_comparisons(&args.comparisons)?;
    let set = of_kind(&all, kind, &args.comparisons)?;
    let algorithms = select_algorithms(&table, &args.algorithms)?;
    let pairwise = pairwise_all(&set, &table, &algorithms)?;
    let scores = set.scores();
    let th = threshold_for(kind, &scores, args.starting_error)?;

    let curves: Vec<CurveRecord> = pairwise
        .par_iter()
        .map(|(alg, qs)| {
            let order = DiscardOrder::new(qs)?;
            let curve = edc_from_order(&scores, kind, &order, th.threshold, mode)?;
            Ok(CurveRecord::new(alg, args.starting_error, curve))
        })
        .collect::<edc_eval::Result<_>>()?;

    let manifest = RunManifest::new(
        "edc",
        None,
        json!({
            "kind": kind,
            "starting_error_target": args.starting_error,
            "starting_error_achieved": th.achieved_starting_error,
            "threshold": th.threshold,
            "error_mode": mode,
            "algorithms": algorithms,
            "pairwise_quality": "minimum",
        }),
    )
    .with_input(&args.scores)?
    .with_input(&args.comparisons)?;
    write_json(
        out,
        &CurveFile {
            manifest,
            curves: curves.clone(),
        },
    )?;
    if let Some(svg) = &args.svg {
        write_svg(svg, &curves, th.achieved_starting_error, args.plot_limit, kind)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    comparisons: PathBuf,
    #[arg(long, value_enum, default_value = "mated")]
    kind: KindArg,
    #[arg(long)]
    starting_error: f64,
    /// Number of random quality-score draws.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_enum, default_value = "without")]
    error_mode: ErrorModeArg,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    plot_limit: f64,
}

pub fn run_baseline(args: BaselineArgs, global: &Global) -> CmdResult {
    let out = global.out()?;
    let kind: ComparisonKind = args.kind.into();
    let mode: ErrorMode = args.error_mode.into();
    let all = load_comparisons(&args.comparisons)?;
    let set = of_kind(&all, kind, &args.comparisons)?;
    let th = threshold_for(kind, &set.scores(), args.starting_error)?;
    let curve = random_baseline(&set, th.threshold, args.trials, global.seed, mode)?;
    let record = CurveRecord::new("random", args.starting_error, curve);

    let manifest = RunManifest::new(
        "baseline",
        Some(global.seed),
        json!({
            "kind": kind,
            "starting_error_target": args.starting_error,
            "starting_error_achieved": th.achieved_starting_error,
            "threshold": th.threshold,
            "error_mode": mode,
            "trials": args.trials,
            "quality_distribution": "uniform [0, 1)",
        }),
    )
    .with_input(&args.comparisons)?;
    let curves = vec![record];
    write_json(
        out,
        &CurveFile {
            manifest,
            curves: curves.clone(),
        },
    )?;
    if let Some(svg) = &args.svg {
        write_svg(svg, &curves, th.achieved_starting_error, args.plot_limit, kind)?;
    }
    Ok(())
}
