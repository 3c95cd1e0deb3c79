use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use edc_eval::edc::{edc_from_order, DiscardOrder, ErrorMode};
use edc_eval::normalisation::{
    calibrate, curve_divergence, normalise_algorithm, BinBoundaries, CalibrationFunction, CalibrationVariant,
};
use edc_eval::pauc::{pauc, Interpolation, PaucConfig};
use edc_eval::report::RunManifest;
use edc_eval::score_data::{write_quality_scores, ComparisonKind, QualityScoreTable};
use edc_eval::Error;

use super::{
    load_comparisons, load_scores, of_kind, pairwise_all, select_algorithms, threshold_for, write_json, CmdResult,
    ErrorModeArg, Failure, Global, KindArg,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FunctionArg {
    Minmax,
    Proportional,
}

impl From<FunctionArg> for CalibrationFunction {
    fn from(f: FunctionArg) -> Self {
        match f {
            FunctionArg::Minmax => CalibrationFunction::MinMax,
            FunctionArg::Proportional => CalibrationFunction::Proportional,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Same,
    Other,
    Combined,
}

impl From<VariantArg> for CalibrationVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Same => CalibrationVariant::Same,
            VariantArg::Other => CalibrationVariant::Other,
            VariantArg::Combined => CalibrationVariant::Combined,
        }
    }
}

#[derive(Debug, Args)]
pub struct NormaliseArgs {
    /// Quality scores to normalise.
    #[arg(long)]
    scores: PathBuf,
    /// Calibration quality-score CSV for `other` and `combined`; repeat to
    /// pool several files.
    #[arg(long)]
    calibration: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "same")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "minmax")]
    function: FunctionArg,
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<String>,
}

#[derive(Debug, Serialize)]
struct CalibrationFile<'a> {
    manifest: RunManifest,
    variant: CalibrationVariant,
    calibration_function: CalibrationFunction,
    boundaries: BTreeMap<&'a str, &'a [f64]>,
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".calibration.json");
    PathBuf::from(name)
}

fn scores_of(table: &QualityScoreTable, alg: &str) -> Vec<f64> {
    table
        .algorithm_scores(alg)
        .map(|m| m.values().copied().collect())
        .unwrap_or_default()
}

pub fn run_normalise(args: NormaliseArgs, global: &Global) -> CmdResult {
    let out = global.out()?;
    let variant: CalibrationVariant = args.variant.into();
    let function: CalibrationFunction = args.function.into();
    let table = load_scores(&args.scores)?;
    let algorithms = select_algorithms(&table, &args.algorithms)?;
    let others = args
        .calibration
        .iter()
        .map(|p| load_scores(p))
        .collect::<CmdResult<Vec<_>>>()?;
    match variant {
        CalibrationVariant::Same if !others.is_empty() => {
            return Err(Failure::validation(
                "--calibration is only used with --variant other|combined",
            ));
        }
        CalibrationVariant::Other | CalibrationVariant::Combined if others.is_empty() => {
            return Err(Failure::validation(
                "--variant other|combined needs at least one --calibration file",
            ));
        }
        _ => {}
    }

    let mut boundaries: Vec<(String, BinBoundaries)> = Vec::new();
    let mut normalised = QualityScoreTable::new();
    for alg in &algorithms {
        let same = scores_of(&table, alg);
        let other: Vec<f64> = others.iter().flat_map(|t| scores_of(t, alg)).collect();
        if variant != CalibrationVariant::Same && other.is_empty() {
            return Err(Failure::validation(format!(
                "no calibration scores for algorithm `{alg}`"
            )));
        }
        let b = calibrate(function, &variant.calibration_scores(&same, &other))
            .map_err(|e| Failure::validation(format!("algorithm `{alg}`: {e}")))?;
        normalise_algorithm(&table, alg, &b, &mut normalised)?;
        boundaries.push((alg.clone(), b));
    }

    let file = File::create(out).map_err(|e| Failure::at(out)(e.into()))?;
    write_quality_scores(&normalised, BufWriter::new(file)).map_err(Failure::at(out))?;

    let mut manifest = RunManifest::new(
        "normalise",
        None,
        json!({
            "variant": variant,
            "calibration_function": function,
            "algorithms": algorithms,
            "bins": "left-closed, score maps to the number of boundaries <= it",
        }),
    )
    .with_input(&args.scores)?;
    for p in &args.calibration {
        manifest = manifest.with_input(p)?;
    }
    let record = CalibrationFile {
        manifest,
        variant,
        calibration_function: function,
        boundaries: boundaries
            .iter()
            .map(|(a, b)| (a.as_str(), b.boundaries.as_slice()))
            .collect(),
    };
    write_json(&sidecar(out), &record)
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    /// Raw quality scores.
    #[arg(long)]
    scores: PathBuf,
    /// Normalised quality scores written by `normalise`.
    #[arg(long)]
    normalised: PathBuf,
    #[arg(long)]
    comparisons: PathBuf,
    #[arg(long, value_enum, default_value = "mated")]
    kind: KindArg,
    #[arg(long)]
    starting_error: f64,
    #[arg(long)]
    pauc_limit: f64,
    #[arg(long, default_value_t = 0.0)]
    pauc_lower: f64,
    #[arg(long, value_enum, default_value = "without")]
    error_mode: ErrorModeArg,
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<String>,
}

#[derive(Debug, Serialize)]
struct DivergenceEntry {
    algorithm: String,
    raw_pauc: f64,
    normalised_pauc: f64,
    divergence_percent: f64,
}

#[derive(Debug, Serialize)]
struct DivergenceFile {
    manifest: RunManifest,
    entries: Vec<DivergenceEntry>,
}

pub fn run_divergence(args: DivergenceArgs, global: &Global) -> CmdResult {
    let out = global.out()?;
    let kind: ComparisonKind = args.kind.into();
    let mode: ErrorMode = args.error_mode.into();
    let config = PaucConfig::with_range(args.pauc_lower, args.pauc_limit, Interpolation::Stepwise)?;
    let raw = load_scores(&args.scores)?;
    let norm = load_scores(&args.normalised)?;
    let all = load_comparisons(&args.comparisons)?;
    let set = of_kind(&all, kind, &args.comparisons)?;
    let algorithms = select_algorithms(&raw, &args.algorithms)?;
    if let Some(a) = algorithms.iter().find(|a| !norm.has_algorithm(a)) {
        return Err(Failure::at(&args.normalised)(Error::UnknownAlgorithm(a.clone())));
    }
    let raw_qs = pairwise_all(&set, &raw, &algorithms)?;
    let norm_qs = pairwise_all(&set, &norm, &algorithms).map_err(|f| Failure {
        message: format!("{}: {}", args.normalised.display(), f.message),
        ..f
    })?;
    let scores = set.scores();
    let th = threshold_for(kind, &scores, args.starting_error)?;

    let entries = raw_qs
        .par_iter()
        .zip(&norm_qs)
        .map(|((alg, rq), (_, nq))| {
            let r = edc_from_order(&scores, kind, &DiscardOrder::new(rq)?, th.threshold, mode)?;
            let n = edc_from_order(&scores, kind, &DiscardOrder::new(nq)?, th.threshold, mode)?;
            Ok(DivergenceEntry {
                algorithm: alg.clone(),
                raw_pauc: pauc(&r, &config),
                normalised_pauc: pauc(&n, &config),
                divergence_percent: curve_divergence(&r, &n, &config)?,
            })
        })
        .collect::<edc_eval::Result<Vec<_>>>()?;

    let manifest = RunManifest::new(
        "divergence",
        None,
        json!({
            "kind": kind,
            "starting_error_target": args.starting_error,
            "starting_error_achieved": th.achieved_starting_error,
            "threshold": th.threshold,
            "error_mode": mode,
            "discard_lower": args.pauc_lower,
            "discard_limit": args.pauc_limit,
        }),
    )
    .with_input(&args.scores)?
    .with_input(&args.normalised)?
    .with_input(&args.comparisons)?;
    write_json(out, &DivergenceFile { manifest, entries })
}
